"""Mamdani fuzzy inference with Gaussian terms, plus the head controller.

The library half (`membership`, `system`) is a small, pure Mamdani pipeline:
Gaussian membership, min clipping, max aggregation, centroid defuzzification
on a uniform sample grid.  The applied half (`head`) instantiates it as the
face-centering controller: pixel error in, incremental head angles out.
"""

from .membership import GaussianTerm, gaussian_mf
from .system import (
    FuzzyRule,
    FuzzySystem,
    LinguisticVariable,
    SampledMembership,
    defuzzify_centroid,
    infer_mamdani,
)
from .head import (
    HeadController,
    HeadControllerConfig,
    HeadTracker,
    build_head_controller,
    flc_step,
    head_tracking_loop,
)

__all__ = [
    "FuzzyRule",
    "FuzzySystem",
    "GaussianTerm",
    "HeadController",
    "HeadControllerConfig",
    "HeadTracker",
    "LinguisticVariable",
    "SampledMembership",
    "build_head_controller",
    "defuzzify_centroid",
    "flc_step",
    "gaussian_mf",
    "head_tracking_loop",
    "infer_mamdani",
]
