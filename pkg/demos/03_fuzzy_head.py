"""
Fuzzy head tracking, open loop and closed loop
==============================================

The face tracker is a two-axis Mamdani controller: pixel coordinates of
the detected face go in, corrective head-joint deltas come out.  Three
Gaussian terms per variable, six rules, centroid defuzzification.
"""

from guidebot.fuzzy import HeadControllerConfig, flc_step

# Open loop: sweep a face across the image and print the correction the
# controller would command.  Negative yaw turns the head right.
cfg = HeadControllerConfig(deadband_px=0.0)

print("face x (px)   yaw delta (deg)")
for x in (0, 40, 80, 120, 160, 200, 240, 280, 320):
    dyaw, _ = flc_step(x, 120, cfg)
    bar = "#" * int(round(abs(dyaw)))
    print(f"   {x:3d}        {dyaw:+7.2f}  {bar}")

print("\nface y (px)   pitch delta (deg)")
for y in (0, 60, 120, 180, 240):
    _, dpitch = flc_step(160, y, cfg)
    print(f"   {y:3d}        {dpitch:+7.2f}")

# The center is a fixed point, and the response is antisymmetric.
assert flc_step(160, 120) == (0.0, 0.0)

# Closed loop: wire the controller to the simulated robot and watch the
# pixel error shrink tick by tick.  The tracker reads the camera and
# joints feeds and publishes setAngles commands; nothing here touches
# simulator internals.
import math

from guidebot.avatar.simulator import AvatarSimulator
from guidebot.bus import Broker, InProcClient
from guidebot.clock import VirtualScheduler
from guidebot.fuzzy import head_tracking_loop

sched = VirtualScheduler()
broker = Broker()
sim = AvatarSimulator(InProcClient(broker, "avatar", scheduler=sched), sched).start()
tracker = head_tracking_loop(InProcClient(broker, "head", scheduler=sched))

errors = []
probe = InProcClient(broker, "probe", scheduler=sched)
probe.subscribe(
    "avatar.nao.data.camera",
    lambda env: env.payload["face"] and errors.append(
        math.hypot(env.payload["face"]["x"] - 160,
                   env.payload["face"]["y"] - 120)))

sim.set_visitor_face(azimuth=-25.0, elevation=15.0)  # upper right corner
sched.run_until(2000)  # 20 camera ticks

print("\nclosed-loop pixel error by tick:")
for i, err in enumerate(errors, start=1):
    print(f"  tick {i:2d}: {err:6.1f} px  {'#' * int(err / 4)}")
print(f"\ncommands sent: {tracker.commands_sent}")
assert errors[-1] <= 10.0

tracker.stop()
sim.stop()
