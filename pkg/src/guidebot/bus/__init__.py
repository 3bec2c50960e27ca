"""Embeddable topic-routed message bus.

The broker implements the topic-exchange subset of AMQP-style routing:
dot-separated routing keys, binding patterns with `*` (exactly one word) and
`#` (zero or more words), fire-and-forget fan-out to every matching
subscription.  Transports: in-process (deterministic, for the virtual clock),
newline-delimited JSON over TCP, and a WebSocket gateway for browsers.
"""

from .keys import (
    BindingPattern,
    InvalidKey,
    InvalidPattern,
    RoutingKey,
    topic_match,
)
from .envelope import DecodeError, Envelope, decode_envelope, encode_envelope
from .broker import Broker, BrokerError
from .client import BusClient, InProcClient
from .tcp import TcpBusClient, TcpBusServer

__all__ = [
    "BindingPattern",
    "Broker",
    "BrokerError",
    "BusClient",
    "DecodeError",
    "Envelope",
    "InProcClient",
    "InvalidKey",
    "InvalidPattern",
    "RoutingKey",
    "TcpBusClient",
    "TcpBusServer",
    "decode_envelope",
    "encode_envelope",
    "topic_match",
]
