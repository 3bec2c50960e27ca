"""Desk-scale social-robot platform.

A topic-routed message bus connects three live components: a simulated
humanoid avatar that streams sensor data and executes motion commands, a
Mamdani fuzzy-logic head controller that keeps the avatar facing a visitor,
and an event-driven finite-state-machine brain that runs the exhibition-guide
behavior.  A WebSocket gateway exposes the same traffic to a browser
dashboard, and a scenario harness replays scripted tours deterministically
under a virtual clock.
"""

__version__ = "0.1.0"
