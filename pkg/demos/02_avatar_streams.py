"""
Sensor streams and the command executor
=======================================

The simulated robot publishes five telemetry feeds while executing
commands one at a time from a queue.  On the virtual clock the whole
session below takes milliseconds of wall time and is bit-for-bit
reproducible.
"""

from guidebot.avatar.simulator import AvatarSimulator
from guidebot.bus import Broker, InProcClient
from guidebot.clock import VirtualScheduler

sched = VirtualScheduler()
broker = Broker()
sim = AvatarSimulator(InProcClient(broker, "avatar", scheduler=sched), sched).start()
probe = InProcClient(broker, "probe", scheduler=sched)

# Tap the feeds.  Camera and joints tick at 10 Hz, sonar at 5 Hz,
# battery every 5 s; tactile fires on touch.
def show(tag):
    return lambda env: print(f"[{sched.now_ms():5d} ms] {tag:8s} {env.payload}")

probe.subscribe("avatar.nao.data.sonar", show("sonar"))
probe.subscribe("avatar.nao.data.battery", show("battery"))
probe.subscribe("avatar.nao.reply", show("reply"))

camera_frames = []
probe.subscribe("avatar.nao.data.camera", lambda env: camera_frames.append(env.payload))

# No visitor yet: the camera sees nothing, both sonar channels idle at max.
sched.run_until(400)
print(f"\ncamera with no visitor: {camera_frames[-1]}")

# Stand a visitor 20 degrees to the robot's left.  The face enters the
# frame and the sonar channels split (one side reads nearer).
sim.set_visitor_face(azimuth=20.0, elevation=0.0)
sched.run_until(800)
print(f"camera with a visitor: {camera_frames[-1]}\n")

# Commands are queued, validated, and answered exactly once each.
probe.publish("avatar.nao.command",
              {"id": "c-1", "method": "say", "args": {"text": "hello"}},
              kind="command")
probe.publish("avatar.nao.command",
              {"id": "c-2", "method": "moveTo",
               "args": {"x": 0.3, "y": 0.0, "theta": 0.0}},
              kind="command")
probe.publish("avatar.nao.command",
              {"id": "c-3", "method": "say", "args": {"text": 42}},  # rejected
              kind="command")
sched.run_until(5000)

snap = sim.snapshot()
print(f"\nfinal torso pose (x, y, heading): {snap['torso']}")
print(f"posture: {snap['posture']}  battery: {snap['battery']:.2f}%")
assert abs(snap["torso"][0] - 0.3) < 1e-6  # the walk lands exactly
sim.stop()
