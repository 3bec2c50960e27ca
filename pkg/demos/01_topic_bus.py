"""
Topic routing on the embeddable message bus
===========================================

A walk through the broker's addressing model: dot-separated routing keys,
`*` matching exactly one word, `#` matching any tail (including none).
Everything runs in this process; at the end the same traffic crosses a
real TCP socket.
"""

from guidebot.bus import Broker, InProcClient
from guidebot.clock import VirtualScheduler

sched = VirtualScheduler()
broker = Broker()
client = InProcClient(broker, "demo", scheduler=sched)

# Subscribe three observers with patterns of increasing appetite.
seen = {"exact": [], "one-word": [], "tail": []}
client.subscribe("avatar.nao.data.camera",
                 lambda env: seen["exact"].append(str(env.key)))
client.subscribe("avatar.nao.data.*",
                 lambda env: seen["one-word"].append(str(env.key)))
client.subscribe("avatar.#",
                 lambda env: seen["tail"].append(str(env.key)))

# Publish to a few addresses and watch who hears what.
for key in ("avatar.nao.data.camera",
            "avatar.nao.data.sonar",
            "avatar.nao.reply",
            "lumen.brain.state"):
    client.publish(key, {"demo": True})

for name, keys in seen.items():
    print(f"{name:9s} pattern heard {len(keys)}: {keys}")

# `*` will not stretch across dots, and `#` also matches the empty tail.
assert "avatar.nao.reply" not in seen["one-word"]
assert "lumen.brain.state" not in seen["tail"]

# The same envelopes travel over TCP: one JSON object per line, a hello
# first, then publishes.  Start a server on an ephemeral port and relay.
from guidebot.bus.tcp import TcpBusClient, TcpBusServer
from guidebot.clock import RealScheduler

server = TcpBusServer(Broker(), "127.0.0.1", 0).start()
addr = f"127.0.0.1:{server.port}"
print(f"\nTCP server on {addr}")

a = TcpBusClient(addr, "alice", scheduler=RealScheduler())
b = TcpBusClient(addr, "bob", scheduler=RealScheduler())

import threading
got = threading.Event()
b.subscribe("chat.*", lambda env: (print("bob got:", env.payload), got.set()))
import time
time.sleep(0.1)  # let the subscription land before publishing
a.publish("chat.hello", {"text": "over the wire"})
got.wait(2.0)

a.close(); b.close(); server.close()
print("done")
