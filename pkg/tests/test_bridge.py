from __future__ import annotations

import logging
import socket
import threading
import time

import pytest

from actattr.bridge import BridgeConfig, BridgeServer, RemoteEnv, run_bridged_episode, run_episode
from actattr.bridge import protocol as wire
from actattr.bridge.protocol import decode_message, encode_message, parse_address
from actattr.errors import BindFailure, BridgeTimeout, EndpointUnreachable, NotHolding, ProtocolViolation
from actattr.harness.suites import generate
from actattr.lang import LocalEnv
from actattr.sim.world import world_to_dict
from bridgefuzz import fuzz_server
from test_lang import FDC, weight_scene

WEIGHT_Q = "Out of the {feather, dog, car}, which one is the heaviest?"


def endpoint(server):
    return "%s:%d" % server.address


def wait_idle(server, timeout=2.0):
    end = time.monotonic() + timeout
    while server.active_sessions and time.monotonic() < end:
        time.sleep(0.01)
    return server.active_sessions == 0


# -- protocol --------------------------------------------------------------

@pytest.mark.parametrize("line", [
    b"not json\n",
    b"[1, 2]\n",
    b'{"type": "Nope"}\n',
    b'{"type": "CallRequest", "id": "1", "primitive": "find", "args": []}\n',
    b'{"type": "CallRequest", "id": true, "primitive": "find", "args": []}\n',
    b'{"type": "CallRequest", "id": 1, "primitive": "find", "args": {}}\n',
    b'{"type": "CallResponse", "id": 1, "ok": true}\n',
    b'{"type": "CallResponse", "id": 1, "ok": false}\n',
    b'{"type": "FrameMeta", "frame_id": 1, "width": 2}\n',
    b"\xff\xfe\n",
    b"[" * 100000 + b"\n",
])
def test_decode_rejects(line):
    with pytest.raises(ProtocolViolation):
        decode_message(line)


def test_encode_decode_round_trip():
    for msg in (wire.hello(), wire.call_request(3, "find", ["mug"]), wire.call_ok(3, [1, {"a": None}], {"n": 1}),
                wire.call_error(4, "NotHolding", "empty"), wire.frame_meta(2, 320, 240), wire.bye()):
        line = encode_message(msg)
        assert line.endswith(b"\n") and line.count(b"\n") == 1
        assert decode_message(line) == msg
    with pytest.raises(ValueError):
        encode_message(wire.call_ok(1, float("nan")))


def test_addresses_and_env_config(monkeypatch):
    assert parse_address("10.0.0.2:9000") == ("10.0.0.2", 9000)
    assert parse_address(":9000") == ("127.0.0.1", 9000)
    with pytest.raises(ValueError):
        parse_address("localhost")
    monkeypatch.setenv("ACTATTR_BIND", "0.0.0.0:7000")
    monkeypatch.setenv("ACTATTR_TIMEOUT", "2.5")
    assert BridgeConfig.from_env() == BridgeConfig("0.0.0.0", 7000, 2.5, 8)


def test_bind_failure():
    with BridgeServer() as server:
        with pytest.raises(BindFailure):
            BridgeServer(*server.address)


# -- sessions --------------------------------------------------------------

def test_remote_matches_local_primitives(bridge):
    world = weight_scene(FDC)
    with RemoteEnv(*bridge.address) as env:
        env.load_scene(world_to_dict(world))
        local = LocalEnv(weight_scene(FDC))
        assert env.call("find", ["dog"]) == local.call("find", ["dog"])
        assert env.call("get_pose", []) == local.call("get_pose", [])
        assert env.frame == {"type": "FrameMeta", "frame_id": 0, "width": 320, "height": 240}


def test_errors_cross_the_wire_and_session_continues(bridge):
    with RemoteEnv(*bridge.address) as env:
        env.load_scene(world_to_dict(weight_scene(FDC)))
        with pytest.raises(NotHolding):
            env.call("measure_weight", [])
        with pytest.raises(TypeError):
            env.call("load_scene", [])
        with pytest.raises(Exception) as info:
            env.call("no_such_thing", [])
        assert type(info.value).__name__ == "UnknownPrimitive"
        assert len(env.call("find", ["car"])[0]) == 1


def test_sessions_are_isolated():
    with BridgeServer(world_factory=lambda: weight_scene(FDC)) as server:
        with RemoteEnv(*server.address) as a:
            dog = a.call("find", ["dog"])[0][0]
            a.call("go_to_object", [dog])
            a.call("pick_up", [dog])
            assert a.call("measure_weight", [])[0] == 20.0
            with RemoteEnv(*server.address) as b:
                with pytest.raises(NotHolding):
                    b.call("measure_weight", [])
        # a reconnect starts from the factory world again
        with RemoteEnv(*server.address) as c:
            with pytest.raises(NotHolding):
                c.call("measure_weight", [])


def test_handshake_version_mismatch(bridge):
    with socket.create_connection(bridge.address, timeout=2) as s:
        s.sendall(encode_message({"type": "Hello", "protocol_version": "0"}))
        f = s.makefile("rb")
        assert decode_message(f.readline())["type"] == "Bye"
        assert f.readline() == b""


def test_max_sessions_says_bye():
    with BridgeServer(max_sessions=1) as server:
        first = RemoteEnv(*server.address)
        with pytest.raises(ProtocolViolation):
            RemoteEnv(*server.address)
        first.close()
        assert wait_idle(server)
        with RemoteEnv(*server.address) as again:
            assert again.call("get_pose", [])[0] == [0.0, 0.0, 0.0]


# -- misbehaving peers -----------------------------------------------------

class FakeServer:
    """One-connection server that answers the handshake and then ``behave(line, wfile)``."""

    def __init__(self, behave):
        self.sock = socket.socket()
        self.sock.bind(("127.0.0.1", 0))
        self.sock.listen(1)
        self.address = self.sock.getsockname()
        self.behave = behave
        threading.Thread(target=self.run, daemon=True).start()

    def run(self):
        conn, _ = self.sock.accept()
        with conn:
            f = conn.makefile("rwb")
            f.readline()
            f.write(encode_message(wire.hello()))
            f.flush()
            for line in iter(f.readline, b""):
                self.behave(decode_message(line), f)

    def close(self):
        self.sock.close()


def test_client_timeout():
    fake = FakeServer(lambda msg, f: None)
    env = RemoteEnv(*fake.address, timeout=0.3)
    start = time.monotonic()
    with pytest.raises(BridgeTimeout):
        env.call("get_pose", [])
    assert time.monotonic() - start < 2
    with pytest.raises(EndpointUnreachable):
        env.call("get_pose", [])
    fake.close()


def test_client_rejects_mismatched_id():
    def reply_wrong(msg, f):
        if msg["type"] != "CallRequest":
            return
        f.write(encode_message(wire.call_ok(msg["id"] + 1, None)))
        f.flush()

    fake = FakeServer(reply_wrong)
    env = RemoteEnv(*fake.address, timeout=2)
    with pytest.raises(ProtocolViolation):
        env.call("get_pose", [])
    fake.close()


def test_client_is_single_flight_locally(bridge):
    with RemoteEnv(*bridge.address) as env:
        env.in_flight = True
        with pytest.raises(ProtocolViolation):
            env.call("get_pose", [])


class CheckingProxy:
    """Relays one session and records any request sent before the previous reply."""

    def __init__(self, upstream):
        self.upstream = upstream
        self.sock = socket.socket()
        self.sock.bind(("127.0.0.1", 0))
        self.sock.listen(1)
        self.address = self.sock.getsockname()
        self.pending = 0
        self.overlaps = 0
        self.requests = 0
        self.lock = threading.Lock()
        threading.Thread(target=self.run, daemon=True).start()

    def run(self):
        client, _ = self.sock.accept()
        server = socket.create_connection(self.upstream)
        threading.Thread(target=self.pipe, args=(server, client, False), daemon=True).start()
        self.pipe(client, server, True)

    def pipe(self, src, dst, upstream):
        f = src.makefile("rb")
        for line in iter(f.readline, b""):
            msg = decode_message(line)
            with self.lock:
                if msg["type"] == "CallRequest":
                    self.requests += 1
                    self.overlaps += self.pending
                    self.pending += 1
                elif msg["type"] == "CallResponse":
                    self.pending -= 1
            dst.sendall(line)
        for s in (src, dst):
            try:
                s.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass


def test_single_flight_on_the_wire():
    with BridgeServer() as server:
        proxy = CheckingProxy(server.address)
        result = run_bridged_episode(WEIGHT_Q, "%s:%d" % proxy.address, world_to_dict(weight_scene(FDC)))
    assert result.answer == "car_2" and result.failed is None
    assert proxy.requests == result.latency["calls"] + 1  # plus load_scene
    assert proxy.overlaps == 0


def test_malformed_fuzz_sample(bridge, caplog):
    with caplog.at_level(logging.INFO, logger="actattr.bridge.server"):
        stats = fuzz_server(bridge.address, 600, seed=11)
    assert stats["sent"] == 600 and stats["call_error"] > 0 and stats["dropped"] > 0
    assert not [r for r in caplog.records if r.levelno >= logging.ERROR]
    assert wait_idle(bridge)
    result = run_bridged_episode(WEIGHT_Q, endpoint(bridge), world_to_dict(weight_scene(FDC)))
    assert result.answer == "car_2"


# -- episodes --------------------------------------------------------------

@pytest.mark.parametrize("family", ["weight", "distance", "location", "size"])
def test_bridged_equals_in_process(bridge, family):
    for ep in generate(family, 5, seed=21).episodes:
        local = run_episode(ep.query, LocalEnv(ep.world()))
        remote = run_bridged_episode(ep.query, endpoint(bridge), ep.scene)
        assert remote.answer == local.answer == ep.query.ground_truth
        assert remote.trace == local.trace


def test_latency_with_injected_delay():
    with BridgeServer(delay=0.1) as server:
        result = run_bridged_episode("the tallest bottle", endpoint(server),
                                     generate("size", 1, seed=2).episodes[0].scene)
    lat = result.latency
    assert lat["calls"] == 1
    assert 0.1 <= lat["mean_s"] < 0.15
    assert lat["wall_s"] >= lat["total_s"]


def test_bridged_episode_reports_unreachable_endpoint():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        port = s.getsockname()[1]
    result = run_bridged_episode(WEIGHT_Q, f"127.0.0.1:{port}", timeout=1.0)
    assert result.failed == "EndpointUnreachable" and result.answer is None
    assert run_bridged_episode(WEIGHT_Q, "nonsense").failed == "ValueError"
