"""Malformed-traffic fuzzer for the bridge server.

Each message is either structurally broken (the server must drop the
session) or a well-formed request the server cannot satisfy (it must answer
with an error and keep the session). Either way the server has to keep
serving other clients.
"""

from __future__ import annotations

import json
import random
import socket
from collections import Counter

from actattr.bridge import protocol as wire

PRIMS = ["find", "go_to_object", "pick_up", "put_on", "measure_weight", "measure_distance",
         "focus_on_patch", "go_to_pose", "vqa", "llm_query", "get_pose", "load_scene", "frame_meta",
         "count", "nope", "", "__class__"]


def _junk_value(rng: random.Random, depth: int = 0):
    r = rng.random()
    if depth > 2 or r < 0.3:
        return rng.choice([None, True, -1, 0, 2**70, 1.5, "", "mug", "\u0000", "x" * 300])
    if r < 0.55:
        return [_junk_value(rng, depth + 1) for _ in range(rng.randint(0, 4))]
    if r < 0.75:
        return {"$patch": rng.choice([{}, {"bbox": [1, 2]}, {"bbox": [5, 5, 1, 1], "label": "a"}, None, 3])}
    return {rng.choice(["a", "$x", "bbox"]): _junk_value(rng, depth + 1)}


def malformed(rng: random.Random, next_id: int) -> tuple[bytes, bool]:
    """One message line and whether it is structurally valid (session survives)."""
    kind = rng.randrange(16)
    if kind == 0:
        return bytes(rng.randrange(256) for _ in range(rng.randint(1, 60))).replace(b"\n", b"") + b"\n", False
    if kind == 1:
        return rng.choice([b"{", b"[1,", b"nul", b'{"type":', b"}{", b"\xff\xfe\n"]).rstrip(b"\n") + b"\n", False
    if kind == 2:
        return json.dumps(rng.choice([1, [], "CallRequest", None, 2.5])).encode() + b"\n", False
    if kind == 3:
        return json.dumps({"type": rng.choice(["Nope", "", None, 7, "callrequest"]), "id": next_id}).encode() + b"\n", False
    if kind == 4:
        bad = {"id": rng.choice(["1", True, 1.5, None]), "primitive": rng.choice([3, None, ["find"]]),
               "args": rng.choice([{}, "x", None, 5])}
        msg = {"type": "CallRequest", "id": next_id, "primitive": "find", "args": []}
        field = rng.choice(list(bad))
        msg[field] = bad[field]
        return json.dumps(msg).encode() + b"\n", False
    if kind == 5:
        # ids must strictly increase
        return json.dumps(wire.call_request(rng.randint(-5, 0), "find", ["mug"])).encode() + b"\n", False
    if kind == 6:
        msg = rng.choice([wire.hello(), wire.call_ok(next_id, 1), wire.frame_meta(1, 2, 3),
                          {"type": "CallResponse", "id": next_id, "ok": False}])
        return json.dumps(msg).encode() + b"\n", False
    if kind == 7:
        return b"[" * rng.randint(2000, 20000) + b"\n", False
    if kind == 8:
        return b'{"type":"CallRequest","id":NaN,"primitive":"find","args":[]}\n', False
    if kind == 9:
        # no newline: the session ends when the client half-closes
        return json.dumps(wire.call_request(next_id, "find", ["mug"])).encode(), False
    # structurally valid requests with unusable primitives or arguments
    prim = rng.choice(PRIMS)
    args = [_junk_value(rng) for _ in range(rng.randint(0, 3))]
    return json.dumps(wire.call_request(next_id, prim, args)).encode() + b"\n", True


def fuzz_server(address: tuple[str, int], count: int, seed: int = 0, timeout: float = 5.0) -> Counter:
    """Send ``count`` fuzz messages, reconnecting whenever the server hangs up.

    Every line the server sends back must itself be a valid message.
    Returns counts of what happened.
    """
    rng = random.Random(seed)
    stats: Counter = Counter()
    sock = rfile = None
    next_id = 1

    def hang_up():
        nonlocal sock, rfile
        try:
            rfile.close()
            sock.close()
        except OSError:
            pass
        sock = rfile = None

    sent = 0
    while sent < count:
        if sock is None:
            sock = socket.create_connection(address, timeout=timeout)
            rfile = sock.makefile("rb")
            next_id = 1
            stats["connections"] += 1
            if rng.random() < 0.1:
                # garbage instead of a handshake
                line, _ = malformed(rng, next_id)
                sent += 1
                stats["pre_handshake"] += 1
                try:
                    sock.sendall(line)
                    sock.shutdown(socket.SHUT_WR)
                    reply = rfile.readline()
                    if reply:
                        # a stray Hello among the junk is a real handshake
                        assert wire.decode_message(reply)["type"] in ("Bye", "Hello")
                        assert rfile.readline() == b""
                except (ConnectionError, OSError):
                    pass
                hang_up()
                continue
            sock.sendall(wire.encode_message(wire.hello()))
            assert wire.decode_message(rfile.readline())["type"] == "Hello"
        line, valid = malformed(rng, next_id)
        sent += 1
        if valid:
            next_id += 1
        try:
            sock.sendall(line)
            if not line.endswith(b"\n"):
                sock.shutdown(socket.SHUT_WR)
            while True:
                reply = rfile.readline()
                if not reply:
                    stats["dropped"] += 1
                    assert not valid, f"server hung up on a well-formed request: {line[:200]!r}"
                    hang_up()
                    break
                msg = wire.decode_message(reply)
                if msg["type"] == "FrameMeta":
                    continue
                assert msg["type"] == "CallResponse" and valid
                stats["ok" if msg["ok"] else "call_error"] += 1
                break
        except (ConnectionResetError, BrokenPipeError):
            assert not valid
            stats["reset"] += 1
            hang_up()
    if sock is not None:
        hang_up()
    stats["sent"] = sent
    return stats
