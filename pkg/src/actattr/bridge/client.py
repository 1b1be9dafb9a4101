"""Client side of the bridge: an environment whose primitives run remotely.

``RemoteEnv`` offers the same ``call(name, args) -> (value, note)`` as
LocalEnv, so the interpreter runs unchanged over the wire. The client is
strictly single-flight: one request, then its response, then the next.
"""

from __future__ import annotations

import socket
import time
from typing import Optional

from actattr.bridge import protocol as wire
from actattr.errors import BridgeTimeout, EndpointUnreachable, ProtocolViolation, error_class
from actattr.lang.values import decode, encode

# transported kinds that are plain Python errors on the serving side
_BUILTIN_ERRORS = {"TypeError": TypeError, "ValueError": ValueError, "KeyError": KeyError, "IndexError": IndexError}


def remote_error(kind: str, detail: str = "") -> Exception:
    cls = _BUILTIN_ERRORS.get(kind) or error_class(kind)
    return cls(detail or kind)


class RemoteEnv:
    def __init__(self, host: str, port: int, timeout: float = 5.0, connect_timeout: Optional[float] = None):
        self.timeout = timeout
        self.next_id = 1
        self.in_flight = False
        self.frame: Optional[dict] = None
        self.latencies: list[float] = []
        try:
            self._sock = socket.create_connection((host, port), timeout=connect_timeout or timeout)
        except OSError as exc:
            raise EndpointUnreachable(f"cannot reach bridge at {host}:{port}: {exc}") from exc
        self._sock.settimeout(timeout)
        self._sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        self._rfile = self._sock.makefile("rb")
        self._closed = False
        self._send(wire.hello())
        reply = self._read()
        if reply["type"] != "Hello" or reply["protocol_version"] != wire.PROTOCOL_VERSION:
            self.close()
            raise ProtocolViolation(f"handshake refused: {reply}")

    @classmethod
    def connect(cls, address: str, timeout: float = 5.0) -> "RemoteEnv":
        host, port = wire.parse_address(address)
        return cls(host, port, timeout)

    # -- transport
    def _send(self, msg: dict):
        try:
            self._sock.sendall(wire.encode_message(msg))
        except OSError as exc:
            self._broken()
            raise EndpointUnreachable(f"bridge connection lost: {exc}") from exc

    def _read(self) -> dict:
        try:
            line = self._rfile.readline(wire.MAX_LINE + 1)
        except socket.timeout:
            self._broken()
            raise BridgeTimeout(f"no response within {self.timeout} s") from None
        except OSError as exc:
            self._broken()
            raise EndpointUnreachable(f"bridge connection lost: {exc}") from exc
        if not line:
            self._broken()
            raise EndpointUnreachable("bridge closed the connection")
        try:
            return wire.decode_message(line)
        except ProtocolViolation:
            self._broken()
            raise

    def _broken(self):
        # after a timeout a late reply would desynchronize ids, so the session is over
        self.close()

    # -- primitives
    def request(self, primitive: str, args: list):
        """One blocking round trip; returns the decoded value and the note."""
        if self._closed:
            raise EndpointUnreachable("session is closed")
        if self.in_flight:
            raise ProtocolViolation("a request is already in flight")
        msg_id = self.next_id
        self.next_id += 1
        self.in_flight = True
        start = time.perf_counter()
        try:
            self._send(wire.call_request(msg_id, primitive, encode(args)))
            while True:
                msg = self._read()
                if msg["type"] == "FrameMeta":
                    self.frame = msg
                    continue
                if msg["type"] != "CallResponse":
                    self._broken()
                    raise ProtocolViolation(f"expected CallResponse, got {msg['type']}")
                if msg["id"] != msg_id:
                    self._broken()
                    raise ProtocolViolation(f"response id {msg['id']} does not match request {msg_id}")
                break
        finally:
            self.in_flight = False
            self.latencies.append(time.perf_counter() - start)
        if not msg["ok"]:
            raise remote_error(msg["error"], msg.get("detail", ""))
        return decode(msg["value"]), msg.get("note")

    def call(self, name: str, args: list):
        return self.request(name, args)

    def load_scene(self, scene: dict, noise: Optional[dict] = None) -> None:
        self.request("load_scene", [scene, noise])

    def close(self):
        if self._closed:
            return
        self._closed = True
        try:
            self._sock.sendall(wire.encode_message(wire.bye()))
        except OSError:
            pass
        try:
            self._rfile.close()
            self._sock.close()
        except OSError:
            pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def remote_primitive(session: RemoteEnv, primitive: str, args: list):
    """Call one primitive through a live session and return its value."""
    value, _ = session.request(primitive, args)
    return value
