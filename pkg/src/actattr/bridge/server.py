"""Robot endpoint: serves environment primitives over TCP.

Each connection owns a fresh episode (World plus LocalEnv) built by the
world factory, so nothing leaks between sessions. Primitive failures come
back as ``CallResponse{ok: false}`` and the session carries on; anything
that breaks the protocol ends the session.

Two session-level calls exist next to the primitives: ``load_scene(scene,
noise)`` replaces the episode's world, and ``frame_meta()`` reports the
current frame. A hardware robot would slot in by serving an object with the
same ``call`` interface as LocalEnv.
"""

from __future__ import annotations

import logging
import socketserver
import threading
import time
from typing import Callable, Optional

from actattr.bridge import protocol as wire
from actattr.control.config import ControllerConfig
from actattr.errors import ActAttrError, BindFailure, ProtocolViolation, UnknownPrimitive
from actattr.lang.env import LocalEnv
from actattr.lang.primitives import ENV_PRIMITIVES
from actattr.lang.values import decode, encode
from actattr.sim.oracles import KnowledgeBase, NoiseProfile
from actattr.sim.world import World, world_from_dict

log = logging.getLogger(__name__)

SESSION_CALLS = ("load_scene", "frame_meta")


def empty_world() -> World:
    return World(objects=[])


class _Session:
    def __init__(self, server: "BridgeServer"):
        self.server = server
        self.env = LocalEnv(server.world_factory(), server.noise, server.kb, server.config)
        self.last_id = 0
        self.last_frame: Optional[int] = None

    def frame(self) -> dict:
        cam = self.env.world.robot.camera
        return wire.frame_meta(self.env.world.frame_id, cam.width, cam.height)

    def dispatch(self, name: str, args: list):
        if name == "load_scene":
            scene = args[0] if args else None
            if not isinstance(scene, dict):
                raise TypeError("load_scene needs a scene object")
            noise = NoiseProfile.from_dict(args[1]) if len(args) > 1 and args[1] else self.server.noise
            self.env = LocalEnv(world_from_dict(scene), noise, self.server.kb, self.server.config)
            self.last_frame = None
            return None, None
        if name == "frame_meta":
            return self.frame(), None
        if name not in ENV_PRIMITIVES:
            raise UnknownPrimitive(f"{name} is not served", token=name)
        value, note = self.env.call(name, decode(args))
        return encode(value), note

    def handle(self, msg: dict) -> list[dict]:
        if msg["type"] != "CallRequest":
            raise ProtocolViolation(f"unexpected {msg['type']} inside a session")
        if msg["id"] <= self.last_id:
            raise ProtocolViolation("request ids must strictly increase")
        self.last_id = msg["id"]
        if self.server.delay:
            time.sleep(self.server.delay)
        try:
            value, note = self.dispatch(msg["primitive"], msg["args"])
            reply = wire.call_ok(msg["id"], value, note)
        except (ActAttrError, TypeError, ValueError, KeyError, IndexError) as exc:
            kind = exc.kind if isinstance(exc, ActAttrError) else type(exc).__name__
            reply = wire.call_error(msg["id"], kind, str(exc))
        out = []
        if self.env.world.frame_id != self.last_frame:
            self.last_frame = self.env.world.frame_id
            out.append(self.frame())
        out.append(reply)
        return out


class _Handler(socketserver.StreamRequestHandler):
    server: "_TcpServer"
    disable_nagle_algorithm = True

    def handle(self):
        bridge = self.server.bridge
        if not bridge._acquire():
            self._send(wire.bye())
            return
        try:
            self._session(bridge)
        except (ProtocolViolation, OSError) as exc:
            log.info("session from %s aborted: %s", self.client_address, exc)
        except Exception:  # keep serving other sessions whatever happens here
            log.exception("session from %s crashed", self.client_address)
        finally:
            bridge._release()

    def _send(self, msg: dict):
        self.wfile.write(wire.encode_message(msg))
        self.wfile.flush()

    def _read(self) -> Optional[dict]:
        line = self.rfile.readline(wire.MAX_LINE + 1)
        if not line:
            return None
        if not line.endswith(b"\n"):
            raise ProtocolViolation("unterminated or oversized message")
        return wire.decode_message(line)

    def _session(self, bridge: "BridgeServer"):
        first = self._read()
        if first is None:
            return
        if first["type"] != "Hello" or first["protocol_version"] != wire.PROTOCOL_VERSION:
            self._send(wire.bye())
            raise ProtocolViolation("handshake failed")
        self._send(wire.hello())
        session = _Session(bridge)
        while True:
            msg = self._read()
            if msg is None or msg["type"] == "Bye":
                return
            for reply in session.handle(msg):
                self._send(reply)


class _TcpServer(socketserver.ThreadingTCPServer):
    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, address, bridge: "BridgeServer"):
        self.bridge = bridge
        super().__init__(address, _Handler)


class BridgeServer:
    """TCP server for primitive calls; one isolated episode per connection."""

    def __init__(
        self,
        host: str = "127.0.0.1",
        port: int = 0,
        world_factory: Callable[[], World] = empty_world,
        noise: Optional[NoiseProfile] = None,
        kb: Optional[KnowledgeBase] = None,
        config: Optional[ControllerConfig] = None,
        delay: float = 0.0,
        max_sessions: int = 8,
    ):
        self.world_factory = world_factory
        self.noise = noise or NoiseProfile()
        self.kb = kb or KnowledgeBase.bundled()
        self.config = config
        self.delay = delay
        self.max_sessions = max_sessions
        self._active = 0
        self._lock = threading.Lock()
        self._thread: Optional[threading.Thread] = None
        try:
            self._tcp = _TcpServer((host, port), self)
        except OSError as exc:
            raise BindFailure(f"cannot bind {host}:{port}: {exc}") from exc

    @property
    def address(self) -> tuple[str, int]:
        host, port = self._tcp.server_address[:2]
        return host, port

    @property
    def active_sessions(self) -> int:
        with self._lock:
            return self._active

    def _acquire(self) -> bool:
        with self._lock:
            if self._active >= self.max_sessions:
                return False
            self._active += 1
            return True

    def _release(self):
        with self._lock:
            self._active -= 1

    def serve_forever(self):
        self._tcp.serve_forever(poll_interval=0.1)

    def start(self) -> "BridgeServer":
        self._thread = threading.Thread(target=self.serve_forever, name="bridge-server", daemon=True)
        self._thread.start()
        return self

    def close(self):
        self._tcp.shutdown()
        self._tcp.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)

    def __enter__(self):
        return self.start()

    def __exit__(self, *exc):
        self.close()


def serve(bind_address: str, world_factory: Callable[[], World] = empty_world, **kwargs) -> None:
    """Serve until interrupted. ``bind_address`` is ``HOST:PORT``."""
    host, port = wire.parse_address(bind_address)
    server = BridgeServer(host, port, world_factory, **kwargs)
    log.info("bridge listening on %s:%d", *server.address)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server._tcp.server_close()

