"""Client-server split: primitives served over JSON lines on TCP."""

from actattr.bridge.client import RemoteEnv, remote_primitive
from actattr.bridge.episode import EpisodeResult, run_bridged_episode, run_episode
from actattr.bridge.protocol import PROTOCOL_VERSION, BridgeConfig
from actattr.bridge.server import BridgeServer, serve

__all__ = [
    "PROTOCOL_VERSION", "BridgeConfig", "BridgeServer", "EpisodeResult", "RemoteEnv", "remote_primitive",
    "run_bridged_episode", "run_episode", "serve",
]
