from __future__ import annotations

import json
import math

import numpy as np
import pytest

from actattr.control.config import ControllerConfig, default_config, load_config
from actattr.control.pid import PidGains, PidState, pid_step
from actattr.control.robot import (
    EpisodeTrace,
    focus_on_patch,
    go_to_object,
    lateral_error,
    measure_distance,
    measure_weight,
    pick_up,
    put_on,
)
from actattr.control.tracker import track_patch
from actattr.control.tuning import LATERAL_KP, LONGITUDINAL_KP, score_gains, servo_trial
from actattr.errors import (
    AlreadyHolding,
    ConvergenceFailure,
    NotGraspable,
    NotHolding,
    TargetLost,
    TooFar,
)
from actattr.geometry import BoundingBox, ImagePatch
from actattr.sim.camera import project
from actattr.sim.oracles import distance_probe
from actattr.sim.world import Robot, SceneObject, World

FACING_Y = (0.0, 0.0, math.pi / 2)
CFG = default_config()


def obj(oid, x, y, e=0.1, mass=1.0, ez=None, graspable=True, name=None):
    ez = e if ez is None else ez
    return SceneObject(oid, name or oid, (x, y, ez), (e, e, ez), mass, graspable)


def world_of(*objects, pose=FACING_Y):
    return World(list(objects), Robot(pose=pose))


def patch_of(world, oid):
    return next(p for p in project(world) if p.object_id == oid)


def at_standoff(world, oid):
    """Drive to the object with the default controller and return the world."""
    go_to_object(world, patch_of(world, oid), CFG)
    return world


# -- pid -------------------------------------------------------------------

def test_pid_examples():
    assert pid_step(PidGains(kp=2.0), 0.0)[0] == 0.0
    assert pid_step(PidGains(kp=1.0), 3.0)[0] == 3.0
    for e in (-5.0, 0.3, 12.0):
        assert pid_step(PidGains(kp=2.0), e)[0] == pytest.approx(2 * pid_step(PidGains(kp=1.0), e)[0])


def test_pid_integral_clamp_and_derivative():
    g = PidGains(kp=1.0, ki=1.0, integral_clamp=0.5)
    state = PidState()
    for _ in range(100):
        cmd, state = pid_step(g, 10.0, state, dt=0.1)
    assert cmd == pytest.approx(10.0 + 0.5)
    d = PidGains(kp=1.0, kd=0.5)
    _, s = pid_step(d, 1.0, PidState(), 0.1)
    cmd, _ = pid_step(d, 2.0, s, 0.1)
    assert cmd == pytest.approx(2.0 + 0.5 * 10.0)


@pytest.mark.parametrize("kw", [{"kp": 0}, {"kp": 1, "tolerance": 0}, {"kp": 1, "max_steps": 0}])
def test_pid_gain_validation(kw):
    with pytest.raises(ValueError):
        PidGains(**kw)


def test_shipped_config_matches_code_defaults():
    shipped = load_config()
    assert shipped == ControllerConfig()
    assert shipped.standoff == 0.25
    assert (shipped.lateral.tolerance, shipped.longitudinal.tolerance, shipped.lateral.max_steps) == (2.0, 0.01, 500)
    assert ControllerConfig.from_dict(shipped.to_dict()) == shipped
    assert shipped.lateral.kp in LATERAL_KP and shipped.longitudinal.kp in LONGITUDINAL_KP


def test_config_env_override(tmp_path, monkeypatch):
    cfg = ControllerConfig().to_dict()
    cfg["standoff"] = 0.3
    path = tmp_path / "ctl.json"
    path.write_text(json.dumps(cfg))
    monkeypatch.setenv("ACTATTR_CONFIG", str(path))
    assert load_config().standoff == 0.3


# -- focus and approach ----------------------------------------------------

def test_focus_already_centered_takes_no_steps():
    w = world_of(obj("t", 0, 2))
    out = focus_on_patch(w, patch_of(w, "t"), CFG)
    assert out.steps == 0 and abs(out.lateral_error) <= 2


def test_focus_from_40px_left():
    # 40 px at 2 m is 2 * 40 / 277 m of lateral offset
    w = world_of(obj("t", -2 * 40 / 277, 2))
    p = patch_of(w, "t")
    # setup check only: the near face sits a little closer than 2 m
    assert lateral_error(w, p) == pytest.approx(-40, abs=2)
    out = focus_on_patch(w, p, CFG)
    assert out.steps <= 200
    assert abs(lateral_error(w, patch_of(w, "t"))) <= 2


def test_focus_lost_target():
    w = world_of(obj("t", 0, 2))
    p = patch_of(w, "t")
    w.object("t").center = (5.0, -3.0, 0.1)
    with pytest.raises(TargetLost):
        focus_on_patch(w, p, CFG)


def test_focus_convergence_failure_with_tiny_budget():
    cfg = ControllerConfig.from_dict({**CFG.to_dict(), "lateral": {**CFG.to_dict()["lateral"], "max_steps": 1}})
    w = world_of(obj("t", -0.4, 2))
    with pytest.raises(ConvergenceFailure):
        focus_on_patch(w, patch_of(w, "t"), cfg)


def test_go_to_object_from_three_meters():
    w = world_of(obj("t", 0.2, 3.1))
    out = go_to_object(w, patch_of(w, "t"), CFG)
    assert abs(distance_probe(w) - 0.25) <= 0.01
    assert abs(lateral_error(w, patch_of(w, "t"))) <= 2
    assert out.distance == pytest.approx(distance_probe(w))


def test_go_to_object_already_there():
    w = at_standoff(world_of(obj("t", 0, 2)), "t")
    assert go_to_object(w, patch_of(w, "t"), CFG).steps == 0


def test_go_to_object_rotate_mode():
    cfg = ControllerConfig.from_dict({**CFG.to_dict(), "lateral_mode": "rotate"})
    w = world_of(obj("t", 0.3, 2.5))
    go_to_object(w, patch_of(w, "t"), cfg)
    assert abs(distance_probe(w) - 0.25) <= 0.01


def test_occluder_stops_approach_short():
    # a low box in front of a tall target: the sensor ray hits the occluder
    target = obj("target", 0, 3.0, e=0.1, ez=0.4)
    low = obj("low", 0, 1.5, e=0.08, ez=0.12)
    w = world_of(target, low)
    go_to_object(w, patch_of(w, "target"), CFG)
    hit = w.robot.pose[1]
    assert abs(distance_probe(w) - 0.25) <= 0.01
    assert 3.0 - 0.1 - hit > 1.0  # stopped at the occluder, far short of the target


def test_servo_random_starts():
    rng = np.random.default_rng(123)
    for _ in range(25):
        w, p = servo_trial(rng)
        go_to_object(w, p, CFG)
        assert abs(distance_probe(w) - 0.25) <= 0.01


def test_tuning_scores_shipped_gains():
    score = score_gains(CFG, trials=20, seed=1)
    assert score.converged and score.mean_steps > 0


# -- grasping --------------------------------------------------------------

def test_pick_up_preconditions():
    w = world_of(obj("a", 0, 2), obj("b", 1.0, 2))
    with pytest.raises(TooFar):
        pick_up(w, "a", CFG)
    at_standoff(w, "a")
    pick_up(w, "a", CFG)
    assert w.robot.holding == "a"
    with pytest.raises(AlreadyHolding):
        pick_up(w, "b", CFG)
    fixed = world_of(obj("wall", 0, 2, graspable=False))
    at_standoff(fixed, "wall")
    with pytest.raises(NotGraspable):
        pick_up(fixed, "wall", CFG)


def test_pick_up_wrong_object_in_front():
    w = world_of(obj("a", 0, 2), obj("b", 1.0, 2))
    at_standoff(w, "a")
    with pytest.raises(TooFar):
        pick_up(w, "b", CFG)


def test_put_on_table_places_on_top():
    table = SceneObject("table", "table", (0, 2.0, 0.1), (0.4, 0.3, 0.1), 20.0, graspable=False)
    mug = SceneObject("mug", "mug", (-1.0, 2.0, 0.05), (0.05, 0.05, 0.05), 0.35)
    w = world_of(table, mug)
    at_standoff(w, "mug")
    pick_up(w, "mug", CFG)
    w.robot.pose = (0.0, 1.0, math.pi / 2)
    at_standoff(w, "table")
    put_on(w, "table", CFG)
    assert w.robot.holding is None
    m = w.object("mug")
    assert m.center[2] == pytest.approx(0.2 + 0.05)
    assert table.lo[0] <= m.lo[0] and m.hi[0] <= table.hi[0]


def test_put_on_without_holding():
    with pytest.raises(NotHolding):
        put_on(world_of(obj("a", 0, 2)), "floor", CFG)


def test_pick_put_round_trip():
    w = world_of(obj("a", 0, 2))
    at_standoff(w, "a")
    before = w.robot.pose
    pick_up(w, "a", CFG)
    put_on(w, "floor", CFG)
    assert w.robot.holding is None
    a = w.object("a")
    assert a.center[2] == pytest.approx(a.extent[2])
    # the object is back in front of the gripper and can be picked again
    assert w.robot.pose == before
    pick_up(w, "a", CFG)
    assert w.robot.holding == "a"


def test_measure_weight_orders_triplet():
    masses = {"f": 0.005, "d": 20.0, "c": 1500.0}
    w = world_of(obj("f", -0.6, 2, mass=0.005), obj("d", 0, 2, mass=20.0), obj("c", 0.6, 2, mass=1500.0))
    with pytest.raises(NotHolding):
        measure_weight(w)
    readings = {}
    home = w.robot.pose
    for oid in ("c", "f", "d"):
        w.robot.pose = home
        at_standoff(w, oid)
        pick_up(w, oid, CFG)
        readings[oid] = measure_weight(w)
        put_on(w, "floor", CFG)
    assert readings == masses


def test_measure_distance():
    w = world_of(obj("t", 0.05, 1.5 + 0.1))
    assert measure_distance(w, patch_of(w, "t"), CFG) == pytest.approx(1.5, abs=0.01)
    pair = world_of(obj("near", -0.4, 1.2), obj("far", 0.4, 2.4))
    home = pair.robot.pose
    d_near = measure_distance(pair, patch_of(pair, "near"), CFG)
    pair.robot.pose = home
    d_far = measure_distance(pair, patch_of(pair, "far"), CFG)
    assert d_near < d_far


# -- tracking and traces ---------------------------------------------------

def test_tracker():
    w = world_of(obj("a", -0.5, 2), obj("b", 0.5, 2))
    pa = patch_of(w, "a")
    assert track_patch(pa, project(w)).object_id == "a"
    b = pa.bbox
    moved = ImagePatch(BoundingBox(b.x_min + 5, b.y_min, b.x_max + 5, b.y_max), "a", object_id="a")
    assert track_patch(pa, [moved, patch_of(w, "b")]).object_id == "a"
    with pytest.raises(TargetLost):
        track_patch(pa, [patch_of(w, "b")])
    with pytest.raises(TargetLost):
        track_patch(pa, [])


def test_trace_is_append_only_with_increasing_steps():
    t = EpisodeTrace()
    t.append("find", ["mug"], readings=[])
    t.append("pick_up", [], command=None, note={"object_id": "m"})
    assert [e["step"] for e in t.entries] == [1, 2]
    assert t.names() == ["find", "pick_up"] and t.count("find") == 1
    assert t.entries[1]["note"] == {"object_id": "m"} and "note" not in t.entries[0]
