from __future__ import annotations

import json
import shutil
import subprocess

import pytest

from actattr.harness.cli import main
from actattr.harness.suites import generate


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def suite_file(tmp_path, capsys):
    path = tmp_path / "weight.json"
    code, _, err = run_cli(capsys, "gen", "--family", "weight", "--n", "4", "--seed", "2", "--out", str(path))
    assert code == 0 and "4 episodes" in err
    return path


@pytest.fixture
def scene_file(tmp_path):
    ep = generate("weight", 1, seed=2).episodes[0]
    path = tmp_path / "scene.json"
    path.write_text(json.dumps(ep.scene))
    return path, ep.query


def test_gen_matches_library_and_env_seed(tmp_path, capsys, monkeypatch, suite_file):
    assert json.loads(suite_file.read_text()) == generate("weight", 4, seed=2).to_dict()
    monkeypatch.setenv("ACTATTR_SEED", "2")
    code, out, err = run_cli(capsys, "gen", "--family", "weight", "--n", "4")
    assert code == 0 and json.loads(out)["seed"] == 2
    assert generate("weight", 4, seed=2).content_hash() in err


def test_run_and_report(tmp_path, capsys, suite_file):
    outs = []
    for method in ("perception_action", "ovd_only"):
        out = tmp_path / f"{method}.json"
        code, _, err = run_cli(capsys, "run", "--suite", str(suite_file), "--method", method,
                               "--noise", "zero", "--out", str(out))
        assert code == 0 and method in err
        outs.append(str(out))
    assert json.loads(open(outs[0]).read())["accuracy"] == 1.0
    table = tmp_path / "table.md"
    code, _, err = run_cli(capsys, "report", "--in", *outs, "--out", str(table))
    assert code == 0
    assert table.read_text().startswith("| method | weight |")
    figure = table.with_suffix(".png")
    assert figure.read_bytes()[:4] == b"\x89PNG" and str(figure) in err
    code, out, _ = run_cli(capsys, "report", "--in", *outs, "--format", "csv")
    assert code == 0 and out.splitlines()[0].startswith("method,task,accuracy")


def test_episode_command(capsys, scene_file):
    path, query = scene_file
    code, out, _ = run_cli(capsys, "episode", "--scene", str(path), "--query", query.text)
    assert code == 0
    sections = out.split("=== ")
    assert [s.split(" ===")[0] for s in sections[1:]] == ["program", "trace", "answer"]
    assert out.rstrip().endswith(query.ground_truth)
    trace_lines = sections[2].splitlines()[1:]
    assert all(json.loads(line)["step"] == i + 1 for i, line in enumerate(trace_lines))


def test_episode_over_bridge(capsys, scene_file, bridge):
    path, query = scene_file
    code, out, _ = run_cli(capsys, "episode", "--scene", str(path), "--query", query.text,
                           "--bridge", "%s:%d" % bridge.address)
    assert code == 0 and "=== latency ===" in out
    assert out.split("=== answer ===")[1].split()[0] == query.ground_truth


def test_episode_failure_exit_code(capsys, scene_file):
    path, _ = scene_file
    code, out, _ = run_cli(capsys, "episode", "--scene", str(path), "--query", "make me coffee")
    assert code == 1 and "failed: UnrecognizedQuery" in out


@pytest.mark.parametrize("argv", [
    ["run", "--suite", "/nonexistent/suite.json", "--method", "ovd_only"],
    ["report", "--in", "/nonexistent/result.json"],
    ["gen", "--family", "weight", "--n", "2", "--out", "/nonexistent/dir/x.json"],
])
def test_errors_exit_2(capsys, argv):
    code, _, err = run_cli(capsys, *argv)
    assert code == 2 and err.startswith("error:")


def test_bad_arguments_exit_2(capsys):
    with pytest.raises(SystemExit) as info:
        main(["gen", "--family", "smell", "--n", "2"])
    assert info.value.code == 2


@pytest.mark.skipif(shutil.which("actattr") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(["actattr", "gen", "--family", "size", "--n", "1"], capture_output=True, text=True, timeout=60)
    assert proc.returncode == 0 and json.loads(proc.stdout)["family"] == "size_superlative"
