from __future__ import annotations

import json
import re
import shutil
import subprocess
import sys

import pytest

from gateway_forge.cli import main
from gateway_forge.library import builtin_library_path

DIAGNOSTIC = re.compile(r"^\S+:\d+:\d+: error: ", re.M)


@pytest.fixture
def fx(fixtures):
    return lambda name: str(fixtures / name)


def _tree(directory):
    return {p.name: p.read_bytes() for p in sorted(directory.iterdir()) if p.is_file()}


def test_parse_prints_canonical_text(fx, capsys):
    assert main(["parse", fx("mammogrid.gdsl")]) == 0
    out = capsys.readouterr().out
    assert out.startswith("mammogridGateway is style SOAScienceGateway where {")
    assert main(["parse", fx("ft_script.gcon")]) == 0
    assert "replicate mammogridDataProxy to mammogridDataProxyClone0;" in capsys.readouterr().out
    assert main(["parse", fx("two-node.germ")]) == 0
    assert "link gridNodeA -- gridNodeB" in capsys.readouterr().out


def test_parse_emit_ast(fx, capsys):
    assert main(["parse", "--emit-ast", fx("skeleton.gdsl")]) == 0
    out = capsys.readouterr().out
    assert out.startswith("model gatewayArchitectureRef @2:1")


def test_parse_error_exit_1(fx, capsys):
    assert main(["parse", fx("bad_syntax.gdsl")]) == 1
    err = capsys.readouterr().err
    assert DIAGNOSTIC.search(err)
    assert "bad_syntax.gdsl:5:23: error:" in err


def test_check_exit_codes(fx, capsys):
    assert main(["check", fx("mammogrid.gdsl")]) == 0
    assert main(["check", fx("malformed.gdsl")]) == 2
    assert main(["check", fx("composite_stateless.gdsl")]) == 2
    err = capsys.readouterr().err
    assert "composite_stateless.gdsl:3:5: error: StatefulnessViolation" in err
    assert main(["check", fx("bad_syntax.gdsl")]) == 1
    assert main(["check", fx("nope.gdsl")]) == 5


def test_check_rejects_non_model(fx, capsys):
    assert main(["check", fx("ft_script.gcon")]) == 1
    assert "expected an architecture model" in capsys.readouterr().err


def test_weave(fx, tmp_path, capsys):
    out = tmp_path / "woven.gdsl"
    report = tmp_path / "report.txt"
    assert main(["weave", fx("mammogrid.gdsl"), "-o", str(out), "--report", str(report)]) == 0
    assert "archetype" not in out.read_text()
    assert "mammogridDataProxyClone0 is component {" in out.read_text()
    assert "applied.0.construct=FT_reliability" in report.read_text()
    assert "FT_reliability" in capsys.readouterr().out


def test_weave_stage_filter(fx, tmp_path):
    out = tmp_path / "woven.gdsl"
    assert main(["weave", fx("mammogrid.gdsl"), "--stage", "platform", "-o", str(out)]) == 0
    assert "Clone0" not in out.read_text()


def test_weave_unmatched_exit_3(fx, tmp_path, capsys):
    empty = tmp_path / "empty"
    empty.mkdir()
    out = str(tmp_path / "o.gdsl")
    assert main(["weave", fx("mammogrid.gdsl"), "--library", str(empty), "-o", out]) == 3
    assert main(["weave", fx("unmatched.gdsl"), "-o", out]) == 3
    assert "privacy::anonymize::full" in capsys.readouterr().err


def test_library_from_environment(fx, tmp_path, monkeypatch):
    empty = tmp_path / "empty"
    empty.mkdir()
    monkeypatch.setenv("GFORGE_LIBRARY", str(empty))
    assert main(["weave", fx("mammogrid.gdsl"), "-o", str(tmp_path / "o.gdsl")]) == 3
    monkeypatch.setenv("GFORGE_LIBRARY", str(builtin_library_path()))
    assert main(["weave", fx("mammogrid.gdsl"), "-o", str(tmp_path / "o.gdsl")]) == 0


def test_library_errors(fx, tmp_path, capsys):
    broken = tmp_path / "broken"
    broken.mkdir()
    (broken / "x.gcon").write_text("x is qualityOfServiceProperty {")
    out = str(tmp_path / "o.gdsl")
    assert main(["weave", fx("mammogrid.gdsl"), "--library", str(broken), "-o", out]) == 1
    assert DIAGNOSTIC.search(capsys.readouterr().err)
    dup = tmp_path / "dup"
    shutil.copytree(builtin_library_path(), dup)
    shutil.copy(dup / "ft_reliability.gcon", dup / "ft_copy.gcon")
    assert main(["weave", fx("mammogrid.gdsl"), "--library", str(dup), "-o", out]) == 2
    assert main(["weave", fx("mammogrid.gdsl"), "--library", str(tmp_path / "none"), "-o", out]) == 5


def test_gen_and_graph(fx, tmp_path):
    woven = tmp_path / "w.gdsl"
    assert main(["weave", fx("mammogrid.gdsl"), "-o", str(woven)]) == 0
    out = tmp_path / "gesa"
    assert main(["gen", str(woven), "--out-dir", str(out)]) == 0
    assert len(list(out.glob("*.manifest.json"))) == 7
    assert main(["gen", str(woven), "--granularity", "monolith", "--out-dir", str(tmp_path / "mono")]) == 0
    assert len(list((tmp_path / "mono").glob("*.manifest.json"))) == 1
    dot = tmp_path / "g.dot"
    assert main(["graph", str(woven), "-o", str(dot)]) == 0
    assert dot.read_text().count("shape=") == 7


def test_plan(fx, tmp_path):
    woven = tmp_path / "w.gdsl"
    main(["weave", fx("mammogrid.gdsl"), "-o", str(woven)])
    plan = tmp_path / "plan.json"
    assert main(["plan", str(woven), "--infra", fx("two-node.germ"), "-o", str(plan)]) == 0
    assert json.loads(plan.read_text())["nodes_used"] == 2
    assert main(["plan", str(woven), "--infra", fx("one-node.germ"), "-o", str(plan)]) == 4
    spec = tmp_path / "deploy.json"
    spec.write_text('{"pins": {"ghost": "gridNodeA"}}')
    assert main(["plan", str(woven), "--infra", fx("two-node.germ"), "--deploy", str(spec), "-o", str(plan)]) == 2
    spec.write_text('{"pins": {"mammogridPortal": "gridNodeB"}}')
    assert main(["plan", str(woven), "--infra", fx("two-node.germ"), "--deploy", str(spec), "-o", str(plan)]) == 0
    assert json.loads(plan.read_text())["assignment"]["mammogridPortal"] == "gridNodeB"
    assert main(["plan", str(woven), "--infra", fx("bad_syntax.gdsl"), "-o", str(plan)]) == 1


def test_pipeline(fx, tmp_path):
    out = tmp_path / "out"
    assert main(["pipeline", fx("mammogrid.gdsl"), "--library", str(builtin_library_path()),
                 "--infra", fx("two-node.germ"), "--out-dir", str(out)]) == 0
    names = set(_tree(out))
    assert {"mammogrid.gecm-applied.gdsl", "mammogrid.gesm.gdsl", "plan.json", "gesa-index.json",
            "mammogrid.dot"} <= names
    assert len([n for n in names if n.endswith(".manifest.json")]) == 7


def test_pipeline_equals_composition(fx, tmp_path):
    piped = tmp_path / "piped"
    assert main(["pipeline", fx("mammogrid.gdsl"), "--infra", fx("two-node.germ"), "--out-dir", str(piped)]) == 0
    manual = tmp_path / "manual"
    qos = manual / "mammogrid.gecm-applied.gdsl"
    gesm = manual / "mammogrid.gesm.gdsl"
    assert main(["weave", fx("mammogrid.gdsl"), "--stage", "qos", "-o", str(qos)]) == 0
    assert main(["weave", str(qos), "--stage", "platform", "-o", str(gesm)]) == 0
    assert main(["gen", str(gesm), "--out-dir", str(manual)]) == 0
    assert main(["graph", str(gesm), "-o", str(manual / "mammogrid.dot")]) == 0
    assert main(["plan", str(gesm), "--infra", fx("two-node.germ"), "-o", str(manual / "plan.json")]) == 0
    assert _tree(piped) == _tree(manual)


def test_pipeline_exit_codes(fx, tmp_path):
    out = str(tmp_path / "o")
    assert main(["pipeline", fx("mammogrid.gdsl"), "--infra", fx("one-node.germ"), "--out-dir", out]) == 4
    assert main(["pipeline", fx("unmatched.gdsl"), "--infra", fx("one-node.germ"), "--out-dir", out]) == 3
    assert main(["pipeline", fx("composite_stateless.gdsl"), "--infra", fx("one-node.germ"), "--out-dir", out]) == 2
    assert main(["pipeline", fx("bad_syntax.gdsl"), "--infra", fx("one-node.germ"), "--out-dir", out]) == 1


def test_console_script(fx):
    done = subprocess.run([sys.executable, "-m", "gateway_forge.cli", "check", fx("malformed.gdsl")],
                          capture_output=True, text=True)
    assert done.returncode == 2
    assert DIAGNOSTIC.search(done.stderr)
