import json
import math
import subprocess
import sys

import numpy as np
import pytest

from hartorus import ConfigError, emit_plot, parse_config, run_experiment

MINIMAL_EQ = """
grid.d = 1
f.kind = fermi
w.kind = delta
"""


def test_minimal_config_fills_defaults():
    cfg = parse_config(MINIMAL_EQ, "equilibrium-check")
    assert cfg["grid.N"] == 64
    assert cfg["dt"] == 1e-3
    assert cfg["theta"] == 1e-8
    assert cfg["grid.L"] == pytest.approx(2 * math.pi)


def test_unknown_kind_rejected():
    with pytest.raises(ConfigError):
        parse_config(MINIMAL_EQ, "frobnicate")


def test_out_of_range_dimension():
    with pytest.raises(ConfigError) as exc:
        parse_config("grid.d = 5\nf.kind = fermi\nw.kind = delta\n", "equilibrium-check")
    assert any("grid.d must be in 1..4" in v for v in exc.value.violations)


def test_duplicate_key_cites_both_lines():
    text = "grid.d = 1\nf.kind = fermi\nw.kind = delta\ngrid.d = 2\n"
    with pytest.raises(ConfigError) as exc:
        parse_config(text, "equilibrium-check")
    assert any("lines 1 and 4" in v for v in exc.value.violations)


def test_unknown_key_named():
    with pytest.raises(ConfigError) as exc:
        parse_config(MINIMAL_EQ + "blorp = 3\n", "equilibrium-check")
    assert any("'blorp'" in v for v in exc.value.violations)


def test_missing_required_names_experiment():
    with pytest.raises(ConfigError) as exc:
        parse_config("grid.d = 1\n", "equilibrium-check")
    msgs = " ".join(exc.value.violations)
    assert "equilibrium-check" in msgs and "f.kind" in msgs


def test_all_violations_reported():
    text = "grid.d = 7\ngrid.N = 10\nnope = 1\n"
    with pytest.raises(ConfigError) as exc:
        parse_config(text, "equilibrium-check")
    assert len(exc.value.violations) >= 4  # two ranges, unknown key, missing keys


def test_bose_needs_negative_mu():
    text = "grid.d = 1\nf.kind = bose\nf.mu = 0.5\nw.kind = delta\n"
    with pytest.raises(ConfigError) as exc:
        parse_config(text, "equilibrium-check")
    assert any("bose" in v for v in exc.value.violations)


def test_config_echo_round_trips():
    cfg = parse_config(MINIMAL_EQ + "dt = 2e-3\nT = 0.5\n", "equilibrium-check")
    again = parse_config(cfg.to_text(), cfg.kind)
    assert again.values == cfg.values


def test_run_experiment_deterministic(tmp_path):
    cfg = parse_config(MINIMAL_EQ + "T = 0.05\nobs.stride = 10\n", "equilibrium-check")
    env1 = run_experiment(cfg, tmp_path / "a")
    env2 = run_experiment(cfg, tmp_path / "b")
    assert env1.all_passed
    for p1, p2 in zip(env1.payloads, env2.payloads):
        assert p1["sha256"] == p2["sha256"]
    # checksums in the envelope match the files
    for p in env1.payloads:
        data = (tmp_path / "a" / p["path"]).read_bytes()
        import hashlib
        assert hashlib.sha256(data).hexdigest() == p["sha256"]


def test_envelope_exit_code_and_echo(tmp_path):
    cfg = parse_config(MINIMAL_EQ + "T = 0.05\n", "equilibrium-check")
    env = run_experiment(cfg, tmp_path)
    assert env.exit_code == 0
    again = parse_config(env.config_echo, env.kind)
    assert again.values == cfg.values
    meta = json.loads((tmp_path / "envelope.json").read_text())
    assert meta["verdicts"] and all(meta["verdicts"].values())


def _run_cli(args):
    return subprocess.run([sys.executable, "-m", "hartorus.cli", *args],
                          capture_output=True, text=True)


def test_cli_pass_and_exit_zero(tmp_path):
    cfg_path = tmp_path / "eq.cfg"
    cfg_path.write_text(MINIMAL_EQ + "T = 0.05\n")
    proc = _run_cli(["equilibrium-check", "--config", str(cfg_path),
                     "--out", str(tmp_path / "out")])
    assert proc.returncode == 0, proc.stderr
    assert "PASS" in proc.stdout


def test_cli_verdict_failure_exit_one(tmp_path):
    # window past the recurrence time fails the probe verdicts
    cfg_path = tmp_path / "probe.cfg"
    cfg_path.write_text("""
grid.d = 1
grid.N = 32
f.kind = gaussian
f.amplitude = 1e-4
f.scale = 1e-2
w.kind = delta
pert.amplitude = 1e-3
pert.width = 0.5
pert.carrier = 1.0
dt = 1e-2
T = 4.0
obs.stride = 100
theta = 1e-12
""")
    proc = _run_cli(["scattering-probe", "--config", str(cfg_path),
                     "--out", str(tmp_path / "out")])
    assert proc.returncode == 1
    assert "FAIL" in proc.stdout


def test_cli_config_error_exit_two(tmp_path):
    cfg_path = tmp_path / "bad.cfg"
    cfg_path.write_text("grid.d = 9\n")
    proc = _run_cli(["equilibrium-check", "--config", str(cfg_path), "--out", str(tmp_path)])
    assert proc.returncode == 2
    assert "config error" in proc.stderr


def test_cli_missing_file_exit_two(tmp_path):
    proc = _run_cli(["norms", "--config", str(tmp_path / "nope.cfg")])
    assert proc.returncode == 2


def test_svg_single_point():
    doc = emit_plot([("pt", [1.0], [2.0])], {"title": "one", "checksum": "abc"})
    assert doc.startswith("<?xml")
    assert "<circle" in doc and "abc" in doc and "</svg>" in doc


def test_svg_empty_series_placeholder():
    doc = emit_plot([], {"title": "nothing"})
    assert "warning: empty series" in doc


def test_svg_log_scale():
    xs = [1, 2, 3, 4]
    ys = [1e-1, 1e-3, 1e-5, 1e-7]
    doc = emit_plot([("decay", xs, ys)], {"logy": True})
    assert "polyline" in doc


def test_svg_band_shading():
    doc = emit_plot([("curve", np.linspace(0, 3, 50), np.linspace(0, 1, 50))],
                    {"band": (1.0, 2.0)})
    assert "#fce0e0" in doc


def test_svg_deterministic_up_to_timestamp():
    series = [("s", [0.0, 1.0, 2.0], [1.0, 4.0, 9.0])]
    a = emit_plot(series, {"checksum": "c", "timestamp": "fixed"})
    b = emit_plot(series, {"checksum": "c", "timestamp": "fixed"})
    assert a == b
    c = emit_plot(series, {"checksum": "c"})  # wall-clock stamp
    strip = lambda doc: "\n".join(l for l in doc.splitlines() if "timestamp" not in l)
    assert strip(a) == strip(c)


def test_besov_unresolvable_grid_raises():
    from hartorus import TorusGrid, SpectralField, besov_norm
    g = TorusGrid(1, 2 * math.pi, 4)
    with pytest.raises(ValueError):
        besov_norm(SpectralField.constant(g, 1.0), 2, 0.0, 0.25)
