import json
import math
import os

import pytest

from hyplab import cli, harness
from hyplab.errors import ConfigError, DomainError

ALL_IDS = [
    "simple_hyperbolic_heat_kernel_bound",
    "ft_bound",
    "sqrt_time_bound",
    "counting_group_actions",
    "packing_bound",
    "counting_closeby_points",
    "trace_large_time_envelope",
    "trace_uniform_rate",
    "ball_volume_kernel_bound",
    "trace_small_time_local",
    "trace_lower_bound_short_geo",
    "cylinder_inj_two_sided",
    "collar_inv_inj_integrals",
]


def test_registry_ids_fixed():
    assert harness.bound_registry() == ALL_IDS
    with pytest.raises(DomainError):
        harness.run_bound("not_a_bound")


def test_bolza_spectrum():
    spec = harness.bolza_length_spectrum()
    assert spec.volume == pytest.approx(4.0 * math.pi, rel=1e-15)
    assert spec.lengths == (harness.BOLZA_SYSTOLE,)
    assert harness.BOLZA_SYSTOLE == pytest.approx(3.0571418389619622,
                                                  abs=1e-9)


def test_frozen_constants_fast_checks():
    expected = {
        "simple_hyperbolic_heat_kernel_bound": 0.07931274281594762,
        "counting_group_actions": 0.9950248756218906,
        "packing_bound": 0.07743582118310952,
        "counting_closeby_points": 1.0411597346274142,
        "ball_volume_kernel_bound": 0.4988421612208847,
        "trace_small_time_local": 0.8420420641782501,
        "cylinder_inj_two_sided": 0.5000000000000001,
        "collar_inv_inj_integrals": 6.536401720410044,
    }
    for name, want in expected.items():
        r = harness.run_bound(name)
        assert r.passed, name
        assert r.fitted_constant == pytest.approx(want, rel=1e-9), name


def test_group_count_constant_is_rational():
    # at ell = 0.01 on the waist the nearest-shell count is exactly 200
    # translates against (1 + 1/inj) = 201
    r = harness.run_bound("counting_group_actions")
    assert r.fitted_constant == pytest.approx(200.0 / 201.0, rel=1e-12)
    assert r.argmax_point == (0.01, 0.0, 0.0)


def test_bound_report_json_shape():
    r = harness.run_bound("cylinder_inj_two_sided")
    body = json.loads(r.to_json())
    assert body["pass"] is True
    assert "passed" not in body
    assert isinstance(body["fitted_constant"], str)
    assert float(body["fitted_constant"]) == r.fitted_constant
    assert list(body) == sorted(body)


def test_suite_order_independent_of_request_order():
    reports = harness.run_bound_suite(
        ["collar_inv_inj_integrals", "cylinder_inj_two_sided"])
    assert [r.inequality_id for r in reports] == [
        "cylinder_inj_two_sided", "collar_inv_inj_integrals"]
    with pytest.raises(DomainError):
        harness.run_bound_suite(["cylinder_inj_two_sided", "bogus"])


def test_config_validation_messages():
    with pytest.raises(ConfigError) as e:
        harness.ExperimentConfig({"experiment": "nope"})
    assert "experiment" in str(e.value)
    with pytest.raises(ConfigError) as e:
        harness.ExperimentConfig({"experiment": "e_h", "sead": 1})
    assert "sead" in str(e.value)
    with pytest.raises(ConfigError) as e:
        harness.ExperimentConfig({"experiment": "e_h",
                                  "grid": {"t_min": 2.0, "t_max": 1.0}})
    assert "t_min" in str(e.value)
    with pytest.raises(ConfigError) as e:
        harness.ExperimentConfig({"experiment": "bound_suite",
                                  "bounds": {"ids": ["nope"]}})
    assert "nope" in str(e.value)
    with pytest.raises(ConfigError) as e:
        harness.ExperimentConfig({"experiment": "e_h",
                                  "kernel": {"reltol": 1e-8}})
    assert "reltol" in str(e.value)


def test_config_hash():
    a = harness.ExperimentConfig({"experiment": "e_h", "seed": 1})
    b = harness.ExperimentConfig({"experiment": "e_h", "seed": 1})
    c = harness.ExperimentConfig({"experiment": "e_h", "seed": 2})
    assert a.config_hash == b.config_hash
    assert a.config_hash != c.config_hash
    # out_dir is a run location, not an input, so it must not change
    # the hash
    d = harness.ExperimentConfig({"experiment": "e_h", "seed": 1,
                                  "out_dir": "elsewhere"})
    assert d.config_hash == a.config_hash


def test_config_from_toml(tmp_path):
    path = tmp_path / "cfg.toml"
    path.write_text('experiment = "cylinder_trace"\nseed = 3\n'
                    '[grid]\nt_min = 0.01\nt_max = 1.0\n'
                    'points_per_decade = 4\n'
                    '[cylinder]\nell = 0.25\n')
    cfg = harness.ExperimentConfig.from_toml(str(path))
    assert cfg.experiment == "cylinder_trace"
    assert cfg.seed == 3
    assert cfg.cylinder_ell == 0.25
    grid = cfg.t_grid()
    assert grid[0] == pytest.approx(0.01, rel=1e-12)
    assert grid[-1] == pytest.approx(1.0, rel=1e-12)
    bad = tmp_path / "bad.toml"
    bad.write_text("experiment = [oops")
    with pytest.raises(ConfigError):
        harness.ExperimentConfig.from_toml(str(bad))


def _digest(paths):
    import hashlib
    h = hashlib.sha256()
    for p in sorted(paths):
        with open(p, "rb") as fh:
            h.update(fh.read())
    return h.hexdigest()


def test_run_e_h_experiment(tmp_path):
    cfg = harness.ExperimentConfig({"experiment": "e_h", "seed": 5,
                                    "out_dir": str(tmp_path)})
    files = harness.run(cfg)
    assert files == [os.path.join(str(tmp_path), "e_h.json")]
    body = json.loads(open(files[0]).read())
    assert body["passed"] is True
    assert body["seed"] == 5
    assert body["config_hash"] == cfg.config_hash
    assert float(body["value"]) == pytest.approx(0.05380968825533219,
                                                 rel=1e-10)
    # identical config, identical bytes
    assert _digest(files) == _digest(harness.run(cfg))


def test_run_cylinder_trace_experiment(tmp_path):
    cfg = harness.ExperimentConfig({
        "experiment": "cylinder_trace", "out_dir": str(tmp_path),
        "grid": {"t_min": 0.01, "t_max": 1.0, "points_per_decade": 4},
        "cylinder": {"ell": 0.5}})
    files = harness.run(cfg)
    assert _digest(files) == _digest(harness.run(cfg))
    from hyplab.spectral import HeatTraceCurve
    curve = HeatTraceCurve.from_csv(
        [p for p in files if p.endswith(".csv")][0],
        kind="cylinder_trace_diff")
    assert len(curve.t) == 9
    assert curve.value[0] == pytest.approx(0.010751877403873053, rel=1e-10)


def test_run_bound_suite_experiment(tmp_path):
    cfg = harness.ExperimentConfig({
        "experiment": "bound_suite", "out_dir": str(tmp_path),
        "bounds": {"ids": ["cylinder_inj_two_sided",
                           "collar_inv_inj_integrals"]}})
    files = harness.run(cfg)
    body = json.loads(open(files[0]).read())
    assert body["all_pass"] is True
    assert [r["inequality_id"] for r in body["reports"]] == [
        "cylinder_inj_two_sided", "collar_inv_inj_integrals"]
    assert _digest(files) == _digest(harness.run(cfg))


def test_cli_bounds_and_eh(capsys):
    assert cli.main(["bounds", "--ids", "cylinder_inj_two_sided"]) == 0
    out = capsys.readouterr().out
    assert "cylinder_inj_two_sided" in out and "pass" in out
    assert cli.main(["e-h"]) == 0
    out = capsys.readouterr().out
    assert "0.05380968825533219" in out


def test_cli_error_paths(capsys):
    assert cli.main(["bounds", "--ids", "bogus"]) == 1
    assert "unknown inequality id" in capsys.readouterr().err
    assert cli.main(["logdet", "--surface", "torus"]) == 2


def test_cli_run(tmp_path, capsys):
    path = tmp_path / "cfg.toml"
    path.write_text('experiment = "e_h"\nout_dir = "%s"\n' % tmp_path)
    assert cli.main(["run", str(path)]) == 0
    assert "e_h.json" in capsys.readouterr().out
