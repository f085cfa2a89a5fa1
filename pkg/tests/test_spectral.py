import math

import numpy as np
import pytest

from hyplab.errors import ConsistencyError, DomainError, RangeError
from hyplab.spectral import (
    EULER_GAMMA,
    HeatTraceCurve,
    LimitLaw,
    LogDetResult,
    default_t_grid,
    e_h,
    e_mu,
    large_time_bound_check,
    logdet_assemble,
    lower_bound_check,
    trace_diff_cylinder,
)


def test_curve_validation():
    with pytest.raises(DomainError):
        HeatTraceCurve([(1.0, 0.5)], [0.0], kind="surface_trace_diff")
    with pytest.raises(DomainError):
        HeatTraceCurve([(1.0, 0.5), (2.0, 0.4)], [0.0, 0.0], kind="banana")
    with pytest.raises(DomainError):
        HeatTraceCurve([(2.0, 0.5), (1.0, 0.4)], [0.0, 0.0],
                       kind="surface_trace_diff")
    with pytest.raises(DomainError):
        HeatTraceCurve([(-1.0, 0.5), (1.0, 0.4)], [0.0, 0.0],
                       kind="surface_trace_diff")
    with pytest.raises(DomainError):
        HeatTraceCurve([(1.0, 0.5), (2.0, 0.4)], [0.0, -1e-3],
                       kind="surface_trace_diff")


def test_curve_csv_roundtrip(tmp_path):
    ts = [1e-4, 1e-2, 1.0, 50.0]
    vals = [0.1, 0.7, 0.36102589389475489, 0.999]
    errs = [1e-9, 2e-9, 3e-9, 0.0]
    curve = HeatTraceCurve(list(zip(ts, vals)), errs, kind="surface_trace_diff")
    path = tmp_path / "curve.csv"
    curve.to_csv(str(path))
    back = HeatTraceCurve.from_csv(str(path), kind="surface_trace_diff")
    assert np.array_equal(back.t, curve.t)
    assert np.array_equal(back.value, curve.value)
    assert np.array_equal(back.error, curve.error)


def test_default_t_grid():
    g = default_t_grid()
    assert len(g) == 1601
    assert g[0] == pytest.approx(1e-6, rel=1e-12)
    assert g[-1] == pytest.approx(100.0, rel=1e-12)
    assert np.all(np.diff(np.log(g)) > 0)


def test_trace_diff_cylinder_frozen():
    curve = trace_diff_cylinder(0.5, [0.01, 0.1, 0.5, 1.0, 10.0])
    assert curve.kind == "cylinder_trace_diff"
    expected = [0.010751877403873053, 0.9921068658550133, 0.857009079077854,
                0.5926799957957536, 0.012619151811521546]
    for v, e, want in zip(curve.value, curve.error, expected):
        assert v == pytest.approx(want, rel=1e-10)
        assert 0 <= e < 1e-11 * max(v, 1e-3)
    assert np.all(curve.value > 0)


def test_trace_diff_cylinder_scales_with_length():
    # shorter waists trap more heat: D grows as ell shrinks, at fixed t
    vals = {}
    for ell in (0.2, 0.5, 1.0):
        vals[ell] = float(trace_diff_cylinder(ell, [0.25, 0.5]).value[0])
    assert vals[0.2] > vals[0.5] > vals[1.0] > 0


def test_lower_bound_check():
    v = lower_bound_check(0.3, 0.4)
    assert v == pytest.approx(5.873269771049723, rel=1e-9)
    # widening the time window only adds positive mass
    wide = lower_bound_check(0.3, 0.6)
    assert wide == pytest.approx(6.367402046232975, rel=1e-9)
    assert wide > v
    with pytest.raises(DomainError):
        lower_bound_check(0.5, 0.3)
    with pytest.raises(DomainError):
        lower_bound_check(0.3, 1.2)
    with pytest.raises(DomainError):
        lower_bound_check(0.0, 0.5)


def test_e_h_routes():
    detail = e_h(detail=True)
    assert detail["value"] == pytest.approx(0.05380968825533219, rel=1e-10)
    assert detail["value"] > 0
    diff = abs(detail["route_mellin"] - detail["route_spectral"])
    assert diff < 1e-6
    assert detail["error"] >= diff
    assert e_h() == detail["value"]


def test_e_mu_plane_equals_e_h():
    base = e_h()
    assert e_mu(LimitLaw("plane")) == base
    zero = LimitLaw("cylinder_mixture", [(0.0, 0.5, ("point", 0.0))])
    assert e_mu(zero) == base


def test_e_mu_cylinder_frozen():
    law = LimitLaw("cylinder_mixture", [(1.0, 0.5, ("uniform", -1.0, 1.0))])
    detail = e_mu(law, detail=True)
    assert detail["value"] == pytest.approx(-2.2182810866124916, rel=1e-9)
    assert detail["integral"] == pytest.approx(2.2720907748678236, rel=1e-9)
    assert not detail["diverged"]
    point = LimitLaw("cylinder_mixture", [(0.5, 0.5, ("point", 0.3))])
    assert e_mu(point) == pytest.approx(-1.3332814311988483, rel=1e-9)
    # any cylinder mass strictly lowers the energy
    assert e_mu(point) < e_h()
    # deterministic across calls
    assert e_mu(point) == e_mu(point)


def test_e_mu_divergence_flag():
    law = LimitLaw("cylinder_mixture", [(1.0, 0.05, ("point", 0.0))])
    detail = e_mu(law, detail=True)
    assert detail["diverged"]
    assert detail["value"] == -math.inf
    assert e_mu(law) == -math.inf


def test_limit_law_validation():
    with pytest.raises(DomainError):
        LimitLaw("plane", [(0.5, 0.5, ("point", 0.0))])
    with pytest.raises(DomainError):
        LimitLaw("cylinder_mixture", [(0.7, 0.5, ("point", 0.0)),
                                      (0.6, 0.4, ("point", 0.0))])
    with pytest.raises(DomainError):
        LimitLaw("cylinder_mixture", [(-0.1, 0.5, ("point", 0.0))])
    with pytest.raises(DomainError):
        LimitLaw("cylinder_mixture", [(0.5, -0.5, ("point", 0.0))])
    with pytest.raises(DomainError):
        LimitLaw("cylinder_mixture", [(0.5, 0.5, ("gauss", 0.0))])
    with pytest.raises(DomainError):
        LimitLaw("torus")


def _synthetic_curve(scale=1.0, bump=0.0, bump_index=None):
    ts = default_t_grid(1e-6, 100.0, per_decade=30)
    vals = scale * ts / (1.0 + ts)
    if bump_index is not None:
        vals = vals.copy()
        vals[bump_index] += bump
    errs = np.full(len(ts), 1e-12)
    return HeatTraceCurve(list(zip(ts, vals)), errs, kind="surface_trace_diff")


def test_logdet_reconstruction_and_linearity():
    vol = 4.0 * math.pi
    res = logdet_assemble(_synthetic_curve(), vol)
    recon = (vol * res.term_eh + EULER_GAMMA - res.term_small
             - res.term_large)
    assert res.value == recon
    assert res.volume == vol
    # the assembled value is exactly linear in the curve samples
    base = logdet_assemble(_synthetic_curve(), vol).value
    d1 = logdet_assemble(_synthetic_curve(bump=1e-3, bump_index=60),
                         vol).value - base
    d2 = logdet_assemble(_synthetic_curve(bump=2e-3, bump_index=60),
                         vol).value - base
    assert d2 == pytest.approx(2.0 * d1, rel=1e-9)


def test_logdet_range_checks():
    ts = np.geomspace(1e-3, 60.0, 200)
    vals = ts / (1.0 + ts)
    errs = np.zeros(len(ts))
    short = HeatTraceCurve(list(zip(ts, vals)), errs,
                           kind="surface_trace_diff")
    with pytest.raises(RangeError):
        logdet_assemble(short, 4.0 * math.pi)
    cyl = trace_diff_cylinder(0.5, [0.01, 0.1])
    with pytest.raises(DomainError):
        logdet_assemble(cyl, 4.0 * math.pi)


def test_logdet_result_consistency_guard():
    with pytest.raises(ConsistencyError):
        LogDetResult(value=1.0, volume=4.0 * math.pi, term_eh=0.05,
                     term_gamma0=EULER_GAMMA, term_small=0.1,
                     term_large=-0.4, error_bound=1e-3)


def test_logdet_result_json():
    vol = 4.0 * math.pi
    term_eh = 0.05380968825533219
    value = vol * term_eh + EULER_GAMMA - 0.1 - (-0.4)
    res = LogDetResult(value=value, volume=vol, term_eh=term_eh,
                       term_gamma0=EULER_GAMMA, term_small=0.1,
                       term_large=-0.4, error_bound=2e-3)
    text = res.to_json()
    assert '"value"' in text and '"error_bound"' in text
    import json
    body = json.loads(text)
    assert float(body["value"]) == value
    assert float(body["volume"]) == vol


def test_large_time_bound_check_rejects_short_curve():
    cyl_ts = np.geomspace(1.0, 10.0, 12)
    vals = 1.0 / (1.0 + cyl_ts)
    curve = HeatTraceCurve(list(zip(cyl_ts, vals)), np.zeros(12),
                           kind="surface_trace_diff")
    from hyplab.collar import LengthSpectrum
    spec = LengthSpectrum([3.0], 4.0 * math.pi)
    with pytest.raises(RangeError):
        large_time_bound_check(curve, spec)
