import math

import numpy as np
import pytest

from hyplab import geometry
from hyplab.collar import (
    MAX_COLLAR_ELL,
    CylinderPoint,
    LengthSpectrum,
    collar_inj_integrals,
    collar_width,
    cylinder_cosh_distances,
    cylinder_distance,
    cylinder_heat_diag,
    cylinder_heat_kernel,
    cylinder_heat_kernel_grid,
    cylinder_lift,
    inj_radius_cylinder,
    l_eta,
    translate_distance,
)
from hyplab.errors import DomainError
from hyplab.plane_kernel import p_plane


def test_collar_width_frozen():
    assert collar_width(0.5) == pytest.approx(2.0846309693248757, rel=1e-13)
    assert collar_width(1e-3) == pytest.approx(8.294049660935361, rel=1e-13)
    with pytest.raises(DomainError):
        collar_width(0.0)
    # widths grow like log(1/ell) as the geodesic shrinks
    assert collar_width(1e-6) - collar_width(1e-3) == pytest.approx(
        math.log(1e3), abs=1e-2)


def test_inj_radius():
    assert float(inj_radius_cylinder(1.0, 0.5)) == pytest.approx(
        0.38054938043039016, rel=1e-13)
    # on the core geodesic the injectivity radius is half the length
    for ell in (1e-4, 0.01, 0.5, 1.5):
        assert float(inj_radius_cylinder(0.0, ell)) == pytest.approx(
            ell / 2.0, rel=1e-10)
    # half the distance to the nearest translate, which is the k=1 one
    rng = np.random.default_rng(61)
    for _ in range(50):
        ell = float(rng.uniform(0.01, 1.5))
        rho = float(rng.uniform(0.0, collar_width(min(ell, MAX_COLLAR_ELL))))
        inj = float(inj_radius_cylinder(rho, ell))
        assert inj == pytest.approx(
            0.5 * translate_distance(rho, ell, 1), rel=1e-12)
        assert translate_distance(rho, ell, 2) >= 2.0 * inj - 1e-12


def test_inj_comparable_to_ell_cosh_rho():
    rng = np.random.default_rng(4444)
    for _ in range(300):
        ell = float(rng.uniform(1e-4, MAX_COLLAR_ELL))
        rho = float(rng.uniform(0.0, collar_width(ell)))
        ratio = float(inj_radius_cylinder(rho, ell)) / (ell * math.cosh(rho))
        assert 0.125 <= ratio <= 0.5 + 1e-12


def test_translate_distance():
    assert translate_distance(0.7, 0.5, 3) == pytest.approx(
        1.8078457741309355, rel=1e-13)
    with pytest.raises(DomainError):
        translate_distance(0.5, 0.5, 0)
    rng = np.random.default_rng(314)
    for _ in range(100):
        ell = float(rng.uniform(0.01, 1.5))
        rho = float(rng.uniform(0.0, 6.0))
        k = int(rng.integers(1, 40))
        d = translate_distance(rho, ell, k)
        assert d == translate_distance(rho, ell, -k)
        assert d >= k * ell - 1e-12
        # closed form, evaluated directly where it cannot overflow
        direct = math.acosh(
            1.0 + (math.cosh(k * ell) - 1.0) * math.cosh(rho) ** 2)
        assert d == pytest.approx(direct, rel=1e-11)


def test_translate_distance_large_k():
    # the overflow-safe branch continues the closed form smoothly
    d1 = translate_distance(2.0, 0.5, 100)
    assert d1 == pytest.approx(100 * 0.5 + 2.0 * math.log(math.cosh(2.0)),
                               abs=1e-8)
    d2 = translate_distance(5.0, 0.3, 5000)
    assert math.isfinite(d2) and d2 > 1500.0


def test_cylinder_point_normalization():
    p = CylinderPoint(0.5, 2.0 * math.pi + 0.3)
    assert p.theta == pytest.approx(0.3, abs=1e-12)
    q = CylinderPoint(0.5, -0.1)
    assert q.theta == pytest.approx(2.0 * math.pi - 0.1, abs=1e-12)


def test_cylinder_distance_metric_properties():
    rng = np.random.default_rng(2718)
    ell = 0.7
    for _ in range(100):
        p = CylinderPoint(rng.uniform(-2, 2), rng.uniform(0, 6.28))
        q = CylinderPoint(rng.uniform(-2, 2), rng.uniform(0, 6.28))
        r = CylinderPoint(rng.uniform(-2, 2), rng.uniform(0, 6.28))
        dpq = cylinder_distance(p, q, ell)
        assert dpq == pytest.approx(cylinder_distance(q, p, ell), rel=1e-12)
        # arccosh near 1 costs half the digits, so coincident points can
        # read as ~1e-8 apart
        assert cylinder_distance(p, p, ell) < 1e-7
        assert dpq <= (cylinder_distance(p, r, ell)
                       + cylinder_distance(r, q, ell) + 1e-9)
    p = CylinderPoint(0.4, 1.0)
    q = CylinderPoint(-0.3, 1.0 + 2.0 * math.pi)
    assert cylinder_distance(p, q, ell) == pytest.approx(
        cylinder_distance(p, CylinderPoint(-0.3, 1.0), ell), rel=1e-12)


def test_cylinder_distance_frozen():
    p = CylinderPoint(0.5, 0.5)
    q = CylinderPoint(0.0, 0.0)
    assert cylinder_distance(p, q, 0.5) == pytest.approx(
        0.5017099857906409, rel=1e-13)


def test_lift_matches_quotient_geometry():
    # distances computed from the closed form must agree with half-plane
    # distances between lifts, translate by translate
    rng = np.random.default_rng(11)
    for _ in range(40):
        ell = float(rng.uniform(0.2, 1.5))
        p = CylinderPoint(rng.uniform(-1.5, 1.5), rng.uniform(0, 6.28))
        q = CylinderPoint(rng.uniform(-1.5, 1.5), rng.uniform(0, 6.28))
        zp = cylinder_lift(p, ell)
        zq = cylinder_lift(q, ell)
        ks = np.array([-2, -1, 0, 1, 2])
        coshd = cylinder_cosh_distances(p, q, ell, ks)
        for k, c in zip(ks, coshd):
            T = geometry.axis_translation(float(k) * ell)
            direct = geometry.dist(zp, geometry.apply(T, zq))
            assert math.acosh(max(c, 1.0)) == pytest.approx(
                direct, rel=1e-9, abs=1e-9)


def test_cylinder_heat_kernel_frozen_and_symmetry():
    p = CylinderPoint(0.5, 0.5)
    q = CylinderPoint(0.0, 0.0)
    v = cylinder_heat_kernel(0.5, p, q, 0.5)
    assert v == pytest.approx(0.5278017209873511, rel=1e-11)
    assert cylinder_heat_kernel(0.5, q, p, 0.5) == pytest.approx(v, rel=1e-12)


def test_cylinder_heat_kernel_vs_brute_force():
    # independent oracle: direct image sum over a wide symmetric window
    p = CylinderPoint(0.5, 0.5)
    q = CylinderPoint(0.0, 0.0)
    for t, ell in ((0.25, 0.5), (1.0, 0.5), (0.5, 1.2)):
        ks = np.arange(-400, 401)
        coshd = cylinder_cosh_distances(p, q, ell, ks)
        brute = sum(p_plane(t, math.acosh(max(c, 1.0))) for c in coshd)
        assert cylinder_heat_kernel(t, p, q, ell) == pytest.approx(
            brute, rel=1e-9)


def test_cylinder_heat_kernel_grid_matches_pointwise():
    rhos = np.linspace(-1.0, 1.0, 5)
    thetas = np.linspace(0.0, 5.0, 4)
    p = CylinderPoint(0.3, 0.7)
    grid = cylinder_heat_kernel_grid(0.6, p, rhos, thetas, 0.8)
    assert grid.shape == (5, 4)
    for i, rho in enumerate(rhos):
        for j, th in enumerate(thetas):
            q = CylinderPoint(float(rho), float(th))
            assert grid[i, j] == pytest.approx(
                cylinder_heat_kernel(0.6, p, q, 0.8), rel=1e-9)


def test_cylinder_heat_diag():
    # the diagonal excess is the full quotient kernel minus the plane term
    for t, rho, ell in ((0.3, 0.0, 0.5), (1.0, 1.2, 0.5), (0.5, 0.5, 0.2)):
        p = CylinderPoint(rho, 0.0)
        full = cylinder_heat_kernel(t, p, p, ell)
        excess = cylinder_heat_diag(t, rho, ell)
        assert excess > 0
        assert full - p_plane(t, 0.0) == pytest.approx(excess, rel=1e-9)


def test_collar_inj_integrals_frozen():
    i1, i2 = collar_inj_integrals(1e-2)
    assert i1 == pytest.approx(24.263123854700112, rel=1e-9)
    assert i2 == pytest.approx(1253.8896395396362, rel=1e-9)
    with pytest.raises(DomainError):
        collar_inj_integrals(MAX_COLLAR_ELL * 1.5)


def test_collar_integral_scaling_laws():
    # int 1/inj grows like log(1/ell); ell * int 1/min(inj,1)^2 stays bounded
    vals = {ell: collar_inj_integrals(ell) for ell in (1e-2, 1e-4)}
    r1 = {ell: vals[ell][0] / math.log(1.0 / ell) for ell in vals}
    assert 0.5 <= r1[1e-4] / r1[1e-2] <= 2.0
    r2 = {ell: ell * vals[ell][1] for ell in vals}
    assert 0.5 <= r2[1e-4] / r2[1e-2] <= 2.0


def test_length_spectrum():
    spec = LengthSpectrum([0.5, 1.0, 3.0], 4.0 * math.pi)
    assert spec.lengths == (0.5, 1.0, 3.0)
    assert l_eta(spec, 1.0) == pytest.approx(3.0 / (4.0 * math.pi), rel=1e-13)
    assert l_eta(spec, 0.1) == 0.0
    with pytest.raises(DomainError):
        LengthSpectrum([0.0], 1.0)
    with pytest.raises(DomainError):
        LengthSpectrum([1.0], -2.0)
    with pytest.raises(DomainError):
        l_eta(spec, 0.0)


def test_length_spectrum_file_roundtrip(tmp_path):
    path = tmp_path / "spec.txt"
    path.write_text("volume 12.566370614359172\n0.75\n1.5\n2.25\n")
    spec = LengthSpectrum.from_file(str(path))
    assert spec.volume == pytest.approx(12.566370614359172, rel=1e-15)
    assert spec.lengths == (0.75, 1.5, 2.25)
