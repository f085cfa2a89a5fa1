"""Collar geometry and hyperbolic-cylinder heat kernels.

A closed geodesic of length ell on a hyperbolic surface carries an embedded
collar isometric to the quotient of the plane by the cyclic group generated
by the translation of length ell along a geodesic axis. Points of the
cylinder are coordinatized by (rho, theta): signed distance from the waist
and angle in [0, 2*pi). The circle at height rho has circumference
ell*cosh(rho), so integrals over the cylinder use the measure
(ell / 2*pi) * cosh(rho) drho dtheta, which reduces to
ell * cosh(rho) drho for theta-independent integrands.

All arccosh(1 + x) evaluations go through log1p(x + sqrt(x(2 + x))) with
x assembled from sinh^2 half-angles, never from cosh differences; the
naive route loses eight digits already at ell = 1e-4.
"""

import math

import numpy as np

from .errors import AccuracyError, ConsistencyError, DomainError
from .geometry import PlanePoint
from .plane_kernel import (
    DEFAULT_CFG,
    majorant_step_factor,
    p_plane_array,
    p_plane_majorant,
)
from .quadrature import gauss_legendre

_ARCSINH1 = math.asinh(1.0)
MAX_COLLAR_ELL = 2.0 * _ARCSINH1


def _acosh1p(x):
    """arccosh(1 + x) for x >= 0 without cancellation."""
    x = np.asarray(x, dtype=float)
    out = np.log1p(x + np.sqrt(x * (2.0 + x)))
    return out if out.ndim else float(out)


def collar_width(ell):
    """Half-width of the maximal embedded collar: arcsinh(1/sinh(ell/2))."""
    if ell <= 0 or not math.isfinite(ell):
        raise DomainError("geodesic length must be positive, got %r" % ell)
    return math.asinh(1.0 / math.sinh(ell / 2.0))


class CollarSpec:
    """Waist length together with the collar half-width it determines.

    `flagged` is True when ell exceeds 2*arcsinh(1); such collars are legal
    but outside the short-geodesic range the two-sided estimates target.
    """

    __slots__ = ("ell", "half_width", "flagged")

    def __init__(self, ell, half_width=None):
        w = collar_width(ell)
        if half_width is not None and abs(half_width - w) > 1e-12:
            raise ConsistencyError(
                "half_width %r does not match arcsinh(1/sinh(ell/2)) = %r" % (half_width, w),
                values=(half_width, w),
            )
        object.__setattr__(self, "ell", float(ell))
        object.__setattr__(self, "half_width", w)
        object.__setattr__(self, "flagged", bool(ell > MAX_COLLAR_ELL))

    def __setattr__(self, name, value):
        raise AttributeError("CollarSpec is immutable")

    def __repr__(self):
        return "CollarSpec(ell=%r, half_width=%r)" % (self.ell, self.half_width)


class CylinderPoint:
    """Point of the cylinder: signed waist distance rho, angle theta.

    theta is reduced mod 2*pi into [0, 2*pi). When a CollarSpec is supplied
    the point must lie inside the collar, |rho| <= half_width.
    """

    __slots__ = ("rho", "theta")

    def __init__(self, rho, theta, collar=None):
        rho = float(rho)
        theta = float(theta)
        if not (math.isfinite(rho) and math.isfinite(theta)):
            raise DomainError("cylinder coordinates must be finite")
        theta = theta % (2.0 * math.pi)
        if collar is not None and abs(rho) > collar.half_width + 1e-12:
            raise DomainError(
                "rho=%r outside collar of half-width %r" % (rho, collar.half_width)
            )
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "theta", theta)

    def __setattr__(self, name, value):
        raise AttributeError("CylinderPoint is immutable")

    def __repr__(self):
        return "CylinderPoint(rho=%r, theta=%r)" % (self.rho, self.theta)


class LengthSpectrum:
    """Sorted primitive geodesic lengths with the surface volume."""

    __slots__ = ("lengths", "volume")

    def __init__(self, lengths, volume):
        vals = [float(x) for x in lengths]
        if any(not math.isfinite(x) or x <= 0 for x in vals):
            raise DomainError("lengths must be finite and positive")
        if not (math.isfinite(volume) and volume > 0):
            raise DomainError("volume must be positive, got %r" % volume)
        object.__setattr__(self, "lengths", tuple(sorted(vals)))
        object.__setattr__(self, "volume", float(volume))

    def __setattr__(self, name, value):
        raise AttributeError("LengthSpectrum is immutable")

    @classmethod
    def from_file(cls, path):
        """Parse the plain-text format: line 1 `volume <real>`, then one
        length per line. Blank lines and `#` comments are skipped."""
        volume = None
        lengths = []
        with open(path) as fh:
            for raw in fh:
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if volume is None:
                    parts = line.split()
                    if len(parts) != 2 or parts[0] != "volume":
                        raise DomainError(
                            "first data line must be 'volume <real>', got %r" % raw.strip()
                        )
                    volume = float(parts[1])
                    continue
                lengths.append(float(line))
        if volume is None:
            raise DomainError("empty length spectrum file %r" % path)
        return cls(lengths, volume)


def l_eta(spec, eta):
    """Short-geodesic statistic: (1/volume) * sum of 1/ell over ell <= eta."""
    if not (math.isfinite(eta) and eta > 0):
        raise DomainError("eta must be positive, got %r" % eta)
    return sum(1.0 / x for x in spec.lengths if x <= eta) / spec.volume


def inj_radius_cylinder(rho, ell):
    """Injectivity radius of the cylinder at waist distance rho:
    (1/2) arccosh(1 + (cosh(ell) - 1) cosh(rho)^2)."""
    if ell <= 0 or not math.isfinite(ell):
        raise DomainError("geodesic length must be positive, got %r" % ell)
    rho = np.asarray(rho, dtype=float)
    x = 2.0 * math.sinh(ell / 2.0) ** 2 * np.cosh(rho) ** 2
    return 0.5 * _acosh1p(x)


def _logcosh(rho):
    r = abs(rho)
    return r + math.log1p(math.exp(-2.0 * r)) - math.log(2.0)


def translate_distance(rho, ell, k):
    """Distance from a point at waist distance rho to its k-th translate:
    arccosh(1 + (cosh(k ell) - 1) cosh(rho)^2). Always >= |k| ell."""
    if ell <= 0 or not math.isfinite(ell):
        raise DomainError("geodesic length must be positive, got %r" % ell)
    if k == 0:
        raise DomainError("translate index k must be nonzero")
    half = abs(k) * ell / 2.0
    if half > 300.0:
        # sinh^2 would overflow; the exact expression is within 1e-260 of
        # the asymptote |k| ell + 2 log cosh(rho) here
        return abs(k) * ell + 2.0 * _logcosh(float(rho))
    x = 2.0 * math.sinh(half) ** 2 * math.cosh(float(rho)) ** 2
    return float(_acosh1p(x))


def boundary_inj(ell, d):
    """Injectivity radius at distance d outside the collar boundary:
    arcsinh(cosh(ell/2) cosh(d) - sinh(d))."""
    if ell <= 0 or not math.isfinite(ell):
        raise DomainError("geodesic length must be positive, got %r" % ell)
    if d < 0 or not math.isfinite(d):
        raise DomainError("distance must be nonnegative, got %r" % d)
    return math.asinh(math.cosh(ell / 2.0) * math.cosh(d) - math.sinh(d))


def cylinder_lift(point, ell):
    """Lift a cylinder point to the upper half plane.

    The deck translation is diag(e^{ell/2}, e^{-ell/2}) with axis the
    positive imaginary axis; theta = 0 lifts to the unit semicircle and
    rho > 0 sits at x > 0.
    """
    r = math.exp(ell * point.theta / (2.0 * math.pi))
    phi = math.pi / 2.0 - math.atan(math.sinh(point.rho))
    return PlanePoint(r * math.cos(phi), r * math.sin(phi))


def cylinder_cosh_distances(p, q, ell, ks):
    """cosh of the plane distance from a lift of p to the k-shifted lifts
    of q, for each k in ks; closed form
    cosh d = cosh(rho1) cosh(rho2) cosh(delta_k) - sinh(rho1) sinh(rho2),
    delta_k = ell ((theta2 - theta1)/2pi + k)."""
    ks = np.asarray(ks, dtype=float)
    delta = ell * ((q.theta - p.theta) / (2.0 * math.pi) + ks)
    a = math.cosh(p.rho) * math.cosh(q.rho)
    b = math.sinh(p.rho) * math.sinh(q.rho)
    return a * np.cosh(delta) - b


def cylinder_distance(p, q, ell):
    """Quotient distance on the cylinder: minimum over deck translates."""
    if ell <= 0 or not math.isfinite(ell):
        raise DomainError("geodesic length must be positive, got %r" % ell)
    frac = (q.theta - p.theta) / (2.0 * math.pi)
    ks = (-math.floor(frac), -math.floor(frac) - 1)
    c = cylinder_cosh_distances(p, q, ell, ks)
    best = float(np.min(c))
    return float(_acosh1p(max(best - 1.0, 0.0)))


def _image_sum(t, p, q, ell, cfg, skip_zero):
    """Certified sum over deck translates of the plane kernel.

    The k-th image sits at axial offset delta_k = ell(frac + k) growing by
    exactly ell per step, and the plane distance dominates |delta_k|; once
    the offsets pass t the kernel majorant closes the tail geometrically.
    """
    total = 0.0
    if not skip_zero:
        c0 = float(cylinder_cosh_distances(p, q, ell, [0])[0])
        total += p_plane_array(t, float(_acosh1p(max(c0 - 1.0, 0.0))), cfg)
    frac = (q.theta - p.theta) / (2.0 * math.pi)
    next_k = 1
    block = 16
    cap = int(max(64, 40.0 * (1.0 + t / ell))) + 2
    while True:
        ks = np.arange(next_k, next_k + block)
        c = cylinder_cosh_distances(p, q, ell, np.concatenate([ks, -ks]))
        d = _acosh1p(np.maximum(c - 1.0, 0.0))
        total += float(np.sum(p_plane_array(t, d, cfg)))
        next_k += block
        # both omitted sides have axial offset at least ell*(next_k - 1)
        d_next = ell * (next_k - 1.0)
        if d_next > t + ell:
            ratio = majorant_step_factor(t, d_next, ell)
            tail = 2.0 * p_plane_majorant(t, d_next) / (1.0 - ratio)
            if tail <= max(cfg.rel_tol * abs(total), 1e-300):
                return total, tail
        if next_k > cap:
            raise AccuracyError(
                "image sum not certified after %d translates (t=%r, ell=%r)"
                % (next_k, t, ell),
                estimate=total,
            )


def cylinder_heat_kernel(t, p, q, ell, cfg=None):
    """Heat kernel of the cylinder between two points, by method of images."""
    cfg = cfg or DEFAULT_CFG
    if t <= 0 or not math.isfinite(t):
        raise DomainError("time must be positive, got %r" % t)
    val, _ = _image_sum(t, p, q, ell, cfg, skip_zero=False)
    return val


def cylinder_heat_kernel_grid(t, p, rhos, thetas, ell, cfg=None, atol=1e-12):
    """Kernel from the point p to the whole (rho, theta) grid at once.

    Returns an array of shape (len(rhos), len(thetas)). The image range is
    fixed across the grid: every grid point has axial offset at least
    ell*(K-1) from its K-th image, so one majorant tail bound (absolute
    tolerance atol) certifies the truncation for all of them.
    """
    cfg = cfg or DEFAULT_CFG
    if t <= 0 or not math.isfinite(t):
        raise DomainError("time must be positive, got %r" % t)
    kmax = 1
    while True:
        kmax += 8
        d_next = ell * (kmax - 1.0)
        if d_next > t + ell:
            ratio = majorant_step_factor(t, d_next, ell)
            if 2.0 * p_plane_majorant(t, d_next) / (1.0 - ratio) <= atol:
                break
        if kmax > 100000:
            raise AccuracyError("image range for grid kernel not certified")
    rhos = np.asarray(rhos, dtype=float)
    thetas = np.asarray(thetas, dtype=float)
    ks = np.arange(-kmax, kmax + 1)
    delta = ell * ((thetas[None, :] - p.theta) / (2.0 * math.pi) + ks[:, None])
    a = math.cosh(p.rho) * np.cosh(rhos)
    b = math.sinh(p.rho) * np.sinh(rhos)
    out = np.zeros((rhos.size, thetas.size))
    cosh_delta = np.cosh(delta)
    for i in range(rhos.size):
        c = a[i] * cosh_delta - b[i]
        d = _acosh1p(np.maximum(c - 1.0, 0.0))
        out[i] = np.sum(
            p_plane_array(t, d.ravel(), cfg).reshape(d.shape), axis=0
        )
    return out


def cylinder_heat_diag(t, rho, ell, cfg=None):
    """Diagonal excess over the plane: sum over k != 0 of
    p_plane(t, translate_distance(rho, ell, k)), certified truncation.

    Successive translate distances increase by at least ell, so the kernel
    majorant sums the omitted tail geometrically once the distances pass t.
    """
    cfg = cfg or DEFAULT_CFG
    if t <= 0 or not math.isfinite(t):
        raise DomainError("time must be positive, got %r" % t)
    if ell <= 0 or not math.isfinite(ell):
        raise DomainError("geodesic length must be positive, got %r" % ell)
    rho = float(rho)
    total = 0.0
    k0 = 1
    block = 16
    cap = int(max(64, 40.0 * (1.0 + t / ell))) + 2
    while True:
        ds = np.array([translate_distance(rho, ell, k) for k in range(k0, k0 + block)])
        total += 2.0 * float(np.sum(p_plane_array(t, ds, cfg)))
        k0 += block
        d_next = translate_distance(rho, ell, k0)
        if d_next > t + ell:
            ratio = majorant_step_factor(t, d_next, ell)
            tail = 2.0 * p_plane_majorant(t, d_next) / (1.0 - ratio)
            if tail <= max(cfg.rel_tol * abs(total), 1e-300):
                return total
        if k0 > cap:
            raise AccuracyError(
                "image sum not certified after %d translates (t=%r, ell=%r)" % (k0, t, ell),
                estimate=total,
            )


def _collar_breakpoints(ell, w):
    """Panel endpoints in rho for collar integrals: geometric refinement
    toward the waist plus the kink where the injectivity radius crosses 1."""
    pts = {0.0, w}
    x = w
    while x > min(ell, 1e-3) / 4.0:
        x /= 2.0
        pts.add(x)
    # kink of min(inj, 1): inj = 1 when (cosh ell - 1) cosh(rho)^2 = cosh 2 - 1
    arg = (math.cosh(2.0) - 1.0) / (math.cosh(ell) - 1.0)
    if arg >= 1.0:
        rho1 = math.acosh(math.sqrt(arg))
        if 0.0 < rho1 < w:
            pts.add(rho1)
    return sorted(pts)


def collar_inj_integrals(ell, rel_tol=1e-6):
    """Collar integrals of 1/inj and 1/min(inj^2, 1) with the measure
    ell cosh(rho) drho (theta already integrated out).

    Returns (int_inv_inj, int_inv_inj_sq). Panels refine geometrically
    toward the waist; each is evaluated at two Gauss orders and the
    difference certifies the requested relative error.
    """
    if not 0.0 < ell <= MAX_COLLAR_ELL:
        raise DomainError("ell must lie in (0, 2 arcsinh 1], got %r" % ell)
    w = collar_width(ell)
    pts = _collar_breakpoints(ell, w)
    x32, w32 = gauss_legendre(32)
    x64, w64 = gauss_legendre(64)
    vals = np.zeros(2)
    errs = np.zeros(2)

    def panel(a, b, x, wt):
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        rho = mid + half * x
        inj = inj_radius_cylinder(rho, ell)
        base = 2.0 * ell * np.cosh(rho) * half
        f1 = base / inj
        f2 = base / np.minimum(inj, 1.0) ** 2
        return np.array([np.dot(f1, wt), np.dot(f2, wt)])

    for a, b in zip(pts[:-1], pts[1:]):
        coarse = panel(a, b, x32, w32)
        fine = panel(a, b, x64, w64)
        vals += fine
        errs += np.abs(fine - coarse)
    if np.any(errs > rel_tol * np.abs(vals)):
        raise AccuracyError(
            "collar integrals missed rel_tol=%g at ell=%r" % (rel_tol, ell),
            estimate=tuple(vals), error_bound=tuple(errs),
        )
    return float(vals[0]), float(vals[1])
