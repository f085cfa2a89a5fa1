"""Upper half-plane hyperbolic geometry.

Points live in H = {x + iy : y > 0} with the metric (dx^2 + dy^2)/y^2.
Orientation-preserving isometries are real 2x2 matrices of determinant one
acting by Mobius transformations z -> (az + b)/(cz + d); the matrices T and
-T act identically, so equality of isometries is always up to a global sign.

Distances use the closed form

    dist(z, w) = arccosh(1 + |z - w|^2 / (2 y_z y_w)),

guarded below by 1 inside arccosh to absorb rounding for near-coincident
points. All arithmetic is 64-bit floating point.
"""

import math

import numpy as np

from .errors import DomainError

# entrywise tolerance for the unit-determinant invariant
DET_TOL = 1e-12

# compositions allowed before the determinant is renormalized; long products
# (BFS words in the fuchsian module) accumulate rounding drift otherwise
_RENORM_AGE = 32


class PlanePoint:
    """A point of the upper half-plane; y must be strictly positive."""

    __slots__ = ("x", "y")

    def __init__(self, x, y):
        x = float(x)
        y = float(y)
        if not (math.isfinite(x) and math.isfinite(y)):
            raise DomainError("plane point coordinates must be finite")
        if not y > 0.0:
            raise DomainError("plane point must have y > 0, got y=%r" % y)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    def __setattr__(self, name, value):
        raise AttributeError("PlanePoint is immutable")

    def as_complex(self):
        return complex(self.x, self.y)

    def __iter__(self):
        return iter((self.x, self.y))

    def __repr__(self):
        return "PlanePoint(%r, %r)" % (self.x, self.y)

    def __eq__(self, other):
        return isinstance(other, PlanePoint) and self.x == other.x and self.y == other.y

    def __hash__(self):
        return hash((self.x, self.y))


class Isometry:
    """A real 2x2 unit-determinant matrix modulo sign.

    The entries are kept as plain floats. `age` counts compositions since
    the last determinant renormalization and is internal bookkeeping.
    """

    __slots__ = ("a", "b", "c", "d", "age")

    def __init__(self, a, b, c, d, age=0, _checked=False):
        a, b, c, d = float(a), float(b), float(c), float(d)
        if not _checked:
            if not all(math.isfinite(v) for v in (a, b, c, d)):
                raise DomainError("isometry entries must be finite")
            det = a * d - b * c
            if abs(det - 1.0) > DET_TOL:
                raise DomainError(
                    "isometry must have unit determinant within %g, got det=%r"
                    % (DET_TOL, det)
                )
        self.a, self.b, self.c, self.d = a, b, c, d
        self.age = age

    @property
    def matrix(self):
        return np.array([[self.a, self.b], [self.c, self.d]])

    @property
    def trace(self):
        return self.a + self.d

    def det(self):
        return self.a * self.d - self.b * self.c

    def same(self, other, tol=1e-12):
        """Entrywise equality up to a global sign."""
        for sign in (1.0, -1.0):
            if (
                abs(self.a - sign * other.a) <= tol
                and abs(self.b - sign * other.b) <= tol
                and abs(self.c - sign * other.c) <= tol
                and abs(self.d - sign * other.d) <= tol
            ):
                return True
        return False

    def __repr__(self):
        return "Isometry(%r, %r, %r, %r)" % (self.a, self.b, self.c, self.d)


def identity():
    return Isometry(1.0, 0.0, 0.0, 1.0, _checked=True)


def rotation_about_i(phi):
    """Elliptic isometry fixing i; rotates the tangent space at i by phi."""
    c = math.cos(phi / 2.0)
    s = math.sin(phi / 2.0)
    return Isometry(c, s, -s, c, _checked=True)


def axis_translation(length):
    """Hyperbolic translation by `length` along the imaginary axis."""
    e = math.exp(length / 2.0)
    return Isometry(e, 0.0, 0.0, 1.0 / e, _checked=True)


def point_to_i(p):
    """Isometry sending p to i (horizontal shift then vertical scaling)."""
    s = math.sqrt(p.y)
    return Isometry(1.0 / s, -p.x / s, 0.0, s, _checked=True)


def dist(p, q):
    """Hyperbolic distance between two points of the upper half-plane."""
    if not isinstance(p, PlanePoint):
        p = PlanePoint(*p)
    if not isinstance(q, PlanePoint):
        q = PlanePoint(*q)
    dx = p.x - q.x
    dy = p.y - q.y
    arg = 1.0 + (dx * dx + dy * dy) / (2.0 * p.y * q.y)
    return math.acosh(max(arg, 1.0))


def apply(T, p):
    """Apply the Mobius transformation T to a point."""
    if not isinstance(p, PlanePoint):
        p = PlanePoint(*p)
    z = complex(p.x, p.y)
    den = T.c * z + T.d
    den2 = den.real * den.real + den.imag * den.imag
    if den2 == 0.0:
        raise DomainError("Mobius denominator vanished at %r" % (p,))
    w = (T.a * z + T.b) / den
    return PlanePoint(w.real, p.y * (T.a * T.d - T.b * T.c) / den2)


def compose(S, T):
    """Matrix product S @ T, with periodic determinant renormalization."""
    a = S.a * T.a + S.b * T.c
    b = S.a * T.b + S.b * T.d
    c = S.c * T.a + S.d * T.c
    d = S.c * T.b + S.d * T.d
    age = max(S.age, T.age) + 1
    if age >= _RENORM_AGE:
        det = a * d - b * c
        s = 1.0 / math.sqrt(det)
        a, b, c, d = a * s, b * s, c * s, d * s
        age = 0
    return Isometry(a, b, c, d, age=age, _checked=True)


def inverse(T):
    return Isometry(T.d, -T.b, -T.c, T.a, age=T.age, _checked=True)


def ball_volume(r):
    """Area of a hyperbolic disc of radius r: 2*pi*(cosh(r) - 1)."""
    if not (isinstance(r, (int, float)) and math.isfinite(r)):
        raise DomainError("radius must be a finite real")
    if r < 0:
        raise DomainError("radius must be nonnegative, got %r" % r)
    return 2.0 * math.pi * (math.cosh(r) - 1.0)


def displacement(T, p):
    """Distance a point is moved by an isometry: dist(p, T p)."""
    return dist(p, apply(T, p))
