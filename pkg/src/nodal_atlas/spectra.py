"""Laplacian eigenfunctions on the unit square (Dirichlet) and the flat torus.

Square eigenfunctions are finite sums ``sum c * sin(pi a x) sin(pi b y)`` over
one lattice circle ``a^2 + b^2 = m`` with ``a, b >= 1``; the eigenvalue is
``pi^2 m``.  Torus eigenfunctions are Fourier sums
``sum c * exp(2 pi i (a x + b y))`` over ``a^2 + b^2 = n`` with conjugate
symmetric coefficients; the eigenvalue is ``4 pi^2 n``.

All evaluation is by exact trigonometric sums.  Scalars and numpy arrays are
accepted everywhere and broadcast together.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import gcd
from typing import Iterable, Union

import numpy as np

from .errors import (
    EmptySpectrum,
    InvalidPair,
    MixedEigenvalue,
    NodalAtlasError,
    NotAnEigenvalue,
    NotRealValued,
)

PI = math.pi
TWO_PI = 2.0 * math.pi

#: 2/pi, the conjectured sharp limit of N/j on the square.
POLTEROVICH_CONSTANT = 0.6366197724
#: (2/j_{0,1})^2, stored as a literal rather than recomputed from J_0.
PLEIJEL_CONSTANT = 0.6916602761
#: Bourgain's improvement over the Pleijel constant; display only.
BOURGAIN_DECREMENT = 3e-9

SQUARE = "square"
TORUS = "torus"


@dataclass(frozen=True)
class SquareEigenfunction:
    m: int
    terms: tuple  # of (a, b, coefficient)
    lam: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "lam", PI * PI * self.m)

    domain = SQUARE

    @property
    def a(self):
        return np.array([t[0] for t in self.terms], dtype=float)

    @property
    def b(self):
        return np.array([t[1] for t in self.terms], dtype=float)

    @property
    def coefficients(self):
        return np.array([t[2] for t in self.terms], dtype=float)

    @property
    def amplitude(self) -> float:
        """Sup-norm bound ``sum |c|``; the scale for every relative tolerance."""
        return float(np.abs(self.coefficients).sum())

    @property
    def wavenumber(self) -> float:
        """``sqrt(lambda)/pi``, the largest frequency along either axis."""
        return math.sqrt(self.m)

    def l2_norm(self) -> float:
        return 0.5 * float(np.sqrt((self.coefficients ** 2).sum()))

    def normalized(self) -> "SquareEigenfunction":
        s = 1.0 / self.l2_norm()
        return SquareEigenfunction(self.m, tuple((a, b, c * s) for a, b, c in self.terms))


@dataclass(frozen=True)
class TorusEigenfunction:
    n: int
    terms: tuple  # of (a, b, complex coefficient)
    lam: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "lam", 4.0 * PI * PI * self.n)

    domain = TORUS

    @property
    def a(self):
        return np.array([t[0] for t in self.terms], dtype=float)

    @property
    def b(self):
        return np.array([t[1] for t in self.terms], dtype=float)

    @property
    def coefficients(self):
        return np.array([t[2] for t in self.terms], dtype=complex)

    @property
    def amplitude(self) -> float:
        return float(np.abs(self.coefficients).sum())

    @property
    def coefficient_norm(self) -> float:
        return float(np.sqrt((np.abs(self.coefficients) ** 2).sum()))

    @property
    def wavenumber(self) -> float:
        return 2.0 * math.sqrt(self.n)

    def l2_norm(self) -> float:
        return self.coefficient_norm

    def normalized(self) -> "TorusEigenfunction":
        s = 1.0 / self.l2_norm()
        return TorusEigenfunction(self.n, tuple((a, b, c * s) for a, b, c in self.terms))


Eigenfunction = Union[SquareEigenfunction, TorusEigenfunction]


def _collect(terms, allow_nonpositive):
    terms = list(terms)
    if not terms:
        raise EmptySpectrum("no terms given")
    radii = {int(a) ** 2 + int(b) ** 2 for a, b, *_ in terms}
    if len(radii) > 1:
        raise MixedEigenvalue(f"terms lie on different circles a^2+b^2 in {sorted(radii)}")
    seen = set()
    for a, b, *_ in terms:
        if not allow_nonpositive and (a < 1 or b < 1):
            raise NodalAtlasError(f"square terms need a, b >= 1, got ({a}, {b})")
        if (a, b) in seen:
            raise NodalAtlasError(f"duplicate term ({a}, {b})")
        seen.add((a, b))
    return radii.pop()


def make_square_eigenfunction(terms: Iterable, normalize: bool = False) -> SquareEigenfunction:
    """Validate ``[(a, b, coefficient), ...]`` into a square eigenfunction.

    Zero coefficients are dropped; at least one must remain.
    """
    terms = [(int(a), int(b), float(c)) for a, b, c in terms]
    m = _collect(terms, allow_nonpositive=False)
    kept = tuple((a, b, c) for a, b, c in terms if c != 0.0)
    if not kept:
        raise EmptySpectrum("all coefficients are zero")
    f = SquareEigenfunction(m, kept)
    return f.normalized() if normalize else f


def make_torus_eigenfunction(terms: Iterable, normalize: bool = False) -> TorusEigenfunction:
    """Validate ``[(a, b, coefficient), ...]`` into a real torus eigenfunction.

    The coefficient at ``(-a, -b)`` must be the conjugate of the one at
    ``(a, b)``; a missing partner counts as zero.
    """
    terms = [(int(a), int(b), complex(c)) for a, b, c in terms]
    n = _collect(terms, allow_nonpositive=True)
    coef = {(a, b): c for a, b, c in terms}
    scale = math.sqrt(sum(abs(c) ** 2 for c in coef.values()))
    if scale == 0.0:
        raise EmptySpectrum("all coefficients are zero")
    for (a, b), c in coef.items():
        partner = coef.get((-a, -b), 0.0)
        if abs(partner - c.conjugate()) > 1e-12 * scale:
            raise NotRealValued(f"coefficient at ({-a}, {-b}) is not the conjugate of ({a}, {b})")
    kept = tuple(sorted(((a, b, c) for (a, b), c in coef.items() if c != 0), key=lambda t: (t[0], t[1])))
    f = TorusEigenfunction(n, kept)
    return f.normalized() if normalize else f


def deformation_family(a: int, b: int, t: float) -> SquareEigenfunction:
    """``sin(pi a x) sin(pi b y) + t sin(pi b x) sin(pi a y)`` for coprime ``a != b``."""
    if a < 1 or b < 1 or a == b or gcd(a, b) != 1:
        raise InvalidPair(f"need distinct coprime positive integers, got ({a}, {b})")
    return make_square_eigenfunction([(a, b, 1.0), (b, a, float(t))])


def square_product(a: int, b: int) -> SquareEigenfunction:
    return make_square_eigenfunction([(a, b, 1.0)])


def torus_plane_wave(a: int, b: int, phase: float = 0.0) -> TorusEigenfunction:
    """``cos(2 pi (a x + b y) + phase)``."""
    if a == 0 and b == 0:
        return make_torus_eigenfunction([(0, 0, math.cos(phase))])
    c = 0.5 * complex(math.cos(phase), math.sin(phase))
    return make_torus_eigenfunction([(a, b, c), (-a, -b, c.conjugate())])


def torus_product(a: int, b: int) -> TorusEigenfunction:
    """``sin(2 pi a x) sin(2 pi b y)`` as a Fourier sum over ``(+-a, +-b)``."""
    if a < 1 or b < 1:
        raise InvalidPair("torus_product needs a, b >= 1")
    return make_torus_eigenfunction(
        [(a, b, -0.25), (a, -b, 0.25), (-a, b, 0.25), (-a, -b, -0.25)]
    )


# ---------------------------------------------------------------------------
# evaluation


def evaluate(f: Eigenfunction, x, y):
    """Pointwise value; the torus is evaluated through its periodic extension."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if f.domain == SQUARE:
        out = np.zeros(np.broadcast(x, y).shape)
        for a, b, c in f.terms:
            out = out + c * np.sin(PI * a * x) * np.sin(PI * b * y)
        return out if out.ndim else float(out)
    out = evaluate_complex(f, x, y).real
    return out if out.ndim else float(out)


def evaluate_complex(f: TorusEigenfunction, x, y):
    """The raw Fourier sum; its imaginary part is rounding noise."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    out = np.zeros(np.broadcast(x, y).shape, dtype=complex)
    for a, b, c in f.terms:
        out = out + c * np.exp(1j * TWO_PI * (a * x + b * y))
    return out


def gradient(f: Eigenfunction, x, y):
    """Exact partial derivatives ``(d/dx, d/dy)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    shape = np.broadcast(x, y).shape
    if f.domain == SQUARE:
        gx = np.zeros(shape)
        gy = np.zeros(shape)
        for a, b, c in f.terms:
            sx, cx = np.sin(PI * a * x), np.cos(PI * a * x)
            sy, cy = np.sin(PI * b * y), np.cos(PI * b * y)
            gx = gx + c * PI * a * cx * sy
            gy = gy + c * PI * b * sx * cy
    else:
        gx = np.zeros(shape, dtype=complex)
        gy = np.zeros(shape, dtype=complex)
        for a, b, c in f.terms:
            e = c * np.exp(1j * TWO_PI * (a * x + b * y))
            gx = gx + 1j * TWO_PI * a * e
            gy = gy + 1j * TWO_PI * b * e
        gx, gy = gx.real, gy.real
    if not shape:
        return float(gx), float(gy)
    return gx, gy


def hessian(f: Eigenfunction, x, y):
    """Exact second derivatives ``(fxx, fxy, fyy)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    shape = np.broadcast(x, y).shape
    if f.domain == SQUARE:
        hxx = np.zeros(shape)
        hxy = np.zeros(shape)
        hyy = np.zeros(shape)
        for a, b, c in f.terms:
            sx, cx = np.sin(PI * a * x), np.cos(PI * a * x)
            sy, cy = np.sin(PI * b * y), np.cos(PI * b * y)
            hxx = hxx - c * (PI * a) ** 2 * sx * sy
            hyy = hyy - c * (PI * b) ** 2 * sx * sy
            hxy = hxy + c * PI * a * PI * b * cx * cy
        out = (hxx, hxy, hyy)
    else:
        hxx = np.zeros(shape, dtype=complex)
        hxy = np.zeros(shape, dtype=complex)
        hyy = np.zeros(shape, dtype=complex)
        for a, b, c in f.terms:
            e = c * np.exp(1j * TWO_PI * (a * x + b * y))
            hxx = hxx - (TWO_PI * a) ** 2 * e
            hyy = hyy - (TWO_PI * b) ** 2 * e
            hxy = hxy - TWO_PI * a * TWO_PI * b * e
        out = (hxx.real, hxy.real, hyy.real)
    if not shape:
        return tuple(float(v) for v in out)
    return out


def laplacian(f: Eigenfunction, x, y):
    hxx, _, hyy = hessian(f, x, y)
    return np.asarray(hxx) + np.asarray(hyy)


def evaluate_grid(f: Eigenfunction, xs, ys):
    """Values on the tensor grid ``xs x ys`` (shape ``(len(xs), len(ys))``).

    Uses one matrix product per call instead of a loop over grid points.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if f.domain == SQUARE:
        A = np.sin(PI * np.outer(xs, f.a)) * f.coefficients
        B = np.sin(PI * np.outer(ys, f.b))
        return A @ B.T
    A = np.exp(1j * TWO_PI * np.outer(xs, f.a)) * f.coefficients
    B = np.exp(1j * TWO_PI * np.outer(ys, f.b))
    return (A @ B.T).real


def gradient_grid(f: Eigenfunction, xs, ys):
    """Exact partial derivatives on the tensor grid ``xs x ys``."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if f.domain == SQUARE:
        ax, by = PI * np.outer(xs, f.a), PI * np.outer(ys, f.b)
        c = f.coefficients
        gx = (np.cos(ax) * (c * PI * f.a)) @ np.sin(by).T
        gy = (np.sin(ax) * c) @ (np.cos(by) * (PI * f.b)).T
        return gx, gy
    A = np.exp(1j * TWO_PI * np.outer(xs, f.a)) * f.coefficients
    B = np.exp(1j * TWO_PI * np.outer(ys, f.b))
    gx = ((A * (1j * TWO_PI * f.a)) @ B.T).real
    gy = (A @ (B * (1j * TWO_PI * f.b)).T).real
    return gx, gy


# ---------------------------------------------------------------------------
# spectral index


@dataclass(frozen=True)
class SpectralIndex:
    lam: float
    j_min: int
    j_max: int
    weyl_estimate: float
    domain: str = SQUARE

    @property
    def multiplicity(self) -> int:
        return self.j_max - self.j_min + 1


def _as_lattice_radius(lam, unit, what):
    r = lam / unit
    k = round(r)
    if k < 0 or abs(r - k) > 1e-9 * max(1.0, abs(r)):
        raise NotAnEigenvalue(f"lambda={lam!r} is not {what} times an integer")
    return int(k)


def spectral_index(lam: float, domain: str) -> SpectralIndex:
    """Exact position of ``lam`` in the ordered spectrum, with multiplicity.

    Counting is by direct enumeration of lattice points.  On the torus the
    constant function (eigenvalue 0) is index 1.
    """
    if domain == SQUARE:
        m = _as_lattice_radius(lam, PI * PI, "pi^2")
        r = math.isqrt(m)
        below = at = 0
        for a in range(1, r + 1):
            for b in range(1, r + 1):
                s = a * a + b * b
                if s < m:
                    below += 1
                elif s == m:
                    at += 1
    elif domain == TORUS:
        m = _as_lattice_radius(lam, 4 * PI * PI, "4 pi^2")
        r = math.isqrt(m)
        below = at = 0
        for a in range(-r, r + 1):
            for b in range(-r, r + 1):
                s = a * a + b * b
                if s < m:
                    below += 1
                elif s == m:
                    at += 1
    else:
        raise NodalAtlasError(f"unknown domain {domain!r}")
    if at == 0:
        raise NotAnEigenvalue(f"lambda={lam!r} is not an eigenvalue of the {domain}")
    return SpectralIndex(float(lam), below + 1, below + at, lam / (4 * PI), domain)


def index_of(f: Eigenfunction) -> SpectralIndex:
    return spectral_index(f.lam, f.domain)


# ---------------------------------------------------------------------------
# JSON literals: {"domain", "n_or_m", "terms": [[a, b, re, im], ...]}


def to_json(f: Eigenfunction) -> dict:
    terms = []
    for a, b, c in f.terms:
        c = complex(c)
        terms.append([int(a), int(b), c.real, c.imag])
    key = f.m if f.domain == SQUARE else f.n
    return {"domain": f.domain, "n_or_m": int(key), "terms": terms}


def from_json(obj: dict, normalize: bool = False) -> Eigenfunction:
    try:
        domain = obj["domain"]
        raw = obj["terms"]
    except (KeyError, TypeError) as exc:
        raise NodalAtlasError(f"eigenfunction literal is missing field {exc}") from None
    if not isinstance(raw, list):
        raise NodalAtlasError("terms must be a list")
    terms = []
    for t in raw:
        if not isinstance(t, (list, tuple)) or len(t) not in (3, 4):
            raise NodalAtlasError(f"bad term {t!r}; expected [a, b, re, im]")
        a, b, re = t[0], t[1], t[2]
        im = t[3] if len(t) == 4 else 0.0
        if int(a) != a or int(b) != b:
            raise NodalAtlasError(f"non-integer frequency in {t!r}")
        terms.append((int(a), int(b), complex(float(re), float(im))))
    if domain == SQUARE:
        if any(c.imag != 0.0 for *_, c in terms):
            raise NodalAtlasError("square coefficients must be real")
        f = make_square_eigenfunction([(a, b, c.real) for a, b, c in terms], normalize)
    elif domain == TORUS:
        f = make_torus_eigenfunction(terms, normalize)
    else:
        raise NodalAtlasError(f"unknown domain {domain!r}")
    declared = obj.get("n_or_m")
    actual = f.m if domain == SQUARE else f.n
    if declared is not None and int(declared) != actual:
        raise MixedEigenvalue(f"n_or_m={declared} but terms lie on a^2+b^2={actual}")
    return f
