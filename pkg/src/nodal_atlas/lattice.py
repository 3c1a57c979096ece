"""Integer points on the circle ``a^2 + b^2 = n`` and their angular structure.

Contents: brute-force enumeration (the reference), a divisor-sum fast count
checked against it, circular gaps between solution directions, membership of
``n`` in the sector class (some open sector of a given width holds no
solution), an epsilon-net of primitive directions, and selection of the net
direction along which every solution has a small inner product.
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass
from math import gcd

import numpy as np

from .errors import (
    EmptyCircle,
    EmptyCircleWarning,
    NetConstructionFailed,
    NodalAtlasError,
    NoValidDirection,
)

TWO_PI = 2.0 * math.pi
GAP_TOL = 1e-12


def _half(p):
    a, b = p
    # 0 for angles in [0, pi), 1 for [pi, 2pi)
    return 0 if (b > 0 or (b == 0 and a > 0)) else 1


def _angle_cmp(p, q):
    """Exact counter-clockwise order of integer vectors by direction angle."""
    hp, hq = _half(p), _half(q)
    if hp != hq:
        return hp - hq
    cross = p[0] * q[1] - p[1] * q[0]
    if cross > 0:
        return -1
    if cross < 0:
        return 1
    return (p > q) - (p < q)


def sort_by_angle(points):
    return sorted(points, key=functools.cmp_to_key(_angle_cmp))


def _angle(p):
    return math.atan2(p[1], p[0]) % TWO_PI


def circular_gaps(angles):
    """Gaps between consecutive entries of a sorted angle list, wrapping at 2 pi."""
    k = len(angles)
    if k == 1:
        return [TWO_PI]
    gaps = [angles[i + 1] - angles[i] for i in range(k - 1)]
    gaps.append(TWO_PI - angles[-1] + angles[0])
    return gaps


@dataclass(frozen=True)
class LatticeCircle:
    n: int
    solutions: tuple
    angles: tuple
    gaps: tuple  # gaps[i] runs from angles[i] to angles[i + 1]

    @property
    def count(self) -> int:
        return len(self.solutions)

    @property
    def max_gap(self) -> float:
        if not self.solutions:
            return TWO_PI
        return max(self.gaps)


def brute_force_solutions(n: int):
    r = math.isqrt(n)
    out = []
    for a in range(-r, r + 1):
        b2 = n - a * a
        b = math.isqrt(b2)
        if b * b == b2:
            out.append((a, b))
            if b:
                out.append((a, -b))
    return out


def sum_two_squares(n: int) -> LatticeCircle:
    """All ``(a, b)`` in Z^2 with ``a^2 + b^2 = n``, ordered by angle."""
    if n < 1:
        raise NodalAtlasError("n must be a positive integer")
    sols = sort_by_angle(brute_force_solutions(n))
    angles = [_angle(p) for p in sols]
    gaps = circular_gaps(angles) if sols else []
    return LatticeCircle(n, tuple(sols), tuple(angles), tuple(gaps))


def r2(n: int) -> int:
    """Number of representations via ``4 * (d_1(n) - d_3(n))``."""
    if n < 1:
        raise NodalAtlasError("n must be a positive integer")
    total = 0
    d = 1
    while d * d <= n:
        if n % d == 0:
            for e in {d, n // d}:
                if e % 4 == 1:
                    total += 1
                elif e % 4 == 3:
                    total -= 1
        d += 1
    return 4 * total


def angular_gaps(circle: LatticeCircle):
    """Circular gaps between consecutive solution directions, largest first."""
    if not circle.solutions:
        raise EmptyCircle(f"n={circle.n} has no representation as a sum of two squares")
    return sorted(circle.gaps, reverse=True)


def sector_membership(circle: LatticeCircle, theta: float) -> bool:
    """True iff some open sector of angular width ``theta`` contains no solution.

    An empty circle is reported as a member with an :class:`EmptyCircleWarning`.
    """
    if not 0.0 < theta < TWO_PI:
        raise NodalAtlasError("theta must lie in (0, 2 pi)")
    if not circle.solutions:
        warnings.warn(f"n={circle.n} has no solutions; membership is vacuous", EmptyCircleWarning)
        return True
    return circle.max_gap >= theta - GAP_TOL


@dataclass(frozen=True)
class DirectionNet:
    epsilon: float
    points: tuple  # primitive (p, q), sorted by angle
    angles: tuple

    @property
    def max_gap(self) -> float:
        return max(circular_gaps(list(self.angles)))


def direction_net(epsilon: float, radius: int | None = None) -> DirectionNet:
    """Primitive vectors with ``max(|p|, |q|) <= ceil(4/epsilon)``, verified as an epsilon-net."""
    if not 0.0 < epsilon < math.pi / 2:
        raise NodalAtlasError("epsilon must lie in (0, pi/2)")
    R = math.ceil(4.0 / epsilon) if radius is None else int(radius)
    pts = [
        (p, q)
        for p in range(-R, R + 1)
        for q in range(-R, R + 1)
        if (p or q) and gcd(abs(p), abs(q)) == 1
    ]
    pts = sort_by_angle(pts)
    angles = [_angle(p) for p in pts]
    net = DirectionNet(epsilon, tuple(pts), tuple(angles))
    if any(b <= a for a, b in zip(angles, angles[1:])):
        raise NetConstructionFailed("net angles are not strictly increasing")
    if net.max_gap >= epsilon:
        raise NetConstructionFailed(
            f"radius {R} leaves an angular gap {net.max_gap:.6g} >= epsilon={epsilon:.6g}"
        )
    return net


def direction_margin(circle: LatticeCircle, p: int, q: int, theta: float, epsilon: float) -> float:
    """Slack in ``|(a,b).(p,q)| <= sqrt(n) |(p,q)| cos(theta - epsilon)`` over all solutions.

    Nonnegative exactly when the inequality holds for every solution.
    """
    rhs = math.sqrt(circle.n) * math.hypot(p, q) * math.cos(theta - epsilon)
    worst = max(abs(a * p + b * q) for a, b in circle.solutions)
    return rhs - worst


def best_direction(circle: LatticeCircle, theta: float, epsilon: float, net: DirectionNet):
    """A net point ``(p, q)`` with ``q >= 1`` satisfying the direction inequality.

    Among valid points the shortest is returned (ties go to the larger
    margin, then angle order), since the resulting count bound grows with
    ``|(p, q)|``.
    """
    if not 0.0 < epsilon < theta:
        raise NodalAtlasError("need 0 < epsilon < theta")
    if not circle.solutions:
        raise EmptyCircle(f"n={circle.n} has no solutions")
    if not sector_membership(circle, 2.0 * theta):
        raise NoValidDirection(f"n={circle.n} is not in the sector class for width 2*theta")
    best = None
    for p, q in net.points:
        if q < 0:
            p, q = -p, -q
        if q == 0:
            continue  # the mesh needs a geodesic that is not horizontal
        margin = direction_margin(circle, p, q, theta, epsilon)
        if margin < 0:
            continue
        key = (p * p + q * q, -margin)
        if best is None or key < best[0]:
            best = (key, (p, q))
    if best is None:
        raise NoValidDirection(f"no net direction satisfies the inequality for n={circle.n}")
    p, q = best[1]
    if direction_margin(circle, p, q, theta, epsilon) < 0:  # pragma: no cover - re-check
        raise NoValidDirection("selected direction failed re-verification")
    return p, q


def count_table(n_max: int) -> np.ndarray:
    """Brute-force solution counts for ``1..n_max`` in one sweep."""
    counts = np.zeros(n_max + 1, dtype=int)
    r = math.isqrt(n_max)
    for a in range(-r, r + 1):
        for b in range(-r, r + 1):
            s = a * a + b * b
            if 0 < s <= n_max:
                counts[s] += 1
    return counts
