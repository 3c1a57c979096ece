"""Singular points (common zeros of a function and its gradient) and vanishing orders."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from ..errors import RadiusTooLarge
from ..spectra import SQUARE, evaluate, gradient, hessian
from .grid import OFFSET, default_resolution, sample_grid

SINGULAR_TOL = 1e-9
MERGE_RADIUS = 1e-6
BOUNDARY_MARGIN = 1e-3


@dataclass(frozen=True)
class SingularPoint:
    position: tuple
    order: int
    residual: float


def displacement(dx, periodic):
    """Shortest representative of a coordinate difference on the torus."""
    if periodic:
        return dx - np.round(dx)
    return dx


def newton_critical_points(f, x, y, step_cap, iterations=60):
    """Damped Newton on ``grad f = 0`` from many starts at once.

    Returns final positions and a mask of starts that stayed inside the
    domain.  The Hessian solve is regularised so that degenerate (order >= 3)
    critical points still attract.
    """
    x = np.array(x, dtype=float)
    y = np.array(y, dtype=float)
    alive = np.ones(x.shape, dtype=bool)
    scale = f.amplitude * f.lam
    mu = (1e-10 * scale) ** 2
    for _ in range(iterations):
        gx, gy = gradient(f, x, y)
        hxx, hxy, hyy = hessian(f, x, y)
        # (H^2 + mu) d = -H g for symmetric H
        a = hxx * hxx + hxy * hxy + mu
        b = hxy * (hxx + hyy)
        c = hxy * hxy + hyy * hyy + mu
        rx = -(hxx * gx + hxy * gy)
        ry = -(hxy * gx + hyy * gy)
        # det(H^2 + mu) >= mu tr(H^2); the floor guards against cancellation
        det = np.maximum(a * c - b * b, mu * (a + c - mu))
        dx = (c * rx - b * ry) / det
        dy = (a * ry - b * rx) / det
        norm = np.hypot(dx, dy)
        shrink = np.minimum(1.0, step_cap / np.maximum(norm, 1e-300))
        x = x + dx * shrink
        y = y + dy * shrink
        if f.domain == SQUARE:
            alive &= (x > 0) & (x < 1) & (y > 0) & (y < 1)
            x = np.clip(x, 1e-12, 1 - 1e-12)
            y = np.clip(y, 1e-12, 1 - 1e-12)
        else:
            x = np.mod(x, 1.0)
            y = np.mod(y, 1.0)
        if np.all(norm[alive] < 1e-15) if alive.any() else True:
            break
    return x, y, alive


def merge_points(x, y, res_, periodic):
    """Cluster points closer than ``MERGE_RADIUS``; keep the best residual of each cluster."""
    if x.size == 0:
        return []
    pts = np.column_stack([x, y])
    if periodic:
        pts = np.mod(pts, 1.0)
        pts[pts >= 1.0] = 0.0
        tree = cKDTree(pts, boxsize=1.0)
    else:
        tree = cKDTree(pts)
    pairs = tree.query_pairs(MERGE_RADIUS, output_type="ndarray")
    k = x.size
    adj = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(k, k))
    _, labels = connected_components(adj, directed=False)
    best = {}
    for i in np.argsort(res_, kind="stable"):
        best.setdefault(labels[i], i)
    return [(float(pts[i, 0]), float(pts[i, 1]), float(res_[i])) for i in best.values()]


def refine_candidates(f, sx, sy, step, tol=SINGULAR_TOL):
    """Newton-refine starting points and keep the singular ones, merged and sorted."""
    sx = np.asarray(sx, dtype=float)
    if sx.size == 0:
        return []
    x, y, alive = newton_critical_points(f, sx, sy, step_cap=step)
    val = np.abs(evaluate(f, x, y))
    gx, gy = gradient(f, x, y)
    res_ = np.maximum(val, np.hypot(gx, gy))
    ok = alive & (res_ < tol * f.amplitude)
    if f.domain == SQUARE:
        # corners of the square are degenerate zeros of the odd extension and
        # attract Newton; nothing singular lives this close to the boundary
        margin = BOUNDARY_MARGIN / f.wavenumber
        ok &= (x > margin) & (x < 1 - margin) & (y > margin) & (y < 1 - margin)
    pts = merge_points(x[ok], y[ok], res_[ok], f.domain != SQUARE)
    pts.sort(key=lambda p: (round(p[0], 9), round(p[1], 9)))
    return pts


def with_orders(f, pts):
    positions = [(p[0], p[1]) for p in pts]
    out = []
    for i, (px, py, r) in enumerate(pts):
        others = positions[:i] + positions[i + 1:]
        out.append(SingularPoint((px, py), vanishing_order(f, (px, py), others=others), r))
    return out


def candidate_starts(f, values, xs, ys, periodic):
    """Centres of grid cells whose corner samples are not all of one sign."""
    s = np.sign(values)
    if periodic:
        c00, c10 = s, np.roll(s, -1, axis=0)
        c01, c11 = np.roll(s, -1, axis=1), np.roll(np.roll(s, -1, axis=0), -1, axis=1)
        h = xs[1] - xs[0]
        cx = xs + 0.5 * h
        cy = ys + 0.5 * h
    else:
        c00, c10, c01, c11 = s[:-1, :-1], s[1:, :-1], s[:-1, 1:], s[1:, 1:]
        cx = 0.5 * (xs[:-1] + xs[1:])
        cy = 0.5 * (ys[:-1] + ys[1:])
    mixed = ~((c00 == c10) & (c10 == c01) & (c01 == c11))
    ii, jj = np.nonzero(mixed)
    return cx[ii], cy[jj]


def find_singular_points(f, coarse_resolution: int | None = None, *, tol: float = SINGULAR_TOL,
                         grid=None) -> list:
    """Locate interior singular points of ``f`` and their vanishing orders.

    Newton iteration on the gradient is started from every grid cell crossed
    by the nodal set; a critical point is accepted as singular when
    ``max(|f|, |grad f|) < tol * amplitude``.  Square corners and edges are
    excluded.
    """
    if grid is None:
        res = coarse_resolution or default_resolution(f)
        grid = sample_grid(f, res, override=True, layout=OFFSET)
    xs, ys = grid.coordinates()
    periodic = f.domain != SQUARE
    sx, sy = candidate_starts(f, grid.values, xs, ys, periodic)
    if sx.size == 0:
        return []
    return with_orders(f, refine_candidates(f, sx, sy, grid.spacing, tol))


def default_radius(f, p, others=()):
    r = 0.2 / f.wavenumber
    periodic = f.domain != SQUARE
    for q in others:
        d = math.hypot(displacement(p[0] - q[0], periodic), displacement(p[1] - q[1], periodic))
        if d > 0:
            r = min(r, 0.25 * d)
    if f.domain == SQUARE:
        r = min(r, 0.5 * min(p[0], 1 - p[0], p[1], 1 - p[1]))
    return r


def _circle_sign_changes(f, p, radius, samples, locate=False):
    t = np.linspace(0.0, 2 * math.pi, samples, endpoint=False)
    s = np.where(evaluate(f, p[0] + radius * np.cos(t), p[1] + radius * np.sin(t)) >= 0, 1, -1)
    changes = np.nonzero(s != np.roll(s, -1))[0]
    if not locate or changes.size == 0:
        return changes.size, []
    lo = t[changes]
    hi = lo + 2 * math.pi / samples
    slo = s[changes]
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        sm = np.where(evaluate(f, p[0] + radius * np.cos(mid), p[1] + radius * np.sin(mid)) >= 0, 1, -1)
        left = sm == slo
        lo = np.where(left, mid, lo)
        hi = np.where(left, hi, mid)
    return changes.size, sorted(float(a) for a in np.mod(0.5 * (lo + hi), 2 * math.pi))


def nodal_directions(f, p, radius, samples=256):
    """Angles at which the nodal set crosses the circle of ``radius`` about ``p``."""
    return _circle_sign_changes(f, p, radius, samples, locate=True)[1]


def vanishing_order(f, p, radius: float | None = None, *, others=()) -> int:
    """Half the number of sign changes of ``f`` on a small circle about ``p``.

    The count is repeated at half the radius; an odd or unstable count means
    the circle met nodal arcs that do not pass through ``p``.
    """
    if radius is None:
        radius = default_radius(f, p, others)
    hxx, hxy, hyy = hessian(f, p[0], p[1])
    guess = 2 if math.hypot(hxx - hyy, 2 * hxy) > 1e-6 * f.amplitude * f.lam else 3
    samples = 64 * guess
    counts = [_circle_sign_changes(f, p, r, samples)[0] for r in (radius, 0.5 * radius)]
    if any(c % 2 for c in counts) or counts[0] != counts[1]:
        raise RadiusTooLarge(
            f"sign changes {counts[0]} at r={radius:.3g} and {counts[1]} at r/2; "
            "the circle meets foreign nodal arcs"
        )
    return counts[0] // 2
