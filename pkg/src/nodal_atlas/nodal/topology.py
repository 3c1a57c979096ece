"""Nodal domains and nodal-set components from certified sign changes.

The analysis runs on a lattice of sample points that avoids the square
boundary and is shifted by an irrational fraction of a cell.  Along every
cell side the zeros of the restriction are counted exactly: with
``M = lambda * amplitude`` bounding every second directional derivative, a
piece of a side is zero free when both end values exceed ``M l^2 / 8`` in
size and share a sign, and has at most one zero when the end derivatives
share a sign and exceed ``M l / 2``.  Otherwise the piece is bisected.

A nodal domain has area at least ``pi j_{0,1}^2 / lambda``, far more than a
cell, so no domain lies inside a single cell.  Hence a cell whose boundary
meets the nodal set at most twice is fully described by its boundary signs.
Cells with more crossings are subdivided.  A cell holding one singular point
of order ``k`` with ``2k`` boundary crossings is a hub: its sectors are
separate and its ``2k`` arcs all end at the point.  A saddle-ambiguous cell
that survives subdivision to the depth limit is settled by the sign at its
saddle.

Sign-regions of cell boundaries (side intervals between zeros) are the
vertices of the domain graph; crossings are the vertices of the nodal graph.
Three conventions are used at hubs: ``curve`` continues each arc straight
through the point (a crossing of two lines stays two curves), ``topological``
joins every arc at the point, and ``graph`` leaves the arcs as edges ending
at the vertex.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from ..errors import NodalAtlasError, UnresolvedAmbiguity
from ..spectra import SQUARE, evaluate, evaluate_grid, gradient, gradient_grid
from .grid import OFFSETS, ZERO_TOL, GridField
from .singular import (
    SINGULAR_TOL,
    SingularPoint,
    newton_critical_points,
    refine_candidates,
    with_orders,
)

FINE = 1 << 20
MAX_DEPTH = 6
HUB_DEPTH = 14
SEGMENT_FLOOR = 2.0 ** -46

CURVE = "curve"
TOPOLOGICAL = "topological"
GRAPH = "graph"


class _Retry(Exception):
    """The current lattice offset produced an uncertifiable configuration."""


@dataclass(frozen=True)
class NodalCensus:
    """Counts for one eigenfunction.

    ``C`` counts nodal curves, continuing straight through singular points;
    ``C_connected`` counts connected components of the nodal set.  The two
    agree when there are no singular points.  ``N_s``, ``N_c`` and
    ``boundary_endpoints`` are zero on the torus.
    """

    N: int
    C: int
    N_s: int
    N_c: int
    boundary_endpoints: int
    C_connected: int
    singular_count: int = 0
    order_sum: int = 0
    C_interior: int = 0

    @property
    def decomposition_holds(self) -> bool:
        """``N = N_s + N_c + 1``, exact when there are no singular points."""
        return self.N == self.N_s + self.N_c + 1

    @property
    def euler_identity_holds(self) -> bool:
        """Euler's formula for the nodal set together with the square boundary.

        ``N = 1 + C_interior + sum(ord - 1) + boundary_endpoints / 2`` where
        ``C_interior`` counts nodal components not touching the boundary.
        It reduces to the decomposition identity without singular points.
        Square only.
        """
        return 2 * self.N == 2 * (1 + self.C_interior + self.order_sum) + self.boundary_endpoints


def certify_segments(f, ax, ay, dx, dy, v0, v1, g0, g1, curvature):
    """Exact zero brackets of ``f`` on segments ``A + t D``, ``t`` in [0, 1].

    ``g0``/``g1`` are gradients ``(gx, gy)`` at the end points.  Returns
    per-segment counts, the zeros as ``(segment, t0, t1, w0, w1)`` arrays
    sorted along each segment, and a mask of segments where bisection hit
    the floor without a certificate.
    """
    k = len(ax)
    M = curvature * (dx * dx + dy * dy) * (1.0 + 1e-9)
    idx = np.arange(k)
    t0 = np.zeros(k)
    t1 = np.ones(k)
    w0 = np.asarray(v0, dtype=float).copy()
    w1 = np.asarray(v1, dtype=float).copy()
    d0 = g0[0] * dx + g0[1] * dy
    d1 = g1[0] * dx + g1[1] * dy
    zs, zt0, zt1, zw0, zw1 = [], [], [], [], []
    uncertain = np.zeros(k, dtype=bool)
    while idx.size:
        ell = t1 - t0
        Mi = M[idx]
        same = (w0 >= 0) == (w1 >= 0)
        quiet = same & (np.minimum(np.abs(w0), np.abs(w1)) > Mi * ell * ell / 8.0)
        mono = (np.sign(d0) == np.sign(d1)) & (np.minimum(np.abs(d0), np.abs(d1)) > Mi * ell / 2.0)
        done = quiet | mono
        floor = ~done & (ell < SEGMENT_FLOOR)
        uncertain[idx[floor]] = True
        hit = (done | floor) & ~same
        zs.append(idx[hit])
        zt0.append(t0[hit])
        zt1.append(t1[hit])
        zw0.append(w0[hit])
        zw1.append(w1[hit])
        go = ~(done | floor)
        if not go.any():
            break
        idx, t0, t1, w0, w1, d0, d1 = (a[go] for a in (idx, t0, t1, w0, w1, d0, d1))
        tm = 0.5 * (t0 + t1)
        px = ax[idx] + tm * dx[idx]
        py = ay[idx] + tm * dy[idx]
        vm = np.asarray(evaluate(f, px, py), dtype=float)
        gx, gy = gradient(f, px, py)
        dm = np.asarray(gx) * dx[idx] + np.asarray(gy) * dy[idx]
        idx = np.concatenate([idx, idx])
        t0, t1 = np.concatenate([t0, tm]), np.concatenate([tm, t1])
        w0, w1 = np.concatenate([w0, vm]), np.concatenate([vm, w1])
        d0, d1 = np.concatenate([d0, dm]), np.concatenate([dm, d1])
    zs = np.concatenate(zs)
    zt0, zt1, zw0, zw1 = (np.concatenate(a) for a in (zt0, zt1, zw0, zw1))
    order = np.lexsort((zt0, zs))
    zs, zt0, zt1, zw0, zw1 = (a[order] for a in (zs, zt0, zt1, zw0, zw1))
    counts = np.bincount(zs, minlength=k)
    return counts, (zs, zt0, zt1, zw0, zw1), uncertain


def _interpolate(t0, t1, w0, w1):
    denom = w0 - w1
    frac = np.where(denom != 0, w0 / np.where(denom != 0, denom, 1.0), 0.5)
    return t0 + (t1 - t0) * np.clip(frac, 0.0, 1.0)


@dataclass
class _Side:
    p0: tuple
    p1: tuple
    zeros: list  # (t0, t1) brackets along the side
    iids: list  # interval ids, len(zeros) + 1
    zids: list  # crossing ids


@dataclass
class NodalStructure:
    """Everything the counting routines derive from one lattice analysis."""

    domain: str
    resolution: int
    offset: tuple
    N: int
    singular_points: list
    crossing_xy: np.ndarray
    wall: np.ndarray
    curve_labels: np.ndarray
    topo_labels: np.ndarray
    segments: list  # per curve component: True for boundary-touching
    hubs: list  # (singular index, ports in boundary order)
    graph_edges: int
    closed_loops: int
    refined_cells: list
    cell_crossings: dict = field(default_factory=dict, repr=False)
    lattice: tuple = field(default=(), repr=False)

    @property
    def C(self) -> int:
        return len(self.segments)

    @property
    def N_s(self) -> int:
        return int(sum(self.segments))

    @property
    def N_c(self) -> int:
        return self.C - self.N_s

    @property
    def C_connected(self) -> int:
        return int(self.topo_labels.max() + 1) if self.topo_labels.size else 0

    @property
    def C_interior(self) -> int:
        """Connected components of the nodal set that do not reach the boundary."""
        if not self.topo_labels.size:
            return 0
        touching = np.unique(self.topo_labels[self.wall])
        return self.C_connected - touching.size

    @property
    def boundary_endpoints(self) -> int:
        return int(self.wall.sum())

    @property
    def order_sum(self) -> int:
        return sum(p.order - 1 for p in self.singular_points)

    def census(self) -> NodalCensus:
        square = self.domain == SQUARE
        return NodalCensus(
            N=self.N,
            C=self.C,
            N_s=self.N_s if square else 0,
            N_c=self.N_c if square else 0,
            boundary_endpoints=self.boundary_endpoints if square else 0,
            C_connected=self.C_connected,
            singular_count=len(self.singular_points),
            order_sum=self.order_sum,
            C_interior=self.C_interior,
        )

    def curve_of_point(self, x: float, y: float) -> int:
        """Curve label of the nodal arc through a point of the nodal set.

        The point is located in its lattice cell; the arc through it is the
        one whose crossings are nearest within that cell.
        """
        n, h, s = self.lattice
        u = x / h - s[0]
        v = y / h - s[1]
        if self.domain != SQUARE:
            u, v = u % n, v % n
        i = min(max(int(math.floor(u)), 0), self.cell_count - 1)
        j = min(max(int(math.floor(v)), 0), self.cell_count - 1)
        cands = self.cell_crossings.get((i, j), [])
        if not cands:
            # points in the boundary strip outside the lattice use the neighbouring cells
            cands = [z for di in (-1, 0, 1) for dj in (-1, 0, 1)
                     for z in self.cell_crossings.get((i + di, j + dj), [])]
        if not cands:
            raise NodalAtlasError(f"no nodal crossing near ({x:.6g}, {y:.6g})")
        labels = {int(self.curve_labels[z]) for z in cands}
        if len(labels) == 1:
            return labels.pop()
        pts = self.crossing_xy[cands]
        dxy = pts - np.array([x, y])
        if self.domain != SQUARE:
            dxy -= np.round(dxy)
        return int(self.curve_labels[cands[int(np.argmin(np.hypot(dxy[:, 0], dxy[:, 1])))]])

    @property
    def cell_count(self) -> int:
        n = self.lattice[0]
        return n - 1 if self.domain == SQUARE else n


class _Analyzer:
    def __init__(self, f, resolution, offset, tol, singular=None):
        self.f = f
        self.tol = tol
        self.square = f.domain == SQUARE
        self.n = resolution - 1 if self.square else resolution
        self.h = 1.0 / (resolution - 1) if self.square else 1.0 / resolution
        self.offset = offset
        self.curvature = f.lam * f.amplitude
        self.cache = {}
        self.dom_links = []
        self.pairs = []
        self.hubs = []
        self.refined = []
        self.extra_xy = []
        self.extra_cell = []
        self.given_singular = singular

    # geometry -----------------------------------------------------------
    def xy(self, key):
        return ((key[0] / FINE + self.offset[0]) * self.h, (key[1] / FINE + self.offset[1]) * self.h)

    def norm_key(self, key):
        if self.square:
            return key
        m = self.n * FINE
        return (key[0] % m, key[1] % m)

    def point(self, key):
        k = self.norm_key(key)
        hit = self.cache.get(k)
        if hit is None:
            x, y = self.xy(key)
            v = float(evaluate(self.f, x, y))
            gx, gy = gradient(self.f, x, y)
            hit = (v, gx, gy)
            self.cache[k] = hit
        return hit

    def lattice_coords(self, x, y):
        u = x / self.h - self.offset[0]
        v = y / self.h - self.offset[1]
        if not self.square:
            u, v = u % self.n, v % self.n
        return u, v

    # main ---------------------------------------------------------------
    def run(self):
        f, n, h = self.f, self.n, self.h
        idx = np.arange(n)
        xs = (idx + self.offset[0]) * h
        ys = (idx + self.offset[1]) * h
        V = evaluate_grid(f, xs, ys)
        if np.any(np.abs(V) < ZERO_TOL * f.amplitude):
            raise _Retry("sample on the nodal set")
        GX, GY = gradient_grid(f, xs, ys)
        self.V, self.GX, self.GY = V, GX, GY

        # sides: horizontal H[i, j] from (i, j) to (i+1, j); vertical V[i, j] to (i, j+1)
        if self.square:
            hi_, hj_ = np.meshgrid(np.arange(n - 1), np.arange(n), indexing="ij")
            vi_, vj_ = np.meshgrid(np.arange(n), np.arange(n - 1), indexing="ij")
        else:
            hi_, hj_ = np.meshgrid(idx, idx, indexing="ij")
            vi_, vj_ = hi_, hj_
        nH = hi_.size
        Hid = np.arange(nH).reshape(hi_.shape)
        Vid = nH + np.arange(vi_.size).reshape(vi_.shape)
        si = np.concatenate([hi_.ravel(), vi_.ravel()])
        sj = np.concatenate([hj_.ravel(), vj_.ravel()])
        horiz = np.arange(si.size) < nH
        ei = np.where(horiz, si + 1, si) % n
        ej = np.where(horiz, sj, sj + 1) % n
        ax, ay = xs[si], ys[sj]
        dx = np.where(horiz, h, 0.0)
        dy = np.where(horiz, 0.0, h)
        counts, (zs, zt0, zt1, zw0, zw1), uncertain = certify_segments(
            f, ax, ay, dx, dy, V[si, sj], V[ei, ej],
            (GX[si, sj], GY[si, sj]), (GX[ei, ej], GY[ei, ej]), self.curvature,
        )
        if uncertain.any():
            raise _Retry("uncertified side")
        tz = _interpolate(zt0, zt1, zw0, zw1)
        self.coarse_xy = np.column_stack([ax[zs] + tz * dx[zs], ay[zs] + tz * dy[zs]])
        self.zcount = counts
        self.zoff = np.concatenate([[0], np.cumsum(counts)])
        self.ioff = np.arange(counts.size) + self.zoff[:-1]
        self.zt = (zt0, zt1)
        self.n_int = int(self.ioff[-1] + counts[-1] + 1)
        self.n_cross = int(self.zoff[-1])
        self.side_ij = (si, sj, horiz)

        # wall crossings: sides on the hull of the square lattice
        wall_side = np.zeros(counts.size, dtype=bool)
        if self.square:
            wall_side[Hid[:, 0]] = wall_side[Hid[:, -1]] = True
            wall_side[Vid[0, :]] = wall_side[Vid[-1, :]] = True
        self.wall = list(np.repeat(wall_side, counts))

        # cells and their sides (bottom, right, top, left)
        nc = n - 1 if self.square else n
        ci, cj = np.meshgrid(np.arange(nc), np.arange(nc), indexing="ij")
        ci, cj = ci.ravel(), cj.ravel()
        B = Hid[ci, cj]
        R = Vid[(ci + 1) % n, cj]
        T = Hid[ci, (cj + 1) % n]
        L = Vid[ci, cj]
        sides = np.stack([B, R, T, L], axis=1)
        total = counts[sides].sum(axis=1)
        self.nc = nc

        # singular points: given, plus Newton from every cell with 4+ crossings
        busy = total >= 4
        starts_x = (ci[busy] + 0.5 + self.offset[0]) * h
        starts_y = (cj[busy] + 0.5 + self.offset[1]) * h
        found = refine_candidates(f, starts_x, starts_y, h, self.tol)
        if self.given_singular is not None:
            found = _merge_known(found, self.given_singular, not self.square)
        self.singular = with_orders(f, found)
        owner = {}
        for k, p in enumerate(self.singular):
            u, v = self.lattice_coords(*p.position)
            i, j = int(math.floor(u)), int(math.floor(v))
            if not (0 <= i < nc and 0 <= j < nc):
                raise _Retry("singular point outside the lattice")
            owner.setdefault((i, j), []).append(k)
        special = busy.copy()
        for (i, j) in owner:
            special[i * nc + j] = True
        leaf = ~special

        # vectorised leaves: corner links and crossing pairs
        zc = counts
        st = self.ioff
        en = self.ioff + zc
        lB, lR, lT, lL = (sides[leaf, k] for k in range(4))
        self.dom_links.append(np.stack([
            np.concatenate([st[lB], en[lB], en[lR], st[lT]]),
            np.concatenate([st[lL], st[lR], en[lT], en[lL]]),
        ], axis=1))
        two = leaf & (total == 2)
        S = sides[two].ravel()
        Z = zc[S]
        rows = np.repeat(np.arange(S.size), Z)
        first = np.concatenate([[0], np.cumsum(Z)])[:-1]
        ids = self.zoff[S][rows] + (np.arange(rows.size) - first[rows])
        self.pairs.append(ids.reshape(-1, 2))

        # cell -> crossing ids, for locating points on the nodal set
        self.cell_crossings = {}
        has = total > 0
        for c in np.nonzero(has)[0]:
            lst = []
            for s in sides[c]:
                lst.extend(range(self.zoff[s], self.zoff[s] + zc[s]))
            self.cell_crossings[(int(ci[c]), int(cj[c]))] = lst

        for c in np.nonzero(special)[0]:
            i, j = int(ci[c]), int(cj[c])
            cell_sides = [self.coarse_side(s) for s in sides[c]]
            # top and left are stored left-to-right and bottom-to-top already
            pts = owner.get((i, j), [])
            self.current_cell = (i, j)
            self.resolve(cell_sides, (i * FINE, j * FINE), FINE, 0, pts)
        return self.assemble()

    def coarse_side(self, s):
        si, sj, horiz = self.side_ij
        i, j = int(si[s]), int(sj[s])
        p0 = (i * FINE, j * FINE)
        p1 = ((i + 1) * FINE, j * FINE) if horiz[s] else (i * FINE, (j + 1) * FINE)
        for key in (p0, p1):
            a_, b_ = (key[0] // FINE) % self.n, (key[1] // FINE) % self.n
            self.cache.setdefault(self.norm_key(key), (self.V[a_, b_], self.GX[a_, b_], self.GY[a_, b_]))
        a, b = self.zoff[s], self.zoff[s + 1]
        zeros = list(zip(self.zt[0][a:b].tolist(), self.zt[1][a:b].tolist()))
        iids = list(range(self.ioff[s], self.ioff[s] + (b - a) + 1))
        return _Side(p0, p1, zeros, iids, list(range(a, b)))

    # recursion ------------------------------------------------------------
    def new_crossing(self, x, y, wall=False):
        k = self.n_cross
        self.n_cross += 1
        self.extra_xy.append((x, y))
        self.wall.append(wall)
        self.cell_crossings.setdefault(self.current_cell, []).append(k)
        return k

    def new_interval(self):
        k = self.n_int
        self.n_int += 1
        return k

    def split(self, side, mid):
        s0 = self.point(side.p0)[0] >= 0
        sm = self.point(mid)[0] >= 0
        left = 0
        for k, (a, b) in enumerate(side.zeros):
            before = s0 if k % 2 == 0 else not s0
            if b <= 0.5:
                left += 1
            elif a < 0.5 and sm != before:
                left += 1
            else:
                break
        lz = [(2 * a, min(2 * b, 1.0)) for a, b in side.zeros[:left]]
        rz = [(max(2 * a - 1, 0.0), 2 * b - 1) for a, b in side.zeros[left:]]
        lo = _Side(side.p0, mid, lz, side.iids[: left + 1], side.zids[:left])
        hi = _Side(mid, side.p1, rz, side.iids[left:], side.zids[left:])
        return lo, hi

    def interior(self, keys):
        """Sides between consecutive key pairs, computed from scratch."""
        P0 = [self.point(a) for a, _ in keys]
        P1 = [self.point(b) for _, b in keys]
        A = np.array([self.xy(a) for a, _ in keys])
        Bp = np.array([self.xy(b) for _, b in keys])
        D = Bp - A
        counts, (zs, zt0, zt1, zw0, zw1), uncertain = certify_segments(
            self.f, A[:, 0], A[:, 1], D[:, 0], D[:, 1],
            np.array([p[0] for p in P0]), np.array([p[0] for p in P1]),
            (np.array([p[1] for p in P0]), np.array([p[2] for p in P0])),
            (np.array([p[1] for p in P1]), np.array([p[2] for p in P1])),
            self.curvature,
        )
        if uncertain.any():
            raise _Retry("uncertified interior side")
        tz = _interpolate(zt0, zt1, zw0, zw1)
        out = []
        pos = 0
        for k, (a, b) in enumerate(keys):
            c = int(counts[k])
            zeros, zids = [], []
            for q in range(pos, pos + c):
                zeros.append((float(zt0[q]), float(zt1[q])))
                x = A[k, 0] + tz[q] * D[k, 0]
                y = A[k, 1] + tz[q] * D[k, 1]
                zids.append(self.new_crossing(float(x), float(y)))
            pos += c
            out.append(_Side(a, b, zeros, [self.new_interval() for _ in range(c + 1)], zids))
        return out

    def inside(self, k, key, size):
        u, v = self.lattice_coords(*self.singular[k].position)
        U, W = u * FINE, v * FINE
        return key[0] <= U < key[0] + size and key[1] <= W < key[1] + size

    def resolve(self, sides, key, size, depth, pts):
        count = sum(len(s.zids) for s in sides)
        if not pts and count <= 2:
            self.leaf(sides)
            if count == 2:
                self.pairs.append(np.array([self.cycle(sides)[1]]))
            return
        if len(pts) == 1 and count == 2 * self.singular[pts[0]].order:
            self.leaf(sides)
            self.hubs.append((pts[0], self.cycle(sides)[1]))
            return
        limit = HUB_DEPTH if pts else MAX_DEPTH
        if depth >= limit:
            if not pts and count == 4 and self.decide(sides, key, size):
                return
            raise UnresolvedAmbiguity(
                f"cell {self.current_cell} still ambiguous at depth {depth} "
                f"({count} boundary crossings, {len(pts)} singular points)",
                cells=[self.current_cell],
            )
        if depth == 0:
            self.refined.append(self.current_cell)
        bot, rig, top, lef = sides
        half = size // 2
        I, J = key
        mb, mr = (I + half, J), (I + size, J + half)
        mt, ml = (I + half, J + size), (I, J + half)
        ctr = (I + half, J + half)
        b0, b1 = self.split(bot, mb)
        r0, r1 = self.split(rig, mr)
        t0, t1 = self.split(top, mt)
        l0, l1 = self.split(lef, ml)
        vlo, vhi, hle, hri = self.interior([(mb, ctr), (ctr, mt), (ml, ctr), (ctr, mr)])
        children = (
            ([b0, vlo, hle, l0], (I, J)),
            ([b1, r0, hri, vlo], (I + half, J)),
            ([hle, vhi, t0, l1], (I, J + half)),
            ([hri, r1, t1, vhi], (I + half, J + half)),
        )
        for child_sides, ckey in children:
            cpts = [k for k in pts if self.inside(k, ckey, half)]
            self.resolve(child_sides, ckey, half, depth + 1, cpts)

    def leaf(self, sides):
        b, r, t, l = sides
        self.dom_links.append(np.array([
            [b.iids[0], l.iids[0]],
            [b.iids[-1], r.iids[0]],
            [r.iids[-1], t.iids[-1]],
            [t.iids[0], l.iids[-1]],
        ]))

    def cycle(self, sides):
        """Counter-clockwise boundary walk: interval arcs and the crossings between them."""
        seq = []
        for side, rev in zip(sides, (False, False, True, True)):
            s0 = self.point(side.p0)[0] >= 0
            items = []
            for k, iid in enumerate(side.iids):
                items.append(("i", iid, s0 if k % 2 == 0 else not s0))
                if k < len(side.zids):
                    items.append(("z", side.zids[k]))
            seq.extend(reversed(items) if rev else items)
        zpos = [k for k, it in enumerate(seq) if it[0] == "z"]
        if not zpos:
            return [[it for it in seq]], []
        seq = seq[zpos[0] + 1:] + seq[: zpos[0] + 1]
        arcs, ports, cur = [], [], []
        for it in seq:
            if it[0] == "z":
                arcs.append(cur)
                ports.append(it[1])
                cur = []
            else:
                cur.append(it)
        return arcs, ports

    def decide(self, sides, key, size):
        """Asymptotic decider: the sign at the saddle joins the matching arcs."""
        cx, cy = self.xy((key[0] + size / 2, key[1] + size / 2))
        step = self.h * size / FINE
        x, y, alive = newton_critical_points(self.f, np.array([cx]), np.array([cy]), step)
        u, v = self.lattice_coords(x[0], y[0])
        if self.square and not alive[0]:
            return False
        U, W = u * FINE, v * FINE
        if not (key[0] <= U <= key[0] + size and key[1] <= W <= key[1] + size):
            return False
        val = float(evaluate(self.f, x[0], y[0]))
        if abs(val) < self.tol * self.f.amplitude:
            return False
        sign = val >= 0
        self.leaf(sides)
        arcs, ports = self.cycle(sides)
        if len(arcs) != 4:
            return False
        same = [a for a in arcs if a[0][2] == sign]
        self.dom_links.append(np.array([[same[0][0][1], same[1][0][1]]]))
        for k, arc in enumerate(arcs):
            if arc[0][2] != sign:
                self.pairs.append(np.array([[ports[k - 1], ports[k]]]))
        return True

    # assembly -------------------------------------------------------------
    def assemble(self):
        links = np.concatenate(self.dom_links) if self.dom_links else np.zeros((0, 2), int)
        adj = coo_matrix((np.ones(len(links)), (links[:, 0], links[:, 1])), shape=(self.n_int, self.n_int))
        N, _ = connected_components(adj, directed=False)

        nz = self.n_cross
        xy = self.coarse_xy
        if self.extra_xy:
            xy = np.vstack([xy, np.array(self.extra_xy)])
        wall = np.array(self.wall, dtype=bool)
        pairs = np.concatenate(self.pairs) if self.pairs else np.zeros((0, 2), int)
        pairs = pairs.reshape(-1, 2)

        def label(extra, nodes):
            e = np.concatenate([pairs, extra.reshape(-1, 2)]) if extra.size else pairs
            g = coo_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(nodes, nodes))
            return connected_components(g, directed=False)[1]

        curve_extra = []
        topo_extra = []
        for hub_index, (k, ports) in enumerate(self.hubs):
            m = len(ports) // 2
            curve_extra.extend([ports[q], ports[q + m]] for q in range(m))
            topo_extra.extend([p, nz + hub_index] for p in ports)
        curve = label(np.array(curve_extra, dtype=int), nz)
        topo = label(np.array(topo_extra, dtype=int), nz + len(self.hubs))[:nz]
        bare = label(np.zeros((0, 2), int), nz)

        ncurve = int(curve.max() + 1) if nz else 0
        segments = [False] * ncurve
        for z in np.nonzero(wall)[0]:
            segments[curve[z]] = True

        incidence = np.zeros(int(bare.max() + 1) if nz else 0, dtype=int)
        for _, ports in self.hubs:
            for p in ports:
                incidence[bare[p]] += 1
        if not self.square and np.any((incidence != 0) & (incidence != 2)):
            raise UnresolvedAmbiguity("a nodal arc does not join two singular points")
        # relabel topological components densely
        if nz:
            _, topo = np.unique(topo, return_inverse=True)
        return NodalStructure(
            domain=self.f.domain,
            resolution=self.n + 1 if self.square else self.n,
            offset=self.offset,
            N=int(N),
            singular_points=self.singular,
            crossing_xy=xy,
            wall=wall,
            curve_labels=curve,
            topo_labels=np.asarray(topo),
            segments=segments,
            hubs=self.hubs,
            graph_edges=int(np.count_nonzero(incidence)),
            closed_loops=int(np.count_nonzero(incidence == 0)),
            refined_cells=sorted(set(self.refined)),
            cell_crossings=self.cell_crossings,
            lattice=(self.n, self.h, self.offset),
        )


def _merge_known(found, known, periodic):
    """Union of two singular-point lists, by position."""
    out = list(found)
    for p in known:
        pos = p.position if isinstance(p, SingularPoint) else p[:2]
        dup = False
        for q in out:
            dx, dy = pos[0] - q[0], pos[1] - q[1]
            if periodic:
                dx -= round(dx)
                dy -= round(dy)
            if math.hypot(dx, dy) < 1e-6:
                dup = True
                break
        if not dup:
            out.append((pos[0], pos[1], getattr(p, "residual", 0.0)))
    out.sort(key=lambda p: (round(p[0], 9), round(p[1], 9)))
    return out


def analyze(grid: GridField, *, tol_singular: float = SINGULAR_TOL) -> NodalStructure:
    """Nodal structure of the eigenfunction behind ``grid``, cached on the grid.

    The lattice has the grid's spacing and is shifted off the sample nodes;
    if a shift meets an uncertifiable configuration the next shift is tried.
    """
    key = ("structure", tol_singular)
    if key in grid._cache:
        return grid._cache[key]
    if grid.func is None:
        raise NodalAtlasError("grid carries no eigenfunction; sample it with sample_grid")
    last = None
    for offset in OFFSETS:
        try:
            st = _Analyzer(grid.func, grid.resolution, offset, tol_singular).run()
        except _Retry as exc:
            last = exc
            continue
        grid._cache[key] = st
        grid.refined_cells = list(st.refined_cells)
        return st
    raise UnresolvedAmbiguity(f"every lattice shift failed: {last}")


def count_nodal_domains(grid: GridField, *, tol_singular: float = SINGULAR_TOL) -> NodalCensus:
    """Census with the number of nodal domains ``N`` (and all other fields)."""
    return analyze(grid, tol_singular=tol_singular).census()


def extract_nodal_components(grid: GridField, *, tol_singular: float = SINGULAR_TOL) -> NodalCensus:
    """Census of nodal-set components; identical to :func:`count_nodal_domains`."""
    return analyze(grid, tol_singular=tol_singular).census()
