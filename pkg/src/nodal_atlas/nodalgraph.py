"""Graphs embedded in closed surfaces and the Euler relation for nodal sets.

For a graph with ``v`` vertices, ``e`` edges and ``c`` connected components
embedded in a closed orientable surface of genus ``g`` whose complement has
``f`` components, ``1 - 2g <= v - e + f - c <= 1``.  On the torus the nodal
set of an eigenfunction is such a graph once its singular points are taken
as vertices (each of degree ``2 ord``), which ties the number of nodal
domains to the number of nodal components and the total vanishing order.

Random test graphs are produced from rotation systems: a dart permutation
``sigma`` (the cyclic order of edge ends around each vertex) and the
fixed-point-free involution ``alpha`` pairing the two ends of each edge.
Faces are the cycles of ``sigma o alpha``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GraphInconsistency, NodalAtlasError
from .nodal import analyze, sample_grid
from .spectra import TORUS


@dataclass(frozen=True)
class EmbeddedGraph:
    v: int
    e: int
    f: int
    c: int
    genus: int
    degrees: tuple | None = None

    def __post_init__(self):
        if min(self.v, self.e, self.c, self.genus) < 0 or self.f < 1:
            raise NodalAtlasError("counts must be nonnegative and f >= 1")
        if self.v == self.e == self.c == 0 and self.f != 1:
            raise NodalAtlasError("the empty graph has exactly one face")
        if self.degrees is not None and sum(self.degrees) != 2 * self.e:
            raise NodalAtlasError("degree sum must equal 2e")


def euler_defect(g: EmbeddedGraph):
    """``(v - e + f - c, in_range)`` with ``in_range`` testing ``[1 - 2 genus, 1]``."""
    d = g.v - g.e + g.f - g.c
    return d, 1 - 2 * g.genus <= d <= 1


@dataclass(frozen=True)
class NodalGraphReport:
    graph: EmbeddedGraph
    N: int
    C: int
    order_sum: int
    defect: int
    closed_loops: int = 0

    def to_dict(self) -> dict:
        g = self.graph
        return {
            "v": g.v, "e": g.e, "f": g.f, "c": g.c, "genus": g.genus,
            "degrees": list(g.degrees or ()),
            "N": self.N, "C": self.C, "order_sum": self.order_sum, "defect": self.defect,
            "closed_loops": self.closed_loops,
        }


def _check_report(r: NodalGraphReport):
    g = r.graph
    problems = []
    if g.degrees is not None and sum(g.degrees) != 2 * g.e:
        problems.append("degree sum differs from 2e")
    if r.N != g.f or r.C != g.c:
        problems.append("N, C differ from f, c")
    if g.e - g.v != r.order_sum:
        problems.append(f"e - v = {g.e - g.v} but the order sum is {r.order_sum}")
    d, ok = euler_defect(g)
    if d != r.defect or r.N - r.C - r.order_sum != d:
        problems.append("N - C - order_sum differs from the defect")
    if not ok:
        problems.append(f"defect {d} outside [{1 - 2 * g.genus}, 1]")
    if problems:
        raise GraphInconsistency("; ".join(problems))


def build_nodal_graph(f, *, grid=None, tol_singular: float | None = None) -> NodalGraphReport:
    """Nodal graph of a torus eigenfunction.

    Vertices are singular points, edges are nodal arcs between them, faces
    are nodal domains and components are connected components of the nodal
    set.  A closed nodal curve without singular points adds a component and
    nothing else.
    """
    if f.domain != TORUS:
        raise NodalAtlasError("nodal graphs are built on the torus")
    grid = grid if grid is not None else sample_grid(f)
    st = analyze(grid) if tol_singular is None else analyze(grid, tol_singular=tol_singular)
    degrees = tuple(2 * p.order for p in st.singular_points)
    try:
        g = EmbeddedGraph(len(degrees), st.graph_edges, st.N, st.C_connected, 1, degrees)
    except NodalAtlasError as exc:
        raise GraphInconsistency(str(exc)) from exc
    report = NodalGraphReport(g, st.N, st.C_connected, st.order_sum, euler_defect(g)[0], st.closed_loops)
    _check_report(report)
    return report


def singular_budget(report: NodalGraphReport, lam: float | None = None):
    """``(order_sum, N + 2 genus - 1)``; the first never exceeds the second."""
    cap = report.N + 2 * report.graph.genus - 1
    if report.order_sum > cap:
        raise GraphInconsistency(f"order sum {report.order_sum} exceeds the cap {cap}")
    return report.order_sum, cap


# ---------------------------------------------------------------------------
# random embedded graphs


class RotationSystem:
    """Mutable rotation system on darts ``0..2e-1``."""

    def __init__(self, sigma, alpha, vert, nverts):
        self.sigma = list(sigma)
        self.alpha = list(alpha)
        self.vert = list(vert)
        self.nverts = nverts

    @classmethod
    def bouquet(cls, genus: int) -> "RotationSystem":
        """One vertex with ``2 genus`` loops in the order a1 b1 a1' b1' ...; a single face."""
        if genus == 0:
            return cls([], [], [], 1)
        order = []
        for k in range(genus):
            a, b = 4 * k, 4 * k + 2
            order += [a, b, a + 1, b + 1]
        sigma = [0] * (4 * genus)
        for i, d in enumerate(order):
            sigma[d] = order[(i + 1) % len(order)]
        alpha = [d ^ 1 for d in range(4 * genus)]
        return cls(sigma, alpha, [0] * (4 * genus), 1)

    @property
    def edges(self) -> int:
        return len(self.alpha) // 2

    def faces(self):
        """Face label of every dart (cycles of ``sigma o alpha``) and the face count."""
        n = len(self.sigma)
        label = [-1] * n
        k = 0
        for d in range(n):
            if label[d] < 0:
                x = d
                while label[x] < 0:
                    label[x] = k
                    x = self.sigma[self.alpha[x]]
                k += 1
        return label, max(k, 1 if self.nverts else 0)

    def _new_pair(self, v0, v1):
        x = len(self.sigma)
        self.sigma += [x, x + 1]
        self.alpha += [x + 1, x]
        self.vert += [v0, v1]
        return x, x + 1

    def _insert_after(self, u, x):
        self.sigma[x] = self.sigma[u]
        self.sigma[u] = x

    def split_face(self, u1, u2):
        """New edge between corners after darts ``u1`` and ``u2`` of one face."""
        x, y = self._new_pair(self.vert[u1], self.vert[u2])
        self._insert_after(u1, x)
        self._insert_after(u2, y)

    def subdivide(self, d):
        """New degree-2 vertex in the middle of the edge of dart ``d``."""
        b = self.alpha[d]
        w = self.nverts
        self.nverts += 1
        p, q = self._new_pair(w, w)
        # p is paired with d, q with b; both sit at w
        self.alpha[d], self.alpha[p] = p, d
        self.alpha[b], self.alpha[q] = q, b
        self.sigma[p], self.sigma[q] = q, p

    def pendant(self, u):
        """New degree-1 vertex joined at the corner after dart ``u``."""
        w = self.nverts
        self.nverts += 1
        x, _ = self._new_pair(self.vert[u], w)
        self._insert_after(u, x)

    def add_loop_at_isolated(self):
        """First edge when the system has a single bare vertex (a contractible loop)."""
        self._new_pair(0, 0)
        self.sigma[0], self.sigma[1] = 1, 0


def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


def random_embedded_graph(genus: int, rng: np.random.Generator, grow: int = 12,
                          p_edge: float = 0.4, p_vertex: float = 0.15):
    """A random graph embedded in the genus-``genus`` surface, with its counts.

    A cellular embedding is grown from the one-vertex bouquet by face
    splits, edge subdivisions and pendant edges, all of which preserve the
    Euler characteristic (verified from the face cycles).  Edges and
    vertices are then deleted at random; faces of the remainder are unions
    of original faces glued across deleted edges.
    """
    rs = RotationSystem.bouquet(genus)
    if rs.edges == 0:
        rs.add_loop_at_isolated()
    for _ in range(int(rng.integers(0, grow + 1))):
        move = rng.random()
        ndart = len(rs.sigma)
        if move < 0.45:
            label, _ = rs.faces()
            u1 = int(rng.integers(ndart))
            same = [d for d in range(ndart) if label[d] == label[u1]]
            u2 = same[int(rng.integers(len(same)))]
            # corners are identified by the dart alpha(d) preceding them
            rs.split_face(rs.alpha[u1], rs.alpha[u2])
        elif move < 0.75:
            rs.subdivide(int(rng.integers(ndart)))
        else:
            rs.pendant(int(rng.integers(ndart)))
    label, nfaces = rs.faces()
    chi = rs.nverts - rs.edges + nfaces
    if chi != 2 - 2 * genus:
        raise GraphInconsistency(f"rotation system has chi={chi}, expected {2 - 2 * genus}")

    alive_v = rng.random(rs.nverts) >= p_vertex
    parent_f = list(range(nfaces))
    parent_v = list(range(rs.nverts))
    e_left = 0
    for d in range(len(rs.alpha)):
        b = rs.alpha[d]
        if b < d:
            continue
        u, w = rs.vert[d], rs.vert[b]
        if alive_v[u] and alive_v[w] and rng.random() >= p_edge:
            e_left += 1
            ru, rw = _find(parent_v, u), _find(parent_v, w)
            if ru != rw:
                parent_v[ru] = rw
        else:
            fa, fb = _find(parent_f, label[d]), _find(parent_f, label[b])
            if fa != fb:
                parent_f[fa] = fb
    v_left = int(alive_v.sum())
    f_left = len({_find(parent_f, x) for x in range(nfaces)})
    c_left = len({_find(parent_v, x) for x in range(rs.nverts) if alive_v[x]})
    return EmbeddedGraph(v_left, e_left, f_left, c_left, genus)
