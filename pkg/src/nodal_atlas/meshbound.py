"""Mesh-intersection upper bounds on the number of nodal domains.

On the square the mesh is the family of vertical lines
``x = pi k / sqrt(tau - pi^2)``, the nodal set of
``sin(sqrt(tau - pi^2) x) sin(pi y)`` with ``tau`` slightly above ``lambda``.
Restricted to a vertical line an eigenfunction is a sine polynomial in ``y``
with at most ``sqrt(lambda)/pi`` sign changes, and every closed nodal curve
meets the mesh at least twice.  On the torus the mesh is a family of parallel
closed geodesics in a lattice direction ``(p, q)`` together with the two
coordinate circles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateRestriction, NodalAtlasError, NotInSectorClass, TransversalityFailure
from .lattice import best_direction, direction_net, sector_membership, sum_two_squares
from .nodal import analyze, sample_grid
from .spectra import PI, SQUARE, TORUS, SquareEigenfunction, TorusEigenfunction

GOLDEN_RATIO = (1.0 + math.sqrt(5.0)) / 2.0
DEFAULT_DELTA = 1e-3
MAX_RETRIES = 8
BISECTION_WIDTH = 1e-10
CERTIFY_FLOOR = 1e-13
TANGENCY_SHIFT = 1e-6


@dataclass(frozen=True)
class SquareMesh:
    tau: float
    lines: tuple
    lam: float
    delta: float


@dataclass(frozen=True)
class TorusMesh:
    p: int
    q: int
    tau: float
    shifts: tuple
    includes_E: bool = True


@dataclass
class BoundReport:
    """Measured counts against a mesh-derived bound.

    ``checks`` holds the intermediate inequalities of the counting argument,
    each as a boolean; ``details`` holds the numbers they compare.
    """

    lam: float
    bound_value: float
    measured_N: int
    measured_C: int
    per_line_sign_changes: list
    intersections_per_component: list
    satisfied: bool
    advisory: bool = False
    checks: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    @property
    def all_checks_pass(self) -> bool:
        return self.satisfied and all(self.checks.values())


# ---------------------------------------------------------------------------
# sign changes of one-dimensional trigonometric restrictions


def _sign(v):
    return np.where(v > 0, 1, np.where(v < 0, -1, 0))


# fractions of a sample step by which the interior samples are shifted when
# one of them hits an exact zero
_SAMPLE_SHIFTS = (0.0, 0.381966011250105, 0.236067977499790, 0.145898033750315)


def certified_sign_changes(g, dg, curvature: float, samples: int, periodic: bool = False,
                           width: float = BISECTION_WIDTH, floor: float = CERTIFY_FLOOR):
    """Sign changes of a smooth function on [0, 1], certified by a curvature bound.

    ``curvature`` must bound ``|g''|``.  Each sample interval is either shown
    zero-free (end values share a sign and exceed the interpolation error
    ``M h^2 / 8``), shown monotone (end slopes share a sign and exceed
    ``M h / 2``) or halved.  A monotone interval holds a sign change exactly
    when its end values differ in sign; those are bisected to ``width``.
    Intervals still undecided below ``floor`` (tangential zeros) are counted
    by their end signs and reported.

    Returns ``(positions, uncertain)``.
    """
    M = float(curvature)
    for shift in _SAMPLE_SHIFTS:
        if periodic:
            lo = (np.arange(samples) + shift) / samples
            hi = lo + 1.0 / samples
        else:
            inner = (np.arange(1, samples) + shift) / samples
            nodes = np.concatenate(([0.0], inner, [1.0]))
            lo, hi = nodes[:-1], nodes[1:]
        wrap = np.mod if periodic else (lambda t, _: t)
        v = np.asarray(g(wrap(lo, 1.0)), dtype=float)
        if periodic:
            vhi = np.roll(v, -1)
        else:
            vhi = np.append(v[1:], float(np.asarray(g(np.array([1.0])))[0]))
        inner_vals = v if periodic else v[1:]
        if not np.any(inner_vals == 0.0):
            break
    else:
        raise DegenerateRestriction("samples keep landing on exact zeros")
    d = np.asarray(dg(wrap(lo, 1.0)), dtype=float)
    dhi = np.roll(d, -1) if periodic else np.append(d[1:], float(np.asarray(dg(np.array([1.0])))[0]))

    brackets, signs, uncertain = [], [], 0
    v0, v1, d0, d1 = v, vhi, d, dhi
    while lo.size:
        h = hi - lo
        free = (v0 * v1 > 0) & (np.minimum(np.abs(v0), np.abs(v1)) > M * h * h / 8)
        mono = ~free & (d0 * d1 > 0) & (np.minimum(np.abs(d0), np.abs(d1)) > M * h / 2)
        tiny = ~free & ~mono & (h < floor)
        change = (mono | tiny) & (_sign(v0) * _sign(v1) < 0)
        uncertain += int(np.count_nonzero(tiny))
        brackets.append(np.stack([lo[change], hi[change]], axis=1))
        signs.append(_sign(v0[change]))
        todo = ~free & ~mono & ~tiny
        if not todo.any():
            break
        lo, hi, v0, v1, d0, d1 = lo[todo], hi[todo], v0[todo], v1[todo], d0[todo], d1[todo]
        mid = 0.5 * (lo + hi)
        vm = np.asarray(g(wrap(mid, 1.0)), dtype=float)
        hit = vm == 0.0
        if hit.any():
            mid[hit] = lo[hit] + 0.4715 * (hi[hit] - lo[hit])
            vm[hit] = np.asarray(g(wrap(mid[hit], 1.0)), dtype=float)
        dm = np.asarray(dg(wrap(mid, 1.0)), dtype=float)
        lo, hi = np.concatenate([lo, mid]), np.concatenate([mid, hi])
        v0, v1 = np.concatenate([v0, vm]), np.concatenate([vm, v1])
        d0, d1 = np.concatenate([d0, dm]), np.concatenate([dm, d1])

    br = np.concatenate(brackets) if brackets else np.zeros((0, 2))
    slo = np.concatenate(signs) if signs else np.zeros(0)
    a, b = br[:, 0].copy(), br[:, 1].copy()
    while a.size and np.max(b - a) > width:
        mid = 0.5 * (a + b)
        sm = _sign(np.asarray(g(wrap(mid, 1.0)), dtype=float))
        exact = sm == 0
        left = sm == slo
        a = np.where(exact | left, mid, a)
        b = np.where(exact | ~left, mid, b)
    pos = 0.5 * (a + b)
    pos = np.sort(np.mod(pos, 1.0) if periodic else pos)
    return pos, uncertain


def line_restriction(f: SquareEigenfunction, x0: float):
    """Frequencies ``b`` and coefficients of ``y -> f(x0, y) = sum C_b sin(pi b y)``."""
    coef = {}
    for a, b, c in f.terms:
        coef[b] = coef.get(b, 0.0) + c * math.sin(PI * a * x0)
    bs = np.array(sorted(coef), dtype=float)
    return bs, np.array([coef[int(b)] for b in bs])


def _line_quotient(bs, cs):
    """Cosine series of ``f(x0, y) / sin(pi y)``, using ``sin(b u)/sin(u) = sum_j cos((b-1-2j) u)``."""
    coef = {}
    for b, c in zip(bs.astype(int), cs):
        for j in range(b):
            k = abs(b - 1 - 2 * j)
            coef[k] = coef.get(k, 0.0) + c
    ks = np.array(sorted(coef), dtype=float)
    return ks, np.array([coef[int(k)] for k in ks])


def _line_changes(f, x0, samples=None):
    if f.domain != SQUARE:
        raise NodalAtlasError("sign_changes_on_line takes a square eigenfunction")
    if not 0.0 < x0 < 1.0:
        raise NodalAtlasError("x0 must lie in (0, 1)")
    bs, cs = line_restriction(f, x0)
    if np.all(np.abs(cs) < 1e-12 * f.amplitude):
        raise DegenerateRestriction(f"the restriction to x={x0!r} vanishes identically")
    ks, ac = _line_quotient(bs, cs)
    w = PI * ks

    def q(y):
        return np.cos(np.outer(np.atleast_1d(y), w)) @ ac

    def dq(y):
        return -np.sin(np.outer(np.atleast_1d(y), w)) @ (w * ac)

    n = samples or 8 * (int(bs.max()) + 1)
    return certified_sign_changes(q, dq, float(np.sum(np.abs(ac) * w * w)), n)


def sign_changes_on_line(f: SquareEigenfunction, x0: float, *, samples: int | None = None,
                         return_positions: bool = False):
    """Number of sign changes of ``y -> f(x0, y)`` on (0, 1).

    The restriction is divided by ``sin(pi y)``, which leaves a cosine
    polynomial with the same interior zeros and no forced zeros at the ends;
    its sign changes are counted by :func:`certified_sign_changes` starting
    from ``8 (b_max + 1)`` samples.
    """
    pos, _ = _line_changes(f, x0, samples)
    return (pos.size, pos) if return_positions else pos.size


def square_bound(lam: float) -> float:
    """``lambda / (2 pi^2) + 2 sqrt(lambda) / pi + 1``."""
    if lam <= 0:
        raise NodalAtlasError("lambda must be positive")
    return lam / (2 * PI * PI) + 2 * math.sqrt(lam) / PI + 1


def mesh_chain_bound(lam: float, mesh: SquareMesh) -> float:
    """The same bound evaluated at the finite mesh: ``L * sqrt(lambda)/pi / 2 + 2 sqrt(lambda)/pi + 1``.

    ``L`` is the number of mesh lines; as ``tau`` decreases to ``lambda`` this
    tends to :func:`square_bound`.
    """
    k = math.sqrt(lam) / PI
    return len(mesh.lines) * k / 2 + 2 * k + 1


def _mesh_lines(tau):
    w = math.sqrt(tau - PI * PI)
    count = math.floor(w / PI + 1e-12)
    lines = tuple(PI * k / w for k in range(1, count + 1))
    return tuple(x for x in lines if x < 1.0)


def _line_is_transversal(f, x0):
    try:
        p1, u1 = _line_changes(f, x0)
        bmax = max(b for _, b, _ in f.terms)
        p2, u2 = _line_changes(f, x0, samples=16 * (bmax + 1))
    except DegenerateRestriction:
        return False
    if u1 or u2 or p1.size != p2.size:
        return False
    return p1.size == 0 or np.max(np.abs(p1 - p2)) <= TANGENCY_SHIFT


def build_square_mesh(lam: float, delta: float = DEFAULT_DELTA, f: SquareEigenfunction | None = None) -> SquareMesh:
    """Mesh ``M_tau`` with ``tau = lambda (1 + delta)``.

    With ``f`` given each line is screened: its restriction must not vanish
    and its sign-change positions must not move by more than ``1e-6`` when
    the sampling rate doubles.  On failure ``delta`` is multiplied by
    ``golden - 1`` and the mesh is rebuilt, at most eight times.
    """
    if delta <= 0:
        raise NodalAtlasError("delta must be positive")
    if lam <= PI * PI * (1 + 1e-12):
        raise NodalAtlasError("lambda must exceed pi^2 for a nonempty mesh")
    d = delta
    for _ in range(MAX_RETRIES + 1):
        tau = lam * (1 + d)
        mesh = SquareMesh(tau, _mesh_lines(tau), lam, d)
        if f is None:
            return mesh
        bad = [x for x in mesh.lines if not _line_is_transversal(f, x)]
        if not bad:
            return mesh
        d *= GOLDEN_RATIO - 1
    raise TransversalityFailure(f"mesh line x={bad[0]:.12g} touches the nodal set tangentially")


def verify_square_counting(f: SquareEigenfunction, mesh: SquareMesh | None = None, *, grid=None,
                           delta: float = DEFAULT_DELTA, tol_singular: float | None = None) -> BoundReport:
    """Run the square counting argument on one eigenfunction.

    Checks that every mesh line has at most ``floor(sqrt(lambda)/pi)`` sign
    changes, that every closed nodal curve meets the mesh at least twice, and
    that there are at most ``4 sqrt(lambda)/pi`` boundary end points; the
    bound itself is ``N <= square_bound(lambda)``.  With singular points
    present the report is marked advisory.
    """
    lam = f.lam
    if mesh is None:
        mesh = build_square_mesh(lam, delta, f)
    grid = grid if grid is not None else sample_grid(f)
    st = analyze(grid) if tol_singular is None else analyze(grid, tol_singular=tol_singular)
    k = math.sqrt(lam) / PI
    kmax = math.floor(k + 1e-9)
    per_line = []
    hits = {}
    for x0 in mesh.lines:
        try:
            n, pos = sign_changes_on_line(f, x0, return_positions=True)
        except DegenerateRestriction as exc:
            raise TransversalityFailure(str(exc)) from exc
        if not _line_is_transversal(f, x0):
            raise TransversalityFailure(f"mesh line x={x0:.12g} is tangent to the nodal set")
        per_line.append(int(n))
        for y in pos:
            lab = st.curve_of_point(x0, float(y))
            hits[lab] = hits.get(lab, 0) + 1
    closed = [c for c, seg in enumerate(st.segments) if not seg]
    inter = [hits.get(c, 0) for c in closed]
    bound = square_bound(lam)
    N = st.N
    checks = {
        "line_sign_changes": all(c <= kmax for c in per_line),
        "closed_intersections": all(c >= 2 for c in inter),
        "boundary_endpoints": st.boundary_endpoints <= 4 * k + 1e-9,
        "decomposition": (N == st.N_s + st.N_c + 1) if not st.singular_points else True,
        "closed_count": 2 * st.N_c <= sum(per_line),
    }
    return BoundReport(
        lam=lam,
        bound_value=bound,
        measured_N=N,
        measured_C=st.C,
        per_line_sign_changes=per_line,
        intersections_per_component=inter,
        satisfied=N <= bound,
        advisory=bool(st.singular_points),
        checks=checks,
        details={
            "tau": mesh.tau,
            "delta": mesh.delta,
            "lines": list(mesh.lines),
            "line_sign_change_cap": kmax,
            "bound_at_tau": mesh_chain_bound(lam, mesh),
            "bound_limit": bound,
            "N_s": st.N_s,
            "N_c": st.N_c,
            "boundary_endpoints": st.boundary_endpoints,
            "singular_points": len(st.singular_points),
        },
    )


# ---------------------------------------------------------------------------
# torus


def strip_first_eigenvalue(p: int, q: int, tau: float) -> float:
    """First Dirichlet eigenvalue ``(pi^2/tau^2)(1 + p^2/q^2)`` of the strip between adjacent geodesics."""
    if tau <= 0 or q < 1:
        raise NodalAtlasError("need tau > 0 and q >= 1")
    return PI * PI / (tau * tau) * (1 + p * p / (q * q))


def choose_tau(lam: float, p: int, q: int) -> float:
    """Shift making the strip eigenvalue equal to ``lambda``."""
    if lam <= 0 or q < 1:
        raise NodalAtlasError("need lambda > 0 and q >= 1")
    return PI * math.sqrt((1 + p * p / (q * q)) / lam)


def build_torus_mesh(lam: float, p: int, q: int) -> TorusMesh:
    tau = choose_tau(lam, p, q)
    count = math.ceil(1.0 / (q * tau) - 1e-12)
    return TorusMesh(p, q, tau, tuple(k * tau for k in range(1, count + 1)))


def geodesic_restriction(f: TorusEigenfunction, p: int, q: int, shift: float):
    """Integer frequencies and coefficients of ``t -> f(p t + shift, q t)``."""
    coef = {}
    for a, b, c in f.terms:
        w = a * p + b * q
        coef[w] = coef.get(w, 0.0) + c * np.exp(2j * PI * a * shift)
    ws = np.array(sorted(coef), dtype=float)
    return ws, np.array([coef[int(w)] for w in ws])


def _periodic_changes(ws, cs, samples=None, strict=True):
    if np.all(np.abs(cs) < 1e-12 * max(1.0, float(np.abs(cs).sum()))):
        raise DegenerateRestriction("restriction vanishes identically")
    W = int(np.abs(ws).max())
    n = samples or 8 * (W + 1)
    om = 2 * PI * ws

    def g(t):
        return (np.exp(1j * np.outer(np.atleast_1d(t), om)) @ cs).real

    def dg(t):
        return (np.exp(1j * np.outer(np.atleast_1d(t), om)) @ (1j * om * cs)).real

    pos, uncertain = certified_sign_changes(g, dg, float(np.sum(np.abs(cs) * om * om)), n, periodic=True)
    if uncertain and strict:
        raise TransversalityFailure(f"{uncertain} tangential zero(s) on the geodesic")
    return pos


def geodesic_sign_changes(f: TorusEigenfunction, p: int, q: int, shift: float, *, samples=None,
                          return_positions=False, strict=True):
    """Sign changes of ``f`` along the closed geodesic through ``(shift, 0)`` in direction ``(p, q)``.

    With ``strict`` a tangential zero raises :class:`TransversalityFailure`.
    """
    ws, cs = geodesic_restriction(f, p, q, shift)
    pos = _periodic_changes(ws, cs, samples, strict)
    return (pos.size, pos) if return_positions else pos.size


def verify_torus_counting(f: TorusEigenfunction, theta: float, epsilon: float, *, grid=None,
                          tol_singular: float | None = None) -> BoundReport:
    """Run the torus counting argument in a direction chosen from the net.

    ``bound_value`` is the explicit inequality
    ``N <= (lambda/2 pi^2) cos(theta - eps) + sqrt(p^2+q^2) cos(theta - eps) sqrt(n) + 2 sqrt(n)``.
    """
    if f.domain != TORUS:
        raise NodalAtlasError("verify_torus_counting takes a torus eigenfunction")
    n, lam = f.n, f.lam
    circle = sum_two_squares(n)
    if not sector_membership(circle, 2 * theta):
        raise NotInSectorClass(f"n={n} has no empty open sector of width {2 * theta:.6g}")
    net = direction_net(epsilon)
    p, q = best_direction(circle, theta, epsilon, net)
    mesh = build_torus_mesh(lam, p, q)
    cos_te = math.cos(theta - epsilon)
    rn = math.sqrt(n)
    norm = math.hypot(p, q)
    length_cap = 2 * rn * norm * cos_te
    grid = grid if grid is not None else sample_grid(f)
    st = analyze(grid) if tol_singular is None else analyze(grid, tol_singular=tol_singular)

    hits = {}
    per_line = []

    def record(count, pts):
        per_line.append(int(count))
        for x, y in pts:
            lab = st.curve_of_point(x % 1.0, y % 1.0)
            hits[lab] = hits.get(lab, 0) + 1

    for shift in mesh.shifts:
        try:
            cnt, ts = geodesic_sign_changes(f, p, q, shift, return_positions=True)
            cnt2, ts2 = geodesic_sign_changes(f, p, q, shift, return_positions=True,
                                              samples=16 * (int(np.abs(geodesic_restriction(f, p, q, shift)[0]).max()) + 1))
        except DegenerateRestriction as exc:
            raise TransversalityFailure(f"geodesic at shift {shift:.12g}: {exc}") from exc
        if cnt != cnt2 or (cnt and np.max(np.abs(ts - ts2)) > TANGENCY_SHIFT):
            raise TransversalityFailure(f"geodesic at shift {shift:.12g} is tangent to the nodal set")
        record(cnt, [(p * t + shift, q * t) for t in ts])
    e_counts = []
    for axis in (0, 1):
        # x = 0 circle: t -> f(0, t); y = 0 circle: t -> f(t, 0)
        pp, qq = (0, 1) if axis == 0 else (1, 0)
        try:
            cnt, ts = geodesic_sign_changes(f, pp, qq, 0.0, return_positions=True, strict=False)
        except DegenerateRestriction:
            cnt, ts = 0, np.zeros(0)
        e_counts.append(int(cnt))
        record(cnt, [(pp * t, qq * t) for t in ts])
    total = sum(per_line)
    chain = length_cap * len(mesh.shifts) + 4 * rn
    leading = lam / (2 * PI * PI) * cos_te
    slack = norm * cos_te * rn + 2 * rn
    bound = leading + slack
    N = st.N
    comps = sorted(hits)
    checks = {
        "geodesic_sign_changes": all(c <= length_cap + 1e-9 for c in per_line[: len(mesh.shifts)]),
        "E_sign_changes": all(c <= 2 * rn + 1e-9 for c in e_counts),
        "intersection_parity": all(c % 2 == 0 for c in per_line),
        "intersection_chain": total <= chain + 1e-9,
    }
    return BoundReport(
        lam=lam,
        bound_value=bound,
        measured_N=N,
        measured_C=st.C,
        per_line_sign_changes=per_line,
        intersections_per_component=[hits[c] for c in comps],
        satisfied=N <= bound,
        advisory=bool(st.singular_points),
        checks=checks,
        details={
            "p": p,
            "q": q,
            "tau": mesh.tau,
            "shifts": len(mesh.shifts),
            "leading_term": leading,
            "slack": slack,
            "bound_ceiling_form": rn * norm * cos_te * len(mesh.shifts) + 2 * rn + 1,
            "intersection_total": total,
            "intersection_chain_bound": chain,
            "geodesic_length_cap": length_cap,
            "E_sign_changes": e_counts,
            "C_connected": st.C_connected,
        },
    )
