"""Exact minimization of the diversity exponent objective over ordered cones.

The optimization domain is the polyhedron

    P = { u >= a_1 >= a_2 >= ... >= a_p,  sum_i a_i = 0 }

and the objective is the convex piecewise-linear function

    g(a) = sum_i c_i a_i  +  h * sum_i (a_i + 1 - u)^+

where the linear coefficients, the hinge weight h, and the bound u depend
on the matrix group behind the code construction:

    SLN_C  (complex special linear):     c_i = 2i,  h = m,   u = s/n
    SLN_R  (real special linear):        c_i = i,   h = m,   u = 2s/n
    SLN_H  (quaternionic, n = 2p even):  c_i = 4i,  h = 2m,  u = s/p

with m the receive antenna count and s the effective multiplexing gain.
The linear part is -beta/2 for the highest restricted-root weight beta of
the group, and the quaternionic case doubles every diagonal contribution
(each of the p free diagonal parameters occupies two matrix slots).

g is convex but not concave, so its minimum over P need not sit at a
vertex of P.  It is, however, linear on each slab carved out by the
hyperplanes {a_k = u - 1}; the minimum is therefore attained at a vertex
of the slab subdivision.  Those vertices have at most three level blocks:

    V_k : k coordinates at u, the rest balancing at -k u / (p - k);
    Q_jl: l coordinates at u, a middle block down to index j at an
          interpolated level, and p - j coordinates at u - 1;
    R_jl: j coordinates at u, a middle block at exactly u - 1 through
          index l, and p - l balancing coordinates below u - 1.

`min_g_exact` evaluates g at every such candidate (coordinates are always
ground truth; the closed-form values of `vertex_value_formula` serve as an
independent audit oracle).  `min_g_grid` is a brute-force companion that
minimizes g over a regular grid; it is computed by dynamic programming
over (level, partial sum) states, which returns exactly the minimum of
g over the grid point set without enumerating it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import UsageError

GROUP_TAGS = ("SLN_C", "SLN_R", "SLN_H")

_GRID_STATE_LIMIT = 4096


def normalize_group_tag(tag: str) -> str:
    cleaned = tag.strip().upper().replace("-", "_")
    if cleaned in ("SLNC", "SLN_C", "C"):
        return "SLN_C"
    if cleaned in ("SLNR", "SLN_R", "R"):
        return "SLN_R"
    if cleaned in ("SLNH", "SLN_H", "H"):
        return "SLN_H"
    raise UsageError(f"unknown group {tag!r}; expected one of slnc, slnr, slnh")


@dataclass(frozen=True)
class GroupKind:
    """Matrix group family with its free diagonal parameter count p."""

    tag: str
    n: int

    def __post_init__(self):
        if self.tag not in GROUP_TAGS:
            raise UsageError(f"unknown group tag {self.tag!r}")
        if self.n < 2:
            raise UsageError(f"matrix size must be at least 2, got {self.n}")
        if self.tag == "SLN_H" and self.n % 2:
            raise UsageError("SLN_H needs an even matrix size")

    @property
    def p(self) -> int:
        return self.n // 2 if self.tag == "SLN_H" else self.n


@dataclass(frozen=True)
class LieData:
    """Restricted-root data: multiplicities, highest weight, chamber bound."""

    multiplicity: int
    beta_coeffs: tuple[float, ...]
    roots: tuple[tuple[int, int], ...]
    u_factor: float
    diag_weight: int


def lie_data(group: GroupKind) -> LieData:
    p = group.p
    if group.tag == "SLN_C":
        mult, coeff, u_factor, diag = 2, 4, 1.0 / group.n, 1
    elif group.tag == "SLN_R":
        mult, coeff, u_factor, diag = 1, 2, 2.0 / group.n, 1
    else:
        mult, coeff, u_factor, diag = 4, 8, 1.0 / p, 2
    roots = tuple((i, k) for i in range(p) for k in range(i + 1, p))
    beta = tuple(-float(coeff) * (i + 1) for i in range(p))
    return LieData(mult, beta, roots, u_factor, diag)


def beta_from_roots(alpha, data: LieData) -> float:
    """Highest weight as the multiplicity-weighted sum over the root list."""
    alpha = np.asarray(alpha, dtype=np.float64)
    return data.multiplicity * float(
        sum(alpha[i] - alpha[k] for i, k in data.roots)
    )


@dataclass(frozen=True)
class ChamberProblem:
    """One minimization instance: group, receive antennas m, gain s."""

    group: GroupKind
    m: int
    s: float

    def __post_init__(self):
        if self.m < 1:
            raise UsageError(f"receive antenna count must be positive, got {self.m}")
        if self.s < 0:
            raise UsageError(f"multiplexing gain must be nonnegative, got {self.s}")

    @property
    def p(self) -> int:
        return self.group.p

    @property
    def u(self) -> float:
        return lie_data(self.group).u_factor * self.s

    @property
    def w(self) -> float:
        # index pivot: block levels hit u - 1 only past this value
        return self.p * (1.0 - self.u)

    @property
    def linear_coeffs(self) -> np.ndarray:
        scale = {"SLN_C": 2, "SLN_R": 1, "SLN_H": 4}[self.group.tag]
        return scale * np.arange(1, self.p + 1, dtype=np.float64)

    @property
    def hinge_weight(self) -> float:
        return 2.0 * self.m if self.group.tag == "SLN_H" else float(self.m)


@dataclass(frozen=True)
class CandidateVertex:
    """A labeled candidate minimizer: V_k, Q_jl, or R_jl (1-based indices)."""

    label: str
    indices: tuple[int, ...]
    coords: tuple[float, ...]
    g_value: float

    def describe(self) -> str:
        return f"{self.label}{','.join(str(i) for i in self.indices)}"


def g_eval(alpha, problem: ChamberProblem) -> float:
    """Objective value at a point of the chamber (case-specific form)."""
    alpha = np.asarray(alpha, dtype=np.float64)
    if alpha.shape != (problem.p,):
        raise UsageError(f"alpha must have length {problem.p}, got shape {alpha.shape}")
    lin = float(problem.linear_coeffs @ alpha)
    hinge = float(np.sum(np.maximum(alpha + 1.0 - problem.u, 0.0)))
    return lin + problem.hinge_weight * hinge


def g_eval_unified(alpha, problem: ChamberProblem) -> float:
    """Same objective through the highest-weight form -beta/2 + hinges."""
    data = lie_data(problem.group)
    alpha = np.asarray(alpha, dtype=np.float64)
    beta = float(np.asarray(data.beta_coeffs) @ alpha)
    hinge = float(np.sum(np.maximum(alpha + 1.0 - problem.u, 0.0)))
    return -beta / 2.0 + problem.m * data.diag_weight * hinge


def in_polyhedron(alpha, problem: ChamberProblem, tol: float = 1e-9) -> bool:
    alpha = np.asarray(alpha, dtype=np.float64)
    if alpha[0] > problem.u + tol:
        return False
    if np.any(np.diff(alpha) > tol):
        return False
    return abs(float(alpha.sum())) <= tol * max(1.0, problem.p)


def simplex_vertices(problem: ChamberProblem) -> list[CandidateVertex]:
    """Vertices V_0 = 0 and V_k of the chamber polyhedron itself."""
    p, u = problem.p, problem.u
    zero = (0.0,) * p
    verts = [CandidateVertex("V", (0,), zero, g_eval(zero, problem))]
    if problem.s <= 0:
        return verts
    for k in range(1, p):
        coords = (u,) * k + (-k * u / (p - k),) * (p - k)
        verts.append(CandidateVertex("V", (k,), coords, g_eval(coords, problem)))
    return verts


def subdivision_vertices(problem: ChamberProblem) -> list[CandidateVertex]:
    """Extra candidates Q_jl and R_jl created by the hinge hyperplanes.

    Q_jl has l top coordinates at u, an interpolated middle block through
    index j, and the tail pinned at u - 1; it exists for integer
    l in [0, ceil(w-1)] and j in (w, p).  R_jl has j top coordinates at u,
    a middle block pinned at u - 1 through index l, and a balancing tail;
    it exists for integer w < j < l <= p - 1.  Every emitted point is
    checked to lie in the polyhedron; values always come from g_eval.
    """
    p, u, w = problem.p, problem.u, problem.w
    out: list[CandidateVertex] = []
    if problem.s <= 0 or p < 2:
        return out
    j_min = max(1, math.floor(w) + 1)
    l_max = math.ceil(w - 1.0)
    for j in range(j_min, p):
        for l in range(0, min(l_max, j - 1) + 1):
            mid = u + (w - j) / (j - l)
            coords = (u,) * l + (mid,) * (j - l) + (u - 1.0,) * (p - j)
            _check_candidate(coords, problem, "Q", (j, l))
            out.append(CandidateVertex("Q", (j, l), coords, g_eval(coords, problem)))
    for j in range(j_min, p):
        for l in range(j + 1, p):
            bot = ((l - j) - l * u) / (p - l)
            coords = (u,) * j + (u - 1.0,) * (l - j) + (bot,) * (p - l)
            _check_candidate(coords, problem, "R", (j, l))
            out.append(CandidateVertex("R", (j, l), coords, g_eval(coords, problem)))
    return out


def _check_candidate(coords, problem, label, indices):
    if not in_polyhedron(coords, problem, tol=1e-9):
        raise RuntimeError(
            f"constructed candidate {label}{indices} left the polyhedron; "
            "index-range bug"
        )


def candidate_vertices(problem: ChamberProblem) -> list[CandidateVertex]:
    """All candidates, deduplicated by coordinates (V labels keep priority)."""
    cands = simplex_vertices(problem) + subdivision_vertices(problem)
    kept: list[CandidateVertex] = []
    for cand in cands:
        dup = any(
            max(abs(a - b) for a, b in zip(cand.coords, k.coords)) <= 1e-12
            for k in kept
        )
        if not dup:
            kept.append(cand)
    return kept


def min_g_exact(problem: ChamberProblem) -> tuple[float, CandidateVertex]:
    """Exact minimum of g over the chamber polyhedron via vertex candidates.

    Ties break toward V labels, then lowest indices (candidate order).
    """
    best = None
    for cand in candidate_vertices(problem):
        if best is None or cand.g_value < best.g_value:
            best = cand
    return best.g_value, best


def vertex_value_formula(problem: ChamberProblem, vertex: CandidateVertex) -> float:
    """Closed-form g value of a labeled candidate (audit oracle only).

    These are the symbolic per-label values; `min_g_exact` never uses them.
    The quaternionic case reduces to the complex case on p coordinates with
    every value doubled.  For SLN_R the R_jl value is
    -s*l + (l-j)(n-j)/2 + m*j; note the halved quadratic term, matching the
    published coordinates (the unhalved variant does not).
    """
    m, s = problem.m, problem.s
    tag = problem.group.tag
    if tag in ("SLN_C", "SLN_H"):
        nn = problem.p  # matrix size for SLN_C; block count for SLN_H
        scale = 2.0 if tag == "SLN_H" else 1.0
        if vertex.label == "V":
            (k,) = vertex.indices
            val = -k * s + m * k + m * max(nn - k - s, 0.0)
        elif vertex.label == "Q":
            j, l = vertex.indices
            val = m * (nn - s) - (nn - j) * (nn - s) + l * (nn - s - j)
        else:
            j, l = vertex.indices
            val = -s * l + (l - j) * (nn - j) + m * j
        return scale * val
    n = problem.group.n
    if vertex.label == "V":
        (k,) = vertex.indices
        return -k * s + m * k + m * max(n - k - 2.0 * s, 0.0)
    if vertex.label == "Q":
        j, l = vertex.indices
        return m * (n - 2.0 * s) - (n - 2.0 * s) * (n - j) / 2.0 + (l / 2.0) * (n - j - 2.0 * s)
    j, l = vertex.indices
    return -s * l + (l - j) * (n - j) / 2.0 + m * j


def lipschitz_const(problem: ChamberProblem) -> float:
    """Sum of absolute objective coefficients (reported Lipschitz constant)."""
    return float(np.sum(problem.linear_coeffs)) + problem.p * problem.hinge_weight


@dataclass(frozen=True)
class GridResult:
    value: float
    step: float
    lipschitz: float
    coarse_step_warning: bool


def min_g_grid(problem: ChamberProblem, step: float | None = None) -> GridResult:
    """Minimum of g over the regular grid inside the ordered box.

    Grid points put the first p-1 coordinates on {u - t*step}, force the
    last coordinate to the negated partial sum, and skip points outside the
    polyhedron.  The minimum over that set is computed exactly by dynamic
    programming over (coordinate level, partial sum) states.  Guaranteed to
    lie within [min_g_exact, min_g_exact + L*step*sqrt(p)].
    """
    p, u = problem.p, problem.u
    L = lipschitz_const(problem)
    if problem.p > 6:
        raise UsageError("grid oracle limited to p <= 6")
    if u <= 0 or p == 1:
        zero = np.zeros(p)
        return GridResult(g_eval(zero, problem), 0.0, L, False)
    if step is None:
        step = u / 200.0
    if step <= 0:
        raise UsageError(f"step must be positive, got {step}")
    warn = step > u / 4.0 * (1 + 1e-12)
    t_max = int(math.floor(p * u / step + 1e-9))
    if t_max + 1 > _GRID_STATE_LIMIT:
        raise UsageError(
            f"grid with step {step} needs {t_max + 1} levels per coordinate; "
            f"limit is {_GRID_STATE_LIMIT}"
        )
    width = t_max + 1
    alpha_vals = u - step * np.arange(width)
    coeffs = problem.linear_coeffs
    hw = problem.hinge_weight

    def phi(level: int, values: np.ndarray) -> np.ndarray:
        return coeffs[level] * values + hw * np.maximum(values + 1.0 - problem.u, 0.0)

    inf = np.inf
    cost = np.full((width, width), inf)
    diag = np.arange(width)
    cost[diag, diag] = phi(0, alpha_vals)
    for level in range(1, p - 1):
        prefix = np.minimum.accumulate(cost, axis=0)
        nxt = np.full((width, width), inf)
        phi_level = phi(level, alpha_vals)
        for t in range(width):
            nxt[t, t:] = phi_level[t] + prefix[t, : width - t]
        cost = nxt
    sums = np.arange(width)
    alpha_last = step * sums - (p - 1) * u
    phi_last = phi(p - 1, alpha_last)
    total = cost + phi_last[None, :]
    feasible = alpha_last[None, :] <= alpha_vals[:, None] + 1e-9 * max(1.0, u)
    total = np.where(feasible, total, inf)
    return GridResult(float(total.min()), step, L, warn)


@dataclass(frozen=True)
class ClosedFormReport:
    group_tag: str
    n: int
    m: int
    s: float
    min_exact: float
    argmin: CandidateVertex
    grid_value: float | None
    closed_form: float
    relation: str
    condition_held: bool


def verify_closed_form(group, n: int, m: int, s: float, *, tol: float = 1e-9,
                       with_grid: bool = False, step: float | None = None) -> ClosedFormReport:
    """Compare the exact chamber minimum against the closed-form curve value.

    Reports whether they are equal (within tol), or whether the true
    minimum falls below/above, together with whether the antenna-count
    condition backing the closed form held.  Never asserts equality.
    """
    from . import dmt

    tag = normalize_group_tag(group if isinstance(group, str) else group.tag)
    problem = ChamberProblem(GroupKind(tag, n), m, s)
    value, argmin = min_g_exact(problem)
    closed = dmt.d_bar(s, tag, n, m)
    if abs(value - closed.value) <= tol:
        relation = "equal"
    elif value < closed.value:
        relation = "below"
    else:
        relation = "above"
    grid_value = min_g_grid(problem, step).value if with_grid else None
    return ClosedFormReport(
        group_tag=tag, n=n, m=m, s=s, min_exact=value, argmin=argmin,
        grid_value=grid_value, closed_form=closed.value, relation=relation,
        condition_held=closed.condition_ok,
    )
