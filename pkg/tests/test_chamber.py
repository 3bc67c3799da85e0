"""Chamber geometry: candidate vertices, exact minima, and the grid oracle."""

import itertools
import math

import numpy as np
import pytest

from conftest import iter_standard_sweep, naive_grid_min, random_feasible_alpha
from dmtcodes import chamber, dmt
from dmtcodes.chamber import (
    CandidateVertex,
    ChamberProblem,
    GroupKind,
    beta_from_roots,
    g_eval,
    g_eval_unified,
    in_polyhedron,
    lie_data,
    min_g_exact,
    min_g_grid,
    simplex_vertices,
    subdivision_vertices,
    vertex_value_formula,
)
from dmtcodes.errors import UsageError


def prob(tag, n, m, s):
    return ChamberProblem(GroupKind(tag, n), m, s)


# --- group kinds and root data ---------------------------------------------

def test_group_kind_p():
    assert GroupKind("SLN_C", 4).p == 4
    assert GroupKind("SLN_R", 5).p == 5
    assert GroupKind("SLN_H", 6).p == 3
    with pytest.raises(UsageError):
        GroupKind("SLN_H", 3)
    with pytest.raises(UsageError):
        GroupKind("SU_N", 3)


def test_lie_data_multiplicities_and_bounds():
    c = lie_data(GroupKind("SLN_C", 4))
    r = lie_data(GroupKind("SLN_R", 4))
    h = lie_data(GroupKind("SLN_H", 4))
    assert (c.multiplicity, r.multiplicity, h.multiplicity) == (2, 1, 4)
    assert c.u_factor == pytest.approx(1 / 4)
    assert r.u_factor == pytest.approx(2 / 4)
    assert h.u_factor == pytest.approx(1 / 2)
    assert (c.diag_weight, r.diag_weight, h.diag_weight) == (1, 1, 2)


def test_beta_root_sum_matches_chamber_coefficients():
    # the weighted root sum and the chamber-coefficient form agree on
    # trace-zero vectors; checked on every simplex vertex
    for tag, n in (("SLN_C", 4), ("SLN_R", 5), ("SLN_H", 6)):
        problem = prob(tag, n, 2, 1.3)
        data = lie_data(problem.group)
        for vert in simplex_vertices(problem):
            alpha = np.asarray(vert.coords)
            via_roots = beta_from_roots(alpha, data)
            via_coeffs = float(np.asarray(data.beta_coeffs) @ alpha)
            assert abs(via_roots - via_coeffs) < 1e-12


def test_quaternionic_highest_weight_alternative_form():
    # 8 * sum (p - i) a_i equals the chamber form on the trace-zero slice
    problem = prob("SLN_H", 6, 2, 1.1)
    data = lie_data(problem.group)
    p = problem.p
    rng = np.random.default_rng(3)
    for _ in range(100):
        alpha = random_feasible_alpha(problem, rng)
        example_form = 8.0 * sum((p - (i + 1)) * alpha[i] for i in range(p))
        chamber_form = float(np.asarray(data.beta_coeffs) @ alpha)
        assert abs(example_form - chamber_form) < 1e-10


# --- objective evaluation ---------------------------------------------------

def test_g_at_origin():
    # g(0) = m(n - s) for the complex case, scaled variants elsewhere
    assert g_eval(np.zeros(3), prob("SLN_C", 3, 2, 1.0)) == pytest.approx(2 * (3 - 1.0))
    assert g_eval(np.zeros(4), prob("SLN_C", 4, 5, 2.5)) == pytest.approx(5 * 1.5)


def test_g_known_point():
    assert g_eval([0.5, -0.5], prob("SLN_C", 2, 2, 1.0)) == pytest.approx(1.0)


def test_g_quaternionic_single_parameter():
    # p = 1 forces alpha = 0; g = 2m(1 - s)
    problem = prob("SLN_H", 2, 3, 0.25)
    assert g_eval([0.0], problem) == pytest.approx(2 * 3 * 0.75)
    value, arg = min_g_exact(problem)
    assert value == pytest.approx(4.5)
    assert arg.indices == (0,)


def test_g_eval_shape_guard():
    with pytest.raises(UsageError):
        g_eval([0.0, 0.0], prob("SLN_C", 3, 1, 0.5))


def test_unified_form_agrees():
    rng = np.random.default_rng(17)
    for tag, n in (("SLN_C", 3), ("SLN_C", 5), ("SLN_R", 4), ("SLN_H", 6)):
        problem = prob(tag, n, 2, 0.9)
        for _ in range(200):
            alpha = random_feasible_alpha(problem, rng)
            assert g_eval(alpha, problem) == pytest.approx(
                g_eval_unified(alpha, problem), abs=1e-12)


def test_convexity_sampled():
    rng = np.random.default_rng(23)
    problem = prob("SLN_C", 5, 3, 1.7)
    for _ in range(1000):
        a = random_feasible_alpha(problem, rng)
        b = random_feasible_alpha(problem, rng)
        t = rng.uniform()
        mid = t * a + (1 - t) * b
        assert g_eval(mid, problem) <= t * g_eval(a, problem) + (1 - t) * g_eval(b, problem) + 1e-9


def test_thin_slab_lower_bound():
    # every feasible point obeys a_{k+1} >= -k u / (p - k); rejection sampling
    rng = np.random.default_rng(29)
    problem = prob("SLN_C", 5, 2, 1.9)
    p, u = problem.p, problem.u
    for _ in range(2000):
        alpha = random_feasible_alpha(problem, rng)
        assert in_polyhedron(alpha, problem, tol=1e-9)
        for k in range(1, p):
            assert alpha[k] >= -k * u / (p - k) - 1e-9


# --- candidate vertices -----------------------------------------------------

def test_simplex_vertices_structure():
    problem = prob("SLN_C", 4, 4, 2.0)
    verts = simplex_vertices(problem)
    assert verts[0].coords == (0.0,) * 4
    u = problem.u
    for vert in verts[1:]:
        (k,) = vert.indices
        assert vert.coords[:k] == (u,) * k
        assert all(c == pytest.approx(-k * u / (4 - k)) for c in vert.coords[k:])
        assert in_polyhedron(vert.coords, problem)


def test_simplex_vertex_closed_form():
    # g(V_k) = -ks + mk + m(n-k-s)^+ for the complex case
    for n, m, s in ((2, 2, 1.0), (4, 4, 2.0), (5, 3, 1.3), (6, 5, 4.4)):
        problem = prob("SLN_C", n, m, s)
        for vert in simplex_vertices(problem):
            (k,) = vert.indices
            expected = -k * s + m * k + m * max(n - k - s, 0.0)
            assert vert.g_value == pytest.approx(expected, abs=1e-9)


def test_simplex_vertex_examples():
    verts = {v.indices[0]: v for v in simplex_vertices(prob("SLN_C", 2, 2, 1.0))}
    assert verts[1].g_value == pytest.approx(1.0)
    verts4 = {v.indices[0]: v for v in simplex_vertices(prob("SLN_C", 4, 4, 2.0))}
    assert verts4[2].g_value == pytest.approx(4.0)  # (m-s)(n-s)


def test_no_subdivision_vertices_for_small_gain():
    # SLN_R with n=2: the extra vertices appear only past s = 1/2
    for s in (0.1, 0.3, 0.5):
        assert subdivision_vertices(prob("SLN_R", 2, 1, s)) == []
    assert len(subdivision_vertices(prob("SLN_R", 2, 1, 0.6))) == 1


def test_subdivision_vertex_example():
    problem = prob("SLN_C", 4, 4, 2.0)
    cands = {c.indices: c for c in subdivision_vertices(problem) if c.label == "Q"}
    q = cands[(3, 1)]
    # a = n-s-l = 1, b = j-(n-s) = 1: value (m-s)(n-s) + ab
    assert q.g_value == pytest.approx(5.0, abs=1e-9)


def test_subdivision_vertices_feasible_and_balanced():
    for tag, n, m, s in (("SLN_C", 5, 3, 2.3), ("SLN_R", 6, 4, 2.1), ("SLN_H", 6, 3, 1.7)):
        problem = prob(tag, n, m, s)
        for cand in subdivision_vertices(problem):
            assert abs(sum(cand.coords)) < 1e-12
            assert in_polyhedron(cand.coords, problem, tol=1e-9)


def test_min_g_exact_examples():
    value, arg = min_g_exact(prob("SLN_C", 2, 2, 1.0))
    assert value == pytest.approx(dmt.d_star(1.0, 2, 2), abs=1e-12)
    value_r, _ = min_g_exact(prob("SLN_R", 2, 1, 0.5))
    assert value_r == pytest.approx(0.5, abs=1e-12)
    for tag, n in (("SLN_C", 3), ("SLN_R", 4), ("SLN_H", 4)):
        value0, arg0 = min_g_exact(prob(tag, n, 2, 0.0))
        assert value0 == pytest.approx(2 * n)
        assert arg0.label == "V" and arg0.indices == (0,)


def test_min_g_ties_prefer_v_labels():
    # at integer s the minimizing vertex is a plain simplex vertex
    value, arg = min_g_exact(prob("SLN_C", 4, 4, 2.0))
    assert arg.label == "V"


def test_integer_gain_identities():
    rng = np.random.default_rng(31)
    for _ in range(40):
        n = int(rng.integers(2, 7))
        s = int(rng.integers(0, n + 1))
        m = int(dmt.antenna_threshold("SLN_C", s) + rng.integers(0, 3))
        if s > min(m, n):
            continue
        value, _ = min_g_exact(prob("SLN_C", n, m, float(s)))
        assert value == pytest.approx((m - s) * (n - s), abs=1e-9)
    for _ in range(40):
        p = int(rng.integers(1, 4))
        n = 2 * p
        s = int(rng.integers(0, p + 1))
        m = int(dmt.antenna_threshold("SLN_H", s) + rng.integers(0, 3))
        if s > min(m, p):
            continue
        value, _ = min_g_exact(prob("SLN_H", n, m, float(s)))
        assert value == pytest.approx((n - 2 * s) * (m - s), abs=1e-9)
    for _ in range(40):
        n = int(rng.integers(2, 7))
        s2 = int(rng.integers(0, n + 1))  # 2s integer
        s = s2 / 2.0
        m = int(dmt.antenna_threshold("SLN_R", s) + rng.integers(0, 3))
        if s > min(m, n / 2):
            continue
        value, _ = min_g_exact(prob("SLN_R", n, m, s))
        assert value == pytest.approx((m - s) * (n - 2 * s), abs=1e-9)


# --- symbolic audit ---------------------------------------------------------

def test_vertex_formula_audit_on_sweep_sample():
    checked = 0
    for tag, n, m, s in itertools.islice(iter_standard_sweep(), 0, None, 7):
        problem = prob(tag, n, m, s)
        for cand in simplex_vertices(problem) + subdivision_vertices(problem):
            assert abs(vertex_value_formula(problem, cand) - cand.g_value) <= 1e-9
            checked += 1
    assert checked > 300


def test_r_vertex_formula_uses_halved_cross_term():
    # direct evaluation pins the SLN_R R-vertex value to
    # -sl + (l-j)(n-j)/2 + mj; the unhalved variant overshoots
    problem = prob("SLN_R", 4, 2, 1.5)
    cands = {c.indices: c for c in subdivision_vertices(problem) if c.label == "R"}
    r23 = cands[(2, 3)]
    s, n, m, (j, l) = 1.5, 4, 2, (2, 3)
    assert r23.g_value == pytest.approx(0.5, abs=1e-12)
    assert vertex_value_formula(problem, r23) == pytest.approx(0.5, abs=1e-12)
    unhalved = -s * l + (l - j) * (n - j) + m * j
    assert unhalved == pytest.approx(1.5)  # differs: transcription typo upstream


# --- closed-form comparison -------------------------------------------------

def test_verify_closed_form_equal_cases():
    for s in (0.5, 1.0, 1.5, 2.0):
        report = chamber.verify_closed_form("slnc", 4, 4, s)
        assert report.relation == "equal"
        assert report.condition_held
    report = chamber.verify_closed_form("slnr", 2, 1, 0.75)
    assert report.relation == "equal"
    assert report.condition_held  # m = 1 >= ceil(1.5) - 1


def test_verify_closed_form_condition_violated():
    # m = 3 < 2(ceil(2.5) - 1) = 4: the true minimum drops below the curve
    report = chamber.verify_closed_form("slnc", 4, 3, 2.5)
    assert not report.condition_held
    assert report.relation == "below"
    assert report.min_exact == pytest.approx(0.5, abs=1e-12)
    assert report.argmin.label == "R"
    assert dmt.d_star(2.5, 4, 3) == pytest.approx(1.0)


# --- grid oracle ------------------------------------------------------------

def test_grid_matches_naive_scan():
    for tag, n, m, s in (("SLN_C", 2, 2, 1.0), ("SLN_C", 3, 2, 1.2),
                         ("SLN_R", 3, 2, 0.7), ("SLN_H", 4, 2, 0.9)):
        problem = prob(tag, n, m, s)
        step = problem.u / 12.0
        got = min_g_grid(problem, step)
        want = naive_grid_min(problem, step)
        assert got.value == pytest.approx(want, abs=1e-9), (tag, n, m, s)


def test_grid_close_to_exact():
    problem = prob("SLN_C", 2, 2, 1.0)
    res = min_g_grid(problem, 0.01)
    assert abs(res.value - 1.0) <= 0.1


def test_grid_zero_gain_is_exact():
    for tag, n in (("SLN_C", 3), ("SLN_R", 4), ("SLN_H", 4)):
        problem = prob(tag, n, 3, 0.0)
        res = min_g_grid(problem)
        assert res.value == pytest.approx(3 * n)
        assert res.step == 0.0


def test_grid_bounds_exact_min():
    rng = np.random.default_rng(37)
    for _ in range(25):
        tag = ("SLN_C", "SLN_R", "SLN_H")[rng.integers(3)]
        n = int(rng.choice((2, 4, 6)))
        m = int(rng.integers(1, 5))
        s = float(rng.uniform(0.05, min(m, n if tag == "SLN_C" else n / 2)))
        problem = prob(tag, n, m, s)
        exact, _ = min_g_exact(problem)
        grid = min_g_grid(problem)
        tol = grid.lipschitz * grid.step * math.sqrt(problem.p)
        assert exact - 1e-9 <= grid.value <= exact + tol


def test_grid_guards():
    with pytest.raises(UsageError):
        min_g_grid(prob("SLN_C", 7, 2, 1.0))
    res = min_g_grid(prob("SLN_C", 2, 2, 1.0), step=0.4)  # step > u/4
    assert res.coarse_step_warning
    with pytest.raises(UsageError):
        min_g_grid(prob("SLN_C", 2, 2, 1.0), step=-0.1)
