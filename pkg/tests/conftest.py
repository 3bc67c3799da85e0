"""Shared test helpers: the standard parameter sweep and brute-force oracles."""

import itertools
import math

import numpy as np

from dmtcodes import algebra, dmt
from dmtcodes.chamber import ChamberProblem, GroupKind, g_eval


def iter_standard_sweep():
    """(tag, n, m, s) over all groups, n in 2..6, s on a 0.1 grid of the
    curve support, and m from the antenna threshold to threshold + 2."""
    for tag in ("SLN_C", "SLN_R", "SLN_H"):
        ns = (2, 4, 6) if tag == "SLN_H" else (2, 3, 4, 5, 6)
        for n in ns:
            tenths = n * 10 if tag == "SLN_C" else n * 5
            for t in range(tenths + 1):
                s = t / 10
                thr = dmt.antenna_threshold(tag, s)
                for m in (thr, thr + 1, thr + 2):
                    support = min(m, n) if tag == "SLN_C" else min(m, n / 2)
                    if s <= support + 1e-9:
                        yield tag, n, m, s


def brute_force_ball(preset_id, M, box):
    """Exhaustive search oracle: all nonzero coord tuples in [-box, box]^k
    with ||psi(x)|| <= M, computed via the embedding (independent of the
    Fincke-Pohst path)."""
    basis = algebra.get_basis(preset_id)
    k = basis.basis_size
    found = []
    for coords in itertools.product(range(-box, box + 1), repeat=k):
        if not any(coords):
            continue
        mat = np.einsum("i,ikl->kl", np.asarray(coords, dtype=float), basis.embed_basis)
        if np.linalg.norm(mat) <= M + 1e-9:
            found.append(coords)
    found.sort()
    return found


def naive_grid_min(problem: ChamberProblem, step: float) -> float:
    """Literal nested scan over the ordered grid; oracle for min_g_grid."""
    p, u = problem.p, problem.u
    if u <= 0 or p == 1:
        return g_eval(np.zeros(p), problem)
    t_max = int(math.floor(p * u / step + 1e-9))
    values = [u - t * step for t in range(t_max + 1)]
    best = math.inf
    slack = 1e-9 * max(1.0, u)

    def rec(prefix):
        nonlocal best
        if len(prefix) == p - 1:
            alpha_p = -sum(prefix)
            if alpha_p <= prefix[-1] + slack:
                best = min(best, g_eval(list(prefix) + [alpha_p], problem))
            return
        for v in values:
            if prefix and v > prefix[-1] + 1e-15:
                continue
            rec(prefix + [v])

    rec([])
    return best


def random_feasible_alpha(problem: ChamberProblem, rng) -> np.ndarray:
    """A random point of the chamber polyhedron."""
    draw = np.sort(rng.uniform(-1.0, 1.0, problem.p))[::-1]
    draw = draw - draw.mean()
    top = draw[0]
    if top > problem.u and top > 0:
        draw = draw * (problem.u / top) * rng.uniform(0.2, 1.0)
    return draw
