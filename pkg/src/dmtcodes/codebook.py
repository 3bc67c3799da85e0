"""Lattice codebooks: ball enumeration, normalized codes, determinant counting.

The code alphabet is the set of order elements whose embedded matrix has
Frobenius norm at most M; the transmitted codebook is the same set scaled
by 1/M together with the zero matrix.  Enumeration is exact integer
enumeration over the Gram form of the embedded basis (recursive
Fincke-Pohst style bounding), with a deterministic lexicographic output
order so codebooks and decoder tie-breaking are reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import algebra
from .errors import CapExceededError, UnsupportedError, UsageError

ENUMERATION_CAP = 10 ** 6
COUNT_CAP = 10 ** 10

_BOUND_SLACK = 1e-9


@dataclass(frozen=True)
class Codebook:
    """A finite, power-normalized codebook built from one preset."""

    preset_id: str
    M: float
    rho: float
    r: float | None
    matrices: tuple[algebra.CodeMatrix, ...]
    raw_elements: tuple[algebra.AlgebraElement, ...]

    def __len__(self) -> int:
        return len(self.matrices)


@dataclass(frozen=True)
class CountTable:
    """Counts of lattice elements (and optionally unit orbits) per threshold."""

    thresholds: tuple[float, ...]
    element_counts: tuple[int, ...]
    ideal_counts: tuple[int, ...] | None


@dataclass(frozen=True)
class SlopeResult:
    slope: float
    measurable: bool
    sizes: tuple[int, ...]


def _volume_estimate(k: int, radius: float, det_gram: float) -> float:
    ball_vol = math.pi ** (k / 2.0) / math.gamma(k / 2.0 + 1.0) * radius ** k
    return ball_vol / math.sqrt(det_gram)


def _cholesky_upper(gram: np.ndarray) -> np.ndarray:
    return np.linalg.cholesky(gram).T


def _ball_recurse(R: np.ndarray, bound: float, collect, count_cap: int):
    """Recursive bounded enumeration of integer points with ||Rv||^2 <= bound.

    collect(v) is called for every point including zero; returns the number
    of points visited.  Raises CapExceededError past count_cap.
    """
    k = R.shape[0]
    diag = R.diagonal()
    v = np.zeros(k, dtype=np.int64)
    seen = 0

    def rec(i: int, rem: float):
        nonlocal seen
        c = float(R[i, i + 1:] @ v[i + 1:]) / diag[i]
        half = math.sqrt(max(rem, 0.0)) / diag[i]
        lo = math.ceil(-c - half - 1e-12)
        hi = math.floor(-c + half + 1e-12)
        for vi in range(lo, hi + 1):
            term = (diag[i] * (vi + c)) ** 2
            rem2 = rem - term
            if rem2 < -1e-12:
                continue
            v[i] = vi
            if i == 0:
                seen += 1
                if seen > count_cap:
                    raise CapExceededError(
                        f"lattice ball enumeration exceeded cap {count_cap}"
                    )
                collect(v)
            else:
                rec(i - 1, max(rem2, 0.0))
        v[i] = 0

    rec(k - 1, bound)
    return seen


def _ball_count_fast(R: np.ndarray, bound: float, count_cap: int) -> int:
    """Count integer points with ||Rv||^2 <= bound without materializing.

    Same bounding recursion as enumeration, with the innermost level summed
    by interval length (vectorized over the second-innermost level).
    """
    k = R.shape[0]
    diag = R.diagonal()
    v = np.zeros(k, dtype=np.int64)
    total = 0

    def innermost_pair(rem: float) -> int:
        # levels 1 and 0 done with numpy; v[2:] fixed
        c1 = float(R[1, 2:] @ v[2:]) / diag[1] if k > 2 else 0.0
        half1 = math.sqrt(max(rem, 0.0)) / diag[1]
        lo1 = math.ceil(-c1 - half1 - 1e-12)
        hi1 = math.floor(-c1 + half1 + 1e-12)
        if hi1 < lo1:
            return 0
        v1 = np.arange(lo1, hi1 + 1, dtype=np.float64)
        rem0 = rem - (diag[1] * (v1 + c1)) ** 2
        ok = rem0 >= -1e-12
        if not np.any(ok):
            return 0
        v1 = v1[ok]
        rem0 = np.maximum(rem0[ok], 0.0)
        c0 = (R[0, 1] * v1 + float(R[0, 2:] @ v[2:])) / diag[0]
        half0 = np.sqrt(rem0) / diag[0]
        lo0 = np.ceil(-c0 - half0 - 1e-12)
        hi0 = np.floor(-c0 + half0 + 1e-12)
        return int(np.sum(np.maximum(hi0 - lo0 + 1, 0.0)))

    def rec(i: int, rem: float):
        nonlocal total
        if i == 1:
            total += innermost_pair(rem)
            if total > count_cap:
                raise CapExceededError(f"lattice ball count exceeded cap {count_cap}")
            return
        c = float(R[i, i + 1:] @ v[i + 1:]) / diag[i]
        half = math.sqrt(max(rem, 0.0)) / diag[i]
        lo = math.ceil(-c - half - 1e-12)
        hi = math.floor(-c + half + 1e-12)
        for vi in range(lo, hi + 1):
            term = (diag[i] * (vi + c)) ** 2
            rem2 = rem - term
            if rem2 < -1e-12:
                continue
            v[i] = vi
            rec(i - 1, max(rem2, 0.0))
        v[i] = 0

    if k == 1:
        half = math.sqrt(max(bound, 0.0)) / diag[0]
        return math.floor(half + 1e-12) - math.ceil(-half - 1e-12) + 1
    rec(k - 1, bound)
    return total


def _squared_bound(M: float) -> float:
    return M * M * (1.0 + 1e-12) + _BOUND_SLACK


def enumerate_ball(preset_id: str, M: float, *, cap: int = ENUMERATION_CAP) -> list[algebra.AlgebraElement]:
    """All nonzero order elements x with ||psi(x)|| <= M, in lexicographic order.

    Refuses with CapExceededError when the predicted point count exceeds
    the cap (default 10^6).
    """
    if M <= 0:
        return []
    _, basis = algebra.build_preset(preset_id)
    gram = algebra.gram_matrix(basis)
    k = basis.basis_size
    predicted = _volume_estimate(k, M, float(np.linalg.det(gram)))
    if predicted > 1.3 * cap + 100:
        raise CapExceededError(
            f"ball of radius {M} predicted to hold about {predicted:.3e} points, "
            f"above the cap {cap}; raise the cap or shrink M"
        )
    R = _cholesky_upper(gram)
    points: list[tuple[int, ...]] = []

    def collect(v):
        if any(v):
            points.append(tuple(int(x) for x in v))

    _ball_recurse(R, _squared_bound(M), collect, cap)
    points.sort()
    return [algebra.AlgebraElement(p) for p in points]


def ball_count(preset_id: str, M: float, *, cap: int = COUNT_CAP) -> int:
    """Number of nonzero order elements with ||psi(x)|| <= M (not materialized)."""
    if M <= 0:
        return 0
    _, basis = algebra.build_preset(preset_id)
    gram = algebra.gram_matrix(basis)
    predicted = _volume_estimate(basis.basis_size, M, float(np.linalg.det(gram)))
    if predicted > 1.3 * cap + 100:
        raise CapExceededError(
            f"ball of radius {M} predicted to hold about {predicted:.3e} points, "
            f"above the count cap {cap}"
        )
    R = _cholesky_upper(gram)
    total = _ball_count_fast(R, _squared_bound(M), cap)
    return total - 1  # exclude zero


def radius_for_rate(preset_id: str, rho: float, r: float) -> float:
    """Frobenius radius M = rho^(r n / k) for the preset's (n, k)."""
    preset = algebra.get_preset(preset_id)
    return rho ** (r * preset.degree_n / preset.dim_k)


def build_code(preset_id: str, rho: float, r: float, *, cap: int = ENUMERATION_CAP) -> Codebook:
    """Codebook at SNR rho and multiplexing gain r: matrices M^-1 psi(x), x in the M-ball plus 0."""
    if rho <= 1.0:
        raise UsageError(f"rho must exceed 1, got {rho}")
    if r < 0:
        raise UsageError(f"multiplexing gain must be nonnegative, got {r}")
    M = radius_for_rate(preset_id, rho, r)
    return _assemble_codebook(preset_id, M, rho, r, cap)


def build_code_fixed_radius(preset_id: str, M: float, rho: float, *, cap: int = ENUMERATION_CAP) -> Codebook:
    """Codebook with an explicitly chosen Frobenius radius (fixed-rate regime)."""
    if M <= 0:
        raise UsageError(f"radius must be positive, got {M}")
    return _assemble_codebook(preset_id, M, rho, None, cap)


def _assemble_codebook(preset_id, M, rho, r, cap) -> Codebook:
    _, basis = algebra.build_preset(preset_id)
    elements = enumerate_ball(preset_id, M, cap=cap)
    n = algebra.get_preset(preset_id).degree_n
    zero = algebra.AlgebraElement((0,) * basis.basis_size)
    mats = [algebra.CodeMatrix.from_entries(np.zeros((n, n)))]
    if elements:
        coords = np.array([e.coords for e in elements], dtype=np.int64)
        embedded = algebra.embed_batch(coords, basis) / M
        mats.extend(algebra.CodeMatrix.from_entries(m) for m in embedded)
    book = Codebook(
        preset_id=preset_id, M=M, rho=rho, r=r,
        matrices=tuple(mats), raw_elements=(zero,) + tuple(elements),
    )
    power = sum(m.fro_norm ** 2 for m in book.matrices) / (len(book) * n * n)
    if power > 1.0 + 1e-9:
        raise RuntimeError(f"power constraint violated: average {power}")
    return book


def multiplexing_slope(preset_id: str, rho_list, r: float, *, cap: int = COUNT_CAP) -> SlopeResult:
    """Empirical multiplexing gain: slope of log|C(rho)| against log rho, over n.

    Needs at least three SNR points.  When every codebook is trivial
    (|C| <= 1) the slope is 0 and the result is flagged not measurable.
    """
    rho_list = list(rho_list)
    if len(rho_list) < 3:
        raise UsageError("need at least 3 SNR points to fit a slope")
    preset = algebra.get_preset(preset_id)
    sizes = []
    for rho in rho_list:
        M = radius_for_rate(preset_id, rho, r)
        sizes.append(ball_count(preset_id, M, cap=cap) + 1)
    if all(s <= 1 for s in sizes):
        return SlopeResult(slope=0.0, measurable=False, sizes=tuple(sizes))
    x = np.log(np.asarray(rho_list, dtype=np.float64))
    y = np.log(np.asarray(sizes, dtype=np.float64))
    slope = float(np.polyfit(x, y, 1)[0]) / preset.degree_n
    return SlopeResult(slope=slope, measurable=True, sizes=tuple(sizes))


def _orbit_canonical_forms(coords: np.ndarray, preset_id: str) -> set[tuple[int, ...]]:
    """One canonical representative per right unit orbit x -> x*u."""
    _, basis = algebra.build_preset(preset_id)
    units = algebra.unit_group_coords(preset_id)
    canon: set[tuple[int, ...]] = set()
    images = [
        np.einsum("bi,j,ijt->bt", coords, u, basis.mul_table) for u in units
    ]
    stacked = np.stack(images, axis=1)  # (B, n_units, k)
    for row in stacked:
        canon.add(min(tuple(int(v) for v in img) for img in row))
    return canon


def count_dets(preset_id: str, thresholds, *, frobenius_cap: float | None = None,
               ideals: bool | None = None, cap: int = ENUMERATION_CAP) -> CountTable:
    """Counts of elements (and unit orbits) with |det psi(x)| up to each threshold.

    For the positive-definite preset the determinant bound itself confines
    the search (||psi(x)||^2 = 2 |det|), so no Frobenius cap is needed and
    orbit counts under the finite unit group are exact.  Other presets have
    infinitely many elements per determinant bound; element counting is
    allowed only inside an explicit Frobenius cap, and orbit counting is
    unsupported.
    """
    thresholds = [float(a) for a in thresholds]
    if not thresholds or any(a <= 0 for a in thresholds):
        raise UsageError("thresholds must be positive")
    if sorted(thresholds) != thresholds:
        raise UsageError("thresholds must be ascending")
    posdef = preset_id == "LIPSCHITZ_RAMIFIED"
    if ideals is None:
        ideals = posdef
    if ideals and not posdef:
        raise UnsupportedError(
            "ideal (unit-orbit) counting needs a finite unit group; "
            f"not available for preset {preset_id}"
        )
    if frobenius_cap is None:
        if not posdef:
            raise UnsupportedError(
                f"preset {preset_id} has indefinite norm form; pass an explicit "
                "frobenius_cap to count elements inside a bounded ball"
            )
        frobenius_cap = math.sqrt(2.0 * max(thresholds)) * (1 + 1e-12)
    elements = enumerate_ball(preset_id, frobenius_cap, cap=cap)
    if not elements:
        zeros = tuple(0 for _ in thresholds)
        return CountTable(tuple(thresholds), zeros, zeros if ideals else None)
    coords = np.array([e.coords for e in elements], dtype=np.int64)
    dets = algebra.norm_form_values(coords, preset_id)
    element_counts = tuple(int(np.sum(dets <= a * (1 + 1e-12))) for a in thresholds)
    ideal_counts = None
    if ideals:
        counts = []
        for a in thresholds:
            sel = coords[dets <= a * (1 + 1e-12)]
            counts.append(len(_orbit_canonical_forms(sel, preset_id)) if len(sel) else 0)
        ideal_counts = tuple(counts)
    return CountTable(tuple(thresholds), element_counts, ideal_counts)


def ball_count_table(preset_id: str, radii, *, cap: int = COUNT_CAP) -> CountTable:
    """Ball sizes per Frobenius radius, for growth-exponent fits."""
    radii = [float(m) for m in radii]
    if sorted(radii) != radii or any(m <= 0 for m in radii):
        raise UsageError("radii must be ascending and positive")
    counts = tuple(ball_count(preset_id, m, cap=cap) for m in radii)
    return CountTable(tuple(radii), counts, None)


def growth_exponent(table: CountTable, *, counts: str = "element") -> SlopeResult:
    """Least-squares slope of log(count) against log(threshold).

    Zero counts are dropped; fewer than three surviving points makes the
    result not measurable.  Requires at least 5 thresholds spanning a
    decade.
    """
    if counts == "element":
        ys = table.element_counts
    elif counts == "ideal":
        if table.ideal_counts is None:
            raise UsageError("table has no ideal counts")
        ys = table.ideal_counts
    else:
        raise UsageError(f"counts must be 'element' or 'ideal', got {counts!r}")
    xs = table.thresholds
    if len(xs) < 5:
        raise UsageError("need at least 5 thresholds")
    if max(xs) < 10.0 * min(xs) * (1 - 1e-9):
        raise UsageError("thresholds must span at least one decade")
    pairs = [(x, y) for x, y in zip(xs, ys) if y > 0]
    if len(pairs) < 3:
        return SlopeResult(slope=0.0, measurable=False, sizes=tuple(ys))
    lx = np.log([p[0] for p in pairs])
    ly = np.log([p[1] for p in pairs])
    slope = float(np.polyfit(lx, ly, 1)[0])
    return SlopeResult(slope=slope, measurable=True, sizes=tuple(ys))
