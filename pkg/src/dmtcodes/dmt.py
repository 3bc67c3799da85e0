"""Closed-form diversity-multiplexing curves and their side conditions.

All three curves are piecewise linear in the multiplexing gain r and clamp
at zero:

    d_star(r): breakpoints ((n-r)(m-r)) at integer r, support [0, min(m, n)];
    d1(r):     breakpoints ((m-r)(n-2r)) at half-integer r, support
               [0, min(m, n/2)];
    d2(r):     breakpoints ((n-2r)(m-r)) at integer r (n even), support
               [0, min(m, n/2)].

The curves bound the diversity of lattice codes whose order sits over an
imaginary quadratic center (d_star), a rational center split at infinity
(d1), and a rational center ramified at infinity (d2).  Each curve equals
the chamber minimum of the matching group only when the receive antenna
count clears a threshold; `d_bar` carries that condition as a flag instead
of asserting it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, UnsupportedError, UsageError

_DOMAIN_TOL = 1e-9


def _as_tag(group) -> str:
    from .chamber import normalize_group_tag

    return normalize_group_tag(group if isinstance(group, str) else group.tag)


def _check_domain(r: float, end: float) -> float:
    if r < -_DOMAIN_TOL or r > end + _DOMAIN_TOL:
        raise DomainError(f"multiplexing gain {r} outside the curve support [0, {end}]")
    return min(max(r, 0.0), end)


def d_star(r: float, n: int, m: int) -> float:
    """Optimal MIMO tradeoff curve, full support for 2n^2-dimensional lattices."""
    r = _check_domain(r, min(m, n))
    fl = math.floor(r)
    value = -(m + n - 2 * fl - 1) * r + m * n - fl * (fl + 1)
    return max(value, 0.0)


def d1(r: float, n: int, m: int) -> float:
    """Half-integer-breakpoint curve for rational center, split at infinity."""
    r = _check_domain(r, min(m, n / 2))
    fl = math.floor(2 * r)
    value = (-n - 2 * m + 2 * fl + 1) * r + m * n - (fl / 2.0) * (fl + 1)
    return max(value, 0.0)


def d2(r: float, n: int, m: int) -> float:
    """Integer-breakpoint curve for rational center, ramified at infinity."""
    if n % 2:
        raise UnsupportedError("d2 requires an even number of transmit antennas")
    end = min(m, n // 2)
    r = _check_domain(r, end)

    def bp(k: int) -> float:
        return max((n - 2 * k) * (m - k), 0.0)

    k0 = math.floor(r)
    if r == k0:
        return bp(int(k0))
    return bp(int(k0)) + (bp(int(k0) + 1) - bp(int(k0))) * (r - k0)


@dataclass(frozen=True)
class DmtCurve:
    """Piecewise-linear curve stored as ordered (r, d) breakpoints."""

    breakpoints: tuple[tuple[float, float], ...]

    @property
    def r_max(self) -> float:
        return self.breakpoints[-1][0]

    def value(self, r: float) -> float:
        pts = self.breakpoints
        r = _check_domain(r, self.r_max)
        for (r0, d0), (r1, d1_) in zip(pts, pts[1:]):
            if r <= r1 + _DOMAIN_TOL:
                if r1 == r0:
                    return d0
                return d0 + (d1_ - d0) * (r - r0) / (r1 - r0)
        return pts[-1][1]


def curve_d_star(n: int, m: int) -> DmtCurve:
    end = min(m, n)
    return DmtCurve(tuple((float(k), float((n - k) * (m - k))) for k in range(end + 1)))


def curve_d1(n: int, m: int) -> DmtCurve:
    end = min(m, n / 2)
    points = []
    half = 0
    while half / 2.0 <= end + _DOMAIN_TOL:
        r = half / 2.0
        points.append((r, max((m - r) * (n - 2 * r), 0.0)))
        half += 1
    return DmtCurve(tuple(points))


def curve_d2(n: int, m: int) -> DmtCurve:
    if n % 2:
        raise UnsupportedError("d2 requires an even number of transmit antennas")
    end = min(m, n // 2)
    return DmtCurve(tuple((float(k), float(max((n - 2 * k) * (m - k), 0.0))) for k in range(end + 1)))


@dataclass(frozen=True)
class CurveValue:
    value: float
    condition_ok: bool


def remark_condition(group, m: int, s: float) -> bool:
    """Antenna-count condition under which the curve equals the chamber minimum."""
    tag = _as_tag(group)
    if tag == "SLN_R":
        return m >= math.ceil(2 * s) - 1
    return m >= 2 * (math.ceil(s) - 1)


def d_bar(s: float, group, n: int, m: int) -> CurveValue:
    """Curve value for the group, flagged with its validity condition.

    The value is the plain formula; when the condition flag is False the
    chamber minimum may fall strictly below it.
    """
    tag = _as_tag(group)
    if tag == "SLN_C":
        value = d_star(s, n, m)
    elif tag == "SLN_R":
        value = d1(s, n, m)
    else:
        value = d2(s, n, m)
    return CurveValue(value, remark_condition(tag, m, s))


def _curve_value_extended(tag: str, v: float, n: int, m: int) -> float:
    """Curve value with the domain extended past min(m, .) where the
    zero clamp makes it identically zero; needed by the counting-weight
    analysis at low antenna counts."""
    if tag == "SLN_C":
        v = _check_domain(v, n)
        fl = math.floor(v)
        return max(-(m + n - 2 * fl - 1) * v + m * n - fl * (fl + 1), 0.0)
    if tag == "SLN_R":
        v = _check_domain(v, n / 2)
        fl = math.floor(2 * v)
        return max((-n - 2 * m + 2 * fl + 1) * v + m * n - (fl / 2.0) * (fl + 1), 0.0)
    if n % 2:
        raise UnsupportedError("the ramified curve requires even n")
    v = _check_domain(v, n // 2)

    def bp(k: int) -> float:
        return max((n - 2 * k) * (m - k), 0.0)

    k0 = int(math.floor(v))
    if v == k0:
        return bp(k0)
    return bp(k0) + (bp(k0 + 1) - bp(k0)) * (v - k0)


def d_double_star(v: float, group, n: int, m: int) -> CurveValue:
    """Counting-weighted exponent n*v + d_bar(v) (clamped-curve extension)."""
    tag = _as_tag(group)
    value = _curve_value_extended(tag, v, n, m)
    return CurveValue(n * v + value, remark_condition(tag, m, v))


def antenna_threshold(group, r: float) -> int:
    """Smallest receive antenna count meeting the group's coverage condition."""
    if r < 0:
        raise UsageError(f"multiplexing gain must be nonnegative, got {r}")
    tag = _as_tag(group)
    if tag == "SLN_R":
        # condition m >= ceil(2r) - 1/2; minimal integer is ceil(2r)
        return max(1, math.ceil(2 * r))
    return max(1, 2 * math.ceil(r) - 1)


def dds_monotone(group, n: int, m: int, r: float) -> bool:
    """Whether n*v + d_bar(v) is nonincreasing on [0, r] (midpoint criterion)."""
    tag = _as_tag(group)
    _check_domain(r, n if tag == "SLN_C" else n / 2)
    if r <= 0:
        return True
    if tag == "SLN_R":
        return math.ceil(2 * r) / 2.0 - 0.25 <= m / 2.0
    return math.ceil(r) - 0.5 <= m / 2.0
