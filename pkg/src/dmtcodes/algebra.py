"""Division algebras, orders, and their matrix embeddings.

Three presets ship with the library, each a division algebra carrying an
order with an explicit integral basis and an embedding into 2x2 complex
matrices:

``LIPSCHITZ_RAMIFIED``
    Rational quaternions with structure constants (a, b) = (-1, -1) and
    order Z<1, i, j, ij>.  The norm form w^2 + x^2 + y^2 + z^2 is positive
    definite (Hamilton quaternions over the reals), and the unit group of
    the order is the finite group {+-1, +-i, +-j, +-ij}.

``QUATERNION_UNRAMIFIED``
    Rational quaternions with (a, b) = (-1, 3), same integral basis.  The
    norm form w^2 + x^2 - 3y^2 - 3z^2 is indefinite, so the algebra splits
    over the reals and embeds into M_2(R); it is nevertheless a division
    algebra because the form is anisotropic over Q (a mod-3 descent shows
    w^2 + x^2 = 3(y^2 + z^2) has no nonzero integer solutions).

``GOLDEN_GAUSSIAN``
    The degree-2 cyclic algebra over Q(i) built on the relative quadratic
    extension Q(i, T), T^2 = T + 1 (T the golden ratio), with twisting
    element e satisfying e^2 = i and e*c = sigma(c)*e, where sigma swaps
    T and 1 - T.  The element i is not a relative norm, which makes the
    algebra division.  Order: Z[i, T] + e*Z[i, T], of rank 8 over Z.

Matrix conventions.  Quaternions w + xi + yj + zij in the ramified preset
map to [[w+xi, y+zi], [-y+zi, w-xi]]; the alternative block convention
[[A, -B*], [B, A*]] differs from this one by a fixed signed-permutation
similarity, which leaves Frobenius norms and |det| unchanged, so every
quantity computed downstream is convention-independent.  The unramified
preset maps to the real matrix [[w+y*s, -x+z*s], [x+z*s, w-y*s]] with
s = sqrt(3).  The cyclic preset maps c + e*d to
[[c(T), i*d(T')], [d(T), c(T')]] where T, T' are the two real values of
the relative generator.

Element arithmetic is exact: coordinates are integers, all structure
constants are integers, and floating point enters only in the embedding
matrices.  All values are immutable after construction and safe to share
across workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigError, UsageError

PRESET_IDS = ("LIPSCHITZ_RAMIFIED", "QUATERNION_UNRAMIFIED", "GOLDEN_GAUSSIAN")

CENTER_RATIONAL = "RATIONAL"
CENTER_GAUSSIAN = "GAUSSIAN_IMAGINARY"

SQRT3 = math.sqrt(3.0)
THETA = (1.0 + math.sqrt(5.0)) / 2.0
SIGMA_THETA = (1.0 - math.sqrt(5.0)) / 2.0


@dataclass(frozen=True)
class AlgebraPreset:
    """Descriptor of one shipped division algebra."""

    id: str
    center: str
    degree_n: int
    dim_k: int
    structure: tuple
    ramified_at_infinity: bool


@dataclass(frozen=True)
class OrderBasis:
    """Integral basis of an order with its multiplication table and embedding.

    mul_table[i, j, t] holds the integer structure constants, so that
    b_i * b_j = sum_t mul_table[i, j, t] * b_t.  embed_basis[i] is the
    complex matrix representing b_i.  Both arrays are read-only.
    """

    basis_size: int
    mul_table: np.ndarray
    embed_basis: np.ndarray
    identity_coords: np.ndarray


@dataclass(frozen=True)
class AlgebraElement:
    """Element of an order, stored as integer coordinates over its basis."""

    coords: tuple[int, ...]

    def is_zero(self) -> bool:
        return not any(self.coords)


@dataclass(frozen=True)
class CodeMatrix:
    """A complex matrix with cached Frobenius norm and |det|."""

    entries: np.ndarray
    fro_norm: float
    abs_det: float

    @classmethod
    def from_entries(cls, entries) -> "CodeMatrix":
        entries = np.array(entries, dtype=np.complex128)
        entries.setflags(write=False)
        return cls(
            entries=entries,
            fro_norm=float(np.linalg.norm(entries)),
            abs_det=float(abs(np.linalg.det(entries))),
        )


# ---------------------------------------------------------------------------
# exact scalar arithmetic helpers (Gaussian integers, Z[i][T] with T^2 = T+1)

def _gauss_mul(p, q):
    return (p[0] * q[0] - p[1] * q[1], p[0] * q[1] + p[1] * q[0])


def _ext_mul(u, v):
    """Product in Z[i][T]; elements are (a0, a1, a2, a3) = (a0 + a1*i) + (a2 + a3*i)*T."""
    a, b = (u[0], u[1]), (u[2], u[3])
    c, d = (v[0], v[1]), (v[2], v[3])
    ac = _gauss_mul(a, c)
    bd = _gauss_mul(b, d)
    ad = _gauss_mul(a, d)
    bc = _gauss_mul(b, c)
    # (a + bT)(c + dT) = ac + (ad + bc)T + bd(T + 1)
    return (
        ac[0] + bd[0],
        ac[1] + bd[1],
        ad[0] + bc[0] + bd[0],
        ad[1] + bc[1] + bd[1],
    )


def _ext_sigma(u):
    """Galois conjugate T -> 1 - T on Z[i][T]."""
    return (u[0] + u[2], u[1] + u[3], -u[2], -u[3])


def _ext_times_i(u):
    return (-u[1], u[0], -u[3], u[2])


def _golden_mul_coords(x, y):
    """Exact product in the rank-8 cyclic order; x, y are 8-tuples (c | d)."""
    c1, d1 = x[:4], x[4:]
    c2, d2 = y[:4], y[4:]
    # (c1 + e d1)(c2 + e d2) = [c1 c2 + i sigma(d1) d2] + e [sigma(c1) d2 + d1 c2]
    t1 = _ext_mul(c1, c2)
    t2 = _ext_times_i(_ext_mul(_ext_sigma(d1), d2))
    u1 = _ext_mul(_ext_sigma(c1), d2)
    u2 = _ext_mul(d1, c2)
    return tuple(t1[i] + t2[i] for i in range(4)) + tuple(u1[i] + u2[i] for i in range(4))


def _ext_eval(u, theta_val):
    """Evaluate (a0 + a1*i) + (a2 + a3*i)*T at a real value of T."""
    return complex(u[0] + u[2] * theta_val, u[1] + u[3] * theta_val)


# ---------------------------------------------------------------------------
# preset construction

def _quaternion_mul_table(a: int, b: int) -> np.ndarray:
    # basis order: 1, i, j, ij with i^2 = a, j^2 = b, ji = -ij
    rules = {
        (0, 0): (0, 1), (0, 1): (1, 1), (0, 2): (2, 1), (0, 3): (3, 1),
        (1, 0): (1, 1), (1, 1): (0, a), (1, 2): (3, 1), (1, 3): (2, a),
        (2, 0): (2, 1), (2, 1): (3, -1), (2, 2): (0, b), (2, 3): (1, -b),
        (3, 0): (3, 1), (3, 1): (2, -a), (3, 2): (1, b), (3, 3): (0, -a * b),
    }
    table = np.zeros((4, 4, 4), dtype=np.int64)
    for (i, j), (t, coeff) in rules.items():
        table[i, j, t] = coeff
    return table


def _lipschitz_embed_basis() -> np.ndarray:
    i = 1j
    return np.array([
        [[1, 0], [0, 1]],
        [[i, 0], [0, -i]],
        [[0, 1], [-1, 0]],
        [[0, i], [i, 0]],
    ], dtype=np.complex128)


def _unramified_embed_basis() -> np.ndarray:
    s = SQRT3
    return np.array([
        [[1, 0], [0, 1]],
        [[0, -1], [1, 0]],
        [[s, 0], [0, -s]],
        [[0, s], [s, 0]],
    ], dtype=np.complex128)


def _golden_mul_table() -> np.ndarray:
    k = 8
    table = np.zeros((k, k, k), dtype=np.int64)
    basis = [tuple(1 if t == idx else 0 for t in range(k)) for idx in range(k)]
    for i in range(k):
        for j in range(k):
            table[i, j, :] = _golden_mul_coords(basis[i], basis[j])
    return table


def _golden_embed_basis() -> np.ndarray:
    mats = []
    for idx in range(8):
        coords = tuple(1 if t == idx else 0 for t in range(8))
        c, d = coords[:4], coords[4:]
        mats.append([
            [_ext_eval(c, THETA), 1j * _ext_eval(d, SIGMA_THETA)],
            [_ext_eval(d, THETA), _ext_eval(c, SIGMA_THETA)],
        ])
    return np.array(mats, dtype=np.complex128)


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@lru_cache(maxsize=None)
def build_preset(preset_id: str) -> tuple[AlgebraPreset, OrderBasis]:
    """Construct one of the shipped presets by name.

    Raises ConfigError for unknown names.  Results are cached; all returned
    objects are immutable.
    """
    if preset_id == "LIPSCHITZ_RAMIFIED":
        preset = AlgebraPreset(
            id=preset_id, center=CENTER_RATIONAL, degree_n=2, dim_k=4,
            structure=(-1, -1), ramified_at_infinity=True,
        )
        table = _quaternion_mul_table(-1, -1)
        embeds = _lipschitz_embed_basis()
    elif preset_id == "QUATERNION_UNRAMIFIED":
        preset = AlgebraPreset(
            id=preset_id, center=CENTER_RATIONAL, degree_n=2, dim_k=4,
            structure=(-1, 3), ramified_at_infinity=False,
        )
        table = _quaternion_mul_table(-1, 3)
        embeds = _unramified_embed_basis()
    elif preset_id == "GOLDEN_GAUSSIAN":
        preset = AlgebraPreset(
            id=preset_id, center=CENTER_GAUSSIAN, degree_n=2, dim_k=8,
            structure=("T^2 - T - 1", "i"), ramified_at_infinity=False,
        )
        table = _golden_mul_table()
        embeds = _golden_embed_basis()
    else:
        raise ConfigError(
            f"unknown preset {preset_id!r}; available: {', '.join(PRESET_IDS)}"
        )
    k = table.shape[0]
    identity = np.zeros(k, dtype=np.int64)
    identity[0] = 1
    basis = OrderBasis(
        basis_size=k,
        mul_table=_freeze(table),
        embed_basis=_freeze(embeds),
        identity_coords=_freeze(identity),
    )
    return preset, basis


def get_preset(preset_id: str) -> AlgebraPreset:
    return build_preset(preset_id)[0]


def get_basis(preset_id: str) -> OrderBasis:
    return build_preset(preset_id)[1]


# ---------------------------------------------------------------------------
# element operations

def _check_coords(coords, k: int) -> None:
    if len(coords) != k:
        raise UsageError(f"coordinate vector has length {len(coords)}, expected {k}")


def multiply(x: AlgebraElement, y: AlgebraElement, basis: OrderBasis) -> AlgebraElement:
    """Exact product of two order elements via the multiplication table."""
    _check_coords(x.coords, basis.basis_size)
    _check_coords(y.coords, basis.basis_size)
    xv = np.asarray(x.coords, dtype=np.int64)
    yv = np.asarray(y.coords, dtype=np.int64)
    out = np.einsum("i,j,ijt->t", xv, yv, basis.mul_table)
    return AlgebraElement(tuple(int(v) for v in out))


def multiply_batch(xs: np.ndarray, ys: np.ndarray, basis: OrderBasis) -> np.ndarray:
    """Row-wise exact products of integer coordinate arrays, shape (B, k)."""
    return np.einsum("bi,bj,ijt->bt", xs, ys, basis.mul_table)


def embed(x: AlgebraElement, preset_id: str) -> CodeMatrix:
    """Matrix representation of an order element."""
    basis = get_basis(preset_id)
    _check_coords(x.coords, basis.basis_size)
    xv = np.asarray(x.coords, dtype=np.float64)
    entries = np.einsum("i,ikl->kl", xv, basis.embed_basis)
    return CodeMatrix.from_entries(entries)


def embed_batch(coords: np.ndarray, basis: OrderBasis) -> np.ndarray:
    """Embed rows of an integer coordinate array, shape (B, k) -> (B, n, n)."""
    return np.einsum("bi,ikl->bkl", np.asarray(coords, dtype=np.float64), basis.embed_basis)


def reduced_norm(x: AlgebraElement, preset_id: str):
    """Exact reduced norm of an order element.

    Quaternion presets return a Python int (the value of the norm form
    w^2 - a x^2 - b y^2 + ab z^2).  The cyclic preset returns a complex
    number whose real and imaginary parts are exact Gaussian-integer
    components, N(c) - i*N(d) with N(p + qT) = p^2 + pq - q^2 over Z[i].
    Equals det(embed(x)) in all cases.
    """
    preset, basis = build_preset(preset_id)
    _check_coords(x.coords, basis.basis_size)
    if preset.center == CENTER_RATIONAL:
        a, b = preset.structure
        w, xx, yy, zz = (int(v) for v in x.coords)
        return w * w - a * xx * xx - b * yy * yy + a * b * zz * zz
    c, d = x.coords[:4], x.coords[4:]

    def ext_norm(u):
        # (p + qT) * sigma(p + qT) = p^2 + pq - q^2 with p, q Gaussian
        p, q = (u[0], u[1]), (u[2], u[3])
        pp = _gauss_mul(p, p)
        pq = _gauss_mul(p, q)
        qq = _gauss_mul(q, q)
        return (pp[0] + pq[0] - qq[0], pp[1] + pq[1] - qq[1])

    nc = ext_norm(c)
    nd = ext_norm(d)
    # N(c) - i * N(d)
    return complex(nc[0] + nd[1], nc[1] - nd[0])


def norm_form_values(coords: np.ndarray, preset_id: str) -> np.ndarray:
    """|reduced norm| for each row of an integer coordinate array, exactly.

    Quaternion rows give |norm form| as integers cast to float; cyclic rows
    give sqrt of the exact integer |N|^2.  Used for determinant counting.
    """
    preset, _ = build_preset(preset_id)
    coords = np.asarray(coords, dtype=np.int64)
    if preset.center == CENTER_RATIONAL:
        a, b = preset.structure
        w, x, y, z = coords[:, 0], coords[:, 1], coords[:, 2], coords[:, 3]
        return np.abs(w * w - a * x * x - b * y * y + a * b * z * z).astype(np.float64)
    re, im = _golden_norm_parts(coords)
    return np.sqrt((re * re + im * im).astype(np.float64))


def _golden_norm_parts(coords: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    def ext_norm_parts(p0, p1, q0, q1):
        # real/imag of (p + qT) sigma(p + qT) with p = p0 + p1 i, q = q0 + q1 i
        re = (p0 * p0 - p1 * p1) + (p0 * q0 - p1 * q1) - (q0 * q0 - q1 * q1)
        im = 2 * p0 * p1 + (p0 * q1 + p1 * q0) - 2 * q0 * q1
        return re, im

    c_re, c_im = ext_norm_parts(coords[:, 0], coords[:, 1], coords[:, 2], coords[:, 3])
    d_re, d_im = ext_norm_parts(coords[:, 4], coords[:, 5], coords[:, 6], coords[:, 7])
    # N(c) - i N(d)
    return c_re + d_im, c_im - d_re


def gram_matrix(basis: OrderBasis) -> np.ndarray:
    """Gram matrix G[i, j] = Re<psi(b_i), psi(b_j)> of the embedded basis.

    Positive definite for every preset; a failed Cholesky factorization
    indicates a preset construction bug and raises RuntimeError.
    """
    flat = basis.embed_basis.reshape(basis.basis_size, -1)
    gram = np.real(flat @ flat.conj().T)
    gram = (gram + gram.T) / 2.0
    try:
        np.linalg.cholesky(gram)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(
            "embedded basis Gram matrix is not positive definite; "
            "preset construction bug"
        ) from exc
    return gram


def unit_group_coords(preset_id: str) -> np.ndarray:
    """Coordinates of the finite unit group {+-1, +-i, +-j, +-ij}.

    Only the positive-definite quaternion preset has a finite unit group;
    other presets raise UnsupportedError.
    """
    from .errors import UnsupportedError

    if preset_id != "LIPSCHITZ_RAMIFIED":
        raise UnsupportedError(
            f"preset {preset_id} has an infinite unit group; "
            "finite unit enumeration is only available for LIPSCHITZ_RAMIFIED"
        )
    units = []
    for idx in range(4):
        for sign in (1, -1):
            v = [0, 0, 0, 0]
            v[idx] = sign
            units.append(v)
    return np.array(units, dtype=np.int64)
