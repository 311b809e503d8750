"""Vectors, inner products and Gram quantities over R^d or C^d.

Vectors are 1-D numpy arrays (float64 or complex128). The inner product is
linear in the first argument and conjugate-linear in the second. Every
quantity downstream uses ``Re<.,.>``, never the modulus.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InvalidInputError

EPS_REL = 1e-9
EPS_ABS = 1e-12


def tol(scale: float = 0.0) -> float:
    """Boundary tolerance for a comparison whose natural magnitude is `scale`."""
    return EPS_ABS + EPS_REL * abs(scale)


def clamp_nonneg(value: float, scale: float = 0.0) -> float:
    """Snap a provably nonnegative quantity to 0 when it is within tolerance.

    Values below ``-tol(scale)`` are returned unchanged so that genuine
    violations stay visible.
    """
    if -tol(scale) <= value < 0.0:
        return 0.0
    return value


def as_vector(components, field: str | None = None) -> np.ndarray:
    dtype = complex if field == "complex" else None
    arr = np.array(components, dtype=dtype)
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidInputError(f"a vector must be a non-empty 1-D array, got shape {arr.shape}")
    if not np.issubdtype(arr.dtype, np.number):
        raise InvalidInputError(f"vector components must be numbers, got dtype {arr.dtype}")
    if np.iscomplexobj(arr):
        arr = arr.astype(np.complex128)
    else:
        arr = arr.astype(np.float64)
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("vector components must be finite")
    return arr


def _check_dims(u: np.ndarray, v: np.ndarray) -> None:
    if u.shape != v.shape:
        raise DimensionError(f"dimension mismatch: {u.shape[-1]} vs {v.shape[-1]}")


def inner(u, v):
    """<u, v> = sum_k u_k conj(v_k). Returns a float for real inputs."""
    u = np.asarray(u)
    v = np.asarray(v)
    _check_dims(u, v)
    if np.iscomplexobj(u) or np.iscomplexobj(v):
        return complex(np.sum(u * np.conj(v)))
    return float(np.sum(u * v))


def re_inner(u, v) -> float:
    u = np.asarray(u)
    v = np.asarray(v)
    _check_dims(u, v)
    return float(_re_pairs(u[None, :], v[None, :])[0, 0])


def norm(u) -> float:
    u = np.asarray(u)
    return math.sqrt(max(float(_re_pairs(u[None, :], u[None, :])[0, 0]), 0.0))


def _re_pairs(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Matrix of Re<X_i, Y_j> computed without BLAS (order-stable)."""
    if np.iscomplexobj(X) or np.iscomplexobj(Y):
        Xr, Xi = X.real, X.imag
        Yr, Yi = Y.real, Y.imag
        return np.sum(Xr[:, None, :] * Yr[None, :, :] + Xi[:, None, :] * Yi[None, :, :], axis=-1)
    return np.sum(X[:, None, :] * Y[None, :, :], axis=-1)


def re_gram(X: np.ndarray) -> np.ndarray:
    """Symmetric matrix Re<x_i, x_j> for the rows of X."""
    G = _re_pairs(X, X)
    # Re<x_i,x_j> = Re<x_j,x_i> exactly; enforce it against summation noise
    return np.triu(G) + np.triu(G, 1).T


def schwarz_gap(u, v) -> float:
    """||u|| ||v|| - Re<u, v>, clamped to 0 when within tolerance of 0."""
    u = np.asarray(u)
    v = np.asarray(v)
    _check_dims(u, v)
    nu, nv = norm(u), norm(v)
    return clamp_nonneg(nu * nv - re_inner(u, v), nu * nv)


@dataclass(frozen=True, eq=False)
class VectorFamily:
    """An ordered family x_1..x_n of vectors sharing one dimension and field."""

    vectors: np.ndarray
    field: str = "real"

    def __post_init__(self):
        X = self.vectors
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise InvalidInputError(f"a family needs shape (n, d) with n, d >= 1, got {X.shape}")
        if self.field not in ("real", "complex"):
            raise InvalidInputError(f"field must be 'real' or 'complex', got {self.field!r}")
        if not np.all(np.isfinite(X)):
            raise InvalidInputError("family components must be finite")
        X.setflags(write=False)

    @classmethod
    def of(cls, vectors, field: str | None = None) -> "VectorFamily":
        """Build a family from nested sequences; the field is inferred if omitted."""
        rows = list(vectors)
        if not rows:
            raise InvalidInputError("a family needs at least one vector")
        vecs = [as_vector(r, field) for r in rows]
        d = vecs[0].shape[0]
        for i, v in enumerate(vecs):
            if v.shape[0] != d:
                raise DimensionError(f"vector {i + 1} has dimension {v.shape[0]}, expected {d}")
        is_complex = field == "complex" or any(np.iscomplexobj(v) for v in vecs)
        X = np.array(vecs, dtype=np.complex128 if is_complex else np.float64)
        return cls(X, "complex" if is_complex else "real")

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def d(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, i) -> np.ndarray:
        return self.vectors[i]

    def __iter__(self):
        return iter(self.vectors)

    def total(self) -> np.ndarray:
        return np.sum(self.vectors, axis=0)

    def scaled(self, factor: float) -> "VectorFamily":
        return VectorFamily(self.vectors * factor, self.field)

    def check_same_space(self, v) -> np.ndarray:
        v = np.asarray(v)
        if v.shape != (self.d,):
            raise DimensionError(f"expected a vector of dimension {self.d}, got shape {v.shape}")
        return v


@dataclass(frozen=True, eq=False)
class GramSummary:
    """Everything the bounds need: norms, Re<x_i,x_j>, ||sum x_i||^2, sum ||x_i||."""

    norms: np.ndarray
    re_inner: np.ndarray
    sum_norm_sq: float
    norm_sum: float

    @classmethod
    def from_gram(cls, G: np.ndarray, sum_norm_sq: float) -> "GramSummary":
        G = np.array(G, dtype=np.float64)
        norms = np.sqrt(np.maximum(np.diag(G), 0.0))
        G.setflags(write=False)
        norms.setflags(write=False)
        return cls(norms, G, float(sum_norm_sq), math.fsum(norms))

    @property
    def n(self) -> int:
        return self.norms.shape[0]

    @property
    def sq_norms(self) -> np.ndarray:
        return np.diag(self.re_inner)

    @property
    def sum_norm(self) -> float:
        return math.sqrt(max(self.sum_norm_sq, 0.0))

    def gaps(self) -> np.ndarray:
        """Upper-triangular matrix of Schwarz gaps (zeros on and below the diagonal)."""
        n = self.n
        out = np.zeros((n, n))
        for i in range(n):
            for j in range(i + 1, n):
                pp = self.norms[i] * self.norms[j]
                out[i, j] = clamp_nonneg(pp - self.re_inner[i, j], pp)
        return out


def gram_summary(family: VectorFamily) -> GramSummary:
    X = family.vectors
    s = family.total()
    sum_sq = float(_re_pairs(s[None, :], s[None, :])[0, 0])
    return GramSummary.from_gram(re_gram(X), sum_sq)


def pair_indices(n: int):
    """All (i, j) with 0 <= i < j < n, in row-major order."""
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


@dataclass(frozen=True)
class Defect:
    """(sum ||x_i||)^2 - ||sum x_i||^2 computed two independent ways."""

    direct: float
    pairwise: float

    @property
    def discrepancy(self) -> float:
        return abs(self.direct - self.pairwise)


def defect(family: VectorFamily) -> Defect:
    X = family.vectors
    norms = np.array([norm(x) for x in X])
    norm_sum = math.fsum(norms)
    sum_sq = norm(family.total()) ** 2
    scale = norm_sum * norm_sum
    direct = clamp_nonneg(norm_sum * norm_sum - sum_sq, scale)

    terms = []
    for i, j in pair_indices(family.n):
        terms.append(norms[i] * norms[j] - re_inner(X[i], X[j]))
    pairwise = clamp_nonneg(2.0 * math.fsum(terms), scale)
    return Defect(direct, pairwise)


def midpoint_margins(x, z, Z) -> tuple[float, float]:
    """Margins of the two equivalent ball conditions.

    First: Re<Z - x, x - z>. Second: ||Z - z||/2 - ||x - (Z + z)/2||.
    Both are >= 0 exactly when x lies in the closed ball with diameter [z, Z].
    """
    x, z, Z = np.asarray(x), np.asarray(z), np.asarray(Z)
    _check_dims(x, z)
    _check_dims(x, Z)
    first = re_inner(Z - x, x - z)
    second = 0.5 * norm(Z - z) - norm(x - 0.5 * (Z + z))
    return first, second


def midpoint_equiv(x, z, Z) -> tuple[bool, bool]:
    first, second = midpoint_margins(x, z, Z)
    x, z, Z = np.asarray(x), np.asarray(z), np.asarray(Z)
    scale = norm(Z - z) + norm(x - 0.5 * (Z + z))
    return first >= -tol(scale * scale), second >= -tol(scale)
