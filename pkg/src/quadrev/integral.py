"""Weighted integrals of vector-valued functions, realised by quadrature.

A function f: [a, b] -> H is represented by its values at the nodes of a
positive-weight rule, so the weighted space is the finite-dimensional space
of node samples with <f, g> = sum_k w_k eta_k <f(t_k), g(t_k)>. Stacking
sqrt(w_k eta_k) f(t_k) over nodes is an isometry onto plain C^(N d).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bounds import (
    BoundReport,
    band_additive_from_gram,
    band_from_gram,
    band_multiplicative_from_gram,
)
from .core import GramSummary, VectorFamily, _re_pairs, re_gram, tol
from .errors import DimensionError, InvalidInputError, PreconditionError
from .hypotheses import band_margins, check_band


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    a: float
    b: float
    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        t, w = self.nodes, self.weights
        if not (math.isfinite(self.a) and math.isfinite(self.b)) or not self.a < self.b:
            raise InvalidInputError(f"interval needs finite a < b, got [{self.a!r}, {self.b!r}]")
        if t.ndim != 1 or t.shape != w.shape or t.size == 0:
            raise InvalidInputError("nodes and weights must be 1-D arrays of equal, nonzero length")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(w))):
            raise InvalidInputError("nodes and weights must be finite")
        if np.any(np.diff(t) <= 0):
            raise InvalidInputError("nodes must be strictly increasing")
        if t[0] < self.a or t[-1] > self.b:
            raise InvalidInputError("nodes must lie in [a, b]")
        if np.any(w <= 0):
            raise InvalidInputError("weights must be positive")
        t.setflags(write=False)
        w.setflags(write=False)

    @property
    def size(self) -> int:
        return self.nodes.shape[0]

    @classmethod
    def midpoint(cls, a: float, b: float, n: int) -> "QuadratureRule":
        if n < 1:
            raise InvalidInputError("a midpoint rule needs n >= 1")
        h = (b - a) / n
        t = a + h * (np.arange(n) + 0.5)
        return cls(float(a), float(b), t, np.full(n, h))

    @classmethod
    def gauss_legendre(cls, a: float, b: float, n: int) -> "QuadratureRule":
        if n < 1:
            raise InvalidInputError("a Gauss-Legendre rule needs n >= 1")
        x, w = np.polynomial.legendre.leggauss(n)
        half = 0.5 * (b - a)
        return cls(float(a), float(b), 0.5 * (a + b) + half * x, half * w)

    @classmethod
    def custom(cls, a: float, b: float, nodes, weights) -> "QuadratureRule":
        return cls(float(a), float(b), np.array(nodes, dtype=float), np.array(weights, dtype=float))


@dataclass(frozen=True, eq=False)
class WeightFunction:
    """Samples eta(t_k) >= 0 at the rule's nodes.

    ``normalized`` marks weights produced by ``normalize_weight``; their mass
    is 1 by construction, which the constant-function path relies on.
    """

    samples: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        s = self.samples
        if s.ndim != 1 or not np.all(np.isfinite(s)):
            raise InvalidInputError("weight samples must be a finite 1-D array")
        if np.any(s < 0):
            raise InvalidInputError("weight samples must be >= 0")
        s.setflags(write=False)

    @classmethod
    def of(cls, samples) -> "WeightFunction":
        return cls(np.array(samples, dtype=float))

    @classmethod
    def constant(cls, rule: QuadratureRule, value: float = 1.0) -> "WeightFunction":
        return cls(np.full(rule.size, float(value)))


def _check_rule(n: int, rule: QuadratureRule, what: str) -> None:
    if n != rule.size:
        raise DimensionError(f"{what} has {n} samples but the rule has {rule.size} nodes")


def weight_mass(eta: WeightFunction, rule: QuadratureRule) -> float:
    _check_rule(eta.samples.shape[0], rule, "weight")
    return math.fsum(rule.weights * eta.samples)


def normalize_weight(raw: WeightFunction, rule: QuadratureRule) -> WeightFunction:
    """Scale so that sum_k w_k eta_k = 1 (one division)."""
    total = weight_mass(raw, rule)
    if not total > 0.0:
        raise InvalidInputError(f"weight integrates to {total!r}; it must be positive")
    return WeightFunction(raw.samples / total, normalized=True)


@dataclass(frozen=True, eq=False)
class SampledVectorFunction:
    """Values f(t_k), one row per node."""

    values: np.ndarray
    field: str = "real"

    def __post_init__(self):
        V = self.values
        if V.ndim != 2 or V.shape[0] < 1 or V.shape[1] < 1:
            raise InvalidInputError(f"sampled values need shape (N, d), got {V.shape}")
        if not np.all(np.isfinite(V)):
            raise InvalidInputError("sampled values must be finite")
        V.setflags(write=False)

    @classmethod
    def of(cls, values, field: str | None = None) -> "SampledVectorFunction":
        V = np.array(values, dtype=complex if field == "complex" else None)
        if not np.issubdtype(V.dtype, np.number):
            raise InvalidInputError("sampled values must be numbers")
        is_complex = field == "complex" or np.iscomplexobj(V)
        V = V.astype(np.complex128 if is_complex else np.float64)
        return cls(V, "complex" if is_complex else "real")

    @classmethod
    def constant(cls, x, rule: QuadratureRule) -> "SampledVectorFunction":
        x = np.asarray(x)
        return cls.of(np.tile(x, (rule.size, 1)))

    @property
    def d(self) -> int:
        return self.values.shape[1]


def node_masses(eta: WeightFunction, rule: QuadratureRule) -> np.ndarray:
    """w_k eta_k at each node."""
    _check_rule(eta.samples.shape[0], rule, "weight")
    return rule.weights * eta.samples


def weighted_inner(f: SampledVectorFunction, g: SampledVectorFunction,
                   eta: WeightFunction, rule: QuadratureRule):
    """sum_k w_k eta_k <f(t_k), g(t_k)>, summed with fsum per component."""
    _check_rule(f.values.shape[0], rule, "f")
    _check_rule(g.values.shape[0], rule, "g")
    if f.d != g.d:
        raise DimensionError(f"dimension mismatch: {f.d} vs {g.d}")
    c = node_masses(eta, rule)
    prods = np.sum(f.values * np.conj(g.values), axis=1)
    re = math.fsum(c * prods.real)
    if f.field == "complex" or g.field == "complex":
        return complex(re, math.fsum(c * prods.imag))
    return re


def weighted_norm(f: SampledVectorFunction, eta: WeightFunction, rule: QuadratureRule) -> float:
    return math.sqrt(max(weighted_inner(f, f, eta, rule).real, 0.0))


def _check_functions(fs, rule: QuadratureRule) -> int:
    fs = list(fs)
    if not fs:
        raise InvalidInputError("need at least one function")
    d = fs[0].d
    for i, f in enumerate(fs):
        _check_rule(f.values.shape[0], rule, f"function {i + 1}")
        if f.d != d:
            raise DimensionError(f"function {i + 1} has dimension {f.d}, expected {d}")
    return d


def node_family(fs, k: int) -> np.ndarray:
    """Rows f_i(t_k) at node k."""
    return np.array([f.values[k] for f in fs])


def integral_gram(fs, eta: WeightFunction, rule: QuadratureRule) -> GramSummary:
    """Gram quantities of the functions in the weighted space.

    Each entry is fsum_k (w_k eta_k) G_k[i, j], with G_k the node Gram matrix
    computed by the same routine as for plain families. Constant functions
    are integrated exactly: the node value times the weight mass, which is
    exactly 1 for a normalized weight, so they reproduce the discrete values.
    """
    fs = list(fs)
    _check_functions(fs, rule)
    c = node_masses(eta, rule)
    n = len(fs)
    if all(np.all(f.values == f.values[0]) for f in fs):
        X = node_family(fs, 0)
        s = np.sum(X, axis=0)
        sum_sq = float(_re_pairs(s[None, :], s[None, :])[0, 0])
        if eta.normalized:
            return GramSummary.from_gram(re_gram(X), sum_sq)
        mass = math.fsum(c)
        return GramSummary.from_gram(re_gram(X) * mass, sum_sq * mass)
    grams = []
    sums = []
    for k in range(rule.size):
        X = node_family(fs, k)
        grams.append(re_gram(X))
        s = np.sum(X, axis=0)
        sums.append(float(_re_pairs(s[None, :], s[None, :])[0, 0]))
    G = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            G[i, j] = G[j, i] = math.fsum(c[k] * grams[k][i, j] for k in range(rule.size))
    sum_sq = math.fsum(c[k] * sums[k] for k in range(rule.size))
    return GramSummary.from_gram(G, sum_sq)


def pointwise_band(fs, rule: QuadratureRule, m: float, M: float) -> np.ndarray:
    """Band margins at every node, shape (N, pairs); raises at the first failing node."""
    fs = list(fs)
    check_band(m, M)
    _check_functions(fs, rule)
    if len(fs) < 2:
        raise PreconditionError("the band condition needs n >= 2")
    rows = []
    for k in range(rule.size):
        X = node_family(fs, k)
        g = GramSummary.from_gram(re_gram(X), 0.0)
        margins = band_margins(g, m, M)
        if np.any(margins < 0.0):
            p = int(np.argmin(margins))
            raise PreconditionError(
                f"band condition fails at node {k + 1} (t = {float(rule.nodes[k])!r}), "
                f"pair index {p + 1}, margin {float(margins[p])!r}"
            )
        rows.append(margins)
    return np.array(rows)


def check_g(g: SampledVectorFunction | None, eta: WeightFunction, rule: QuadratureRule) -> float | None:
    """Validate the optional normalizing function (weighted norm 1); unused by the bounds."""
    if g is None:
        return None
    nn = weighted_inner(g, g, eta, rule).real
    if abs(nn - 1.0) > tol(1.0) * 1e3:
        raise InvalidInputError(f"g must satisfy int eta ||g||^2 = 1, got {nn!r}")
    return nn


def _integral_band(fs, eta, rule, m, M) -> GramSummary:
    pointwise_band(fs, rule, m, M)
    return integral_gram(fs, eta, rule)


def integral_band_bound_additive(fs, eta: WeightFunction, rule: QuadratureRule,
                                 m: float, M: float) -> BoundReport:
    """[sum ||f_i||_eta]^2 <= ||sum f_i||_eta^2 + 1/2 (M-m)^2/(M+m) int eta sum k ||f_{k+1}||^2.

    The hypothesis is checked at every node; the bound itself is evaluated on
    the weighted Gram quantities.
    """
    g = _integral_band(fs, eta, rule, m, M)
    return band_additive_from_gram(g, band_from_gram(g, m, M))


def integral_band_bound_multiplicative(fs, eta: WeightFunction, rule: QuadratureRule,
                                       m: float, M: float) -> list[BoundReport]:
    g = _integral_band(fs, eta, rule, m, M)
    return band_multiplicative_from_gram(g, band_from_gram(g, m, M))


def stacked_family(fs, eta: WeightFunction, rule: QuadratureRule) -> VectorFamily:
    """Rows concat_k sqrt(w_k eta_k) f_i(t_k); the isometric plain family."""
    fs = list(fs)
    _check_functions(fs, rule)
    r = np.sqrt(node_masses(eta, rule))
    rows = [(r[:, None] * f.values).ravel() for f in fs]
    field = "complex" if any(f.field == "complex" for f in fs) else "real"
    return VectorFamily(np.array(rows), field)
