"""Hypothesis detectors: the tightest admissible parameter for each condition.

Every pairwise condition runs over ordered pairs i < j; the band condition
in particular is not symmetric in (i, j) and is never symmetrized.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    GramSummary,
    VectorFamily,
    clamp_nonneg,
    gram_summary,
    norm,
    pair_indices,
    re_inner,
    tol,
)
from .errors import ConsistencyError, InvalidInputError, PreconditionError


@dataclass(frozen=True, eq=False)
class AxisParams:
    """Parameters of the four classical conditions relative to a unit axis.

    ``r`` is ``None`` when the family contains a zero vector (the ratio
    Re<x_i,a>/||x_i|| is then undefined). ``r_raw`` is the unclamped minimum
    ratio; ``r_feasible`` says whether it is nonnegative.
    """

    axis: np.ndarray
    r: float | None
    r_raw: float | None
    rho: float
    k_list: np.ndarray
    r_list: np.ndarray

    @property
    def r_feasible(self) -> bool:
        return self.r_raw is not None and self.r_raw >= -tol(1.0)

    @property
    def rho_feasible(self) -> bool:
        return self.rho < 1.0 - tol(1.0)


def check_unit(a) -> np.ndarray:
    a = np.asarray(a)
    if abs(norm(a) - 1.0) > tol(1.0):
        raise PreconditionError(f"axis must be a unit vector, got norm {norm(a)!r}")
    return a


def detect_axis(family: VectorFamily, a, *, require_r: bool = True) -> AxisParams:
    a = check_unit(family.check_same_space(a))
    norms = np.array([norm(x) for x in family])
    re_a = np.array([re_inner(x, a) for x in family])
    has_zero = bool(np.any(norms == 0.0))
    if has_zero and require_r:
        raise PreconditionError("the Diaz-Metcalf ratio needs every x_i != 0")
    if has_zero:
        r = r_raw = None
    else:
        r_raw = float(np.min(re_a / norms))
        r = max(r_raw, 0.0)
    rho_list = np.array([norm(x - a) for x in family])
    k_list = np.array([clamp_nonneg(s - ra, s) for s, ra in zip(norms, re_a)])
    return AxisParams(a, r, r_raw, float(np.max(rho_list)), k_list, rho_list)


@dataclass(frozen=True, eq=False)
class PairwiseParams:
    """Pairwise gaps k_ij (upper triangle), diameter, forward-difference norms.

    ``refinements`` holds user-supplied lower gaps delta_ij when given.
    """

    gaps: np.ndarray
    diameter: float
    fdiff_norms: np.ndarray
    refinements: np.ndarray | None = None


def detect_pairwise(family: VectorFamily, delta=None) -> PairwiseParams:
    if family.n < 2:
        raise PreconditionError("pairwise parameters need n >= 2")
    g = gram_summary(family)
    gaps = g.gaps()
    X = family.vectors
    diameter = max(norm(X[i] - X[j]) for i, j in pair_indices(family.n))
    fdiff = np.array([norm(X[k + 1] - X[k]) for k in range(family.n - 1)])
    refinements = None
    if delta is not None:
        refinements = upper_matrix(delta, family.n, "delta_ij")
        for i, j in pair_indices(family.n):
            dij = refinements[i, j]
            if dij < -tol(gaps[i, j]) or dij > gaps[i, j] + tol(g.norms[i] * g.norms[j]):
                raise PreconditionError(
                    f"delta_ij must satisfy 0 <= delta <= gap at pair ({i + 1}, {j + 1}): "
                    f"delta={float(dij)!r}, gap={float(gaps[i, j])!r}"
                )
    return PairwiseParams(gaps, diameter, fdiff, refinements)


def upper_matrix(values, n: int, name: str = "matrix") -> np.ndarray:
    """Validate an n x n matrix and keep only its strict upper triangle."""
    M = np.array(values, dtype=np.float64)
    if M.shape != (n, n):
        raise InvalidInputError(f"{name} must be {n} x {n}, got shape {M.shape}")
    M = np.triu(M, 1)
    if not np.all(np.isfinite(M)):
        raise InvalidInputError(f"{name} must be finite above the diagonal")
    return M


@dataclass(frozen=True, eq=False)
class BandParams:
    """Band (m, M) with margins Re<M x_j - x_i, x_i - m x_j> for i < j.

    ``ball_margins`` are the equivalent ball-form margins
    (M - m)/2 ||x_j|| - ||x_i - (M + m)/2 x_j||.
    """

    m: float
    M: float
    margins: np.ndarray
    ball_margins: np.ndarray | None = None

    @property
    def feasible(self) -> bool:
        return bool(np.all(self.margins >= 0.0)) if self.margins.size else True

    @property
    def coefficient(self) -> float:
        return (self.M + self.m) / (2.0 * math.sqrt(self.m * self.M))


def check_band(m: float, M: float) -> None:
    if not (math.isfinite(m) and math.isfinite(M)):
        raise PreconditionError("m and M must be finite")
    if m <= 0.0 or M < m:
        raise PreconditionError(f"band needs 0 < m <= M, got m={m!r}, M={M!r}")


def band_margins(g: GramSummary, m: float, M: float) -> np.ndarray:
    """Band margins for each pair i < j, clamped within tolerance at 0."""
    pairs = pair_indices(g.n)
    out = np.empty(len(pairs))
    sq = g.sq_norms
    for p, (i, j) in enumerate(pairs):
        value = (M + m) * g.re_inner[i, j] - m * M * sq[j] - sq[i]
        scale = sq[i] + m * M * sq[j] + (M + m) * abs(g.re_inner[i, j])
        out[p] = value if value < -tol(scale) else max(value, 0.0)
    return out


def verify_band(family: VectorFamily, m: float, M: float) -> BandParams:
    check_band(m, M)
    if family.n < 2:
        raise PreconditionError("the band condition needs n >= 2")
    g = gram_summary(family)
    margins = band_margins(g, m, M)
    X = family.vectors
    centre = 0.5 * (M + m)
    radius = 0.5 * (M - m)
    ball = np.empty_like(margins)
    for p, (i, j) in enumerate(pair_indices(family.n)):
        R = radius * g.norms[j]
        D = norm(X[i] - centre * X[j])
        ball[p] = R - D
        scale = R + D
        inner_ok = margins[p] >= 0.0
        ball_ok = ball[p] >= -tol(scale)
        # the two margins differ by the positive factor (R + D), so signs match
        if inner_ok != ball_ok and abs(ball[p]) > tol(scale) and abs(margins[p]) > tol(scale * scale):
            raise ConsistencyError(
                f"band forms disagree at pair ({i + 1}, {j + 1}): "
                f"inner margin {float(margins[p])!r}, ball margin {float(ball[p])!r}"
            )
    return BandParams(float(m), float(M), margins, ball)


@dataclass(frozen=True)
class BandSearchResult:
    m: float
    M: float
    coefficient: float
    heuristic: bool = True


def band_rows(g: GramSummary):
    """Per-pair triples (||x_i||^2, ||x_j||^2, Re<x_i,x_j>) for i < j."""
    pairs = pair_indices(g.n)
    sq = g.sq_norms
    a = np.array([sq[i] for i, _ in pairs])
    b = np.array([sq[j] for _, j in pairs])
    c = np.array([g.re_inner[i, j] for i, j in pairs])
    return a, b, c


def _feasible_grid(rows, m: np.ndarray, M: np.ndarray) -> np.ndarray:
    """Feasibility of each (m, M) candidate against every constraint row."""
    a, b, c = rows
    mm = m[..., None]
    MM = M[..., None]
    value = (MM + mm) * c - mm * MM * b - a
    scale = a + mm * MM * b + (MM + mm) * np.abs(c)
    ok = value >= -(1e-12 + 1e-9 * scale)
    return np.all(ok, axis=-1) & (mm[..., 0] <= MM[..., 0]) & (mm[..., 0] > 0)


def _coefficient(m, M):
    return (M + m) / (2.0 * np.sqrt(m * M))


def search_band_rows(rows, grid: int = 32, lo: float = 1e-3, hi: float = 1e3,
                      refinements: int = 3) -> BandSearchResult | None:
    """Grid search for (m, M) minimising (M + m)/(2 sqrt(mM)) over constraint rows.

    Coarse log-spaced grid, a data-driven candidate from the projection
    ratios Re<x_i,x_j>/||x_j||^2 (exact for positively collinear families),
    then `refinements` halvings of the log step around the incumbent.
    Heuristic: not guaranteed globally optimal.
    """
    a, b, c = rows
    if a.size == 0:
        return BandSearchResult(1.0, 1.0, 1.0)

    logs = np.linspace(math.log10(lo), math.log10(hi), grid)
    Lm, LM = np.meshgrid(logs, logs, indexing="ij")
    cand_m = [10.0 ** Lm.ravel()]
    cand_M = [10.0 ** LM.ravel()]

    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(b > 0, c / b, np.nan)
    if np.all(np.isfinite(ratios)) and np.min(ratios) > 0:
        cand_m.append(np.array([np.min(ratios)]))
        cand_M.append(np.array([np.max(ratios)]))

    m_all = np.concatenate(cand_m)
    M_all = np.concatenate(cand_M)
    best = _pick(rows, m_all, M_all)
    if best is None:
        return None

    step = (logs[1] - logs[0]) if grid > 1 else 1.0
    offsets = np.arange(-2, 3)
    for _ in range(refinements):
        step *= 0.5
        lm0, lM0 = math.log10(best[0]), math.log10(best[1])
        Om, OM = np.meshgrid(offsets, offsets, indexing="ij")
        m_try = np.concatenate([[best[0]], 10.0 ** (lm0 + step * Om.ravel())])
        M_try = np.concatenate([[best[1]], 10.0 ** (lM0 + step * OM.ravel())])
        best = _pick(rows, m_try, M_try)
    m, M = best
    return BandSearchResult(float(m), float(M), float(_coefficient(m, M)))


def _pick(rows, m, M):
    ok = _feasible_grid(rows, m, M)
    if not np.any(ok):
        return None
    coef = np.where(ok, _coefficient(m, M), np.inf)
    k = int(np.argmin(coef))  # first minimum in fixed candidate order
    return float(m[k]), float(M[k])


def search_band(family: VectorFamily, **kwargs) -> BandSearchResult | None:
    if family.n < 2:
        raise PreconditionError("band search needs n >= 2")
    return search_band_rows(band_rows(gram_summary(family)), **kwargs)


@dataclass(frozen=True)
class RatioParam:
    """Smallest k with ||x_i|| ||x_j|| <= k Re<x_i, x_j> for all i < j."""

    k: float


def detect_ratio(family: VectorFamily) -> RatioParam:
    return ratio_from_gram(gram_summary(family))


def ratio_from_gram(g: GramSummary) -> RatioParam:
    k = 1.0
    for i, j in pair_indices(g.n):
        re = g.re_inner[i, j]
        if re <= 1e-12:
            raise PreconditionError(
                f"ratio condition needs Re<x_i,x_j> > 0; pair ({i + 1}, {j + 1}) has {float(re)!r}"
            )
        k = max(k, g.norms[i] * g.norms[j] / re)
    if k < 1.0 - tol(1.0):
        raise ConsistencyError(f"ratio constant below 1: {k!r}")
    return RatioParam(max(k, 1.0))


@dataclass(frozen=True)
class NormalizedRhoParam:
    """rho = max_{i<j} ||x_i - x_j/||x_j||||; feasible when rho < 1."""

    rho: float

    @property
    def feasible(self) -> bool:
        return self.rho < 1.0 - tol(1.0)

    @property
    def at_zero(self) -> bool:
        # rho = 0 is outside the open interval (0, 1); admitted by continuity
        return self.rho <= tol(1.0)


def normalized_distances(family: VectorFamily) -> np.ndarray:
    """||x_i - x_j/||x_j|||| for each pair i < j, in pair order."""
    X = family.vectors
    out = []
    for i, j in pair_indices(family.n):
        nj = norm(X[j])
        if nj == 0.0:
            raise PreconditionError(f"x_{j + 1} is zero; the normalized condition needs x_j != 0")
        out.append(norm(X[i] - X[j] / nj))
    return np.array(out)


def detect_normalized_rho(family: VectorFamily) -> NormalizedRhoParam:
    dist = normalized_distances(family)
    return NormalizedRhoParam(float(np.max(dist)) if dist.size else 0.0)


@dataclass(frozen=True)
class EtaParam:
    """Admissible interval [eta_min, eta_max) for ||x_j - x_i|| <= eta < ||x_j||."""

    eta_min: float
    eta_max: float

    @property
    def feasible(self) -> bool:
        return self.eta_min < self.eta_max - tol(self.eta_max)


def detect_eta(family: VectorFamily) -> EtaParam:
    X = family.vectors
    n = family.n
    # both orders and i == j, as the two-index quantifier reads; distances are symmetric
    eta_min = max((norm(X[j] - X[i]) for i in range(n) for j in range(n)), default=0.0)
    eta_max = min(norm(x) for x in X)
    return EtaParam(float(eta_min), float(eta_max))
