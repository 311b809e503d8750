"""Bound evaluation for every reverse triangle inequality, with certificates.

Sign convention: ``slack = rhs - lhs`` and the inequality holds when
``slack >= 0``. Lower-bound statements (the refinement) are oriented so that
``lhs`` is the smaller side as well.

Quadratic bounds (on ``(sum ||x_i||)^2``) and linear bounds (on
``sum ||x_i||`` or ``||sum x_i||``) are ranked in separate leagues.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .core import (
    GramSummary,
    VectorFamily,
    gram_summary,
    norm,
    pair_indices,
    re_inner,
    tol,
)
from .errors import ConsistencyError, InvalidInputError, PreconditionError
from .hypotheses import (
    BandParams,
    check_band,
    check_unit,
    detect_axis,
    detect_eta,
    detect_normalized_rho,
    normalized_distances,
    ratio_from_gram,
    search_band,
    upper_matrix,
    verify_band,
    band_margins,
)


class TheoremId(str, Enum):
    DM_1_2 = "DM_1_2"
    RHO_1_5 = "RHO_1_5"
    ADD_1_8 = "ADD_1_8"
    ADD_1_12 = "ADD_1_12"
    QUAD_2_2 = "QUAD_2_2"
    REFINE_2_5 = "REFINE_2_5"
    DIAM_2_7 = "DIAM_2_7"
    FDIFF_2_10 = "FDIFF_2_10"
    FDIFF_SUP_2_12 = "FDIFF_SUP_2_12"
    FDIFF_HOLDER_2_15 = "FDIFF_HOLDER_2_15"
    FDIFF_L2_2_16 = "FDIFF_L2_2_16"
    BAND_ADD_2_19 = "BAND_ADD_2_19"
    RATIO_3_2 = "RATIO_3_2"
    RATIO_SQRT_3_5 = "RATIO_SQRT_3_5"
    RATIO_CBS_3_6 = "RATIO_CBS_3_6"
    NRHO_3_9 = "NRHO_3_9"
    UNIT_LOWER_3_15 = "UNIT_LOWER_3_15"
    NRHO_COARSE_3_16 = "NRHO_COARSE_3_16"
    NRHO_CBS_3_17 = "NRHO_CBS_3_17"
    BAND_MULT_3_20 = "BAND_MULT_3_20"
    BAND_COARSE_3_11 = "BAND_COARSE_3_11"
    ETA_3_24 = "ETA_3_24"

    def __str__(self) -> str:
        return self.value


T = TheoremId

QUADRATIC = frozenset({
    T.QUAD_2_2, T.REFINE_2_5, T.DIAM_2_7, T.FDIFF_2_10, T.FDIFF_SUP_2_12,
    T.FDIFF_HOLDER_2_15, T.FDIFF_L2_2_16, T.BAND_ADD_2_19, T.RATIO_3_2,
    T.NRHO_3_9, T.BAND_MULT_3_20,
})

# coarse consequences whose equality case is not stated
NO_EQUALITY = frozenset({
    T.RATIO_SQRT_3_5, T.RATIO_CBS_3_6, T.NRHO_COARSE_3_16, T.NRHO_CBS_3_17,
    T.BAND_COARSE_3_11,
})

AXIS_IDS = (T.DM_1_2, T.RHO_1_5, T.ADD_1_8, T.ADD_1_12)
FDIFF_IDS = (T.FDIFF_2_10, T.FDIFF_SUP_2_12, T.FDIFF_HOLDER_2_15, T.FDIFF_L2_2_16)

# statements that only make sense with at least one pair
PAIRWISE = frozenset(set(TheoremId) - set(AXIS_IDS) - {T.ETA_3_24})


def league(tid: TheoremId) -> str:
    return "quadratic" if TheoremId(tid) in QUADRATIC else "linear"


def has_equality(tid: TheoremId) -> bool:
    return TheoremId(tid) not in NO_EQUALITY


@dataclass(frozen=True)
class HolderExponents:
    """Conjugate exponents 1/p + 1/q = 1 with p in (1, 64]."""

    p: float

    def __post_init__(self):
        p = self.p
        if not (isinstance(p, (int, float)) and math.isfinite(p)) or p <= 1.0 or p > 64.0:
            raise PreconditionError(f"Holder exponent p must lie in (1, 64], got {p!r}")

    @property
    def q(self) -> float:
        return self.p / (self.p - 1.0)


@dataclass(frozen=True, eq=False)
class HypothesisCertificate:
    """A named hypothesis, the parameters used, and per-constraint margins.

    Margins are ``>= 0`` where a constraint holds; values within tolerance of
    0 are snapped to 0 and genuine violations are kept as they are.
    """

    name: str
    params: dict
    margins: np.ndarray = field(default_factory=lambda: np.zeros(0))
    notes: tuple = ()

    @property
    def feasible(self) -> bool:
        return bool(np.all(self.margins >= 0.0)) if self.margins.size else True

    @property
    def min_margin(self) -> float | None:
        return float(np.min(self.margins)) if self.margins.size else None


@dataclass(frozen=True, eq=False)
class BoundReport:
    theorem_id: TheoremId
    lhs: float
    rhs: float
    certificate: HypothesisCertificate
    equality_residuals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    extras: dict = field(default_factory=dict)

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def league(self) -> str:
        return league(self.theorem_id)

    @property
    def params(self) -> dict:
        return self.certificate.params

    @property
    def feasible(self) -> bool:
        return self.certificate.feasible

    @property
    def scale(self) -> float:
        return max(abs(self.lhs), abs(self.rhs))

    @property
    def holds(self) -> bool:
        return self.slack >= -tol(self.scale)

    @property
    def equality_residual_max(self) -> float | None:
        if not has_equality(self.theorem_id):
            return None
        r = self.equality_residuals
        return float(np.max(r)) if r.size else 0.0

    @property
    def at_equality(self) -> bool | None:
        """Whether the bound is attained (None when no equality case is stated)."""
        res = self.equality_residual_max
        if res is None:
            return None
        t = tol(self.scale)
        return abs(self.slack) <= t and res <= t

    @property
    def additive_slack(self) -> float | None:
        """sqrt(rhs) - sqrt(lhs) for quadratic bounds, for cross-league display."""
        if self.league != "quadratic":
            return None
        return math.sqrt(max(self.rhs, 0.0)) - math.sqrt(max(self.lhs, 0.0))


def _margins(values, scales) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    scales = np.abs(np.asarray(scales, dtype=float))
    t = 1e-12 + 1e-9 * scales
    out = np.where(values < -t, values, np.maximum(values, 0.0))
    return np.atleast_1d(out).astype(float)


def _require(cert: HypothesisCertificate, what: str) -> HypothesisCertificate:
    if not cert.feasible:
        k = int(np.argmin(cert.margins))
        raise PreconditionError(
            f"{what}: hypothesis '{cert.name}' fails (constraint {k + 1}, margin {float(cert.margins[k])!r})"
        )
    return cert


def _need_pairs(family_or_n, what: str) -> None:
    n = family_or_n if isinstance(family_or_n, int) else family_or_n.n
    if n < 2:
        raise PreconditionError(f"{what} needs n >= 2")


def _finite(value, name: str) -> float:
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise InvalidInputError(f"{name} must be a real number, got {value!r}") from None
    if not math.isfinite(v):
        raise InvalidInputError(f"{name} must be finite, got {value!r}")
    return v


def default_axis(family: VectorFamily) -> np.ndarray:
    """Unit vector along sum x_i, the natural axis when none is supplied."""
    s = family.total()
    ns = norm(s)
    if ns == 0.0:
        raise PreconditionError("sum of the family is zero; no default axis exists")
    return s / ns


# ---------------------------------------------------------------- classical


def _axis_setup(family: VectorFamily, a):
    a = default_axis(family) if a is None else check_unit(family.check_same_space(np.asarray(a)))
    X = family.vectors
    norms = np.array([norm(x) for x in X])
    re_a = np.array([re_inner(x, a) for x in X])
    return a, norms, re_a


def diaz_metcalf(family: VectorFamily, a=None, r: float | None = None) -> BoundReport:
    """r sum ||x_i|| <= ||sum x_i|| when Re<x_i,a> >= r ||x_i||, 0 <= r."""
    a, norms, re_a = _axis_setup(family, a)
    if np.any(norms == 0.0):
        raise PreconditionError("the Diaz-Metcalf condition needs every x_i != 0")
    if r is None:
        r = max(float(np.min(re_a / norms)), 0.0)
    r = _finite(r, "r")
    if r < 0.0:
        raise PreconditionError(f"r must be >= 0, got {r!r}")
    cert = _require(HypothesisCertificate(
        "diaz-metcalf", {"r": r, "axis": a},
        _margins(re_a / norms - r, 1.0)), "DM_1_2")
    S = math.fsum(norms)
    total = family.total()
    residual = norm(total - r * S * a)
    return BoundReport(T.DM_1_2, r * S, norm(total), cert, np.array([residual]))


def rho_bound(family: VectorFamily, a=None, rho: float | None = None) -> BoundReport:
    """sqrt(1 - rho^2) sum ||x_i|| <= ||sum x_i|| when ||x_i - a|| <= rho < 1."""
    a, norms, _ = _axis_setup(family, a)
    dist = np.array([norm(x - a) for x in family])
    if rho is None:
        rho = float(np.max(dist))
    rho = _finite(rho, "rho")
    if rho < 0.0 or rho >= 1.0 - tol(1.0):
        raise PreconditionError(f"rho must lie in [0, 1), got {rho!r}")
    notes = ("rho = 0 admitted by continuity",) if rho <= tol(1.0) else ()
    cert = _require(HypothesisCertificate(
        "axis-ball", {"rho": rho, "axis": a}, _margins(rho - dist, 1.0), notes), "RHO_1_5")
    c = math.sqrt(1.0 - rho * rho)
    S = math.fsum(norms)
    total = family.total()
    residual = norm(total - c * S * a)
    return BoundReport(T.RHO_1_5, c * S, norm(total), cert, np.array([residual]))


def additive_k(family: VectorFamily, a=None, k_list=None) -> BoundReport:
    """sum ||x_i|| - ||sum x_i|| <= sum k_i when ||x_i|| - Re<a,x_i> <= k_i."""
    a, norms, re_a = _axis_setup(family, a)
    deficit = norms - re_a
    if k_list is None:
        k = np.maximum(deficit, 0.0)
    else:
        k = np.array(k_list, dtype=float)
        if k.shape != (family.n,) or not np.all(np.isfinite(k)):
            raise InvalidInputError(f"k_list must hold {family.n} finite numbers")
        if np.any(k < 0.0):
            raise PreconditionError("k_i must be >= 0")
    cert = _require(HypothesisCertificate(
        "axis-deficit", {"k_list": k, "axis": a}, _margins(k - deficit, norms)), "ADD_1_8")
    S = math.fsum(norms)
    K = math.fsum(k)
    total = family.total()
    sn = norm(total)
    residuals = np.array([norm(total - (S - K) * a), max(0.0, K - S)])
    return BoundReport(T.ADD_1_8, S, sn + K, cert, residuals)


def additive_r(family: VectorFamily, a=None, r_list=None) -> BoundReport:
    """sum ||x_i|| - ||sum x_i|| <= 1/2 sum r_i^2 when ||x_i - a|| <= r_i."""
    a, norms, _ = _axis_setup(family, a)
    dist = np.array([norm(x - a) for x in family])
    if r_list is None:
        r = dist
    else:
        r = np.array(r_list, dtype=float)
        if r.shape != (family.n,) or not np.all(np.isfinite(r)):
            raise InvalidInputError(f"r_list must hold {family.n} finite numbers")
        if np.any(r < 0.0):
            raise PreconditionError("r_i must be >= 0")
    cert = _require(HypothesisCertificate(
        "axis-radii", {"r_list": r, "axis": a}, _margins(r - dist, 1.0 + dist)), "ADD_1_12")
    S = math.fsum(norms)
    H = 0.5 * math.fsum(r * r)
    total = family.total()
    residuals = np.array([norm(total - (S - H) * a), max(0.0, H - S)])
    return BoundReport(T.ADD_1_12, S, norm(total) + H, cert, residuals)


def classical_bounds(family: VectorFamily, axis) -> list[BoundReport]:
    """The four axis-based bounds at the tightest parameters in `axis`.

    `axis` is an AxisParams from ``detect_axis``; raises when rho >= 1.
    """
    if axis.r is None:
        raise PreconditionError("the Diaz-Metcalf condition needs every x_i != 0")
    if not axis.rho_feasible:
        raise PreconditionError(f"axis radius rho = {axis.rho!r} is not below 1")
    a = axis.axis
    return [
        diaz_metcalf(family, a, axis.r),
        rho_bound(family, a, axis.rho),
        additive_k(family, a, axis.k_list),
        additive_r(family, a, axis.r_list),
    ]


# ---------------------------------------------------------------- pairwise


def _pair_sum(g: GramSummary, k_upper: np.ndarray) -> float:
    return math.fsum(k_upper[i, j] for i, j in pair_indices(g.n))


def quadratic_gap_bound(family: VectorFamily, k_ij=None) -> BoundReport:
    """(sum ||x_i||)^2 <= ||sum x_i||^2 + 2 sum_{i<j} k_ij when gaps <= k_ij.

    Extras carry the two additive consequences, labelled by form:
    root of the sum sqrt(2) (sum k_ij)^(1/2) and sum of roots sqrt(2) sum sqrt(k_ij).
    """
    _need_pairs(family, "QUAD_2_2")
    g = gram_summary(family)
    return quad_from_gram(g, k_ij)


def quad_from_gram(g: GramSummary, k_ij=None) -> BoundReport:
    gaps = g.gaps()
    k = gaps.copy() if k_ij is None else upper_matrix(k_ij, g.n, "k_ij")
    pairs = pair_indices(g.n)
    if any(k[i, j] < 0.0 for i, j in pairs):
        raise PreconditionError("k_ij must be >= 0")
    pp = np.array([g.norms[i] * g.norms[j] for i, j in pairs])
    margins = _margins([k[i, j] - gaps[i, j] for i, j in pairs], pp)
    cert = HypothesisCertificate("pairwise-gap", {"k_ij": k}, margins)
    if not cert.feasible:
        p = int(np.argmin(margins))
        i, j = pairs[p]
        raise PreconditionError(
            f"QUAD_2_2: k_ij below the Schwarz gap at pair ({i + 1}, {j + 1}): "
            f"k={float(k[i, j])!r}, gap={float(gaps[i, j])!r}"
        )
    K = _pair_sum(g, k)
    S = g.norm_sum
    extras = {
        "additive_lhs": S,
        "additive_rhs_root_sum": g.sum_norm + math.sqrt(2.0) * math.sqrt(K),
        "additive_rhs_sum_roots": g.sum_norm + math.sqrt(2.0) * math.fsum(
            math.sqrt(k[i, j]) for i, j in pairs),
    }
    residuals = np.array([k[i, j] - gaps[i, j] for i, j in pairs])
    return BoundReport(T.QUAD_2_2, S * S, g.sum_norm_sq + 2.0 * K, cert,
                       np.maximum(residuals, 0.0), extras)


def refinement(family: VectorFamily, delta_ij) -> BoundReport:
    """||sum x_i||^2 + 2 sum delta_ij <= (sum ||x_i||)^2 when 0 <= delta_ij <= gap."""
    _need_pairs(family, "REFINE_2_5")
    g = gram_summary(family)
    gaps = g.gaps()
    d = upper_matrix(delta_ij, g.n, "delta_ij")
    pairs = pair_indices(g.n)
    pp = np.array([g.norms[i] * g.norms[j] for i, j in pairs])
    upper = [gaps[i, j] - d[i, j] for i, j in pairs]
    lower = [d[i, j] for i, j in pairs]
    cert = _require(HypothesisCertificate(
        "schwarz-refinement", {"delta_ij": d},
        np.concatenate([_margins(lower, pp), _margins(upper, pp)])), "REFINE_2_5")
    S = g.norm_sum
    return BoundReport(T.REFINE_2_5, g.sum_norm_sq + 2.0 * _pair_sum(g, d), S * S, cert,
                       np.maximum(np.array(upper), 0.0))


def diameter_bound(family: VectorFamily, r: float | None = None) -> BoundReport:
    """(sum ||x_i||)^2 <= ||sum x_i||^2 + n(n-1)/2 r^2 when ||x_i - x_j|| <= r."""
    _need_pairs(family, "DIAM_2_7")
    X = family.vectors
    pairs = pair_indices(family.n)
    dist = np.array([norm(X[i] - X[j]) for i, j in pairs])
    if r is None:
        r = float(np.max(dist))
    r = _finite(r, "r")
    if r < 0.0:
        raise PreconditionError(f"r must be >= 0, got {r!r}")
    cert = _require(HypothesisCertificate(
        "pairwise-diameter", {"r": r}, _margins(r - dist, r + dist)), "DIAM_2_7")
    g = gram_summary(family)
    gaps = g.gaps()
    n = family.n
    S = g.norm_sum
    half = 0.5 * r * r
    residuals = np.array([abs(gaps[i, j] - half) for i, j in pairs])
    return BoundReport(T.DIAM_2_7, S * S, g.sum_norm_sq + n * (n - 1) / 2.0 * r * r,
                       cert, residuals)


# ---------------------------------------------------------- forward differences


def fdiff_norms(family: VectorFamily) -> np.ndarray:
    X = family.vectors
    return np.array([norm(X[k + 1] - X[k]) for k in range(family.n - 1)])


def _fdiff_report(tid, g: GramSummary, k_of, term: float, params: dict) -> BoundReport:
    # equality case: every gap equals its pairwise budget k_ij
    gaps = g.gaps()
    residuals = np.array([abs(k_of(i, j) - gaps[i, j]) for i, j in pair_indices(g.n)])
    cert = HypothesisCertificate("forward-differences", params)
    S = g.norm_sum
    return BoundReport(tid, S * S, g.sum_norm_sq + term, cert, residuals)


def fdiff_corrected(family: VectorFamily) -> BoundReport:
    """(sum ||x_i||)^2 <= ||sum x_i||^2 + n(n-1)/2 (sum ||Dx_k||)^2."""
    _need_pairs(family, "FDIFF_2_10")
    d = fdiff_norms(family)
    R = math.fsum(d)
    n = family.n
    return _fdiff_report(T.FDIFF_2_10, gram_summary(family), lambda i, j: 0.5 * R * R,
                         n * (n - 1) / 2.0 * R * R, {"sum_fdiff": R})


def fdiff_sup(family: VectorFamily) -> BoundReport:
    """... + n^2(n^2-1)/12 max ||Dx_k||^2."""
    _need_pairs(family, "FDIFF_SUP_2_12")
    d = fdiff_norms(family)
    D2 = float(np.max(d)) ** 2
    n = family.n
    s2, _ = comb_closed_form(n)
    return _fdiff_report(T.FDIFF_SUP_2_12, gram_summary(family),
                         lambda i, j: 0.5 * (j - i) ** 2 * D2, s2 * D2,
                         {"max_fdiff": float(np.max(d))})


def holder_terms(d: np.ndarray, n: int, exps: HolderExponents) -> tuple[float, float]:
    """(sum_{i<j} (j-i)^(2/q), (sum ||Dx_k||^p)^(2/p))."""
    e = 2.0 / exps.q
    coef = math.fsum(np.power(float(j - i), e) for i, j in pair_indices(n))
    P = float(np.power(math.fsum(np.power(d, exps.p)), 2.0 / exps.p))
    return coef, P


def fdiff_holder(family: VectorFamily, exps: HolderExponents | float = 2.0) -> BoundReport:
    """... + sum_{i<j} (j-i)^(2/q) (sum ||Dx_k||^p)^(2/p)."""
    _need_pairs(family, "FDIFF_HOLDER_2_15")
    if not isinstance(exps, HolderExponents):
        exps = HolderExponents(_finite(exps, "p"))
    d = fdiff_norms(family)
    coef, P = holder_terms(d, family.n, exps)
    e = 2.0 / exps.q
    return _fdiff_report(T.FDIFF_HOLDER_2_15, gram_summary(family),
                         lambda i, j: 0.5 * float(np.power(float(j - i), e)) * P, coef * P,
                         {"p": exps.p, "q": exps.q})


def fdiff_l2(family: VectorFamily) -> BoundReport:
    """... + n(n^2-1)/6 sum ||Dx_k||^2."""
    _need_pairs(family, "FDIFF_L2_2_16")
    d = fdiff_norms(family)
    Q = math.fsum(np.power(d, 2.0))
    _, s1 = comb_closed_form(family.n)
    return _fdiff_report(T.FDIFF_L2_2_16, gram_summary(family),
                         lambda i, j: 0.5 * (j - i) * Q, s1 * Q, {"sum_fdiff_sq": Q})


def forward_diff_bounds(family: VectorFamily, exps: HolderExponents | float = 2.0) -> list[BoundReport]:
    return [fdiff_corrected(family), fdiff_sup(family), fdiff_holder(family, exps), fdiff_l2(family)]


@dataclass(frozen=True)
class ErratumCheck:
    """Printed versus corrected forward-difference bound on one family."""

    lhs: float
    printed_rhs: float
    corrected_rhs: float

    @property
    def printed_holds(self) -> bool:
        return self.printed_rhs - self.lhs >= -tol(self.lhs)

    @property
    def corrected_holds(self) -> bool:
        return self.corrected_rhs - self.lhs >= -tol(self.lhs)


def fdiff_printed_erratum(family: VectorFamily) -> ErratumCheck:
    """Evaluate the unsquared printed term n(n-1)/2 sum ||Dx_k|| next to the corrected one.

    The printed form is false in general (e.g. {-2e, 2e}: 16 vs 4); it is
    exposed only here, for demonstration.
    """
    _need_pairs(family, "the forward-difference bound")
    g = gram_summary(family)
    R = math.fsum(fdiff_norms(family))
    n = family.n
    c = n * (n - 1) / 2.0
    S = g.norm_sum
    return ErratumCheck(S * S, g.sum_norm_sq + c * R, g.sum_norm_sq + c * R * R)


# ---------------------------------------------------------------- band bounds


def band_weight(sq_norms) -> float:
    """sum_{k=1}^{n-1} k ||y_{k+1}||^2 (equals sum_{i<j} ||y_j||^2)."""
    sq = np.asarray(sq_norms, dtype=float)
    return math.fsum(k * sq[k] for k in range(1, sq.shape[0]))


def band_pair_weight(sq_norms) -> float:
    sq = np.asarray(sq_norms, dtype=float)
    return math.fsum(sq[j] for _, j in pair_indices(sq.shape[0]))


def band_from_gram(g: GramSummary, m: float, M: float) -> BandParams:
    check_band(m, M)
    return BandParams(float(m), float(M), band_margins(g, m, M))


def _band_cert(band: BandParams, what: str) -> HypothesisCertificate:
    cert = HypothesisCertificate("band", {"m": band.m, "M": band.M}, band.margins)
    return _require(cert, what)


def band_additive_from_gram(g: GramSummary, band: BandParams) -> BoundReport:
    _need_pairs(g.n, "BAND_ADD_2_19")
    cert = _band_cert(band, "BAND_ADD_2_19")
    m, M = band.m, band.M
    c = (M - m) ** 2 / (M + m)
    sq = g.sq_norms
    gaps = g.gaps()
    residuals = np.array([abs(0.25 * c * sq[j] - gaps[i, j]) for i, j in pair_indices(g.n)])
    S = g.norm_sum
    return BoundReport(T.BAND_ADD_2_19, S * S, g.sum_norm_sq + 0.5 * c * band_weight(sq),
                       cert, residuals)


def band_multiplicative_from_gram(g: GramSummary, band: BandParams) -> list[BoundReport]:
    _need_pairs(g.n, "BAND_MULT_3_20")
    cert = _band_cert(band, "BAND_MULT_3_20")
    m, M = band.m, band.M
    root = math.sqrt(m * M)
    a = 2.0 * root / (M + m)
    b = (math.sqrt(M) - math.sqrt(m)) ** 2 / (M + m)
    S = g.norm_sum
    Q = math.fsum(g.sq_norms)
    inv = (M + m) / (2.0 * root)
    residuals = np.array([abs(g.norms[i] * g.norms[j] - inv * g.re_inner[i, j])
                          for i, j in pair_indices(g.n)])
    mult = BoundReport(T.BAND_MULT_3_20, a * S * S + b * Q, g.sum_norm_sq, cert, residuals)
    coarse = BoundReport(T.BAND_COARSE_3_11, math.sqrt(a) * S, g.sum_norm, cert)
    return [mult, coarse]


def band_bound_additive(family: VectorFamily, band: BandParams) -> BoundReport:
    return band_additive_from_gram(gram_summary(family), band)


def band_bound_multiplicative(family: VectorFamily, band: BandParams) -> list[BoundReport]:
    return band_multiplicative_from_gram(gram_summary(family), band)


# ---------------------------------------------------------------- ratio bounds


def ratio_bounds(family: VectorFamily, k: float | None = None) -> list[BoundReport]:
    """Bounds under ||x_i|| ||x_j|| <= k Re<x_i,x_j> (i < j), k >= 1."""
    _need_pairs(family, "RATIO_3_2")
    g = gram_summary(family)
    if k is None:
        k = ratio_from_gram(g).k
    k = _finite(k, "k")
    if k < 1.0:
        raise PreconditionError(f"k must be >= 1, got {k!r}")
    pairs = pair_indices(g.n)
    pp = np.array([g.norms[i] * g.norms[j] for i, j in pairs])
    re = np.array([g.re_inner[i, j] for i, j in pairs])
    cert = _require(HypothesisCertificate("ratio", {"k": k}, _margins(k * re - pp, pp)), "RATIO_3_2")
    n = g.n
    S = g.norm_sum
    Q = math.fsum(g.sq_norms)
    T2 = g.sum_norm_sq
    extras = {
        "centered_lhs": 2.0 * math.fsum(pp),
        "centered_rhs": 2.0 * k * math.fsum(re),
    }
    main = BoundReport(T.RATIO_3_2, S * S + (k - 1.0) * Q, k * T2, cert,
                       np.abs(k * re - pp), extras)
    root = math.sqrt(k)
    cbs = math.sqrt(n * k / (n + k - 1.0))
    if cbs > root * (1.0 + 1e-15):
        raise ConsistencyError(f"CBS coefficient {cbs!r} exceeds sqrt(k) = {root!r}")
    return [
        main,
        BoundReport(T.RATIO_SQRT_3_5, S, root * g.sum_norm, cert),
        BoundReport(T.RATIO_CBS_3_6, S, cbs * g.sum_norm, cert),
    ]


# ---------------------------------------------------------- normalized rho


def _rho_value(rho, what: str) -> float:
    rho = _finite(rho, "rho")
    if rho < 0.0 or rho >= 1.0 - tol(1.0):
        raise PreconditionError(f"{what}: rho must lie in [0, 1), got {rho!r}")
    return rho


def normalized_rho_bounds(family: VectorFamily, rho: float | None = None) -> list[BoundReport]:
    """Bounds under ||x_i - x_j/||x_j|| || <= rho (i < j), rho < 1.

    The unit-vector lower bound is appended only when every ||x_i|| = 1.
    """
    _need_pairs(family, "NRHO_3_9")
    dist = normalized_distances(family)
    if rho is None:
        rho = float(np.max(dist))
    rho = _rho_value(rho, "NRHO_3_9")
    notes = ("rho = 0 admitted by continuity",) if rho <= tol(1.0) else ()
    cert = _require(HypothesisCertificate(
        "normalized-ball", {"rho": rho}, _margins(rho - dist, 1.0 + dist), notes), "NRHO_3_9")
    g = gram_summary(family)
    c = math.sqrt(1.0 - rho * rho)
    n = g.n
    S = g.norm_sum
    Q = math.fsum(g.sq_norms)
    pairs = pair_indices(n)
    residuals = np.array([abs(g.norms[i] * g.norms[j] - g.re_inner[i, j] / c) for i, j in pairs])
    out = [BoundReport(T.NRHO_3_9, c * S * S + (1.0 - c) * Q, g.sum_norm_sq, cert, residuals)]
    if np.all(np.abs(g.norms - 1.0) <= tol(1.0)):
        out.append(_unit_lower(g, rho, family))
    out.append(BoundReport(T.NRHO_COARSE_3_16, math.sqrt(c) * S, g.sum_norm, cert))
    out.append(BoundReport(T.NRHO_CBS_3_17, S, math.sqrt(n / (n * c + 1.0 - c)) * g.sum_norm, cert))
    return out


def _unit_lower(g: GramSummary, rho: float, family: VectorFamily) -> BoundReport:
    X = family.vectors
    pairs = pair_indices(g.n)
    dist = np.array([norm(X[j] - X[i]) for i, j in pairs])
    unit = _margins(tol(1.0) - np.abs(g.norms - 1.0), 0.0)
    cert = _require(HypothesisCertificate(
        "unit-ball", {"rho": rho},
        np.concatenate([unit, _margins(rho - dist, 1.0 + dist)])), "UNIT_LOWER_3_15")
    c = math.sqrt(1.0 - rho * rho)
    n = g.n
    residuals = np.array([abs(g.re_inner[i, j] - c) for i, j in pairs])
    return BoundReport(T.UNIT_LOWER_3_15, math.sqrt(n + n * (n - 1) * c), g.sum_norm, cert, residuals)


def unit_lower_bound(family: VectorFamily, rho: float | None = None) -> BoundReport:
    _need_pairs(family, "UNIT_LOWER_3_15")
    g = gram_summary(family)
    if not np.all(np.abs(g.norms - 1.0) <= tol(1.0)):
        raise PreconditionError("UNIT_LOWER_3_15 needs every ||x_i|| = 1")
    if rho is None:
        X = family.vectors
        rho = max(norm(X[j] - X[i]) for i, j in pair_indices(family.n))
    return _unit_lower(g, _rho_value(rho, "UNIT_LOWER_3_15"), family)


# ---------------------------------------------------------------- eta bound


def eta_bound(family: VectorFamily, eta: float | None = None) -> BoundReport:
    """sum sqrt(||x_i||^2 - eta^2) <= ||sum x_i||^2 / sum ||x_i||.

    Requires ||x_j - x_i|| <= eta < ||x_j|| for all i, j; eta = 0 is
    admitted as the limiting case.
    """
    ep = detect_eta(family)
    if eta is None:
        eta = ep.eta_min
    eta = _finite(eta, "eta")
    if eta < 0.0:
        raise PreconditionError(f"eta must be >= 0, got {eta!r}")
    g = gram_summary(family)
    X = family.vectors
    n = g.n
    dist = [norm(X[j] - X[i]) for i in range(n) for j in range(n)]
    for j in range(n):
        # strict upper end: eta < ||x_j||
        if not g.norms[j] - eta > tol(g.norms[j]):
            raise PreconditionError(
                f"ETA_3_24: eta = {eta!r} is not below ||x_{j + 1}|| = {float(g.norms[j])!r}")
    margins = np.concatenate([
        _margins(np.array([eta - d for d in dist]), eta + np.array(dist)),
        g.norms - eta,
    ])
    cert = _require(HypothesisCertificate("eta", {"eta": eta}, margins), "ETA_3_24")
    roots = np.sqrt(np.maximum(g.sq_norms - eta * eta, 0.0))
    S = g.norm_sum
    residuals = np.array([abs(g.norms[i] * roots[j] - g.re_inner[i, j])
                          for i in range(n) for j in range(n)])
    return BoundReport(T.ETA_3_24, math.fsum(roots), g.sum_norm_sq / S, cert, residuals)


# ---------------------------------------------------------------- combinatorics


def comb_loop(n: int) -> tuple[int, int]:
    s2 = s1 = 0
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            s2 += (j - i) ** 2
            s1 += j - i
    return s2, s1


def comb_closed_form(n: int) -> tuple[int, int]:
    """(sum_{i<j} (j-i)^2, sum_{i<j} (j-i)) = (n^2(n^2-1)/12, n(n^2-1)/6)."""
    return n * n * (n * n - 1) // 12, n * (n * n - 1) // 6


def comb_identities(n: int) -> tuple[int, int]:
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise PreconditionError(f"comb identities need an integer n >= 2, got {n!r}")
    n = int(n)
    loop = comb_loop(n)
    closed = comb_closed_form(n)
    if loop != closed:
        raise ConsistencyError(f"comb identities disagree at n={n}: loop {loop}, closed {closed}")
    return closed


# ---------------------------------------------------------------- dispatch


def evaluate(tid, family: VectorFamily, **params) -> BoundReport:
    """Evaluate one theorem, detecting any parameter that is not supplied.

    Recognised keyword parameters: a, r, rho, k_list, r_list, k_ij,
    delta_ij, p, m, M, k, eta (each only where meaningful).
    """
    tid = TheoremId(tid)
    a = params.get("a")
    if tid is T.DM_1_2:
        return diaz_metcalf(family, a, params.get("r"))
    if tid is T.RHO_1_5:
        return rho_bound(family, a, params.get("rho"))
    if tid is T.ADD_1_8:
        return additive_k(family, a, params.get("k_list"))
    if tid is T.ADD_1_12:
        return additive_r(family, a, params.get("r_list"))
    if tid is T.QUAD_2_2:
        return quadratic_gap_bound(family, params.get("k_ij"))
    if tid is T.REFINE_2_5:
        if params.get("delta_ij") is None:
            raise PreconditionError("REFINE_2_5 needs user-supplied delta_ij")
        return refinement(family, params["delta_ij"])
    if tid is T.DIAM_2_7:
        return diameter_bound(family, params.get("r"))
    if tid is T.FDIFF_2_10:
        return fdiff_corrected(family)
    if tid is T.FDIFF_SUP_2_12:
        return fdiff_sup(family)
    if tid is T.FDIFF_HOLDER_2_15:
        return fdiff_holder(family, params.get("p", 2.0))
    if tid is T.FDIFF_L2_2_16:
        return fdiff_l2(family)
    if tid in (T.BAND_ADD_2_19, T.BAND_MULT_3_20, T.BAND_COARSE_3_11):
        _need_pairs(family, str(tid))
        m, M = params.get("m"), params.get("M")
        if m is None or M is None:
            found = search_band(family)
            if found is None:
                raise PreconditionError(f"{tid}: no feasible band (m, M) found")
            m, M = found.m, found.M
        band = verify_band(family, _finite(m, "m"), _finite(M, "M"))
        if tid is T.BAND_ADD_2_19:
            return band_bound_additive(family, band)
        mult, coarse = band_bound_multiplicative(family, band)
        return mult if tid is T.BAND_MULT_3_20 else coarse
    if tid in (T.RATIO_3_2, T.RATIO_SQRT_3_5, T.RATIO_CBS_3_6):
        return _pick(ratio_bounds(family, params.get("k")), tid)
    if tid is T.UNIT_LOWER_3_15:
        return unit_lower_bound(family, params.get("rho"))
    if tid in (T.NRHO_3_9, T.NRHO_COARSE_3_16, T.NRHO_CBS_3_17):
        return _pick(normalized_rho_bounds(family, params.get("rho")), tid)
    if tid is T.ETA_3_24:
        return eta_bound(family, params.get("eta"))
    raise InvalidInputError(f"unknown theorem id {tid!r}")  # pragma: no cover


def _pick(reports, tid):
    for rep in reports:
        if rep.theorem_id is tid:
            return rep
    raise PreconditionError(f"{tid} not applicable")  # pragma: no cover


@dataclass(frozen=True)
class Inapplicable:
    theorem_id: TheoremId
    reason: str


@dataclass(frozen=True, eq=False)
class Ranking:
    """All evaluated bounds, ranked by slack within each league."""

    quadratic: tuple
    linear: tuple
    inapplicable: tuple

    @property
    def best(self) -> BoundReport | None:
        return self.quadratic[0] if self.quadratic else (self.linear[0] if self.linear else None)

    def report(self, tid) -> BoundReport | None:
        tid = TheoremId(tid)
        for rep in self.quadratic + self.linear:
            if rep.theorem_id is tid:
                return rep
        return None

    def reason(self, tid) -> str | None:
        tid = TheoremId(tid)
        for item in self.inapplicable:
            if item.theorem_id is tid:
                return item.reason
        return None


def tightest(family: VectorFamily, axis=None, params: dict | None = None) -> Ranking:
    """Detect every hypothesis, evaluate every applicable bound and rank them.

    ``params`` may carry user values (m, M, k, rho, eta, p, k_ij, delta_ij);
    a user value that violates its hypothesis raises PreconditionError.
    Detected parameters that are infeasible make the bound inapplicable.
    """
    params = dict(params or {})
    user = {k for k, v in params.items() if v is not None}
    reports: list[BoundReport] = []
    skipped: list[Inapplicable] = []

    def attempt(tids, fn, user_keys=()):
        try:
            out = fn()
        except PreconditionError as exc:
            if any(k in user for k in user_keys):
                raise
            for t in tids:
                skipped.append(Inapplicable(t, str(exc)))
            return
        out = out if isinstance(out, list) else [out]
        got = {r.theorem_id for r in out}
        reports.extend(out)
        for t in tids:
            if t not in got:
                skipped.append(Inapplicable(t, "precondition not met"))

    # axis-based bounds
    try:
        a = default_axis(family) if axis is None else np.asarray(axis)
        if axis is not None:
            check_unit(family.check_same_space(a))
    except PreconditionError as exc:
        if axis is not None:
            raise
        for t in AXIS_IDS:
            skipped.append(Inapplicable(t, str(exc)))
        a = None
    if a is not None:
        attempt([T.DM_1_2], lambda: diaz_metcalf(family, a))
        ap = detect_axis(family, a, require_r=False)
        if ap.rho_feasible:
            attempt([T.RHO_1_5], lambda: rho_bound(family, a, ap.rho))
        else:
            skipped.append(Inapplicable(T.RHO_1_5, f"axis radius rho = {ap.rho!r} is not below 1"))
        attempt([T.ADD_1_8], lambda: additive_k(family, a, ap.k_list))
        attempt([T.ADD_1_12], lambda: additive_r(family, a, ap.r_list))

    if family.n < 2:
        for t in sorted(PAIRWISE, key=lambda x: x.value):
            skipped.append(Inapplicable(t, "vacuous: needs at least two vectors"))
    else:
        attempt([T.QUAD_2_2], lambda: quadratic_gap_bound(family, params.get("k_ij")), ["k_ij"])
        if params.get("delta_ij") is not None:
            attempt([T.REFINE_2_5], lambda: refinement(family, params["delta_ij"]), ["delta_ij"])
        else:
            skipped.append(Inapplicable(T.REFINE_2_5, "needs user-supplied delta_ij"))
        attempt([T.DIAM_2_7], lambda: diameter_bound(family))
        p = params.get("p", 2.0)
        attempt(list(FDIFF_IDS), lambda: forward_diff_bounds(family, p), ["p"])

        band_ids = [T.BAND_ADD_2_19, T.BAND_MULT_3_20, T.BAND_COARSE_3_11]

        def band_reports():
            m, M = params.get("m"), params.get("M")
            if m is None or M is None:
                found = search_band(family)
                if found is None:
                    raise PreconditionError("no feasible band (m, M) found by grid search")
                m, M = found.m, found.M
            band = verify_band(family, m, M)
            return [band_bound_additive(family, band)] + band_bound_multiplicative(family, band)

        attempt(band_ids, band_reports, ["m", "M"])
        attempt([T.RATIO_3_2, T.RATIO_SQRT_3_5, T.RATIO_CBS_3_6],
                lambda: ratio_bounds(family, params.get("k")), ["k"])

        def nrho_reports():
            rho = params.get("rho")
            if rho is None:
                detected = detect_normalized_rho(family)
                if not detected.feasible:
                    raise PreconditionError(f"normalized rho = {detected.rho!r} is not below 1")
            return normalized_rho_bounds(family, rho)

        nrho_ids = [T.NRHO_3_9, T.NRHO_COARSE_3_16, T.NRHO_CBS_3_17]
        attempt(nrho_ids, nrho_reports, ["rho"])
        if not any(r.theorem_id is T.UNIT_LOWER_3_15 for r in reports):
            if all(s.theorem_id is not T.UNIT_LOWER_3_15 for s in skipped):
                reason = "needs every ||x_i|| = 1"
                if not any(r.theorem_id is T.NRHO_3_9 for r in reports):
                    reason = "normalized rho condition not met"
                skipped.append(Inapplicable(T.UNIT_LOWER_3_15, reason))

    def eta_report():
        eta = params.get("eta")
        if eta is None:
            ep = detect_eta(family)
            if not ep.feasible:
                raise PreconditionError(
                    f"eta interval empty: eta_min = {ep.eta_min!r} >= eta_max = {ep.eta_max!r}")
        return eta_bound(family, eta)

    attempt([T.ETA_3_24], eta_report, ["eta"])

    def key(r):
        return (r.slack, r.theorem_id.value)

    quad = tuple(sorted((r for r in reports if r.league == "quadratic"), key=key))
    lin = tuple(sorted((r for r in reports if r.league == "linear"), key=key))
    skipped.sort(key=lambda s: s.theorem_id.value)
    return Ranking(quad, lin, tuple(skipped))
