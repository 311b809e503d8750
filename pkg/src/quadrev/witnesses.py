"""Equality-case families, canonical sharpness configurations, defect search.

The sharpness search maximises defect / coefficient-functional for the four
forward-difference bounds; the best-possible constants are where that ratio
tops out.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .bounds import (
    FDIFF_IDS,
    HolderExponents,
    TheoremId,
    comb_closed_form,
    has_equality,
    holder_terms,
)
from .core import VectorFamily, gram_summary
from .errors import InvalidInputError, NoEqualityFamily

T = TheoremId

TARGETS = {
    T.FDIFF_2_10: 0.5,
    T.FDIFF_SUP_2_12: 1.0 / 12.0,
    T.FDIFF_HOLDER_2_15: 1.0,
    T.FDIFF_L2_2_16: 1.0 / 6.0,
}

# ratio scores below this fraction of (sum ||x_i||)^2 in the denominator are 0
DEGENERATE = 1e-8


@dataclass(frozen=True, eq=False)
class SharpnessWitness:
    theorem_id: TheoremId
    family: VectorFamily
    extracted_constant: float
    target_constant: float
    restart: int = 0
    evaluations: int = 0

    @property
    def residual(self) -> float:
        return abs(self.extracted_constant - self.target_constant)


@dataclass(frozen=True)
class SearchConfig:
    seed: int = 0
    restarts: int = 50
    steps: int = 400
    step_size: float = 0.5
    n: int = 2
    d: int = 2
    seed_canonical: bool = False
    workers: int = 1
    decay: float = 0.99

    def __post_init__(self):
        if self.restarts < 1 or self.steps < 0:
            raise InvalidInputError("restarts must be >= 1 and steps >= 0")
        if self.n < 2 or self.d < 1:
            raise InvalidInputError("the search needs n >= 2 and d >= 1")
        if not self.step_size > 0.0:
            raise InvalidInputError("step_size must be positive")


def _supported(tid) -> TheoremId:
    try:
        tid = TheoremId(tid)
    except ValueError:
        raise InvalidInputError(f"unknown theorem id {tid!r}") from None
    if tid not in TARGETS:
        raise InvalidInputError(f"{tid} has no sharp constant to confirm")
    return tid


def stable_defect(X: np.ndarray) -> float:
    """(sum ||x_i||)^2 - ||sum x_i||^2 as 2 sum_{i<j} ||s_j x_i - s_i x_j||^2 / (2 s_i s_j).

    Free of the cancellation in the direct difference; zero vectors contribute 0.
    """
    s = np.sqrt(np.sum(np.abs(X) ** 2, axis=1))
    total = 0.0
    n = X.shape[0]
    for i in range(n):
        for j in range(i + 1, n):
            if s[i] == 0.0 or s[j] == 0.0:
                continue
            v = s[j] * X[i] - s[i] * X[j]
            total += float(np.sum(np.abs(v) ** 2)) / (s[i] * s[j])
    return total


def coefficient_functional(tid: TheoremId, X: np.ndarray, p: float = 2.0) -> float:
    """The bound's extra term with its leading constant removed."""
    n = X.shape[0]
    d = np.sqrt(np.sum(np.abs(np.diff(X, axis=0)) ** 2, axis=1))
    if tid is T.FDIFF_2_10:
        R = math.fsum(d)
        return n * (n - 1) * R * R
    if tid is T.FDIFF_SUP_2_12:
        return n * n * (n * n - 1) * float(np.max(d)) ** 2
    if tid is T.FDIFF_HOLDER_2_15:
        coef, P = holder_terms(d, n, HolderExponents(p))
        return coef * P
    if tid is T.FDIFF_L2_2_16:
        _, s1 = comb_closed_form(n)
        return 6 * s1 * math.fsum(np.power(d, 2.0))
    raise InvalidInputError(f"{tid} has no coefficient functional")  # pragma: no cover


def defect_ratio(tid, X, p: float = 2.0) -> float:
    """Defect divided by the coefficient functional; degenerate families score 0."""
    tid = _supported(tid)
    X = np.asarray(X)
    denom = coefficient_functional(tid, X, p)
    S = float(np.sum(np.sqrt(np.sum(np.abs(X) ** 2, axis=1))))
    if not denom > DEGENERATE * S * S:
        return 0.0
    return stable_defect(X) / denom


def canonical_family(d: int = 1) -> VectorFamily:
    """{-e/2, e/2} for a unit e along the first axis."""
    X = np.zeros((2, d))
    X[0, 0], X[1, 0] = -0.5, 0.5
    return VectorFamily(X)


def canonical_config(tid, p: float = 2.0) -> SharpnessWitness:
    tid = _supported(tid)
    fam = canonical_family(1)
    return SharpnessWitness(tid, fam, defect_ratio(tid, fam.vectors, p), TARGETS[tid])


def _climb(tid, cfg: SearchConfig, p: float, restart: int):
    rng = np.random.default_rng([cfg.seed, restart])
    if cfg.seed_canonical and restart == 0:
        X = np.zeros((cfg.n, cfg.d))
        X[:2] = canonical_family(cfg.d).vectors
        if cfg.n > 2:
            # extend along the same line with unit spacing
            X[2:, 0] = 0.5 + np.arange(1, cfg.n - 1)
    else:
        X = rng.standard_normal((cfg.n, cfg.d))
    best = defect_ratio(tid, X, p)
    evals = 1
    step = cfg.step_size
    for _ in range(cfg.steps):
        scale = max(float(np.max(np.abs(X))), 1e-12)
        i = int(rng.integers(cfg.n))
        k = int(rng.integers(cfg.d))
        Y = X.copy()
        Y[i, k] += step * scale * rng.standard_normal()
        val = defect_ratio(tid, Y, p)
        evals += 1
        if val > best:
            X, best = Y, val
        step *= cfg.decay
    return best, X, evals


def maximize_defect_ratio(tid, cfg: SearchConfig | None = None, p: float = 2.0) -> SharpnessWitness:
    """Random-restart hill climbing on the defect ratio.

    Each restart draws from its own generator seeded by (seed, restart), so
    results do not depend on the number of worker threads. Ties keep the
    lowest restart index.
    """
    tid = _supported(tid)
    cfg = cfg or SearchConfig()
    HolderExponents(p)
    idx = range(cfg.restarts)
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(lambda r: _climb(tid, cfg, p, r), idx))
    else:
        results = [_climb(tid, cfg, p, r) for r in idx]
    best_r = 0
    for r, (val, _, _) in enumerate(results):
        if val > results[best_r][0]:
            best_r = r
    val, X, _ = results[best_r]
    total = sum(e for _, _, e in results)
    return SharpnessWitness(tid, VectorFamily(np.array(X)), val, TARGETS[tid], best_r, total)


# ---------------------------------------------------------------- equality families


def equiangular(n: int, c: float) -> np.ndarray:
    """n unit vectors in R^n with pairwise inner product c, c >= -1/(n-1)."""
    if n == 1:
        return np.array([[1.0]])
    if c < -1.0 / (n - 1) - 1e-15 or c > 1.0:
        raise NoEqualityFamily(f"no {n} unit vectors have pairwise inner product {c!r}")
    a = math.sqrt(max(1.0 - c, 0.0))
    b = -a / math.sqrt(n) + math.sqrt(max(a * a / n + c, 0.0))
    w = np.full(n, 1.0 / math.sqrt(n))
    return a * np.eye(n) + b * w[None, :]


def _cone(n: int, cos_phi: float) -> np.ndarray:
    """n unit vectors at angle phi from e_1, spread evenly around it (d = 3)."""
    sin_phi = math.sqrt(max(1.0 - cos_phi * cos_phi, 0.0))
    th = 2.0 * np.pi * np.arange(n) / n
    return np.column_stack([np.full(n, cos_phi), sin_phi * np.cos(th), sin_phi * np.sin(th)])


def _int(params, key, default, lo=1):
    v = params.get(key, default)
    if int(v) != v or v < lo:
        raise NoEqualityFamily(f"{key} must be an integer >= {lo}, got {v!r}")
    return int(v)


def _e1(d: int) -> np.ndarray:
    a = np.zeros(d)
    a[0] = 1.0
    return a


_QUAD_BASE = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])


def equality_family(tid, params: dict | None = None) -> VectorFamily:
    """A family attaining the bound `tid` with the given parameters.

    Raises NoEqualityFamily when no construction is known (or none exists).
    """
    tid = TheoremId(tid)
    params = dict(params or {})
    if not has_equality(tid):
        raise NoEqualityFamily(f"{tid} has no stated equality case")

    if tid is T.DM_1_2:
        r = float(params.get("r", 1.0))
        n = _int(params, "n", 2)
        if not 0.0 <= r <= 1.0:
            raise NoEqualityFamily(f"r must lie in [0, 1], got {r!r}")
        if r == 1.0:
            return VectorFamily(np.arange(1.0, n + 1.0)[:, None] * _e1(3)[None, :])
        if n < 2:
            raise NoEqualityFamily("r < 1 needs n >= 2")
        return VectorFamily(_cone(n, r))

    if tid is T.RHO_1_5:
        rho = float(params.get("rho", 0.5))
        n = _int(params, "n", 2)
        if not 0.0 <= rho < 1.0:
            raise NoEqualityFamily(f"rho must lie in [0, 1), got {rho!r}")
        if rho > 0.0 and n < 2:
            raise NoEqualityFamily("rho > 0 needs n >= 2")
        c = math.sqrt(1.0 - rho * rho)
        # tangent points of the cone from the origin to the ball B(a, rho)
        return VectorFamily(c * _cone(n, c))

    if tid in (T.ADD_1_8, T.ADD_1_12):
        phi = float(params.get("phi", math.pi / 3.0))
        n = _int(params, "n", 2)
        if not 0.0 <= phi <= math.pi / 2.0:
            raise NoEqualityFamily(f"phi must lie in [0, pi/2], got {phi!r}")
        if phi > 0.0 and n < 2:
            raise NoEqualityFamily("phi > 0 needs n >= 2")
        return VectorFamily(_cone(n, math.cos(phi)))

    if tid in (T.QUAD_2_2, T.REFINE_2_5):
        return VectorFamily(np.array(params.get("vectors", _QUAD_BASE), dtype=float))

    if tid is T.DIAM_2_7:
        r = float(params.get("r", 1.0))
        n = _int(params, "n", 2, lo=2)
        if r < 0.0:
            raise NoEqualityFamily(f"r must be >= 0, got {r!r}")
        if n == 2:
            return VectorFamily(np.array([[-0.5 * r], [0.5 * r]]))
        # regular simplex centred at 0 with edge r
        s = r * math.sqrt((n - 1) / (2.0 * n))
        return VectorFamily(s * equiangular(n, -1.0 / (n - 1)))

    if tid in FDIFF_IDS:
        n = _int(params, "n", 2, lo=2)
        if n != 2:
            raise NoEqualityFamily(f"{tid}: equality families are known only for n = 2")
        t = float(params.get("t", 0.5))
        return VectorFamily(np.array([[-t], [t]]))

    if tid is T.BAND_ADD_2_19:
        m, M, n = _band_params(params)
        if n == 2:
            s1 = 0.5 * (M + m)
            c = 0.5 + 2.0 * m * M / (M + m) ** 2
            return VectorFamily(np.array([[s1 * c, s1 * math.sqrt(max(1.0 - c * c, 0.0))],
                                          [1.0, 0.0]]))
        if abs(M + m - 2.0) > 1e-12:
            raise NoEqualityFamily(f"{tid}: n >= 3 needs m + M = 2")
        return VectorFamily(equiangular(n, 0.5 * (1.0 + m * M)))

    if tid is T.BAND_MULT_3_20:
        m, M, n = _band_params(params)
        c = 2.0 * math.sqrt(m * M) / (M + m)
        if n == 2:
            r = math.sqrt(m * M)
            return VectorFamily(np.array([[r * c, r * math.sqrt(max(1.0 - c * c, 0.0))],
                                          [1.0, 0.0]]))
        if abs(m * M - 1.0) > 1e-12:
            raise NoEqualityFamily(f"{tid}: n >= 3 needs m M = 1")
        return VectorFamily(equiangular(n, c))

    if tid is T.RATIO_3_2:
        k = float(params.get("k", 2.0))
        n = _int(params, "n", 3, lo=2)
        if k < 1.0:
            raise NoEqualityFamily(f"k must be >= 1, got {k!r}")
        return VectorFamily(equiangular(n, 1.0 / k))

    if tid is T.NRHO_3_9:
        rho = float(params.get("rho", 0.6))
        n = _int(params, "n", 3, lo=2)
        if not 0.0 <= rho < 1.0:
            raise NoEqualityFamily(f"rho must lie in [0, 1), got {rho!r}")
        c = math.sqrt(1.0 - rho * rho)
        X = equiangular(n, c)
        # x_i with i < n must have norm c; the last vector only appears second
        X[:-1] *= c
        return VectorFamily(X)

    if tid is T.UNIT_LOWER_3_15:
        rho = float(params.get("rho", 0.0))
        n = _int(params, "n", 3, lo=2)
        if rho != 0.0:
            # unit vectors with ||x_i - x_j|| <= rho have Re<x_i,x_j> >= 1 - rho^2/2 > sqrt(1 - rho^2)
            raise NoEqualityFamily(f"{tid}: equality is unattainable for rho > 0")
        return VectorFamily(np.tile(_e1(2), (n, 1)))

    if tid is T.ETA_3_24:
        eta = float(params.get("eta", 0.0))
        n = _int(params, "n", 2)
        if eta != 0.0:
            # the i = j terms force ||x_i||^2 = ||x_i|| sqrt(||x_i||^2 - eta^2)
            raise NoEqualityFamily(f"{tid}: equality needs eta = 0")
        return VectorFamily(np.tile(_e1(2), (n, 1)))

    raise NoEqualityFamily(f"no equality construction for {tid}")  # pragma: no cover


def _band_params(params):
    m = float(params.get("m", 0.5))
    M = float(params.get("M", 1.5))
    n = _int(params, "n", 2, lo=2)
    if not 0.0 < m <= M:
        raise NoEqualityFamily(f"band needs 0 < m <= M, got m={m!r}, M={M!r}")
    return m, M, n


def equality_params(tid, params: dict | None, family: VectorFamily) -> dict:
    """Keyword parameters for ``bounds.evaluate`` matching ``equality_family``."""
    tid = TheoremId(tid)
    params = dict(params or {})
    if tid is T.DM_1_2:
        return {"a": _e1(family.d), "r": float(params.get("r", 1.0))}
    if tid is T.RHO_1_5:
        return {"a": _e1(family.d), "rho": float(params.get("rho", 0.5))}
    if tid in (T.ADD_1_8, T.ADD_1_12):
        a = _e1(family.d)
        X = family.vectors
        if tid is T.ADD_1_8:
            k = np.array([np.linalg.norm(x) - float(np.real(x @ a)) for x in X])
            return {"a": a, "k_list": np.maximum(k, 0.0)}
        return {"a": a, "r_list": np.array([np.linalg.norm(x - a) for x in X])}
    if tid in (T.QUAD_2_2, T.REFINE_2_5):
        gaps = gram_summary(family).gaps()
        return {"k_ij": gaps} if tid is T.QUAD_2_2 else {"delta_ij": gaps}
    if tid is T.DIAM_2_7:
        return {"r": float(params.get("r", 1.0))}
    if tid is T.FDIFF_HOLDER_2_15:
        return {"p": float(params.get("p", 2.0))}
    if tid in FDIFF_IDS:
        return {}
    if tid in (T.BAND_ADD_2_19, T.BAND_MULT_3_20):
        m, M, _ = _band_params(params)
        return {"m": m, "M": M}
    if tid is T.RATIO_3_2:
        return {"k": float(params.get("k", 2.0))}
    if tid is T.NRHO_3_9:
        return {"rho": float(params.get("rho", 0.6))}
    if tid is T.UNIT_LOWER_3_15:
        return {"rho": float(params.get("rho", 0.0))}
    if tid is T.ETA_3_24:
        return {"eta": float(params.get("eta", 0.0))}
    raise NoEqualityFamily(f"{tid} has no stated equality case")


def degenerate_equality(tid, params: dict | None = None) -> bool:
    """True when the hypothesis admits only equality configurations.

    Then no feasible perturbation can break equality (k = 1, rho = 0, eta = 0,
    r = 1 for the Diaz-Metcalf ratio).
    """
    tid = TheoremId(tid)
    params = dict(params or {})
    if tid is T.DM_1_2:
        return float(params.get("r", 1.0)) == 1.0
    if tid is T.RATIO_3_2:
        return float(params.get("k", 2.0)) == 1.0
    if tid is T.NRHO_3_9:
        return float(params.get("rho", 0.6)) == 0.0
    if tid is T.RHO_1_5:
        return float(params.get("rho", 0.5)) == 0.0
    if tid is T.UNIT_LOWER_3_15:
        return True
    if tid is T.ETA_3_24:
        return True
    if tid in (T.BAND_ADD_2_19, T.BAND_MULT_3_20):
        m, M, _ = _band_params(params)
        return m == M
    return False


def check_supported(tid) -> TheoremId:
    """Validate a theorem id for the sharpness search (InvalidInputError otherwise)."""
    return _supported(tid)


__all__ = [
    "SharpnessWitness", "SearchConfig", "TARGETS", "canonical_config", "canonical_family",
    "defect_ratio", "stable_defect", "coefficient_functional", "maximize_defect_ratio",
    "equality_family", "equality_params", "degenerate_equality", "equiangular",
    "check_supported",
]
