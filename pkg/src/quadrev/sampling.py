"""Random family generators used by the property and soundness suites.

Each generator takes a numpy Generator so runs are reproducible. Kinds that
target a hypothesis (clustered, collinear, unit_clustered, near_unit, axis)
make that hypothesis feasible most of the time, by construction.
"""
from __future__ import annotations

import numpy as np

from .core import VectorFamily

KINDS = ("generic", "clustered", "collinear", "unit_clustered", "near_unit", "axis")


def _draw(rng: np.random.Generator, shape, field: str) -> np.ndarray:
    if field == "complex":
        return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return rng.standard_normal(shape)


def _unit(rng, d: int, field: str) -> np.ndarray:
    v = _draw(rng, d, field)
    return v / np.linalg.norm(v)


def generic(rng, n: int, d: int, field: str = "real", scale: float = 10.0) -> VectorFamily:
    """Components uniform in [-scale, scale] (real and imaginary parts alike)."""
    X = rng.uniform(-scale, scale, (n, d))
    if field == "complex":
        X = X + 1j * rng.uniform(-scale, scale, (n, d))
    return VectorFamily(X, field)


def clustered(rng, n: int, d: int, field: str = "real", spread: float = 0.2) -> VectorFamily:
    """Vectors near a common direction with varied lengths."""
    e = _unit(rng, d, field)
    lengths = rng.uniform(0.5, 2.0, n)
    noise = _draw(rng, (n, d), field) * spread / np.sqrt(max(d, 1))
    X = lengths[:, None] * (e[None, :] + noise)
    return VectorFamily(X, field)


def collinear(rng, n: int, d: int, field: str = "real") -> VectorFamily:
    """Positively collinear x_i = t_i e with t_i > 0."""
    e = _unit(rng, d, field)
    t = rng.uniform(0.2, 5.0, n)
    return VectorFamily(t[:, None] * e[None, :], field)


def unit_clustered(rng, n: int, d: int, field: str = "real", spread: float = 0.3) -> VectorFamily:
    """Unit vectors near a common direction."""
    e = _unit(rng, d, field)
    X = e[None, :] + _draw(rng, (n, d), field) * spread / np.sqrt(max(d, 1))
    X = X / np.linalg.norm(X, axis=1)[:, None]
    return VectorFamily(X, field)


def near_unit(rng, n: int, d: int, field: str = "real", spread: float = 0.15) -> VectorFamily:
    """Vectors of norm close to 1 near a common direction."""
    fam = unit_clustered(rng, n, d, field, spread)
    lengths = rng.uniform(1.0 - spread, 1.0 + spread, n)
    return VectorFamily(fam.vectors * lengths[:, None], field)


def axis(rng, n: int, d: int, field: str = "real", radius: float = 0.8):
    """(family, a): vectors inside the ball B(a, radius) around a unit axis a."""
    a = _unit(rng, d, field)
    X = np.empty((n, d), dtype=complex if field == "complex" else float)
    for i in range(n):
        v = _draw(rng, d, field)
        v = v / np.linalg.norm(v) * radius * rng.uniform() ** (1.0 / d)
        X[i] = a + v
    return VectorFamily(X, field), a


def random_family(rng, kind: str, n: int, d: int, field: str = "real") -> VectorFamily:
    if kind == "generic":
        return generic(rng, n, d, field)
    if kind == "clustered":
        return clustered(rng, n, d, field)
    if kind == "collinear":
        return collinear(rng, n, d, field)
    if kind == "unit_clustered":
        return unit_clustered(rng, n, d, field)
    if kind == "near_unit":
        return near_unit(rng, n, d, field)
    if kind == "axis":
        return axis(rng, n, d, field)[0]
    raise ValueError(f"unknown family kind {kind!r}")
