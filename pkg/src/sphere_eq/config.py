"""Point configurations on the unit sphere S^{m-1}, pairwise potentials and energies.

Energies are always evaluated in the inner-product variable ``t = p_i . p_j``;
a potential given as a function ``f(r)`` of the chord length is converted once
through ``r^2 = 2 - 2t``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DegeneratePair, InvalidConfiguration, InvalidParameter

UNIT_TOL = 1e-12
RENORM_TOL = 1e-9
COINCIDE_TOL = 1e-12


@dataclass(frozen=True)
class Configuration:
    """``n`` unit vectors in R^m, stored as the rows of an ``(n, m)`` array.

    Rows whose norm deviates from 1 by at most ``1e-9`` are renormalized on
    construction; anything worse raises :class:`InvalidConfiguration`.
    """

    points: np.ndarray

    def __post_init__(self):
        X = np.array(self.points, dtype=float, copy=True)
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise InvalidConfiguration(f"expected an (n, m) array with n, m >= 1, got shape {X.shape}")
        if not np.all(np.isfinite(X)):
            raise InvalidConfiguration("non-finite coordinates")
        norms = np.linalg.norm(X, axis=1)
        bad = np.abs(norms - 1.0) > RENORM_TOL
        if np.any(bad):
            i = int(np.flatnonzero(bad)[0])
            raise InvalidConfiguration(f"row {i} has norm {float(norms[i])!r}, off by more than {RENORM_TOL}")
        X /= norms[:, None]
        X.setflags(write=False)
        object.__setattr__(self, "points", X)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def m(self) -> int:
        return self.points.shape[1]

    def rotated(self, U) -> "Configuration":
        """Configuration with every point mapped by ``p -> p @ U`` (``U`` orthogonal)."""
        return Configuration(self.points @ np.asarray(U, dtype=float))

    def to_json(self) -> str:
        return json.dumps(
            {"n": self.n, "m": self.m, "points": [[float(v) for v in row] for row in self.points]},
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "Configuration":
        try:
            doc = json.loads(text)
            n, m, pts = int(doc["n"]), int(doc["m"]), doc["points"]
        except (ValueError, KeyError, TypeError) as exc:
            raise InvalidConfiguration(f"malformed configuration document: {exc}") from exc
        X = np.array(pts, dtype=float)
        if X.shape != (n, m):
            raise InvalidConfiguration(f"declared shape ({n}, {m}) but points have shape {X.shape}")
        return cls(X)


def read_config(path) -> Configuration:
    return Configuration.from_json(Path(path).read_text())


def write_config(config: Configuration, path) -> None:
    Path(path).write_text(config.to_json() + "\n")


# ---------------------------------------------------------------------------
# Potentials


@dataclass(frozen=True)
class BiquadraticShift:
    """``h(t) = (t + a)^2``; the biquadratic potential up to constants."""

    a: float = 1.0
    singular_at_one: bool = field(default=False, init=False)

    def __post_init__(self):
        if not self.a >= 1.0:
            raise InvalidParameter(f"BiquadraticShift needs a >= 1, got {self.a}")

    def h(self, t):
        return (t + self.a) ** 2

    def dh(self, t):
        return 2.0 * (t + self.a)


@dataclass(frozen=True)
class Linear:
    """``h(t) = t``. Its energy only depends on the centroid."""

    singular_at_one: bool = field(default=False, init=False)

    def h(self, t):
        return np.asarray(t) * 1.0

    def dh(self, t):
        return np.ones_like(np.asarray(t))


@dataclass(frozen=True)
class Log:
    """``f(r) = -log r``, i.e. ``h(t) = -log(2 - 2t) / 2``."""

    singular_at_one: bool = field(default=True, init=False)

    def h(self, t):
        return -0.5 * np.log(2.0 - 2.0 * np.asarray(t))

    def dh(self, t):
        return 1.0 / (2.0 - 2.0 * np.asarray(t))


@dataclass(frozen=True)
class InversePower:
    """``f(r) = r^{-a}``, a > 0."""

    a: float = 1.0
    singular_at_one: bool = field(default=True, init=False)

    def __post_init__(self):
        if not self.a > 0:
            raise InvalidParameter(f"InversePower needs a > 0, got {self.a}")

    def h(self, t):
        return (2.0 - 2.0 * np.asarray(t)) ** (-self.a / 2)

    def dh(self, t):
        return self.a * (2.0 - 2.0 * np.asarray(t)) ** (-self.a / 2 - 1)


@dataclass(frozen=True)
class NegativePower:
    """``f(r) = -r^a``, 0 < a <= 2. Only ``a = 2`` has a finite derivative at t = 1."""

    a: float = 1.0

    def __post_init__(self):
        if not 0 < self.a <= 2:
            raise InvalidParameter(f"NegativePower needs 0 < a <= 2, got {self.a}")

    @property
    def singular_at_one(self) -> bool:
        return self.a < 2

    def h(self, t):
        return -((2.0 - 2.0 * np.asarray(t)) ** (self.a / 2))

    def dh(self, t):
        s = np.maximum(2.0 - 2.0 * np.asarray(t), 0.0)
        return self.a * s ** (self.a / 2 - 1)


BIQUADRATIC = BiquadraticShift(1.0)


# ---------------------------------------------------------------------------
# Gram data and energy


def gram(config: Configuration) -> np.ndarray:
    """Matrix of pairwise inner products ``b_ij = p_i . p_j`` (diagonal forced to 1)."""
    X = config.points
    B = X @ X.T
    B = 0.5 * (B + B.T)
    np.fill_diagonal(B, 1.0)
    return B


def inner_products(config: Configuration) -> np.ndarray:
    """Off-diagonal Gram entries ``b_ij`` for ``i < j`` in row-major pair order."""
    iu = np.triu_indices(config.n, k=1)
    return gram(config)[iu]


def fingerprint(config: Configuration) -> np.ndarray:
    """Sorted multiset of the ``n(n-1)/2`` pairwise inner products (rotation invariant)."""
    return np.sort(inner_products(config))


def _check_pairs(b, pot):
    if getattr(pot, "singular_at_one", False) and b.size and np.max(b) > 1.0 - COINCIDE_TOL:
        raise DegeneratePair(f"coincident points for a potential singular at t = 1 (max b = {np.max(b)!r})")


def energy(config: Configuration, pot=BIQUADRATIC) -> float:
    """Pair energy ``sum_{i<j} h(p_i . p_j)``."""
    b = inner_products(config)
    _check_pairs(b, pot)
    return float(np.sum(pot.h(b)))


# ---------------------------------------------------------------------------
# Reference configurations


def tbp() -> Configuration:
    """Triangular bipyramid: poles plus an equilateral triangle on the equator."""
    ang = 2 * np.pi * np.arange(3) / 3
    eq = np.column_stack([np.cos(ang), np.sin(ang), np.zeros(3)])
    # exact values where floating point would otherwise leave 1e-17 residue
    eq[1:, 0] = -0.5
    poles = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]])
    return Configuration(np.vstack([poles, eq]))


def fp(r: float) -> Configuration:
    """Square pyramid with apex (1, 0, 0) and base on the plane x_1 = r."""
    if not abs(r) < 1:
        raise InvalidParameter(f"fp needs |r| < 1, got {r}")
    s = math.sqrt(1.0 - r * r)
    return Configuration(
        np.array(
            [
                [1.0, 0.0, 0.0],
                [r, s, 0.0],
                [r, -s, 0.0],
                [r, 0.0, s],
                [r, 0.0, -s],
            ]
        )
    )


def tetrahedron() -> Configuration:
    """Regular tetrahedron inscribed in S^2 (all pairwise products -1/3)."""
    v = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float)
    return Configuration(v / math.sqrt(3.0))


def octahedron() -> Configuration:
    e = np.eye(3)
    return Configuration(np.vstack([e, -e]))


def random_points(n: int, m: int, rng: np.random.Generator) -> np.ndarray:
    """Direction-uniform ``(n, m)`` array of unit rows drawn from ``rng``.

    Rows are normalized standard normal vectors; a zero draw is resampled.
    """
    X = rng.standard_normal((n, m))
    norms = np.linalg.norm(X, axis=1)
    while np.any(norms == 0.0):
        bad = norms == 0.0
        X[bad] = rng.standard_normal((int(bad.sum()), m))
        norms = np.linalg.norm(X, axis=1)
    return X / norms[:, None]


def random_config(n: int, m: int, seed) -> Configuration:
    if n < 1 or m < 1:
        raise InvalidParameter(f"need n, m >= 1, got n={n}, m={m}")
    return Configuration(random_points(n, m, np.random.default_rng(seed)))


def random_rotation(m: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthogonal ``m x m`` matrix."""
    Q, R = np.linalg.qr(rng.standard_normal((m, m)))
    return Q * np.sign(np.diag(R))
