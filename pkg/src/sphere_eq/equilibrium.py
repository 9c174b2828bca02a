"""Equilibrium residuals: general potential, biquadratic, and the decoupled frame.

``residual_general`` is the tangential part of the Euclidean energy gradient,
so it is also the direction used by the descent in :mod:`sphere_eq.search`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import BIQUADRATIC, Configuration, _check_pairs, energy, gram
from .errors import InvalidParameter, NotNormalized
from .spectral import SpectralData

CRITICAL_TOL = 1e-8


@dataclass(frozen=True)
class EquilibriumReport:
    residual_vectors: np.ndarray
    max_norm: float
    multipliers: np.ndarray

    def is_critical(self, tol: float = CRITICAL_TOL) -> bool:
        return self.max_norm <= tol


def _report(R, mu):
    return EquilibriumReport(R, float(np.max(np.linalg.norm(R, axis=1))), mu)


def residual_general(config: Configuration, pot=BIQUADRATIC) -> EquilibriumReport:
    """Vectors ``sum_{j != i} h'(b_ij) (p_j - b_ij p_i)`` and multipliers ``mu_i``."""
    X = config.points
    B = gram(config)
    off = ~np.eye(config.n, dtype=bool)
    _check_pairs(B[off], pot)
    H = np.zeros_like(B)
    H[off] = pot.dh(B[off])
    R = H @ X - np.sum(H * B, axis=1)[:, None] * X
    mu = 0.5 * np.sum(H * B, axis=1)
    return _report(R, mu)


def residual_biquadratic(config: Configuration, include_self: bool = True) -> EquilibriumReport:
    """``sum_j (b_ij + 1)(x_jk - b_ij x_ik)``; half the general residual for ``h = (t+1)^2``.

    The ``j = i`` term vanishes identically, ``include_self`` only exists so that
    this can be checked.
    """
    X = config.points
    B = gram(config)
    W = B + 1.0
    if not include_self:
        np.fill_diagonal(W, 0.0)
    R = W @ X - np.sum(W * B, axis=1)[:, None] * X
    Woff = B + 1.0
    np.fill_diagonal(Woff, 0.0)
    mu = np.sum(Woff * B, axis=1)
    return _report(R, mu)


def frame_residual(config_normalized: Configuration, sd: SpectralData) -> np.ndarray:
    """Entrywise ``(alpha_i - lambda_k) x_ik - xbar_k`` in the orthogonal-column frame.

    Equals minus the biquadratic residual expressed in the same frame.
    """
    Y = config_normalized.points
    G = Y.T @ Y
    offdiag = G - np.diag(np.diag(G))
    if np.max(np.abs(offdiag), initial=0.0) > 1e-8:
        raise NotNormalized(f"off-diagonal of X^T X is {np.max(np.abs(offdiag)):.3e}")
    a = np.asarray(sd.alphas)[:, None]
    lam = np.asarray(sd.lambdas)[None, :]
    return (a - lam) * Y - np.asarray(sd.centroid)[None, :]


def _tangent_basis(p):
    """Orthonormal basis of the tangent space of the sphere at unit vector ``p``."""
    m = p.size
    u, _, _ = np.linalg.svd(np.eye(m) - np.outer(p, p))
    return u[:, : m - 1].T


def gradient_fd_check(config: Configuration, pot=BIQUADRATIC, step: float = 1e-5, residual=None) -> float:
    """Compare the tangential gradient with central differences of the energy.

    Each point is moved along an orthonormal tangent basis and pulled back to
    the sphere by renormalization. Returns
    ``max |fd - analytic| / max(1, max |analytic|)`` so the result is relative
    for sizeable gradients and absolute near critical points.

    ``residual`` replaces :func:`residual_general` (used to sanity-check the check).
    """
    if not 1e-7 <= step <= 1e-3:
        raise InvalidParameter(f"step must lie in [1e-7, 1e-3], got {step}")
    residual = residual or (lambda c, p: residual_general(c, p).residual_vectors)
    R = residual(config, pot)
    X = np.array(config.points)
    fd, an = [], []
    for i in range(config.n):
        for v in _tangent_basis(X[i]):
            vals = []
            for sgn in (1.0, -1.0):
                Y = X.copy()
                q = X[i] + sgn * step * v
                Y[i] = q / np.linalg.norm(q)
                vals.append(energy(Configuration(Y), pot))
            fd.append((vals[0] - vals[1]) / (2 * step))
            an.append(R[i] @ v)
    fd, an = np.array(fd), np.array(an)
    return float(np.max(np.abs(fd - an)) / max(1.0, float(np.max(np.abs(an)))))


#: name used by the published interface
crit5_residual = frame_residual
