"""Orthogonal-column frame, eigen-data of the Gram matrix and Case-N labels.

After rotating coordinates so that ``X^T X`` is diagonal, the biquadratic
energy only depends on the diagonal ``lambda_k`` and the centroid::

    E = sum(lambda_k^2) / 2 + |xbar|^2 + n^2 / 2 - 2 n

and the equilibrium equations decouple into ``(alpha_i - lambda_k) x_ik = xbar_k``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import Configuration, gram
from .errors import AmbiguousZero, PoleCollision

CASE_TOL = 1e-8


def jacobi_eigh(A, tol: float = 1e-15, max_sweeps: int = 64):
    """Eigen-decomposition of a small symmetric matrix by cyclic Jacobi rotations.

    Returns ``(w, V)`` with ``A V = V diag(w)``; eigenvalues sorted descending,
    and each column's largest-magnitude entry (first one on ties) made nonnegative.
    """
    A = np.array(A, dtype=float, copy=True)
    m = A.shape[0]
    V = np.eye(m)
    scale = max(np.max(np.abs(A)), np.finfo(float).tiny)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.triu(A, 1) ** 2))
        if off <= tol * scale:
            break
        for p in range(m - 1):
            for q in range(p + 1, m):
                apq = A[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0)) if theta != 0 else 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # A <- J^T A J with J the (p, q) plane rotation
                Ap, Aq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * Ap - s * Aq
                A[:, q] = s * Ap + c * Aq
                Ap, Aq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * Ap - s * Aq
                A[q, :] = s * Ap + c * Aq
                A[p, q] = A[q, p] = 0.0
                Vp, Vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * Vp - s * Vq
                V[:, q] = s * Vp + c * Vq
    w = np.diag(A).copy()
    order = np.argsort(-w, kind="stable")
    w, V = w[order], V[:, order]
    for k in range(m):
        j = int(np.argmax(np.abs(V[:, k])))
        if V[j, k] < 0:
            V[:, k] = -V[:, k]
    return w, V


@dataclass(frozen=True)
class SpectralData:
    lambdas: np.ndarray
    centroid: np.ndarray
    alphas: np.ndarray
    rotation: np.ndarray

    def as_dict(self) -> dict:
        try:
            case = classify_case(self).zero_count
        except AmbiguousZero:
            case = "ambiguous"
        return {
            "lambdas": [float(v) for v in self.lambdas],
            "centroid": [float(v) for v in self.centroid],
            "alphas": [float(v) for v in self.alphas],
            "case": case,
        }


@dataclass(frozen=True)
class CaseLabel:
    zero_count: int
    tol: float


def alphas(B) -> np.ndarray:
    """``alpha_i = sum_j (b_ij + b_ij^2)``, the ``j = i`` term (= 2) included."""
    B = np.asarray(B, dtype=float)
    return np.sum(B + B * B, axis=1)


def normalize(config: Configuration):
    """Rotate ``config`` so its coordinate matrix has orthogonal columns.

    Returns
    -------
    (Configuration, SpectralData)
        ``Y = X U`` and the spectral data in the new frame; ``Y^T Y`` is
        ``diag(lambdas)`` up to rounding.
    """
    X = config.points
    lam, U = jacobi_eigh(X.T @ X)
    Y = X @ U
    cfg = Configuration(Y)
    sd = SpectralData(
        lambdas=np.maximum(lam, 0.0),
        centroid=cfg.points.sum(axis=0),
        alphas=alphas(gram(cfg)),
        rotation=U,
    )
    return cfg, sd


def spectral_data(config: Configuration) -> SpectralData:
    return normalize(config)[1]


def spectral_energy(sd: SpectralData, n: int, m: int | None = None) -> float:
    """Biquadratic energy from eigenvalues and centroid alone."""
    lam = np.asarray(sd.lambdas, dtype=float)
    if m is not None and lam.size != m:
        raise ValueError(f"expected {m} eigenvalues, got {lam.size}")
    xbar = np.asarray(sd.centroid, dtype=float)
    return float(0.5 * np.sum(lam**2) + xbar @ xbar + n * n / 2 - 2 * n)


def classify_case(sd: SpectralData, tol: float = CASE_TOL) -> CaseLabel:
    """Count centroid components that vanish; raises AmbiguousZero inside ``[tol, 10 tol)``."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    a = np.abs(np.asarray(sd.centroid, dtype=float))
    band = (a >= tol) & (a < 10 * tol)
    if np.any(band):
        raise AmbiguousZero(f"centroid component {a[band][0]:.3e} lies in [{tol:g}, {10 * tol:g})")
    return CaseLabel(int(np.sum(a < tol)), tol)


def secular_residual(alpha, lam: float) -> float:
    """``sum_i 1 / (alpha_i - lam) - 1``; vanishes when ``xbar_k != 0`` at a critical point."""
    d = np.asarray(alpha, dtype=float) - lam
    if np.any(np.abs(d) <= 1e-12):
        raise PoleCollision(f"alpha_i = lambda = {lam!r} to within 1e-12")
    return float(np.sum(1.0 / d) - 1.0)


#: name used by the published interface
crit7_residual = secular_residual
