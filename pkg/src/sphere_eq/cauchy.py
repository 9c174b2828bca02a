"""Numerical experiments on Cauchy-type matrices.

For distinct ``alpha_1..alpha_n`` and ``lambda_1..lambda_m`` with
``sum_i 1/(alpha_i - lambda_k) = 1`` for every ``k``, the ``n x n`` matrix with
columns ``1/(alpha_i - lambda_k)^2`` (``k <= m``) followed by ``1, alpha_i,
alpha_i^2, ...`` is nonsingular. These routines generate admissible instances,
score the determinant, and check the least-squares consequence used to rule
out critical configurations with no vanishing centroid component.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InadmissibleSelection, InvalidParameter, RootFindingFailure

SEPARATION = 1e-8
CONSTRAINT_TOL = 1e-10


def g(alphas, lam):
    """``sum_i 1/(alpha_i - lam) - 1``."""
    a = np.asarray(alphas, dtype=complex)
    return np.sum(1.0 / (a - lam)) - 1.0


def dg(alphas, lam):
    a = np.asarray(alphas, dtype=complex)
    return np.sum(1.0 / (a - lam) ** 2)


def cleared_poly(alphas, lam):
    """``prod_j (alpha_j - lam) * g(lam)``, the degree-n polynomial whose roots are sought."""
    a = np.asarray(alphas, dtype=complex)
    n = a.size
    total = 0j
    for i in range(n):
        total += np.prod(np.delete(a, i) - lam)
    return total - np.prod(a - lam)


def lambda_candidates(alphas, tol: float = 1e-8, max_iter: int = 100):
    """All ``n`` roots of ``g`` via Aberth iteration and a Newton polish.

    The cleared polynomial ``p = prod(alpha_j - lam) g`` is never expanded:
    ``p'/p = g'/g + sum_j 1/(lam - alpha_j)`` is evaluated from ``g`` and ``g'``
    directly. Starting points sit on a circle of radius ``1 + max |alpha_i|``
    at deterministic angles.
    """
    a = np.asarray(alphas, dtype=complex)
    n = a.size
    if n == 0:
        raise InvalidParameter("need at least one alpha")
    sep = np.abs(a[:, None] - a[None, :])[np.triu_indices(n, 1)]
    if sep.size and np.min(sep) < SEPARATION:
        raise InvalidParameter("alphas must be distinct")
    R = 1.0 + np.max(np.abs(a))
    z = np.mean(a) + R * np.exp(1j * (2 * np.pi * np.arange(n) / n + 0.4))
    offdiag = ~np.eye(n, dtype=bool)
    with np.errstate(divide="ignore", invalid="ignore"):
        for _ in range(500):
            inv = 1.0 / (a[None, :] - z[:, None])
            gv = inv.sum(axis=1) - 1.0
            ld = (inv**2).sum(axis=1) / gv - inv.sum(axis=1)
            w = 1.0 / ld
            dz = z[:, None] - z[None, :]
            pair = np.where(offdiag, 1.0 / np.where(offdiag, dz, 1.0), 0.0).sum(axis=1)
            shift = w / (1.0 - w * pair)
            shift = np.where(np.isfinite(shift) & (gv != 0), shift, 0.0)
            z = z - shift
            if np.max(np.abs(shift) / (1 + np.abs(z))) < 1e-15:
                break
    out = []
    for lam in z:
        for _ in range(max_iter):
            gv = g(a, lam)
            if abs(gv) <= 1e-14 * (1 + np.sum(np.abs(1.0 / (a - lam)))):
                break
            lam = lam - gv / dg(a, lam)
        if not abs(g(a, lam)) <= tol:
            raise RootFindingFailure(f"root {lam} polished only to |g| = {abs(g(a, lam)):.3e}")
        out.append(complex(lam))
    out.sort(key=lambda v: (round(v.real, 12), v.imag))
    return out


@dataclass(frozen=True)
class CauchyInstance:
    alphas: np.ndarray
    lambdas: np.ndarray

    @property
    def n(self) -> int:
        return self.alphas.size

    @property
    def m(self) -> int:
        return self.lambdas.size

    @property
    def is_real(self) -> bool:
        return bool(np.all(self.alphas.imag == 0) and np.all(np.abs(self.lambdas.imag) <= 1e-12))

    def constraint_residuals(self) -> np.ndarray:
        return np.array([abs(g(self.alphas, lam)) for lam in self.lambdas])


def build_instance(alphas, m: int, selection=None) -> CauchyInstance:
    """Pick ``m`` roots of ``g`` (indices into :func:`lambda_candidates`)."""
    a = np.asarray(alphas, dtype=complex)
    n = a.size
    if not 1 <= m <= n:
        raise InvalidParameter(f"need 1 <= m <= n, got m={m}, n={n}")
    sel = list(range(m)) if selection is None else [int(i) for i in selection]
    if len(sel) != m or len(set(sel)) != m:
        raise InadmissibleSelection(f"selection {sel} must hold {m} distinct indices")
    cands = lambda_candidates(a)
    lam = np.array([cands[i] for i in sel])
    if np.all(a.imag == 0):
        # g is real on the real line, so its roots are real: drop rounding noise
        lam = np.where(np.abs(lam.imag) < 1e-9, lam.real + 0j, lam)
    for k in range(m):
        for j in range(k + 1, m):
            if abs(lam[k] - lam[j]) < SEPARATION:
                raise InadmissibleSelection(f"lambda_{k} and lambda_{j} closer than {SEPARATION}")
    if np.min(np.abs(a[:, None] - lam[None, :])) < SEPARATION:
        raise InadmissibleSelection("some lambda coincides with an alpha")
    inst = CauchyInstance(a, lam)
    if np.max(inst.constraint_residuals()) > CONSTRAINT_TOL:
        raise InadmissibleSelection("constraint residual above tolerance after polishing")
    return inst


def cauchy_type_matrix(alphas, lambdas) -> np.ndarray:
    a = np.asarray(alphas, dtype=complex)
    lam = np.asarray(lambdas, dtype=complex)
    n, m = a.size, lam.size
    A = np.empty((n, n), dtype=complex)
    A[:, :m] = 1.0 / (a[:, None] - lam[None, :]) ** 2
    A[:, m:] = a[:, None] ** np.arange(n - m)[None, :]
    return A


def det_check(inst: CauchyInstance):
    """``(det A, |det A| / prod of column norms)``.

    The scaled score lies in ``[0, 1]`` (Hadamard) and does not underflow the
    way the raw determinant of a near-Cauchy matrix does.
    """
    A = cauchy_type_matrix(inst.alphas, inst.lambdas)
    d = complex(np.linalg.det(A))
    cn = np.linalg.norm(A, axis=0)
    return d, float(abs(d) / np.prod(cn))


def scaled_rank(M, threshold: float = 1e-12) -> int:
    """Numerical rank of ``M`` after scaling columns to unit norm."""
    Mn = M / np.linalg.norm(M, axis=0)
    s = np.linalg.svd(Mn, compute_uv=False)
    return int(np.sum(s > threshold * s[0]))


def corollary_infeasibility(inst: CauchyInstance) -> float:
    """``min_c || sum_k c_k / (alpha_i - lambda_k)^2 - 1 ||_2`` over real ``c``."""
    if not inst.is_real:
        raise InvalidParameter("corollary check is applied to real instances only")
    a = inst.alphas.real
    lam = inst.lambdas.real
    M = 1.0 / (a[:, None] - lam[None, :]) ** 2
    ones = np.ones(a.size)
    c, *_ = np.linalg.lstsq(M, ones, rcond=None)
    return float(np.linalg.norm(M @ c - ones))


def cauchy_determinant_formula(x, y) -> complex:
    """Closed form of ``det [1/(x_i - y_j)]`` for square Cauchy matrices."""
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    n = x.size
    num = 1.0 + 0j
    for i in range(n):
        for j in range(i + 1, n):
            num *= (x[j] - x[i]) * (y[i] - y[j])
    return complex(num / np.prod(x[:, None] - y[None, :]))


def random_alphas(n: int, rng: np.random.Generator, kind: str = "real") -> np.ndarray:
    if kind == "real":
        return np.sort(rng.uniform(-5.0, 5.0, n)).astype(complex)
    if kind == "complex":
        return rng.normal(0.0, 2.0, n) + 1j * rng.normal(0.0, 2.0, n)
    raise InvalidParameter(f"unknown kind {kind!r}")


@dataclass(frozen=True)
class CauchyRecord:
    seed: int
    n: int
    m: int
    kind: str
    scaled_magnitude: float
    corollary_residual: float | None
    rank_first_columns: int


def run_instance(seed: int, n: int = 5, m: int = 3, kind: str = "real"):
    """One seeded draw; returns a :class:`CauchyRecord` or ``None`` if inadmissible."""
    rng = np.random.default_rng(seed)
    a = random_alphas(n, rng, kind)
    sel = np.sort(rng.choice(n, size=m, replace=False))
    try:
        inst = build_instance(a, m, sel)
    except (InadmissibleSelection, InvalidParameter, RootFindingFailure):
        return None
    _, score = det_check(inst)
    A = cauchy_type_matrix(inst.alphas, inst.lambdas)
    cor = corollary_infeasibility(inst) if inst.is_real and m < n else None
    return CauchyRecord(seed, n, m, kind, score, cor, scaled_rank(A[:, : m + 1]))


def run_experiment(instances: int, seed: int = 0, n: int = 5, m: int = 3):
    """``instances`` admissible records, alternating real and complex draws.

    Seeds are derived as ``seed * 1_000_003 + k`` for draw ``k``; inadmissible
    draws are skipped and counted.
    """
    records, rejected, k = [], 0, 0
    while len(records) < instances:
        kind = "real" if len(records) % 2 == 0 else "complex"
        rec = run_instance(seed * 1_000_003 + k, n, m, kind)
        k += 1
        if rec is None:
            rejected += 1
            if rejected > 10 * instances + 100:
                raise RuntimeError("too many inadmissible draws")
            continue
        records.append(rec)
    return records, rejected
