"""Seeded multistart descent on (S^2)^5 and a catalog of the critical classes it reaches.

Every start is an independent projected-gradient run; runs are advanced
together as one ``(S, n, m)`` array so that ten thousand starts stay cheap.
"""
from __future__ import annotations

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import BIQUADRATIC, BiquadraticShift, Configuration, energy, fingerprint, fp, random_points, tbp
from .errors import AmbiguousZero, InvalidParameter
from .spectral import classify_case, normalize

CLUSTER_TOL = 1e-4
REPEAT_TOL = 1e-8
RANK_TOL = 1e-8
NONTRIVIAL = ("TBP", "FP", "UNKNOWN")


@dataclass(frozen=True)
class SearchParams:
    starts: int = 10_000
    seed: int = 0
    initial_step: float = 0.1
    backtrack_factor: float = 0.5
    residual_tol: float = 1e-9
    max_iters: int = 5_000
    armijo: float = 1e-4
    n: int = 5
    m: int = 3

    def __post_init__(self):
        if self.starts < 1:
            raise InvalidParameter("starts must be >= 1")
        if not self.residual_tol >= 1e-10:
            raise InvalidParameter("residual_tol must be >= 1e-10")
        if not 0 < self.backtrack_factor < 1:
            raise InvalidParameter("backtrack_factor must lie in (0, 1)")


@dataclass
class CriticalPoint:
    config: Configuration
    energy: float
    residual_norm: float
    label: str
    fingerprint: np.ndarray
    converged: bool = True
    iterations: int = 0
    energy_trace: list = field(default_factory=list, repr=False)


# ---------------------------------------------------------------------------
# batched kernels


def _batch_energy(X, pot):
    B = X @ np.swapaxes(X, 1, 2)
    n = X.shape[1]
    iu = np.triu_indices(n, 1)
    return np.sum(pot.h(B[:, iu[0], iu[1]]), axis=1)


def _batch_residual(X, pot):
    B = X @ np.swapaxes(X, 1, 2)
    n = X.shape[1]
    H = pot.dh(B)
    H[:, np.arange(n), np.arange(n)] = 0.0
    return H @ X - np.sum(H * B, axis=2)[..., None] * X


def _renormalize(X):
    return X / np.linalg.norm(X, axis=2, keepdims=True)


def _energy_change(X, R, step, pot):
    """Energy change of ``renormalize(X - step R)`` relative to ``X``.

    With unit rows ``u`` and tangent ``R``, the new cosines are
    ``(c - s(u_i.R_j + R_i.u_j) + s^2 R_i.R_j) / (nu_i nu_j)`` where
    ``nu_i^2 = 1 + s^2 |R_i|^2``. Writing the change ``delta`` in that form keeps
    full relative accuracy, whereas subtracting two energy totals loses it
    once ``step |R|^2`` drops below double rounding of the energy.
    """
    n = X.shape[1]
    iu = np.triu_indices(n, 1)
    s = step[:, None, None]
    C = X @ np.swapaxes(X, 1, 2)
    P = X @ np.swapaxes(R, 1, 2)
    Q = R @ np.swapaxes(R, 1, 2)
    L = np.log1p(s[..., 0] ** 2 * np.diagonal(Q, axis1=1, axis2=2))
    half = 0.5 * (L[:, :, None] + L[:, None, :])
    delta = (-C * np.expm1(half) - s * (P + np.swapaxes(P, 1, 2)) + s**2 * Q) * np.exp(-half)
    c, d = C[:, iu[0], iu[1]], delta[:, iu[0], iu[1]]
    if isinstance(pot, BiquadraticShift):
        return np.sum(d * (d + 2.0 * (c + pot.a)), axis=1)
    cl = c.astype(np.longdouble)
    return np.sum(pot.h(cl + d) - pot.h(cl), axis=1).astype(float)


def _tangential(X, R):
    return R - np.sum(R * X, axis=2, keepdims=True) * X


def descend_batch(X0, pot=BIQUADRATIC, params: SearchParams = SearchParams(), trace=False):
    """Projected gradient with Armijo backtracking, one run per leading index.

    Each iteration restarts from ``initial_step``; a trial is accepted when the
    energy change is at most ``-armijo * step * |R|^2``. Stored energies are
    the starting energy plus accepted (negative) changes, so the stored
    sequence never increases.

    Returns
    -------
    X, energies, residual max-norms, iteration counts, converged flags
    (and per-run accepted-energy traces when ``trace`` is set).
    """
    X = _renormalize(np.array(X0, dtype=float))
    S = X.shape[0]
    E = _batch_energy(X, pot)
    R = _tangential(X, _batch_residual(X, pot))
    res = np.max(np.linalg.norm(R, axis=2), axis=1)
    iters = np.zeros(S, dtype=int)
    traces = [[float(e)] for e in E] if trace else None
    active = res > params.residual_tol
    for _ in range(params.max_iters):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        step = np.full(idx.size, params.initial_step)
        pending = np.ones(idx.size, dtype=bool)
        Xa, Ra = X[idx], R[idx]
        g2 = np.sum(Ra * Ra, axis=(1, 2))
        newX, dE = Xa.copy(), np.zeros(idx.size)
        for _ in range(60):
            p = np.flatnonzero(pending)
            if p.size == 0:
                break
            d = _energy_change(Xa[p], Ra[p], step[p], pot)
            ok = d <= -params.armijo * step[p] * g2[p]
            acc = p[ok]
            newX[acc] = _renormalize(Xa[acc] - step[acc, None, None] * Ra[acc])
            dE[acc] = d[ok]
            pending[acc] = False
            step[p[~ok]] *= params.backtrack_factor
        moved = ~pending
        upd = idx[moved]
        X[upd] = newX[moved]
        E[upd] = E[upd] + dE[moved]
        iters[idx] += 1
        if trace:
            for k in upd:
                traces[k].append(float(E[k]))
        R[upd] = _tangential(X[upd], _batch_residual(X[upd], pot))
        res[upd] = np.max(np.linalg.norm(R[upd], axis=2), axis=1)
        active[idx] = res[idx] > params.residual_tol
        # a run whose every trial failed cannot make further progress
        active[idx[pending]] = False
    conv = res <= params.residual_tol
    out = (X, E, res, iters, conv)
    return out + (traces,) if trace else out


# ---------------------------------------------------------------------------
# classification


_REFERENCE = {}


def reference_fingerprints() -> dict:
    if not _REFERENCE:
        from .special_case import fp_root

        r_star, _ = fp_root()
        _REFERENCE["TBP"] = fingerprint(tbp())
        _REFERENCE["FP"] = fingerprint(fp(r_star))
    return _REFERENCE


def classify(cp: CriticalPoint | Configuration) -> str:
    """Label by reference fingerprint, then by structure, else ``UNKNOWN``."""
    config = cp.config if isinstance(cp, CriticalPoint) else cp
    f = fingerprint(config)
    if config.n == 5:
        for name, ref in reference_fingerprints().items():
            if ref.size == f.size and np.max(np.abs(f - ref)) <= CLUSTER_TOL:
                return name
    if f.size and f[-1] > 1.0 - REPEAT_TOL:
        return "REPEATED"
    _, sd = normalize(config)
    nonzero = int(np.sum(sd.lambdas > RANK_TOL))
    if nonzero < config.m:
        return "PLANAR" if nonzero == 2 else "LOWRANK"
    return "UNKNOWN"


def _make_point(X, e, res, it, conv, pot, trace=None) -> CriticalPoint:
    cfg = Configuration(X)
    # the accumulated energy only drives acceptance; report a direct evaluation
    cp = CriticalPoint(cfg, float(energy(cfg, pot)), float(res), "UNKNOWN", fingerprint(cfg), bool(conv), int(it), trace or [])
    if conv:
        cp.label = classify(cp)
    return cp


def descend(start: Configuration, pot=BIQUADRATIC, params: SearchParams = SearchParams()) -> CriticalPoint:
    """Single descent run. A run that does not reach ``residual_tol`` comes back
    with ``converged=False`` and label ``UNKNOWN``."""
    X, E, res, it, conv, tr = descend_batch(start.points[None], pot, params, trace=True)
    return _make_point(X[0], E[0], res[0], it[0], conv[0], pot, tr[0])


# ---------------------------------------------------------------------------
# multistart and catalog


@dataclass
class CatalogEntry:
    label: str
    energy: float
    residual: float
    count: int
    fingerprint: np.ndarray
    representative: Configuration

    @property
    def nontrivial(self) -> bool:
        return self.label in NONTRIVIAL


@dataclass
class Catalog:
    entries: list
    unconverged: list
    params: SearchParams
    min_energy: float
    best: Configuration

    @property
    def nontrivial_labels(self) -> set:
        return {e.label for e in self.entries if e.nontrivial}

    def by_label(self, label):
        return [e for e in self.entries if e.label == label]


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("SPHERE_EQ_THREADS", "1")))
    except ValueError:
        return 1


def initial_points(params: SearchParams) -> np.ndarray:
    rng = np.random.default_rng(params.seed)
    return random_points(params.starts * params.n, params.m, rng).reshape(params.starts, params.n, params.m)


def multistart(params: SearchParams = SearchParams(), pot=BIQUADRATIC, chunk: int = 2_000) -> Catalog:
    """Run every start, cluster converged runs by fingerprint and count classes.

    Starts are drawn up front from ``params.seed``; chunks are independent and
    merged in start order, so the catalog does not depend on the thread count.
    """
    X0 = initial_points(params)
    pieces = [X0[i : i + chunk] for i in range(0, params.starts, chunk)]
    with ThreadPoolExecutor(max_workers=_threads()) as ex:
        results = list(ex.map(lambda P: descend_batch(P, pot, params), pieces))
    X = np.concatenate([r[0] for r in results])
    E = np.concatenate([r[1] for r in results])
    res = np.concatenate([r[2] for r in results])
    it = np.concatenate([r[3] for r in results])
    conv = np.concatenate([r[4] for r in results])

    B = X @ np.swapaxes(X, 1, 2)
    iu = np.triu_indices(params.n, 1)
    F = np.sort(B[:, iu[0], iu[1]], axis=1)

    reps, counts, members = [], [], []
    for k in np.flatnonzero(conv)[np.argsort(E[conv], kind="stable")]:
        for c, rep in enumerate(reps):
            if np.max(np.abs(F[k] - F[rep])) <= CLUSTER_TOL:
                counts[c] += 1
                members[c].append(k)
                break
        else:
            reps.append(k)
            counts.append(1)
            members.append([k])
    entries = []
    for rep, cnt, mem in zip(reps, counts, members):
        cp = _make_point(X[rep], E[rep], res[rep], it[rep], True, pot)
        entries.append(CatalogEntry(cp.label, cp.energy, float(np.max(res[mem])), cnt, cp.fingerprint, cp.config))
    unconverged = [_make_point(X[k], E[k], res[k], it[k], False, pot) for k in np.flatnonzero(~conv)]
    if np.any(conv):
        kbest = int(np.flatnonzero(conv)[np.argmin(E[conv])])
        best = Configuration(X[kbest])
        emin = float(energy(best, pot))
    else:
        best, emin = None, float("nan")
    return Catalog(entries, unconverged, params, emin, best)


# ---------------------------------------------------------------------------
# audits


def in_main_special_case(config: Configuration, tol: float = 1e-6) -> bool:
    from .special_case import in_main_special_case as _check

    return _check(config, tol)


@dataclass
class AuditReport:
    passed: bool
    violations: list
    notes: list = field(default_factory=list)


def special_case_audit(catalog: Catalog) -> AuditReport:
    """Every nontrivial class must be TBP or FP and lie in the mirror-pair form."""
    nontrivial = [e for e in catalog.entries if e.nontrivial]
    if not nontrivial:
        warnings.warn("special-case audit on a catalog without nontrivial classes", stacklevel=2)
        return AuditReport(True, [], ["vacuous: no nontrivial classes"])
    violations = []
    for e in nontrivial:
        if e.label not in ("TBP", "FP"):
            violations.append(f"class {e.label} at energy {e.energy:.12g} is not in the reference catalog")
        elif not in_main_special_case(e.representative, 1e-5):
            violations.append(f"class {e.label} representative fails the mirror-pair test")
    return AuditReport(not violations, violations)


def structural_audit(catalog: Catalog, case_tol: float = 1e-6) -> AuditReport:
    """Case-0 and equal-eigenvalue checks on every converged nontrivial class.

    A nontrivial class with no vanishing centroid component, or with zero
    centroid and equal eigenvalues, is a violation. If a Case-0 candidate is
    found its least-squares residual for the coefficient system is recorded.
    """
    from .cauchy import CauchyInstance, corollary_infeasibility

    violations, notes = [], []
    for e in catalog.entries:
        if not e.nontrivial:
            continue
        _, sd = normalize(e.representative)
        spread = float(np.max(sd.lambdas) - np.min(sd.lambdas))
        cnorm = float(np.linalg.norm(sd.centroid))
        if cnorm <= 1e-6 and spread <= 1e-6:
            violations.append(f"{e.label}: zero centroid with equal eigenvalues")
        try:
            case = classify_case(sd, case_tol).zero_count
        except AmbiguousZero as exc:
            violations.append(f"{e.label}: ambiguous case ({exc})")
            continue
        notes.append(f"{e.label}: case {case}")
        if case == 0:
            inst = CauchyInstance(sd.alphas.astype(complex), sd.lambdas.astype(complex))
            notes.append(f"{e.label}: coefficient-system residual {corollary_infeasibility(inst):.3e}")
            violations.append(f"{e.label}: converged nondegenerate class in case 0")
    return AuditReport(not violations, violations, notes)
