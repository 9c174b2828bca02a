"""The acceptance suite: eleven numbered checks with fixed tolerances.

Each check returns a :class:`CriterionResult`; a check with a runtime budget
fails when it overruns. ``quick`` shrinks only the two multistart counts and
the Cauchy instance count, never a tolerance.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .cauchy import cauchy_determinant_formula, run_experiment
from .config import energy, fp, octahedron, random_config, tbp, tetrahedron
from .equilibrium import gradient_fd_check, residual_general
from .polynomials import FP_CUBIC_X, deflate_power, deg26_certificate, horner, real_roots
from .search import SearchParams, multistart, structural_audit
from .special_case import asymmetric_branch_certificate, fp_root, solve_symmetric_branch
from .spectral import normalize, spectral_data, spectral_energy

FULL_STARTS = 10_000
FULL_INSTANCES = 1_000
QUICK_COUNT = 100
QUOTED_FP_ENERGY = 7.9


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0
    budget: float | None = None

    @property
    def ok(self) -> bool:
        return self.passed and (self.budget is None or self.seconds <= self.budget)

    def line(self) -> str:
        verdict = "PASS" if self.ok else "FAIL"
        timing = f"{self.seconds:.2f}s" + (f" (budget {self.budget:g}s)" if self.budget is not None else "")
        return f"[{verdict}] {self.number:2d} {self.name}: {self.detail} [{timing}]"


def _timed(number, name, budget, fn, *args):
    t0 = time.perf_counter()
    passed, detail = fn(*args)
    return CriterionResult(number, name, bool(passed), detail, time.perf_counter() - t0, budget)


def check_tbp_energy():
    cfg = tbp()
    direct = energy(cfg)
    spec = spectral_energy(spectral_data(cfg), cfg.n, cfg.m)
    ok = abs(direct - 6.75) <= 1e-12 and abs(spec - 6.75) <= 1e-12
    return ok, f"direct {direct!r}, spectral {spec!r}"


def check_tetrahedron_energy():
    e = energy(tetrahedron())
    return abs(e - 8 / 3) <= 1e-12, f"energy {e!r}"


def check_spectral_identity(seed=0, count=1000):
    worst_e = worst_l = 0.0
    for k in range(count):
        cfg = random_config(5, 3, [seed, k])
        sd = spectral_data(cfg)
        worst_e = max(worst_e, abs(energy(cfg) - spectral_energy(sd, 5, 3)))
        worst_l = max(worst_l, abs(float(np.sum(sd.lambdas)) - 5.0))
    return worst_e <= 1e-10 and worst_l <= 1e-10, f"max |E - E_spec| {worst_e:.2e}, max |sum lambda - 5| {worst_l:.2e}"


def check_gradient(seed=0, count=100):
    worst = max(gradient_fd_check(random_config(5, 3, [seed, 10_000 + k]), step=1e-5) for k in range(count))
    return worst <= 1e-6, f"max relative deviation {worst:.2e} over {count} configurations"


def check_symmetric_branch():
    sols = solve_symmetric_branch()
    if len(sols) != 2:
        return False, f"expected 2 solutions, got {len(sols)}"
    by_label = {s.label: s for s in sols}
    if set(by_label) != {"TBP", "FP"}:
        return False, f"labels {sorted(by_label)}"
    t, f = by_label["TBP"], by_label["FP"]
    lo, hi = f.enclosure
    x_star = 2 * f.r + 1
    cubic_x = abs(horner(FP_CUBIC_X.coefficients, x_star))
    ok = (
        abs(t.r + 0.5) <= 1e-14
        and abs(t.energy - 6.75) <= 1e-12
        and lo <= f.r <= hi
        and hi - lo <= 1e-14
        and -0.2864 < lo
        and hi < -0.2863
        and abs(f.x - x_star) <= 1e-10
        and cubic_x <= 1e-10
    )
    return ok, (
        f"r = {t.r!r} (TBP, E = {t.energy!r}); r* in [{lo!r}, {hi!r}] width {hi - lo:.1e}, "
        f"x* = {x_star!r}, |cubic(x*)| = {cubic_x:.1e}"
    )


def check_fp_ordering():
    r_star, _ = fp_root()
    cfg = fp(r_star)
    res = residual_general(cfg).max_norm
    e = energy(cfg)
    ok = res <= 1e-8 and e - 6.75 > 0.01
    return ok, f"residual {res:.2e}, E(FP) = {e:.10f} (quoted {QUOTED_FP_ENERGY}), E(FP) - 27/4 = {e - 6.75:.6f}"


def check_deg26(coeffs=None):
    cert = deg26_certificate(coeffs)
    nonzero = [c for c in cert.coefficients if c != 0]
    positive = all(c > 0 for c in nonzero)
    roots = real_roots(deflate_power(cert, 4))
    return positive and not roots, f"{len(nonzero)} nonzero coefficients all positive: {positive}; real roots {len(roots)}"


def check_asymmetric(seed=0, starts=FULL_STARTS):
    rep = asymmetric_branch_certificate(starts=starts, seed=seed)
    ok = rep.converged > 0 and not rep.asymmetric
    return ok, f"{rep.converged}/{rep.starts} converged, asymmetric solutions {len(rep.asymmetric)}"


def check_global_search(catalog):
    labels = catalog.nontrivial_labels
    planar = catalog.by_label("PLANAR")
    planar_ok = all(e.energy >= 35 / 4 - 1e-6 for e in planar)
    ok = (
        labels <= {"TBP", "FP"}
        and "TBP" in labels
        and not catalog.unconverged
        and abs(catalog.min_energy - 6.75) <= 1e-8
        and planar_ok
    )
    classes = ", ".join(f"{e.label}x{e.count}@{e.energy:.8f}" for e in catalog.entries)
    return ok, (
        f"classes [{classes}], unconverged {len(catalog.unconverged)}, "
        f"min energy {catalog.min_energy!r}, planar classes {len(planar)}"
    )


def check_cauchy(seed=0, instances=FULL_INSTANCES):
    records, rejected = run_experiment(instances, seed=seed)
    smin = min(r.scaled_magnitude for r in records)
    cors = [r.corollary_residual for r in records if r.corollary_residual is not None]
    cmin = min(cors) if cors else float("inf")
    rng = np.random.default_rng([seed, 7])
    worst = 0.0
    for _ in range(100):
        x = rng.normal(size=5) + 1j * rng.normal(size=5)
        y = rng.normal(size=5) + 1j * rng.normal(size=5)
        d = np.linalg.det(1.0 / (x[:, None] - y[None, :]))
        f = cauchy_determinant_formula(x, y)
        worst = max(worst, abs(d - f) / abs(f))
    ok = smin > 1e-12 and cmin > 1e-6 and worst <= 1e-8
    return ok, (
        f"{len(records)} instances ({rejected} inadmissible draws skipped): min scaled |det| {smin:.2e}, "
        f"min least-squares residual {cmin:.2e} over {len(cors)} real instances, "
        f"square-Cauchy formula deviation {worst:.1e}"
    )


def check_structural(catalog):
    audit = structural_audit(catalog)
    cfg = octahedron()
    _, sd = normalize(cfg)
    cnorm = float(np.linalg.norm(sd.centroid))
    lam_dev = float(np.max(np.abs(sd.lambdas - 2.0)))
    res = residual_general(cfg).max_norm
    witness = cnorm <= 1e-12 and lam_dev <= 1e-12 and res <= 1e-8
    detail = "; ".join(audit.violations or audit.notes) or "no nontrivial classes"
    return audit.passed and witness, (
        f"audit: {detail}; octahedron |xbar| {cnorm:.1e}, max |lambda - 2| {lam_dev:.1e}, residual {res:.1e}"
    )


def run_all(seed: int = 0, quick: bool = False, certificate=None, progress=None):
    """Run criteria 1-11 in order.

    Parameters
    ----------
    seed : int
        Base seed for every randomized check.
    quick : bool
        100 starts / 100 instances instead of 10^4 / 1000.
    certificate : dict, optional
        Replacement ``{power: coefficient}`` table for the degree-26 check.
    progress : callable, optional
        Called with each :class:`CriterionResult` as soon as it is available.
    """
    starts = QUICK_COUNT if quick else FULL_STARTS
    instances = QUICK_COUNT if quick else FULL_INSTANCES
    results = []

    def add(res):
        results.append(res)
        if progress is not None:
            progress(res)

    add(_timed(1, "TBP energy", 1.0, check_tbp_energy))
    add(_timed(2, "tetrahedron energy", 1.0, check_tetrahedron_energy))
    add(_timed(3, "spectral identity", 1.0, check_spectral_identity, seed))
    add(_timed(4, "gradient soundness", 1.0, check_gradient, seed))
    add(_timed(5, "symmetric branch", 1.0, check_symmetric_branch))
    add(_timed(6, "FP criticality and ordering", 1.0, check_fp_ordering))
    add(_timed(7, "degree-26 certificate", 1.0, check_deg26, certificate))
    add(_timed(8, "asymmetric-branch search", 30.0, check_asymmetric, seed, starts))
    t0 = time.perf_counter()
    catalog = multistart(SearchParams(starts=starts, seed=seed))
    search_time = time.perf_counter() - t0
    res9 = _timed(9, "global search", 120.0, check_global_search, catalog)
    res9.seconds += search_time
    add(res9)
    add(_timed(10, "Cauchy experiments", 10.0, check_cauchy, seed, instances))
    add(_timed(11, "structural audits", None, check_structural, catalog))
    return results
