"""Three points on a great circle plus a mirror pair: the reduced equilibrium system.

A state is ``(theta_1, theta_2, theta_3, r)`` with the configuration::

    p_i = (cos theta_i, sin theta_i, 0),   i = 1, 2, 3
    p_4, p_5 = (r, 0, +-sqrt(1 - r^2))

The angle equations are rewritten in ``z_j = exp(i theta_j)`` and then in
``x = s_1``, ``y = s_{-1}``, ``t = sigma_3``. Solving the symmetric branch
``x = y`` gives exactly two nontrivial solutions (TBP and FP); the asymmetric
branch is covered by the transcribed degree-26 certificate and a seeded
damped-Newton search.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import Configuration, energy, fingerprint, fp, tbp
from .errors import DenominatorVanish, InvalidParameter, ZeroProduct
from .polynomials import (
    ELIMINATION_FACTORS,
    FP_CUBIC_R,
    FP_CUBIC_X,
    MultiPoly,
    PolynomialCert,
    deflate_power,
    deg26_certificate,
    discriminant_quadratic,
    horner,
    poly_prod,
    real_roots,
)

TWO_PI = 2.0 * math.pi
DENOM_GUARD = 1e-10


@dataclass(frozen=True)
class SpecialCaseState:
    thetas: tuple
    r: float

    def __post_init__(self):
        if not abs(self.r) < 1:
            raise InvalidParameter(f"need |r| < 1, got {self.r}")
        th = tuple(float(a) % TWO_PI for a in self.thetas)
        if len(th) != 3:
            raise InvalidParameter("exactly three angles")
        object.__setattr__(self, "thetas", th)
        object.__setattr__(self, "r", float(self.r))

    @property
    def z(self) -> np.ndarray:
        return np.exp(1j * np.asarray(self.thetas))


def embed(s: SpecialCaseState) -> Configuration:
    th = np.asarray(s.thetas)
    h = math.sqrt(1.0 - s.r * s.r)
    eq = np.column_stack([np.cos(th), np.sin(th), np.zeros(3)])
    return Configuration(np.vstack([eq, [[s.r, 0.0, h], [s.r, 0.0, -h]]]))


def energy_sc(s: SpecialCaseState) -> float:
    th = np.asarray(s.thetas)
    r = s.r
    d = th[:, None] - th[None, :]
    iu = np.triu_indices(3, 1)
    return float(np.sum((np.cos(d[iu]) + 1) ** 2) + 2 * np.sum((r * np.cos(th) + 1) ** 2) + 4 * r**4)


def gradient_sc(s: SpecialCaseState) -> np.ndarray:
    """Left sides of the three angle equations and the ``r`` equation.

    These are ``-(1/2) dE/dtheta_i`` and ``(1/4) dE/dr``.
    """
    th = np.asarray(s.thetas)
    r = s.r
    d = th[:, None] - th[None, :]
    g_th = np.sum((np.cos(d) + 1) * np.sin(d), axis=1) + 2 * (r * np.cos(th) + 1) * r * np.sin(th)
    g_r = np.sum((r * np.cos(th) + 1) * np.cos(th)) + 4 * r**3
    return np.append(g_th, g_r)


def energy_gradient_sc(s: SpecialCaseState) -> np.ndarray:
    """``(dE/dtheta_1, dE/dtheta_2, dE/dtheta_3, dE/dr)``."""
    g = gradient_sc(s)
    return np.append(-2.0 * g[:3], 4.0 * g[3])


# ---------------------------------------------------------------------------
# Complex form


def angle_residuals(z, r):
    """Angle equations in ``z``; valid off the unit circle as formal expressions."""
    z = np.asarray(z, dtype=complex)
    zi, zj = z[:, None], z[None, :]
    return (
        np.sum(zi**2 / zj**2 - zj**2 / zi**2, axis=1)
        + 2 * np.sum(zi / zj - zj / zi, axis=1)
        + 2 * r * r * (z**2 - z**-2)
        + 4 * r * (z - 1 / z)
    )


def radius_residual(z, r):
    z = np.asarray(z, dtype=complex)
    return r * np.sum(z**2 + z**-2) + 2 * np.sum(z + 1 / z) + 16 * r**3 + 6 * r


#: angle residual i = ANGLE_SCALE * (real angle equation i); radius residual = RADIUS_SCALE * (r equation)
ANGLE_SCALE = 4j
RADIUS_SCALE = 4.0


def complex_residuals(s: SpecialCaseState):
    """``(angle residuals (3 complex), radius residual (real))`` at an on-shell state."""
    z = s.z
    return angle_residuals(z, s.r), float(np.real(radius_residual(z, s.r)))


@dataclass(frozen=True)
class TransformedVars:
    """Power sums and elementary symmetric functions of ``z_1, z_2, z_3``."""

    x: complex
    y: complex
    t: complex
    r: float | None = None
    s2: complex = field(init=False)
    sm2: complex = field(init=False)
    sigma1: complex = field(init=False)
    sigma2: complex = field(init=False)
    sigma3: complex = field(init=False)

    def __post_init__(self):
        x, y, t = self.x, self.y, self.t
        if t == 0:
            raise ZeroProduct("sigma_3 = 0")
        object.__setattr__(self, "s2", x * x - 2 * y * t)
        object.__setattr__(self, "sm2", y * y - 2 * x / t)
        object.__setattr__(self, "sigma1", x)
        object.__setattr__(self, "sigma2", y * t)
        object.__setattr__(self, "sigma3", t)

    def coefficients(self, r=None):
        """``(A, B, C, D)`` of ``A z^2 + B z + C/z + D/z^2``."""
        r = self.r if r is None else r
        if r is None:
            raise InvalidParameter("r is required for the quartic coefficients")
        return (
            self.sm2 + 2 * r * r,
            2 * self.y + 4 * r,
            -2 * self.x - 4 * r,
            -self.s2 - 2 * r * r,
        )

    @property
    def z0(self):
        """Fourth root of the quartic once the three ``z_i`` are factored out."""
        return -self.y * self.t / self.x


def transform(z, r=None) -> TransformedVars:
    z = np.asarray(z, dtype=complex)
    t = complex(np.prod(z))
    if abs(t) == 0:
        raise ZeroProduct("product of the z_j vanishes")
    return TransformedVars(complex(np.sum(z)), complex(np.sum(1 / z)), t, r)


def quartic(tv: TransformedVars, z, r=None):
    """``A z^4 + B z^3 + C z + D``; equals ``z^2`` times the angle residual."""
    A, B, C, D = tv.coefficients(r)
    z = np.asarray(z, dtype=complex)
    return A * z**4 + B * z**3 + C * z + D


# ---------------------------------------------------------------------------
# Equations in (x, y, t, r)


def _num_den(x, y, r):
    return {
        "num1": 3 * x**2 + 2 * r**2,
        "den1": x * y**2 + 2 * r**2 * x + 4 * y + 4 * r,
        "num2": x**2 * y + 2 * r**2 * y + 4 * x + 4 * r,
        "den2": 3 * y**2 + 2 * r**2,
        "num3": x * (x**2 + 2 * r**2),
        "den3": y * (y**2 + 2 * r**2),
    }


def t_consistency(x, y, r):
    e = _num_den(x, y, r)
    return e["num1"] * e["den2"] - e["num2"] * e["den1"]


def radius_balance(x, y, r):
    return (3 * x**2 + 2 * r**2) * (r * y**2 + 2 * y + 8 * r**3 + 3 * r) - 2 * r * x * (
        x * y**2 + 2 * r**2 * x + 4 * y + 4 * r
    )


def eq_antisym(x, y, r):
    """The second t-elimination equation; antisymmetric under ``x <-> y``."""
    e = _num_den(x, y, r)
    return e["num3"] * e["den2"] * e["den1"] - e["den3"] * e["num1"] * e["num2"]


def antisym_reduced(x, y, r):
    """``eq_antisym / (2 r (x - y))``."""
    return (
        8 * r**4 + 4 * r**5 * x + 4 * r**2 * x**2 + 2 * r**3 * x**3 + 4 * r**5 * y - 8 * r**2 * x * y
        - 8 * r * x**2 * y + 2 * r**3 * x**2 * y + 4 * r**2 * y**2 - 8 * r * x * y**2 + 2 * r**3 * x * y**2
        + 6 * x**2 * y**2 + r * x**3 * y**2 + 2 * r**3 * y**3 + r * x**2 * y**3
    )


def system_residuals(x, y, t, r, guard: float = DENOM_GUARD) -> dict:
    """Residuals of the t-expressions and of the eliminated equations.

    Keys: ``t1``, ``t2``, ``t3`` (the cleared forms ``t den - num``,
    ``t^2 den - num``), ``t_consistency``, ``radius_balance``, ``radius_balance_swap``, ``antisym_reduced`` and
    ``antisym``. ``antisym_reduced`` is ``antisym / (2 r (x - y))`` and only has to vanish
    on the ``x != y`` branch; on ``x = y`` it is ``antisym`` that vanishes.
    """
    e = _num_den(x, y, r)
    for name in ("den1", "den2", "den3"):
        if abs(e[name]) < guard:
            raise DenominatorVanish(name, e[name])
    return {
        "t1": t * e["den1"] - e["num1"],
        "t2": t * e["den2"] - e["num2"],
        "t3": t * t * e["den3"] - e["num3"],
        "t_consistency": t_consistency(x, y, r),
        "radius_balance": radius_balance(x, y, r),
        "radius_balance_swap": radius_balance(y, x, r),
        "antisym_reduced": antisym_reduced(x, y, r),
        "antisym": eq_antisym(x, y, r),
    }


# ---------------------------------------------------------------------------
# Symmetric branch x = y, t = 1


def sym_angle(x, r):
    return (3 * x**2 + 2 * r**2) - (x**3 + 2 * r**2 * x + 4 * x + 4 * r)


def sym_radius(x, r):
    return (r * x**2 + 2 * x + 8 * r**3 + 3 * r) - 2 * r * x


def fp_energy_formula(r: float) -> float:
    """Closed form for the square pyramid with base plane at ``r``."""
    return 4 * (r + 1) ** 2 + 4 * (r * r + 1) ** 2 + 2 * (2 * r * r) ** 2


@dataclass(frozen=True)
class SymmetricSolution:
    r: float
    enclosure: tuple
    x: float
    label: str
    state: SpecialCaseState
    energy: float


def fp_root():
    """The real root of ``6r^3 + 3r + 1`` with its enclosure."""
    (root, enc), = real_roots(FP_CUBIC_R)
    return root, enc


def _label(config: Configuration, r: float, tol: float = 1e-6) -> str:
    f = fingerprint(config)
    if np.max(np.abs(f - fingerprint(tbp()))) <= tol:
        return "TBP"
    if abs(r) < 1 and np.max(np.abs(f - fingerprint(fp(r)))) <= tol:
        return "FP"
    return "UNKNOWN"


def _common_x(r: float):
    """Real ``x`` solving both symmetric-branch equations at this ``r``."""
    cubic = np.roots([-1.0, 3.0, -(2 * r * r + 4), 2 * r * r - 4 * r])
    best = min(cubic, key=lambda v: abs(sym_radius(v, r)))
    if abs(best.imag) > 1e-9 or abs(sym_radius(best.real, r)) > 1e-9:
        return None
    return float(best.real)


def state_from_x(x: float, r: float) -> SpecialCaseState:
    """Rebuild angles from ``z^3 - x z^2 + x z - 1 = (z - 1)(z^2 + (1 - x) z + 1)``."""
    c = (x - 1) / 2
    if abs(c) > 1:
        raise InvalidParameter(f"x = {x} gives no unit-modulus roots")
    phi = math.acos(c)
    return SpecialCaseState((0.0, phi, -phi), r)


def elimination_polynomial() -> list:
    return poly_prod(*ELIMINATION_FACTORS)


def check_elimination_factorization(rs=None) -> float:
    """Ratio spread of the Sylvester resultant of the two symmetric equations to
    the printed factorization, over sample ``r`` values. A constant ratio means
    the factorization is right up to scale."""
    rs = np.linspace(-0.9, 0.9, 13) + 0.0123 if rs is None else np.asarray(rs)
    ratios = []
    for r in rs:
        p = [-1.0, 3.0, -(2 * r * r + 4), 2 * r * r - 4 * r]  # sym_angle, highest first
        q = [r, 2.0 - 2 * r, 8 * r**3 + 3 * r]  # t_consistency
        S = np.zeros((5, 5))
        for i in range(2):
            S[i, i : i + 4] = p
        for i in range(3):
            S[2 + i, i : i + 3] = q
        ratios.append(np.linalg.det(S) / horner(elimination_polynomial(), float(r)))
    ratios = np.array(ratios)
    return float(np.max(np.abs(ratios - ratios[0])) / abs(ratios[0]))


def solve_symmetric_branch():
    """Both nontrivial solutions of the ``x = y, t = 1`` branch.

    Returns
    -------
    list of SymmetricSolution
        ``r = -1/2`` (TBP) and ``r = r*``, the real root of ``6 r^3 + 3 r + 1``
        (FP), in increasing ``r``.
    """
    for fac in ELIMINATION_FACTORS:
        if len(fac) == 3 and discriminant_quadratic(fac) >= 0:
            raise ArithmeticError(f"quadratic factor {fac} has real roots")
    out = []
    for root, enc in real_roots(elimination_polynomial()):
        if enc[0] <= 0.0 <= enc[1]:
            continue
        if abs(root) >= 1:
            continue
        if abs(horner(FP_CUBIC_R.coefficients, root)) < 1e-12:
            root, enc = fp_root()
        x = _common_x(root)
        if x is None:
            continue
        st = state_from_x(x, root)
        cfg = embed(st)
        out.append(SymmetricSolution(root, enc, x, _label(cfg, root), st, energy(cfg)))
    return out


def _r0_eqs(th):
    d = th[..., :, None] - th[..., None, :]
    g = np.sum((np.cos(d) + 1) * np.sin(d), axis=-1)
    return np.concatenate([g, np.sum(np.cos(th), axis=-1, keepdims=True)], axis=-1)


def _r0_jac(th):
    d = th[..., :, None] - th[..., None, :]
    w = np.cos(2 * d) + np.cos(d)
    eye = np.eye(3, dtype=bool)
    w = np.where(eye, 0.0, w)
    top = np.where(eye, np.sum(w, axis=-1)[..., None], -w)
    return np.concatenate([top, -np.sin(th)[..., None, :]], axis=-2)


def solve_r0_slice(grid: int = 16, tol: float = 1e-12):
    """Critical states with the mirror pair at the poles (``r = 0``).

    Gauss-Newton on the three angle equations and the ``r`` equation from a
    full grid of starting angles. The ``r`` equation is not invariant under
    rotation about the poles, so no angle can be pinned. Returns the distinct
    angle triples (up to rotation) whose equator points are pairwise distinct.
    """
    g = np.linspace(0, TWO_PI, grid, endpoint=False) + 0.1
    th = np.stack(np.meshgrid(g, g, g, indexing="ij"), axis=-1).reshape(-1, 3)
    for _ in range(100):
        F = _r0_eqs(th)
        if np.max(np.abs(F)) < tol:
            break
        th = th - np.einsum("sij,sj->si", np.linalg.pinv(_r0_jac(th)), F)
    ok = np.max(np.abs(_r0_eqs(th)), axis=-1) < 1e-10
    sols = []
    for t in th[ok]:
        z = np.exp(1j * t)
        iu = np.triu_indices(3, 1)
        if np.min(np.abs(z[:, None] - z[None, :])[iu]) < 1e-6:
            continue
        key = np.sort(np.abs(np.angle(z[:, None] / z[None, :]))[iu])
        if not any(np.max(np.abs(key - k)) < 1e-6 for k, _ in sols):
            sols.append((key, t % TWO_PI))
    return [t for _, t in sols]


# ---------------------------------------------------------------------------
# Asymmetric branch


@dataclass
class AsymmetricReport:
    coefficients_positive: bool
    deflated_real_roots: list
    starts: int
    converged: int
    solutions: list
    asymmetric: list

    @property
    def passed(self) -> bool:
        return self.coefficients_positive and not self.deflated_real_roots and not self.asymmetric


class PolySystem:
    """Real polynomial system in ``(x, y, r)`` expanded into monomial tables.

    Besides values and the exact Jacobian it provides term magnitudes
    ``sum |c| |x|^a |y|^b |r|^c`` per equation, so convergence can be judged by
    relative backward error. An absolute residual test is meaningless here:
    every equation vanishes to fourth order at the origin.
    """

    def __init__(self, funcs):
        x, y, r = MultiPoly.variables(3)
        polys = [f(x, y, r).terms for f in funcs]
        lowered = {tuple(e - (i == v) for i, e in enumerate(k)) for p in polys for k in p for v in range(3) if k[v]}
        monos = sorted({k for p in polys for k in p} | lowered)
        index = {k: i for i, k in enumerate(monos)}
        self.exps = np.array(monos, dtype=int)
        self.maxdeg = int(self.exps.max())
        q = len(polys)
        self.C = np.zeros((len(monos), q))
        self.dC = np.zeros((3, len(monos), q))
        for j, p in enumerate(polys):
            for k, c in p.items():
                self.C[index[k], j] = c
                for v in range(3):
                    if k[v]:
                        lower = tuple(e - (i == v) for i, e in enumerate(k))
                        self.dC[v, index[lower], j] += c * k[v]
        self.absC = np.abs(self.C)

    def monomials(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        pw = np.ones(X.shape + (self.maxdeg + 1,))
        for d in range(1, self.maxdeg + 1):
            pw[..., d] = pw[..., d - 1] * X
        E = self.exps
        return pw[:, 0, E[:, 0]] * pw[:, 1, E[:, 1]] * pw[:, 2, E[:, 2]]

    def value(self, X, mono=None):
        mono = self.monomials(X) if mono is None else mono
        return mono @ self.C

    def magnitude(self, X, mono=None):
        mono = self.monomials(X) if mono is None else mono
        return np.abs(mono) @ self.absC

    def relative_residual(self, X, mono=None):
        mono = self.monomials(X) if mono is None else mono
        M = np.abs(mono) @ self.absC
        return np.max(np.abs(mono @ self.C) / np.where(M > 0, M, 1.0), axis=-1)

    def jacobian(self, X, mono=None):
        """``(S, equations, 3)``."""
        mono = self.monomials(X) if mono is None else mono
        return np.stack([mono @ self.dC[v] for v in range(3)], axis=-1)


ASYM_SYSTEM = PolySystem([t_consistency, radius_balance, lambda x, y, r: radius_balance(y, x, r), antisym_reduced])


def damped_newton(system: PolySystem, X0, rel_tol=1e-13, max_iter=200, box=(10.0, 10.0, 1.5)):
    """Batched Levenberg-Marquardt on an overdetermined polynomial system.

    Steps are accepted when they lower the max-norm residual. Iteration stops
    per start when the relative backward error drops below ``rel_tol``, the
    iterate leaves ``box``, or the damping blows up.

    Returns
    -------
    X : (S, 3) array of final points
    rel : (S,) relative backward errors
    converged : (S,) bool
    """
    X = np.array(X0, dtype=float)
    S = X.shape[0]
    mu = np.full(S, 1e-3)
    mono = system.monomials(X)
    F = system.value(X, mono)
    res = np.max(np.abs(F), axis=-1)
    rel = system.relative_residual(X, mono)
    active = np.ones(S, dtype=bool)
    bound = np.asarray(box)
    eye = np.eye(X.shape[1])
    for _ in range(max_iter):
        active &= rel > rel_tol
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        J = system.jacobian(X[idx])
        JT = np.swapaxes(J, 1, 2)
        g = np.einsum("sij,sj->si", JT, F[idx])
        step = -np.linalg.solve(JT @ J + mu[idx, None, None] * eye, g[..., None])[..., 0]
        trial = X[idx] + step
        tmono = system.monomials(trial)
        tF = system.value(trial, tmono)
        tres = np.max(np.abs(tF), axis=-1)
        ok = np.isfinite(tres) & (tres < res[idx])
        acc = idx[ok]
        X[acc] = trial[ok]
        F[acc] = tF[ok]
        res[acc] = tres[ok]
        rel[acc] = system.relative_residual(trial[ok], tmono[ok])
        mu[acc] = np.maximum(mu[acc] / 3, 1e-15)
        mu[idx[~ok]] *= 4
        escaped = np.any(np.abs(X[idx]) > bound, axis=1) | (mu[idx] > 1e8)
        active[idx[escaped]] = False
    return X, rel, rel <= rel_tol


def asymmetric_branch_certificate(starts: int = 10_000, seed: int = 0, coeffs=None, rel_tol: float = 1e-13):
    """Certificate plus seeded search for solutions with ``x != y``.

    (a) positivity of the transcribed degree-26 coefficients and an empty
    Sturm root set after dividing out ``r^4``; (b) damped Newton on
    ``(t_consistency, radius_balance, radius_balance_swap, antisym_reduced)`` from ``starts`` uniform points of the
    box ``|x|, |y| <= 3, |r| <= 1``. A converged point counts as asymmetric
    when ``|r| > 1e-6`` and ``|x - y| > 1e-6``.
    """
    cert = deg26_certificate(coeffs)
    positive = all(c > 0 for c in cert.coefficients if c != 0) and all(
        c == 0 for k, c in enumerate(cert.coefficients) if k % 2 == 1 or k < 4
    )
    deflated = real_roots(deflate_power(cert, 4))
    rng = np.random.default_rng(seed)
    X0 = rng.uniform([-3, -3, -1], [3, 3, 1], size=(starts, 3))
    X, _, conv = damped_newton(ASYM_SYSTEM, X0, rel_tol=rel_tol)
    sols = X[conv]
    asym = [tuple(map(float, s)) for s in sols if abs(s[2]) > 1e-6 and abs(s[0] - s[1]) > 1e-6]
    return AsymmetricReport(positive, deflated, starts, int(conv.sum()), [tuple(map(float, s)) for s in sols], asym)


# ---------------------------------------------------------------------------
# Geometry


def in_main_special_case(config: Configuration, tol: float = 1e-6) -> bool:
    """True if two points mirror each other across a plane holding the other three."""
    X = config.points
    n = config.n
    if n != 5:
        return False
    for a in range(n):
        for b in range(a + 1, n):
            d = X[a] - X[b]
            nd = np.linalg.norm(d)
            if nd < tol:
                continue
            u = d / nd
            rest = [k for k in range(n) if k not in (a, b)]
            if np.all(np.abs(X[rest] @ u) <= tol):
                return True
    return False


def certificate_values():
    """Dictionary with the printed polynomials used by the branch analysis."""
    return {
        "deg26": deg26_certificate(),
        "fp_cubic_r": FP_CUBIC_R,
        "fp_cubic_x": FP_CUBIC_X,
        "elimination": PolynomialCert(tuple(elimination_polynomial()), "symmetric branch elimination"),
    }
