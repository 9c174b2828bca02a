import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from sphere_eq.config import energy, fingerprint, fp, random_config, random_rotation, tbp
from sphere_eq.equilibrium import residual_general
from sphere_eq.errors import DenominatorVanish, InvalidParameter, ZeroProduct
from sphere_eq.special_case import (
    ANGLE_SCALE,
    RADIUS_SCALE,
    SpecialCaseState,
    asymmetric_branch_certificate,
    check_elimination_factorization,
    complex_residuals,
    embed,
    energy_gradient_sc,
    energy_sc,
    angle_residuals,
    radius_residual,
    antisym_reduced,
    eq_antisym,
    fp_energy_formula,
    fp_root,
    gradient_sc,
    in_main_special_case,
    quartic,
    solve_r0_slice,
    solve_symmetric_branch,
    system_residuals,
    transform,
)

angles = st.floats(min_value=0.0, max_value=2 * math.pi, allow_nan=False)
radii = st.floats(min_value=-0.95, max_value=0.95, allow_nan=False)


def random_states(count, seed):
    rng = np.random.default_rng(seed)
    return [SpecialCaseState(tuple(rng.uniform(0, 2 * np.pi, 3)), rng.uniform(-0.95, 0.95)) for _ in range(count)]


@pytest.fixture(scope="module")
def solutions():
    return {s.label: s for s in solve_symmetric_branch()}


# --- states and energy ----------------------------------------------------------


def test_state_validation():
    with pytest.raises(InvalidParameter):
        SpecialCaseState((0, 1, 2), 1.0)
    s = SpecialCaseState((-1.0, 7.0, 0.0), 0.2)
    assert all(0 <= a < 2 * math.pi for a in s.thetas)


def test_embed_tbp_at_r0():
    s = SpecialCaseState((0, 2 * math.pi / 3, 4 * math.pi / 3), 0.0)
    assert np.max(np.abs(fingerprint(embed(s)) - fingerprint(tbp()))) <= 1e-12
    assert abs(energy_sc(s) - 6.75) <= 1e-12


def test_embed_fp_shape():
    r, _ = fp_root()
    phi = math.acos(r)
    s = SpecialCaseState((0.0, phi, -phi), r)
    assert np.max(np.abs(fingerprint(embed(s)) - fingerprint(fp(r)))) <= 1e-12


def test_embed_mirror_pair():
    s = random_states(1, 0)[0]
    X = embed(s).points
    assert np.allclose(X[3] * [1, 1, -1], X[4])
    assert in_main_special_case(embed(s))


def test_coincident_equator_points():
    assert energy_sc(SpecialCaseState((1.0, 1.0, 1.0), 0.0)) == pytest.approx(18.0, abs=1e-12)


def test_energy_routes_agree_1000():
    worst = max(abs(energy_sc(s) - energy(embed(s))) for s in random_states(1000, 1))
    assert worst <= 1e-12


# --- gradient ----------------------------------------------------------------------


def test_gradient_zero_at_solutions(solutions):
    assert np.max(np.abs(gradient_sc(SpecialCaseState((0, 2 * math.pi / 3, 4 * math.pi / 3), 0.0)))) <= 1e-12
    assert np.max(np.abs(gradient_sc(solutions["TBP"].state))) <= 1e-12
    assert np.max(np.abs(gradient_sc(solutions["FP"].state))) <= 1e-9


def test_gradient_finite_differences():
    h = 1e-5
    worst = 0.0
    for s in random_states(100, 2):
        v = np.array(list(s.thetas) + [s.r])
        fd = np.empty(4)
        for k in range(4):
            e = np.zeros(4)
            e[k] = h
            up = SpecialCaseState(tuple((v + e)[:3]), (v + e)[3])
            dn = SpecialCaseState(tuple((v - e)[:3]), (v - e)[3])
            fd[k] = (energy_sc(up) - energy_sc(dn)) / (2 * h)
        an = energy_gradient_sc(s)
        worst = max(worst, float(np.max(np.abs(fd - an)) / max(1.0, np.max(np.abs(an)))))
    assert worst <= 1e-6


def test_gradient_chain_rule():
    for s in random_states(50, 3):
        X = embed(s).points
        R = residual_general(embed(s)).residual_vectors
        th = np.asarray(s.thetas)
        dth = np.column_stack([-np.sin(th), np.cos(th), np.zeros(3)])
        h = math.sqrt(1 - s.r**2)
        dr = np.array([[1.0, 0.0, -s.r / h], [1.0, 0.0, s.r / h]])
        chain = np.append(np.sum(R[:3] * dth, axis=1), np.sum(R[3:] * dr))
        assert np.allclose(chain, energy_gradient_sc(s), atol=1e-9)
        assert X.shape == (5, 3)


# --- complex form --------------------------------------------------------------------


@given(angles, angles, angles, radii)
def test_complex_scaling(a, b, c, r):
    s = SpecialCaseState((a, b, c), r)
    g = gradient_sc(s)
    e14, e15 = complex_residuals(s)
    assert np.allclose(e14, ANGLE_SCALE * g[:3], atol=1e-10)
    assert abs(e15 - RADIUS_SCALE * g[3]) <= 1e-10


def test_complex_residuals_vanish_at_tbp(solutions):
    e14, e15 = complex_residuals(solutions["TBP"].state)
    assert np.max(np.abs(e14)) <= 1e-12 and abs(e15) <= 1e-12


def test_power_sum_identity_at_fp(solutions):
    s = solutions["FP"].state
    z, r = s.z, s.r
    lhs = r * np.sum(z**2) + 2 * np.sum(z)
    assert abs(lhs - (-8 * r**3 - 3 * r)) <= 1e-9


def test_transform_examples():
    tv = transform([1, 1j, -1j])
    assert np.allclose([tv.x, tv.y, tv.t], [1, 1, 1])
    w = np.exp(2j * np.pi / 3)
    tv = transform([1, w, w * w])
    assert np.allclose([tv.x, tv.y, tv.t], [0, 0, 1], atol=1e-15)
    with pytest.raises(ZeroProduct):
        transform([0, 1, 1])


@given(angles, angles, angles)
def test_transform_on_shell(a, b, c):
    z = np.exp(1j * np.array([a, b, c]))
    tv = transform(z)
    assert abs(tv.y - np.conj(tv.x)) <= 1e-12
    assert abs(abs(tv.t) - 1) <= 1e-12
    assert abs(tv.s2 - np.sum(z**2)) <= 1e-12
    assert abs(tv.sm2 - np.sum(z**-2)) <= 1e-12


def test_quartic_is_z2_times_angle_equation():
    rng = np.random.default_rng(4)
    for _ in range(50):
        z = rng.normal(size=3) + 1j * rng.normal(size=3)  # off the unit circle on purpose
        r = rng.uniform(-1, 1)
        tv = transform(z, r)
        assert np.allclose(quartic(tv, z), z**2 * angle_residuals(z, r), rtol=1e-9, atol=1e-9)


def test_quartic_roots_at_fp(solutions):
    s = solutions["FP"].state
    tv = transform(s.z, s.r)
    assert np.max(np.abs(quartic(tv, s.z))) <= 1e-9
    assert abs(quartic(tv, tv.z0)) <= 1e-9


def test_quartic_coefficients_never_all_vanish():
    worst = min(
        max(abs(c) for c in transform(s.z, s.r).coefficients()) for s in random_states(1000, 5)
    )
    assert worst > 1e-6


def test_coefficients_need_r():
    with pytest.raises(InvalidParameter):
        transform([1, 1j, -1j]).coefficients()


# --- (x, y, t, r) system ------------------------------------------------------------------


def _xytr(state):
    tv = transform(state.z)
    return tv.x, tv.y, tv.t, state.r


def test_system_at_solutions(solutions):
    # antisym_reduced carries the division by (x - y) and is the asymmetric-branch equation
    res = system_residuals(*_xytr(solutions["TBP"].state))
    assert max(abs(v) for k, v in res.items() if k != "antisym_reduced") <= 1e-10
    assert res["antisym_reduced"] == pytest.approx(12.25, abs=1e-9)
    res = system_residuals(*_xytr(solutions["FP"].state))
    assert max(abs(v) for k, v in res.items() if k != "antisym_reduced") <= 1e-9


def test_antisym_reduced_is_divided_antisymmetric_equation():
    rng = np.random.default_rng(11)
    for _ in range(20):
        x, y, r = rng.uniform(-2, 2, 3)
        res = system_residuals(x, y, 1.0, r)
        assert res["antisym"] == pytest.approx(2 * r * (x - y) * res["antisym_reduced"], rel=1e-9, abs=1e-9)


def test_system_at_exact_tbp_values():
    assert abs(system_residuals(1.0, 1.0, 1.0, -0.5)["radius_balance"]) <= 1e-12


def test_denominator_guard():
    # den2 = 3 y^2 + 2 r^2 vanishes at y = r = 0
    with pytest.raises(DenominatorVanish) as info:
        system_residuals(1.0, 0.0, 1.0, 0.0)
    assert info.value.expression in ("den1", "den2", "den3")


@given(
    st.floats(-3, 3), st.floats(-3, 3), st.floats(0.1, 3), st.floats(-1, 1).filter(lambda v: abs(v) > 1e-3)
)
def test_sign_symmetry(x, y, t, r):
    try:
        a = system_residuals(x, y, t, r)
        b = system_residuals(-x, -y, -t, -r)
    except DenominatorVanish:
        return
    for k in a:
        assert abs(abs(a[k]) - abs(b[k])) <= 1e-12 * max(1.0, abs(a[k]))


def test_sign_symmetry_complex_form():
    for s in random_states(20, 6):
        z, r = s.z, s.r
        assert np.allclose(angle_residuals(-z, -r), angle_residuals(z, r), atol=1e-12)
        assert abs(radius_residual(-z, -r) + radius_residual(z, r)) <= 1e-12


def test_printed_factor_relation():
    x, y, r = sp.symbols("x y r")
    assert sp.expand(eq_antisym(x, y, r) - 2 * r * (x - y) * antisym_reduced(x, y, r)) == 0


def test_symmetric_slice_t_is_one():
    for phi in np.linspace(0.1, 3.0, 15):
        z = np.exp(1j * np.array([0.0, phi, -phi]))
        tv = transform(z)
        for r in (-0.7, 0.2, 0.9):
            x = tv.x.real
            assert abs(x * (x * x + 2 * r * r) / (x * (x * x + 2 * r * r)) - 1) <= 1e-10
        assert abs(tv.t - 1) <= 1e-12 and abs(tv.x - tv.y) <= 1e-12


# --- symmetric branch and certificates ------------------------------------------------------


def test_two_symmetric_solutions(solutions):
    assert set(solutions) == {"TBP", "FP"}
    t = solutions["TBP"]
    assert t.r == pytest.approx(-0.5, abs=1e-14)
    assert t.x == pytest.approx(1.0, abs=1e-12)
    z = np.sort_complex(np.round(t.state.z, 12))
    assert np.allclose(z, np.sort_complex(np.array([1, 1j, -1j])), atol=1e-12)
    assert t.energy == pytest.approx(6.75, abs=1e-12)
    f = solutions["FP"]
    lo, hi = f.enclosure
    assert -0.2864 < lo <= f.r <= hi < -0.2863
    assert hi - lo <= 1e-14
    assert f.x == pytest.approx(2 * f.r + 1, abs=1e-10)
    assert abs(3 * f.x**3 - 9 * f.x**2 + 15 * f.x - 5) <= 1e-10


def test_fp_energy_ordering(solutions):
    r, _ = fp_root()
    e = energy(fp(r))
    assert e == pytest.approx(fp_energy_formula(r), abs=1e-12)
    assert e == pytest.approx(solutions["FP"].energy, abs=1e-12)
    assert e - 6.75 > 0.01
    assert e < 7.0  # the direct evaluation, not the 7.9 quoted in print


def test_elimination_factorization():
    assert check_elimination_factorization() <= 1e-9


def test_r0_slice_only_equilateral():
    sols = solve_r0_slice()
    assert len(sols) == 1
    th = sols[0]
    gaps = np.sort(np.diff(np.sort(np.mod(th, 2 * np.pi))))
    assert np.allclose(np.sort(np.append(gaps, 2 * np.pi - gaps.sum())), 2 * np.pi / 3, atol=1e-9)


def test_asymmetric_certificate_small():
    rep = asymmetric_branch_certificate(starts=500, seed=3)
    assert rep.coefficients_positive
    assert rep.deflated_real_roots == []
    assert rep.asymmetric == []
    assert rep.passed
    assert rep.converged == len(rep.solutions) > 0


def test_asymmetric_certificate_flags_corruption():
    from sphere_eq.polynomials import DEG26_COEFFS

    bad = dict(DEG26_COEFFS)
    bad[10] = -bad[10]
    rep = asymmetric_branch_certificate(starts=10, seed=0, coeffs=bad)
    assert not rep.coefficients_positive and not rep.passed


def test_mirror_form_detection():
    r, _ = fp_root()
    rng = np.random.default_rng(8)
    assert in_main_special_case(tbp().rotated(random_rotation(3, rng)))
    assert in_main_special_case(fp(r).rotated(random_rotation(3, rng)))
    assert not in_main_special_case(random_config(5, 3, 1))
    assert not in_main_special_case(random_config(4, 3, 1))
