import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sphere_eq.config import BIQUADRATIC, Configuration, InversePower, Log, fp, random_config, tbp, tetrahedron
from sphere_eq.equilibrium import (
    frame_residual,
    gradient_fd_check,
    residual_biquadratic,
    residual_general,
)
from sphere_eq.errors import DegeneratePair, InvalidParameter, NotNormalized
from sphere_eq.special_case import fp_root
from sphere_eq.spectral import normalize

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def test_tbp_is_critical():
    assert residual_general(tbp()).max_norm <= 1e-12
    assert residual_biquadratic(tbp()).max_norm <= 1e-12


def test_tetrahedron_is_critical():
    assert residual_biquadratic(tetrahedron()).max_norm <= 1e-12


def test_fp_critical_only_at_root():
    r, _ = fp_root()
    assert residual_general(fp(r)).max_norm <= 1e-9
    assert residual_general(fp(0.3)).max_norm > 1e-2


def test_multipliers():
    rep = residual_general(tbp())
    # mu_i = 1/2 sum_{j != i} h'(b_ij) b_ij with h' = 2(t + 1)
    B = tbp().points @ tbp().points.T
    H = 2 * (B + 1)
    np.fill_diagonal(H, 0)
    assert np.allclose(rep.multipliers, 0.5 * np.sum(H * B, axis=1))


def test_equivalence_chain_500():
    worst_half = worst_frame = worst_self = 0.0
    for k in range(500):
        cfg = random_config(5, 3, [3, k])
        g = residual_general(cfg).residual_vectors
        b = residual_biquadratic(cfg).residual_vectors
        worst_half = max(worst_half, float(np.max(np.abs(g - 2 * b))))
        worst_self = max(
            worst_self,
            float(np.max(np.abs(b - residual_biquadratic(cfg, include_self=False).residual_vectors))),
        )
        Y, sd = normalize(cfg)
        rotated = b @ sd.rotation
        # the decoupled form is the negative of the rotated biquadratic residual
        worst_frame = max(worst_frame, float(np.max(np.abs(frame_residual(Y, sd) + rotated))))
    assert worst_half <= 1e-12
    assert worst_frame <= 1e-9
    assert worst_self <= 1e-14


@given(seeds)
def test_tangency(seed):
    cfg = random_config(5, 3, seed)
    rep = residual_general(cfg)
    dots = np.abs(np.sum(rep.residual_vectors * cfg.points, axis=1))
    assert np.all(dots <= 1e-10 * np.linalg.norm(rep.residual_vectors, axis=1) + 1e-14)


def test_frame_residual_examples():
    Y, sd = normalize(tbp())
    assert np.max(np.abs(frame_residual(Y, sd))) <= 1e-10
    r, _ = fp_root()
    Y, sd = normalize(fp(r))
    assert np.max(np.abs(frame_residual(Y, sd))) <= 1e-8
    Y, sd = normalize(random_config(5, 3, 2))
    assert np.max(np.abs(frame_residual(Y, sd))) > 1e-2


def test_frame_residual_requires_normalized_frame():
    cfg = random_config(5, 3, 2)
    _, sd = normalize(cfg)
    with pytest.raises(NotNormalized):
        frame_residual(cfg, sd)


def test_gradient_fd_random():
    for k in range(20):
        assert gradient_fd_check(random_config(5, 3, [1, k]), step=1e-5) <= 1e-6


def test_gradient_fd_other_potentials():
    cfg = random_config(5, 3, 8)
    assert gradient_fd_check(cfg, Log(), step=1e-5) <= 1e-6
    assert gradient_fd_check(cfg, InversePower(1.0), step=1e-5) <= 1e-6


def test_gradient_fd_at_critical_point():
    assert gradient_fd_check(tbp(), step=1e-5) <= 1e-8


def test_gradient_fd_catches_sign_error():
    flipped = lambda c, p: -residual_general(c, p).residual_vectors
    dev = gradient_fd_check(random_config(5, 3, 4), step=1e-5, residual=flipped)
    assert abs(dev - 2.0) < 0.5


def test_gradient_fd_step_range():
    with pytest.raises(InvalidParameter):
        gradient_fd_check(tbp(), step=1e-2)


def test_singular_potential_on_repeated_points():
    cfg = Configuration([[1.0, 0, 0], [1.0, 0, 0], [0, 0, 1.0]])
    with pytest.raises(DegeneratePair):
        residual_general(cfg, Log())
    assert residual_general(cfg, BIQUADRATIC).max_norm >= 0


def test_poles_with_tilted_triangle_not_critical():
    # two poles plus three points on a non-equatorial parallel
    rng = np.random.default_rng(5)
    worst = np.inf
    for h in np.concatenate([np.linspace(-0.9, -0.1, 9), np.linspace(0.1, 0.9, 9)]):
        for _ in range(10):
            phi = rng.uniform(0, 2 * np.pi, 3)
            ring = np.sqrt(1 - h * h) * np.column_stack([np.cos(phi), np.sin(phi)])
            X = np.vstack([[0, 0, 1.0], [0, 0, -1.0], np.column_stack([ring, np.full(3, h)])])
            worst = min(worst, residual_general(Configuration(X)).max_norm)
    assert worst > 1e-3


def test_interface_aliases():
    from sphere_eq.equilibrium import crit5_residual
    from sphere_eq.spectral import crit7_residual, secular_residual

    assert crit5_residual is frame_residual and crit7_residual is secular_residual
