import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sphere_eq.config import Configuration, energy, fp, gram, octahedron, random_config, tbp
from sphere_eq.errors import AmbiguousZero, PoleCollision
from sphere_eq.special_case import fp_root
from sphere_eq.spectral import (
    SpectralData,
    alphas,
    classify_case,
    secular_residual,
    jacobi_eigh,
    normalize,
    spectral_data,
    spectral_energy,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


@given(st.integers(min_value=1, max_value=4), seeds)
def test_jacobi_matches_lapack(m, seed):
    A = np.random.default_rng(seed).normal(size=(m, m))
    A = A + A.T
    w, V = jacobi_eigh(A)
    assert np.all(np.diff(w) <= 0)
    assert np.allclose(np.sort(w), np.linalg.eigvalsh(A), atol=1e-12)
    assert np.allclose(V.T @ V, np.eye(m), atol=1e-12)
    assert np.allclose(A @ V, V * w, atol=1e-11)


def test_jacobi_sign_convention():
    _, V = jacobi_eigh(np.diag([1.0, 3.0, 2.0]) + 0.1)
    for k in range(3):
        j = np.argmax(np.abs(V[:, k]))
        assert V[j, k] >= 0


def test_tbp_spectrum():
    cfg, sd = normalize(tbp())
    assert np.allclose(sd.lambdas, [2.0, 1.5, 1.5], atol=1e-12)
    assert np.allclose(sd.centroid, 0.0, atol=1e-12)
    assert abs(spectral_energy(sd, 5, 3) - 6.75) <= 1e-12


@pytest.mark.parametrize("r", [-0.6, -0.2864, 0.1, 0.5])
def test_fp_spectrum(r):
    _, sd = normalize(fp(r))
    want = np.sort([1 + 4 * r * r, 2 * (1 - r * r), 2 * (1 - r * r)])[::-1]
    assert np.allclose(sd.lambdas, want, atol=1e-12)
    # centroid lies along the apex axis: one nonzero component of size |1 + 4r|
    assert np.isclose(np.linalg.norm(sd.centroid), abs(1 + 4 * r), atol=1e-12)


def test_octahedron_witness():
    _, sd = normalize(octahedron())
    assert np.linalg.norm(sd.centroid) <= 1e-12
    assert np.max(np.abs(sd.lambdas - 2.0)) <= 1e-12
    assert abs(spectral_energy(sd, 6, 3) - 12.0) <= 1e-12


def test_planar_lower_bound_value():
    sd = SpectralData(np.array([2.5, 2.5]), np.zeros(2), np.zeros(5), np.eye(2))
    assert spectral_energy(sd, 5, 2) == 35 / 4


def test_spectral_identity_1000():
    worst = 0.0
    for k in range(1000):
        cfg = random_config(5, 3, [9, k])
        sd = spectral_data(cfg)
        worst = max(worst, abs(spectral_energy(sd, 5, 3) - energy(cfg)))
        assert abs(np.sum(sd.lambdas) - 5) <= 1e-10
    assert worst <= 1e-10


@given(seeds)
def test_normalize_invariants(seed):
    cfg = random_config(5, 3, seed)
    Y, sd = normalize(cfg)
    G = Y.points.T @ Y.points
    assert np.max(np.abs(G - np.diag(np.diag(G)))) <= 1e-10
    assert np.allclose(np.diag(G), sd.lambdas, atol=1e-10)
    assert np.allclose(sd.rotation.T @ sd.rotation, np.eye(3), atol=1e-10)
    assert np.all(sd.lambdas >= 0)
    assert abs(energy(Y) - energy(cfg)) <= 1e-12
    # B Y = Y Lambda: the columns are eigenvectors of the Gram matrix
    assert np.allclose(gram(Y) @ Y.points, Y.points * sd.lambdas, atol=1e-9)


def test_alphas_rows():
    a = alphas(gram(tbp()))
    assert np.allclose(a[:2], 2.0) and np.allclose(a[2:], 1.5)
    same = Configuration(np.tile([0.0, 0.0, 1.0], (4, 1)))
    assert np.allclose(alphas(gram(same)), 8.0)


def test_case_labels():
    assert classify_case(spectral_data(tbp())).zero_count == 3
    r, _ = fp_root()
    sd = spectral_data(fp(r))
    assert classify_case(sd).zero_count == 2
    assert sd.as_dict()["case"] == 2
    assert classify_case(spectral_data(random_config(5, 3, 1))).zero_count == 0


def test_ambiguous_band():
    sd = SpectralData(np.ones(3), np.array([0.5, 3e-8, 0.0]), np.zeros(5), np.eye(3))
    with pytest.raises(AmbiguousZero):
        classify_case(sd, 1e-8)
    assert classify_case(sd, 1e-6).zero_count == 2
    assert sd.as_dict()["case"] == "ambiguous"
    with pytest.raises(ValueError):
        classify_case(sd, 0.0)


def _bisect_root(a, lo, hi):
    f = lambda lam: np.sum(1 / (a - lam)) - 1
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if (f(mid) > 0) == (f(lo) > 0):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_secular_bisection_oracle():
    a = np.arange(3.0, 8.0)
    # g -> -1 as lambda -> -inf and -> +inf just below alpha_1 = 3
    lam = _bisect_root(a, -100.0, 3.0 - 1e-12)
    assert abs(secular_residual(a, lam)) <= 1e-10


def test_secular_at_fp_and_perturbed():
    r, _ = fp_root()
    cfg, sd = normalize(fp(r))
    k = int(np.argmax(np.abs(sd.centroid)))
    assert abs(secular_residual(sd.alphas, sd.lambdas[k])) <= 1e-8
    X = fp(r).points.copy()
    X[1] += [0.0, 0.0, 1e-2]
    _, sd2 = normalize(Configuration(X / np.linalg.norm(X, axis=1, keepdims=True)))
    k2 = int(np.argmax(np.abs(sd2.centroid)))
    assert abs(secular_residual(sd2.alphas, sd2.lambdas[k2])) > 1e-4


def test_secular_pole_collision():
    with pytest.raises(PoleCollision):
        secular_residual([1.0, 2.0], 2.0)
