import numpy as np
import pytest

import ekinv
from ekinv import (
    Ensemble,
    Mesh1D,
    adaptive_first_member,
    brownian_bridge_prior,
    kl_initial_ensemble,
    mapped_deviations,
    residual_split,
    subspace_distance,
)
from ekinv.persist import load_eigenpairs, save_eigenpairs, load_vector, save_vector


@pytest.fixture(scope="module")
def prior():
    return brownian_bridge_prior(Mesh1D(256))


def test_analytic_spectrum(prior):
    j = np.arange(1, prior.n_modes + 1)
    np.testing.assert_allclose(prior.eigenvalues, 10.0 / j**2, rtol=1e-12)
    assert prior.eigenvalues[0] == pytest.approx(10.0)


def test_modes_l2_orthonormal(prior):
    gram = np.pi / 256 * (prior.modes[:40] @ prior.modes[:40].T)
    assert np.abs(gram - np.eye(40)).max() <= 1e-10


def test_kl_ensemble_deterministic(prior):
    a = kl_initial_ensemble(prior, 8, seed=5)
    b = kl_initial_ensemble(prior, 8, seed=5)
    np.testing.assert_array_equal(a, b)
    c = kl_initial_ensemble(prior, 8, seed=6)
    assert np.abs(a - c).max() > 0


def test_kl_members_orthogonal(prior):
    members = kl_initial_ensemble(prior, 10, seed=27)
    gram = np.pi / 256 * (members @ members.T)
    off = gram - np.diag(np.diag(gram))
    assert np.abs(off).max() <= 1e-10


def test_kl_small_span_inside_large_span(prior):
    small = kl_initial_ensemble(prior, 5, seed=27)
    large = kl_initial_ensemble(prior, 50, seed=27)
    np.testing.assert_array_equal(small, large[:5])
    assert subspace_distance(Ensemble(small), large) <= 1e-12
    # and strictly smaller: the larger ensemble leaves the small span
    assert subspace_distance(Ensemble(large), small) > 1e-3


def test_kl_requires_enough_modes():
    prior3 = brownian_bridge_prior(Mesh1D(256), n_modes=3)
    with pytest.raises(ValueError):
        kl_initial_ensemble(prior3, 4, seed=0)


def test_truncate_and_cov_actions(prior):
    small = prior.truncate(3)
    assert small.n_modes == 3
    rng = np.random.default_rng(0)
    x = rng.standard_normal(prior.dim)
    cov = small.cov_matrix()
    np.testing.assert_allclose(small.cov_apply(x), cov @ x, atol=1e-12)
    assert small.cov_quadratic(x) == pytest.approx(x @ cov @ x, rel=1e-12)
    np.testing.assert_allclose(small.cov_diag(), np.diag(cov), atol=1e-12)


def test_sample_is_mode_combination(prior):
    small = prior.truncate(2)
    draw = small.sample(np.random.default_rng(1))
    coeffs = np.linalg.lstsq(small.modes.T, draw, rcond=None)[0]
    np.testing.assert_allclose(coeffs @ small.modes, draw, atol=1e-12)


def test_adaptive_first_member_kills_perp(linear1d):
    prior = linear1d.prior
    prob = linear1d.prob
    others = kl_initial_ensemble(prior, 5, seed=27)[1:]
    alphas = np.array([0.3, -0.2, 0.5, 0.1, -0.4])
    first = adaptive_first_member(prob.truth, others, alphas)
    ens = Ensemble(np.vstack([first, others]))
    basis0 = mapped_deviations(ens, prob.forward.linear_matrix)
    split = residual_split(ens, prob.truth, basis0, prob.noise,
                           prob.forward.linear_matrix)
    perp_norm = np.sqrt(prob.noise.norm_sq(split[0].perp))
    assert perp_norm <= 1e-10


def test_adaptive_first_member_zero_alphas_returns_truth():
    rng = np.random.default_rng(2)
    others = rng.standard_normal((1, 4))
    truth = rng.standard_normal(4)
    first = adaptive_first_member(truth, others, np.zeros(2))
    np.testing.assert_allclose(first, truth, atol=1e-14)


def test_adaptive_first_member_degenerate_coefficients():
    others = np.ones((1, 3))
    # 1 - alpha_1 + (alpha_1 + alpha_2)/2 = 0 for alpha = (2, 0)
    with pytest.raises(ValueError):
        adaptive_first_member(np.zeros(3), others, np.array([2.0, 0.0]))


def test_prior_spec_validation():
    with pytest.raises(ValueError):
        ekinv.PriorSpec(ekinv.PriorKind.INVERSE_SHIFTED_LAPLACIAN,
                        np.array([1.0, 2.0]), np.ones((2, 4)), mass=1.0)
    with pytest.raises(ValueError):
        ekinv.PriorSpec(ekinv.PriorKind.INVERSE_SHIFTED_LAPLACIAN,
                        np.array([1.0, -1.0]), np.ones((2, 4)), mass=1.0)


def test_persist_roundtrips(tmp_path, prior):
    vec_path = str(tmp_path / "truth.csv")
    vec = prior.sample(np.random.default_rng(3))
    save_vector(vec_path, vec)
    np.testing.assert_array_equal(load_vector(vec_path), vec)

    eig_path = str(tmp_path / "eigenpairs")
    save_eigenpairs(eig_path, prior.eigenvalues[:4], prior.modes[:4])
    lam, modes = load_eigenpairs(eig_path)
    np.testing.assert_array_equal(lam, prior.eigenvalues[:4])
    np.testing.assert_array_equal(modes, prior.modes[:4])
