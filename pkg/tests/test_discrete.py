import numpy as np
import pytest

import ekinv
from ekinv import (
    DiscreteConfig,
    Ensemble,
    FlowConfig,
    ForwardMap,
    InverseProblem,
    NoiseModel,
    SigmaMode,
    enkf_update,
    integrate,
    kl_initial_ensemble,
    run_discrete,
    subspace_distance,
)


def scalar_problem(sigma_mode=SigmaMode.ZERO):
    fwd = ForwardMap.from_matrix(np.array([[1.0]]))
    return InverseProblem(fwd, np.array([1.0]),
                          NoiseModel(np.array([[1.0]]), sigma_mode))


def test_config_defaults_to_smc_schedule():
    cfg = DiscreteConfig(n_steps=200)
    assert cfg.step_size == pytest.approx(1.0 / 200)
    with pytest.raises(ValueError):
        DiscreteConfig(n_steps=0)
    with pytest.raises(ValueError):
        DiscreteConfig(n_steps=4, step_size=-1.0)


def test_update_leaves_identical_members_unchanged():
    prob = scalar_problem(SigmaMode.EQUAL_GAMMA)
    ens = Ensemble([[2.0], [2.0], [2.0]])
    cfg = DiscreteConfig(n_steps=1, perturb_obs=True, rng_seed=3)
    out = enkf_update(ens, prob, cfg)
    np.testing.assert_array_equal(out.members, ens.members)


def test_update_single_member_unchanged():
    prob = scalar_problem()
    out = enkf_update(Ensemble([[5.0]]), prob, DiscreteConfig(n_steps=1))
    np.testing.assert_array_equal(out.members, [[5.0]])


def test_update_scalar_hand_oracle():
    # A = 1, Gamma = 1, h = 1, members {0, 2}, y = 1:
    # C_pp = C_up = 1, gain = 1/(1 + 1) = 1/2, so updates are
    # 0 + (1 - 0)/2 = 0.5 and 2 + (1 - 2)/2 = 1.5.
    prob = scalar_problem()
    out = enkf_update(Ensemble([[0.0], [2.0]]), prob,
                      DiscreteConfig(n_steps=1))
    np.testing.assert_allclose(out.members, [[0.5], [1.5]], atol=1e-14)


def test_run_single_step_matches_update():
    prob = scalar_problem()
    ens = Ensemble([[0.0], [2.0]])
    cfg = DiscreteConfig(n_steps=1)
    traj = run_discrete(prob, ens, cfg)
    assert len(traj.ensembles) == 2
    np.testing.assert_array_equal(
        traj.final_ensemble.members,
        enkf_update(ens, prob, cfg).members,
    )


def test_endpoint_first_order_in_h(linear1d_small):
    # The n-step map converges to the continuous flow endpoint at t = 1
    # with first-order accuracy in h.
    prob = linear1d_small.prob
    ens0 = Ensemble(kl_initial_ensemble(linear1d_small.prior, 5, seed=27))
    reference = integrate(prob, ens0,
                          FlowConfig(1.0, 1e-5, record_every=10**9))
    ref_members = reference.final_ensemble.members
    errors = []
    for k in (4, 5, 6, 7):
        traj = run_discrete(prob, ens0,
                            DiscreteConfig(n_steps=2**k, record_every=2**k))
        errors.append(np.linalg.norm(traj.final_ensemble.members - ref_members))
    ratios = np.array(errors[:-1]) / np.array(errors[1:])
    assert np.all((ratios > 1.6) & (ratios < 2.4))


def test_mean_misfit_nonincreasing(linear1d):
    # Discrete shadow of the misfit decay, h = 2^-6 schedule.
    prob = linear1d.prob
    ens0 = Ensemble(kl_initial_ensemble(linear1d.prior, 5, seed=27))
    traj = run_discrete(prob, ens0, DiscreteConfig(n_steps=64))
    phi_mean = [
        ekinv.misfit_phi(ekinv.ensemble_mean(ens), prob)
        for ens in traj.ensembles
    ]
    diffs = np.diff(phi_mean)
    assert np.all(diffs <= 1e-12 * (1.0 + np.abs(phi_mean[:-1])))
    # member-aggregate misfit decays as well
    assert np.all(np.diff(traj.column("phi_mean")) <= 1e-10)


def test_deterministic_without_perturbation(linear1d):
    ens0 = Ensemble(kl_initial_ensemble(linear1d.prior, 4, seed=27))
    cfg = DiscreteConfig(n_steps=20, rng_seed=1)
    a = run_discrete(linear1d.prob, ens0, cfg)
    b = run_discrete(linear1d.prob, ens0, cfg)
    np.testing.assert_array_equal(a.final_ensemble.members,
                                  b.final_ensemble.members)


def test_perturbed_runs_reproducible_and_seed_sensitive():
    setup = ekinv.build_linear1d(sigma_mode=SigmaMode.EQUAL_GAMMA)
    ens0 = Ensemble(kl_initial_ensemble(setup.prior, 4, seed=27))
    cfg = DiscreteConfig(n_steps=10, perturb_obs=True, rng_seed=7)
    a = run_discrete(setup.prob, ens0, cfg)
    b = run_discrete(setup.prob, ens0, cfg)
    np.testing.assert_array_equal(a.final_ensemble.members,
                                  b.final_ensemble.members)
    other = run_discrete(setup.prob, ens0,
                         DiscreteConfig(n_steps=10, perturb_obs=True,
                                        rng_seed=8))
    assert np.abs(a.final_ensemble.members
                  - other.final_ensemble.members).max() > 0


def test_subspace_distance_basics(linear1d):
    members = kl_initial_ensemble(linear1d.prior, 5, seed=27)
    combo = Ensemble(np.array([0.3 * members[0] - 1.2 * members[3]]))
    assert subspace_distance(combo, members) <= 1e-12
    outside = Ensemble(np.array([linear1d.prior.modes[10]]))
    assert subspace_distance(outside, members) > 0.9
    with pytest.raises(ValueError):
        subspace_distance(combo, np.empty((0, 255)))


def test_subspace_invariance_100_steps(linear1d):
    ens0 = Ensemble(kl_initial_ensemble(linear1d.prior, 5, seed=27))
    traj = run_discrete(linear1d.prob, ens0,
                        DiscreteConfig(n_steps=100, record_every=100))
    assert subspace_distance(traj.final_ensemble, ens0.members) <= 1e-10


def test_inflated_step_leaves_subspace(linear1d):
    ens0 = Ensemble(kl_initial_ensemble(linear1d.prior, 5, seed=27))
    cfg = ekinv.InflationConfig(alpha=1.0, prior=linear1d.prior)
    velocity = ekinv.inflated_drift(ens0, linear1d.prob, cfg)
    stepped = Ensemble(ens0.members + (1.0 / 200) * velocity)
    assert subspace_distance(stepped, ens0.members) > 1e-6
