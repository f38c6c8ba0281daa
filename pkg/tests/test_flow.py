import numpy as np
import pytest

import ekinv
from ekinv import (
    BlowUpError,
    Ensemble,
    FlowConfig,
    ForwardMap,
    InverseProblem,
    NoiseModel,
    Scheme,
    SigmaMode,
    drift_general,
    drift_linear_gradflow,
    integrate,
    kl_initial_ensemble,
    misfit_phi,
    subspace_distance,
)


def scalar_problem():
    fwd = ForwardMap.from_matrix(np.array([[1.0]]))
    return InverseProblem(fwd, np.array([1.0]), NoiseModel(np.array([[1.0]])))


def test_config_validation():
    with pytest.raises(ValueError):
        FlowConfig(t_end=-1.0, dt=0.1)
    with pytest.raises(ValueError):
        FlowConfig(t_end=1.0, dt=0.0)
    with pytest.raises(ValueError):
        FlowConfig(t_end=0.5, dt=1.0)
    assert FlowConfig(t_end=0.0, dt=1.0).n_steps == 0
    with pytest.raises(ValueError):
        FlowConfig(t_end=1.0, dt=0.3).n_steps


def test_drift_zero_for_identical_members():
    prob = scalar_problem()
    ens = Ensemble([[3.0], [3.0]])
    assert np.all(drift_general(ens, prob) == 0)


def test_drift_zero_at_exact_fit():
    fwd = ForwardMap.from_matrix(np.array([[1.0, 0.0]]))
    prob = InverseProblem(fwd, np.array([2.0]), NoiseModel.identity(1))
    ens = Ensemble([[2.0, 1.0], [2.0, -4.0]])
    np.testing.assert_allclose(drift_general(ens, prob), 0.0, atol=1e-14)
    np.testing.assert_allclose(drift_linear_gradflow(ens, prob), 0.0,
                               atol=1e-14)


def test_gradflow_scalar_hand_values():
    # C(u) = 1 and D_Phi = u - 1, so members {0, 2} move with (+1, -1).
    prob = scalar_problem()
    ens = Ensemble([[0.0], [2.0]])
    np.testing.assert_allclose(drift_linear_gradflow(ens, prob),
                               [[1.0], [-1.0]], atol=1e-14)


def test_gradflow_single_member_zero():
    prob = scalar_problem()
    assert np.all(drift_linear_gradflow(Ensemble([[5.0]]), prob) == 0)


def test_gradflow_requires_linear_map():
    fwd = ForwardMap(evaluate=lambda u: u**2, out_dim=1)
    prob = InverseProblem(fwd, np.zeros(1), NoiseModel.identity(1))
    with pytest.raises(ValueError):
        drift_linear_gradflow(Ensemble([[1.0]]), prob)


def test_drift_equivalence_random_ensembles(linear1d_small):
    prob = linear1d_small.prob
    rng = np.random.default_rng(33)
    worst = 0.0
    for _ in range(100):
        ens = Ensemble(rng.standard_normal((6, 31)))
        a = drift_general(ens, prob)
        b = drift_linear_gradflow(ens, prob)
        worst = max(worst, np.linalg.norm(a - b)
                    / max(np.linalg.norm(a), 1e-30))
    assert worst <= 1e-12


def test_zero_horizon_returns_initial(linear1d_small):
    ens0 = Ensemble(kl_initial_ensemble(linear1d_small.prior, 3, seed=1))
    traj = integrate(linear1d_small.prob, ens0, FlowConfig(0.0, 0.5))
    assert len(traj.ensembles) == 1
    np.testing.assert_array_equal(traj.final_ensemble.members, ens0.members)


def test_heun_requires_zero_sigma():
    setup = ekinv.build_linear1d(sigma_mode=SigmaMode.EQUAL_GAMMA, n_cells=32)
    ens0 = Ensemble(kl_initial_ensemble(setup.prior, 3, seed=1))
    with pytest.raises(ValueError):
        integrate(setup.prob, ens0, FlowConfig(0.1, 0.01, scheme=Scheme.HEUN))


def test_heun_is_higher_order(linear1d_small):
    prob = linear1d_small.prob
    ens0 = Ensemble(kl_initial_ensemble(linear1d_small.prior, 5, seed=27))
    ref = integrate(prob, ens0, FlowConfig(0.5, 1e-5, record_every=10**9))
    errs = []
    for dt in (1e-2, 5e-3):
        traj = integrate(prob, ens0,
                         FlowConfig(0.5, dt, scheme=Scheme.HEUN,
                                    record_every=10**9))
        errs.append(np.linalg.norm(traj.final_ensemble.members
                                   - ref.final_ensemble.members))
    assert 2.5 < errs[0] / errs[1] < 5.5


def test_euler_first_order_halving(linear1d_small):
    # Halving dt roughly halves the endpoint error against a dt/16 reference.
    prob = linear1d_small.prob
    ens0 = Ensemble(kl_initial_ensemble(linear1d_small.prior, 5, seed=27))
    dt = 4e-3
    ref = integrate(prob, ens0, FlowConfig(1.0, dt / 16, record_every=10**9))
    errs = []
    for step in (dt, dt / 2):
        traj = integrate(prob, ens0, FlowConfig(1.0, step, record_every=10**9))
        errs.append(np.linalg.norm(traj.final_ensemble.members
                                   - ref.final_ensemble.members))
    assert errs[0] / errs[1] == pytest.approx(2.0, rel=0.2)


def test_monotone_misfit_per_member(linear1d):
    prob = linear1d.prob
    ens0 = Ensemble(kl_initial_ensemble(linear1d.prior, 5, seed=27))
    traj = integrate(prob, ens0, FlowConfig(1.0, 1e-3, record_every=10))
    phi = np.array([
        [misfit_phi(u, prob) for u in ens.members] for ens in traj.ensembles
    ])
    increases = np.diff(phi, axis=0)
    assert np.all(increases <= 1e-10 * (1.0 + phi[:-1]))


def test_span_invariance_along_flow(linear1d):
    ens0 = Ensemble(kl_initial_ensemble(linear1d.prior, 5, seed=27))
    traj = integrate(linear1d.prob, ens0, FlowConfig(1.0, 1e-2, record_every=10))
    worst = max(subspace_distance(ens, ens0.members)
                for ens in traj.ensembles)
    assert worst <= 1e-9


def test_integrated_E_matches_analytic_within_10dt(linear1d):
    prob = linear1d.prob
    ens0 = Ensemble(kl_initial_ensemble(linear1d.prior, 5, seed=27))
    dm0 = ekinv.deviation_matrices(ens0, prob.truth, prob)
    spec = ekinv.SpectralE.from_matrix(dm0.E)
    dt = 1e-3
    traj = integrate(prob, ens0, FlowConfig(1.0, dt, record_every=100))
    scale = np.linalg.norm(dm0.E, "fro")
    for t, ens in zip(traj.times, traj.ensembles):
        e_num = ekinv.deviation_matrices(ens, prob.truth, prob).E
        e_ana = ekinv.analytic_E(spec, t, 5)
        assert np.linalg.norm(e_num - e_ana, "fro") <= 10 * dt * scale


def test_mapped_deviations_follow_analytic_L(linear1d_small):
    prob = linear1d_small.prob
    a = prob.forward.linear_matrix
    ens0 = Ensemble(kl_initial_ensemble(linear1d_small.prior, 5, seed=27))
    spec = ekinv.SpectralE.from_matrix(
        ekinv.deviation_matrices(ens0, prob.truth, prob).E)
    traj = integrate(prob, ens0, FlowConfig(1.0, 2e-5, record_every=10**9))
    ae0 = ekinv.mapped_deviations(ens0, a)
    ae1 = ekinv.mapped_deviations(traj.final_ensemble, a)
    reconstruction = ekinv.analytic_L(spec, 1.0, 5) @ ae0
    rel = np.linalg.norm(ae1 - reconstruction) / np.linalg.norm(ae0)
    assert rel <= 1e-5


def test_stochastic_runs_reproducible_and_stay_in_span():
    setup = ekinv.build_linear1d(sigma_mode=SigmaMode.EQUAL_GAMMA, n_cells=32)
    ens0 = Ensemble(kl_initial_ensemble(setup.prior, 5, seed=27))
    cfg = FlowConfig(0.2, 1e-2, rng_seed=4)
    a = integrate(setup.prob, ens0, cfg)
    b = integrate(setup.prob, ens0, cfg)
    np.testing.assert_array_equal(a.final_ensemble.members,
                                  b.final_ensemble.members)
    assert subspace_distance(a.final_ensemble, ens0.members) <= 1e-9
    other = integrate(setup.prob, ens0, FlowConfig(0.2, 1e-2, rng_seed=5))
    assert np.abs(a.final_ensemble.members
                  - other.final_ensemble.members).max() > 0


def test_adjoint_gradient_matches_finite_differences(linear1d):
    prob = linear1d.prob
    fwd = prob.forward
    u = linear1d.prior.sample(np.random.default_rng(2))
    grad = fwd.adjoint_apply(prob.noise.gamma_solve(fwd(u) - prob.data))
    rng = np.random.default_rng(3)
    for _ in range(5):
        direction = rng.standard_normal(u.size)
        direction /= np.linalg.norm(direction)
        eps = 1e-5
        fd = (misfit_phi(u + eps * direction, prob)
              - misfit_phi(u - eps * direction, prob)) / (2 * eps)
        assert abs(fd - grad @ direction) <= 1e-6 * max(abs(fd), 1.0)


def test_blowup_guard_reports_time_and_member(linear1d_noisy):
    # Plain Euler on the stiff noisy-weighted problem explodes quickly.
    ens0 = Ensemble(kl_initial_ensemble(linear1d_noisy.prior, 5, seed=27))
    with pytest.raises(BlowUpError) as err:
        integrate(linear1d_noisy.prob, ens0, FlowConfig(1.0, 1e-2))
    assert 0 < err.value.time <= 1.0
    assert 0 <= err.value.member < 5
