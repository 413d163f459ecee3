"""Transition kernels: acceptance rules, inversion machinery, chain contracts."""

import numpy as np
import numpy.testing as npt
import pytest
from scipy import stats as spstats

from hmckit import (
    BracketError,
    ConfigError,
    FixedTime,
    GibbsConfig,
    HMCConfig,
    IntegratorSpec,
    MALAConfig,
    RWMConfig,
    TargetDensity,
    ULAConfig,
    UniformTime,
    autocorrelation_series,
    conditional_cdf,
    conditional_cdf_invert,
    gaussian,
    gibbs_transition,
    hmc_transition,
    iid_gaussian,
    langevin_path,
    mala_transition,
    run_chain,
    rwm_transition,
    sample_integration_time,
    ula_transition,
    warped_gaussian,
)
from support import euclidean_system


def test_sample_integration_time_fixed():
    rng = np.random.default_rng(0)
    t, steps = sample_integration_time(FixedTime(1.0), 0.1, rng)
    assert t == 1.0 and steps == 10


def test_sample_integration_time_clamps_to_one_step():
    rng = np.random.default_rng(1)
    for _ in range(100):
        _, steps = sample_integration_time(UniformTime(0.05), 0.1, rng)
        assert steps == 1


def test_sample_integration_time_uniform_mean():
    rng = np.random.default_rng(2)
    steps = [sample_integration_time(UniformTime(10.0), 0.1, rng)[1]
             for _ in range(100_000)]
    assert np.mean(steps) == pytest.approx(50.0, rel=0.02)


def test_time_distributions_reject_nonpositive():
    with pytest.raises(ConfigError):
        FixedTime(0.0)
    with pytest.raises(ConfigError):
        UniformTime(-1.0)


def test_kernel_config_validation():
    with pytest.raises(ConfigError):
        RWMConfig(np.array([[1.0, 2.0], [2.0, 1.0]]))
    with pytest.raises(ConfigError):
        GibbsConfig(bisection_tol=-1e-8)
    with pytest.raises(ConfigError):
        MALAConfig(eps=0.0)
    with pytest.raises(ConfigError):
        ULAConfig(eps=-0.1)


def test_metropolis_rule_frequency():
    # delta_h = 0.5 must accept with probability exp(-0.5)
    rng = np.random.default_rng(3)
    n = 50_000
    hits = sum(np.log(rng.uniform()) < -0.5 for _ in range(n))
    p = np.exp(-0.5)
    assert abs(hits / n - p) < 4 * np.sqrt(p * (1 - p) / n)


def test_hmc_exact_flow_accepts_everything():
    sys1 = euclidean_system(iid_gaussian(2))
    cfg = HMCConfig(IntegratorSpec("exact_gaussian", 0.1, 1), UniformTime(6.3))
    chain = run_chain(cfg, sys1, np.zeros(2), 2000, seed=4)
    assert chain.accept_rate() == 1.0
    assert max(abs(i.delta_h) for i in chain.infos) < 1e-12


def test_hmc_acceptance_high_at_small_step():
    sys1 = euclidean_system(iid_gaussian(1))
    cfg = HMCConfig(IntegratorSpec("leapfrog", 0.1, 1), UniformTime(2.0))
    chain = run_chain(cfg, sys1, np.array([1.0]), 10_000, seed=5)
    assert chain.accept_rate() > 0.98


def test_hmc_divergent_transitions_always_rejected():
    sysw = euclidean_system(warped_gaussian(2))
    cfg = HMCConfig(IntegratorSpec("leapfrog", 5.0, 1), FixedTime(50.0),
                    divergence_threshold=100.0)
    rng = np.random.default_rng(6)
    q = np.array([20.0, 300.0])
    saw_divergence = False
    for _ in range(50):
        q_new, info = hmc_transition(sysw, q, cfg, rng)
        if info.divergent:
            saw_divergence = True
            assert not info.accepted
            npt.assert_array_equal(q_new, q)
        q = q_new
    assert saw_divergence


def test_hmc_records_refresh_energy():
    sys1 = euclidean_system(iid_gaussian(1))
    cfg = HMCConfig(IntegratorSpec("leapfrog", 0.1, 1), FixedTime(1.0))
    chain = run_chain(cfg, sys1, np.array([0.5]), 100, seed=7)
    assert chain.energies().shape == (100,)
    assert np.all(chain.energies() >= 0.0)


def test_rwm_downhill_always_accepted():
    target = iid_gaussian(1)
    cfg = RWMConfig(np.eye(1))
    rng = np.random.default_rng(8)
    q = np.array([2.0])
    for _ in range(500):
        q, info = rwm_transition(target, q, cfg, rng)
        if info.delta_h < 0.0:
            assert info.accepted


def test_rwm_acceptance_frequency_matches_rule():
    target = iid_gaussian(1)
    cfg = RWMConfig(np.eye(1))
    rng = np.random.default_rng(9)
    q = np.array([0.0])
    expected, observed = [], []
    for _ in range(20_000):
        q, info = rwm_transition(target, q, cfg, rng)
        expected.append(min(1.0, np.exp(-info.delta_h)))
        observed.append(info.accepted)
    gap = abs(np.mean(observed) - np.mean(expected))
    assert gap < 4 * np.sqrt(np.mean(expected) / len(expected))


def test_rwm_stationarity_quick():
    target = iid_gaussian(1)
    cfg = RWMConfig(np.array([[2.4 ** 2]]))
    rng = np.random.default_rng(10)
    chain = run_chain(cfg, target, rng.standard_normal(1), 20_000, seed=11)
    x = chain.states[:, 0]
    ac = autocorrelation_series(x)
    se = x.std() / np.sqrt(ac.ess)
    assert abs(x.mean()) < 4 * se


def test_mala_proposal_at_mode_is_isotropic():
    # with zero gradient the proposal reduces to q + eps * xi
    target = iid_gaussian(1)
    eps = 0.3
    xi = np.random.default_rng(12).standard_normal(1)
    rng = np.random.default_rng(12)
    _, info = mala_transition(target, np.array([0.0]), MALAConfig(eps), rng)
    npt.assert_allclose(info.proposal, eps * xi)


def test_mala_acceptance_approaches_one_as_step_vanishes():
    target = iid_gaussian(1)
    chain = run_chain(MALAConfig(0.01), target, np.array([0.3]), 3000, seed=13)
    assert chain.accept_rate() > 0.999


def test_mala_stationarity_quick():
    target = iid_gaussian(1)
    rng = np.random.default_rng(14)
    chain = run_chain(MALAConfig(0.5), target, rng.standard_normal(1), 20_000, seed=15)
    x = chain.states[:, 0]
    ac = autocorrelation_series(x * x)
    se = (x * x).std() / np.sqrt(ac.ess)
    assert abs((x * x).mean() - 1.0) < 4 * se


def test_ula_transition_never_rejects():
    target = iid_gaussian(1)
    rng = np.random.default_rng(16)
    q = np.array([0.0])
    for _ in range(100):
        q, info = ula_transition(target, q, ULAConfig(0.1), rng)
        assert info.accepted


def test_langevin_path_pure_diffusion_increments():
    flat = TargetDensity(1, lambda q: 0.0, lambda q: np.zeros(1), label="flat")
    eps = 0.04
    path, divergent = langevin_path(flat, np.zeros(1), eps, 100_000,
                                    np.random.default_rng(17))
    assert not divergent
    increments = np.diff(path[:, 0])
    assert increments.var() == pytest.approx(eps, rel=0.05)


def test_langevin_path_zero_step_is_constant():
    target = iid_gaussian(2)
    path, divergent = langevin_path(target, np.array([1.0, -1.0]), 0.0, 50,
                                    np.random.default_rng(18))
    assert not divergent
    assert np.all(path == path[0])


def test_langevin_wanders_slowly_versus_flow():
    # diffusive displacement grows ~sqrt(t); the flow's arc length grows ~t
    target = warped_gaussian(2)
    sysw = euclidean_system(target)
    eps = 0.045
    reps = 20
    rhos = {}
    for steps in (200, 800):
        disp = []
        for r in range(reps):
            path, _ = langevin_path(target, np.array([0.0, 10.0]), eps, steps,
                                    np.random.default_rng(100 + r))
            disp.append(np.linalg.norm(path[-1] - path[0]))
        rhos[steps] = np.mean(disp)
    # quadrupling the time should roughly double (not quadruple) displacement
    assert rhos[800] / rhos[200] < 3.0
    from hmckit import integrate, PhasePoint
    traj = integrate(sysw, PhasePoint([0.0, 10.0], [1.0, 0.5]),
                     IntegratorSpec("leapfrog", eps, 800))
    arc = float(np.sum(np.linalg.norm(np.diff(traj.qs, axis=0), axis=1)))
    assert arc > 5.0 * rhos[800]


def test_conditional_cdf_invert_standard_normal():
    target = iid_gaussian(1)
    cfg = GibbsConfig()
    q = np.zeros(1)
    assert conditional_cdf_invert(target, q, 0, 0.5, cfg) == pytest.approx(0.0, abs=1e-8)
    x = conditional_cdf_invert(target, q, 0, spstats.norm.cdf(1.0), cfg)
    assert x == pytest.approx(1.0, abs=1e-6)


def test_conditional_cdf_invert_bivariate():
    cov = np.array([[1.0, 0.9], [0.9, 1.0]])
    target = gaussian(np.zeros(2), cov)
    cfg = GibbsConfig()
    cond_sd = np.sqrt(1.0 - 0.81)
    for eta in (0.1, 0.5, 0.9):
        x = conditional_cdf_invert(target, np.array([1.0, 0.0]), 1, eta, cfg)
        assert x == pytest.approx(0.9 + cond_sd * spstats.norm.ppf(eta), abs=1e-6)


def test_conditional_cdf_round_trip():
    target = iid_gaussian(1)
    cfg = GibbsConfig()
    q = np.zeros(1)
    for eta in (0.1, 0.5, 0.9):
        x = conditional_cdf_invert(target, q, 0, eta, cfg)
        assert conditional_cdf(target, q, 0, x, cfg) == pytest.approx(
            eta, abs=10 * cfg.bisection_tol
        )


def test_conditional_cdf_bracket_error():
    target = iid_gaussian(1)
    cfg = GibbsConfig(bracket_halfwidth=0.5)
    with pytest.raises(BracketError):
        conditional_cdf_invert(target, np.zeros(1), 0, 0.5, cfg)


def test_conditional_cdf_invert_rejects_bad_eta():
    with pytest.raises(ValueError):
        conditional_cdf_invert(iid_gaussian(1), np.zeros(1), 0, 1.5, GibbsConfig())


def test_gibbs_single_coordinate_is_exact_draw():
    target = iid_gaussian(1)
    chain = run_chain(GibbsConfig(), target, np.array([3.0]), 10_000, seed=19)
    x = chain.states[:, 0]
    assert abs(x.mean()) < 4.0 / np.sqrt(x.size)          # iid se of the mean
    assert abs(x.var() - 1.0) < 4.0 * np.sqrt(2.0 / x.size)
    assert abs(autocorrelation_series(x).rho1) < 4.0 / np.sqrt(x.size)


def test_gibbs_mixes_fast_on_isotropic_target():
    target = iid_gaussian(2)
    chain = run_chain(GibbsConfig(), target, np.zeros(2), 8000, seed=20)
    x = chain.states[:, 0]
    # after 3 sweeps worth of random-scan updates the coordinate is refreshed
    # with probability 1 - (1/2)^6
    lag = 6
    xc = x - x.mean()
    rho6 = float(xc[:-lag] @ xc[lag:]) / len(x) / xc.var()
    assert abs(rho6) < 0.05


def test_gibbs_slow_on_strongly_correlated_target():
    cov = np.array([[1.0, 0.99], [0.99, 1.0]])
    target = gaussian(np.zeros(2), cov)
    chain = run_chain(GibbsConfig(), target, np.zeros(2), 5000, seed=21)
    assert autocorrelation_series(chain.states[:, 0]).rho1 > 0.9


def test_gibbs_transitions_always_accepted():
    target = iid_gaussian(2)
    rng = np.random.default_rng(22)
    q = np.zeros(2)
    for _ in range(20):
        q, info = gibbs_transition(target, q, GibbsConfig(), rng)
        assert info.accepted and not info.divergent


def test_run_chain_single_transition():
    target = iid_gaussian(1)
    cfg = RWMConfig(np.eye(1))
    chain = run_chain(cfg, target, np.array([0.0]), 1, seed=23)
    assert len(chain) == 1
    q, info = rwm_transition(target, np.array([0.0]), cfg,
                             np.random.default_rng(23))
    npt.assert_array_equal(chain.states[0], q)


def test_run_chain_deterministic_replay():
    sys1 = euclidean_system(iid_gaussian(2))
    cfg = HMCConfig(IntegratorSpec("leapfrog", 0.2, 1), UniformTime(2.0))
    a = run_chain(cfg, sys1, np.zeros(2), 200, seed=24)
    b = run_chain(cfg, sys1, np.zeros(2), 200, seed=24)
    npt.assert_array_equal(a.states, b.states)
    assert [i.accepted for i in a.infos] == [i.accepted for i in b.infos]


def test_run_chain_seeds_decorrelate():
    target = iid_gaussian(1)
    cfg = RWMConfig(np.eye(1))
    a = run_chain(cfg, target, np.zeros(1), 10, seed=25)
    b = run_chain(cfg, target, np.zeros(1), 10, seed=26)
    assert not np.array_equal(a.states, b.states)


def test_run_chain_requires_system_for_hmc():
    cfg = HMCConfig(IntegratorSpec("leapfrog", 0.1, 1), FixedTime(1.0))
    with pytest.raises(TypeError):
        run_chain(cfg, iid_gaussian(1), np.zeros(1), 10, seed=27)


def test_run_chain_rejects_empty():
    with pytest.raises(ValueError):
        run_chain(RWMConfig(np.eye(1)), iid_gaussian(1), np.zeros(1), 0, seed=28)
