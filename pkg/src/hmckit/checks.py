"""Self-check suite behind the `check` subcommand.

Each check exercises one structural property the samplers rely on: gradient
consistency, volume preservation, reversibility, second-order energy error,
chain stationarity, and the Gaussian-system energy law.  Every check reports
its measured value and threshold; the suite fails if any check fails.
"""

from __future__ import annotations

import numpy as np

from .config import RunConfig, build_integrator_spec, build_kernel, build_system
from .diagnostics import (
    CheckResult,
    autocorrelation_series,
    density_of_states_histogram,
    energy_gamma_check,
    gradient_fd_check,
    kinetic_fd_check,
)
from .dynamics import (
    HamiltonianSystem,
    IntegratorSpec,
    PhasePoint,
    flow_endpoint,
    integrate,
    jacobian_det_fd,
    reversibility_defect,
)
from .errors import DivergenceError, NumericError
from .fibers import IdentityMetric, KineticEnergy
from .kernels import HMCConfig, UniformTime, run_chain
from .targets import gaussian, iid_gaussian, warped_gaussian


def _random_phase_points(sys: HamiltonianSystem, count: int, rng, spread=1.5):
    points = []
    for _ in range(count):
        q = spread * rng.standard_normal(sys.dim)
        p = sys.kinetic.sample(q, rng)
        points.append(PhasePoint(q, p))
    return points


def _gradient_checks(cfg: RunConfig, sys: HamiltonianSystem):
    results = []
    dim = max(2, cfg["target.dim"])
    builtins = [
        iid_gaussian(cfg["target.dim"]),
        gaussian(np.zeros(2), np.array([[4.0, 1.0], [1.0, 2.0]])),
        warped_gaussian(dim, cfg["target.sigma2"], cfg["target.b"]),
    ]
    if sys.target.label not in [t.label for t in builtins]:
        builtins.append(sys.target)
    for target in builtins:
        report = gradient_fd_check(target, n_points=100, rng=11)
        results.append(CheckResult(
            f"gradient fd: {target.label}", report.passed,
            report.max_rel_dev, report.tolerance,
        ))
    for kin in (sys.kinetic, KineticEnergy(IdentityMetric(2), "student_t", nu=5.0)):
        report = kinetic_fd_check(kin, n_points=25, rng=13)
        results.append(CheckResult(
            f"kinetic fd: {report.label}", report.passed,
            report.max_rel_dev, report.tolerance,
        ))
    return results


def _volume_check(cfg: RunConfig, sys: HamiltonianSystem):
    spec = build_integrator_spec(cfg)
    if spec.scheme == "exact_gaussian" and sys.target.kind != "iid_gaussian":
        sys = _gaussian_system(cfg["target.dim"])
    rng = np.random.default_rng(17)
    worst = 0.0
    for z in _random_phase_points(sys, 30, rng):
        try:
            det = jacobian_det_fd(sys, z, spec)
        except (DivergenceError, NumericError):
            det = float("inf")
        worst = max(worst, abs(det - 1.0))
    return [CheckResult(
        f"volume |det-1| ({spec.scheme})", worst <= 1e-6, worst, 1e-6,
        detail="one-step finite-difference Jacobian, 30 points",
    )]


def _reversibility_check(cfg: RunConfig, sys: HamiltonianSystem):
    base = build_integrator_spec(cfg)
    if base.scheme == "exact_gaussian" and sys.target.kind != "iid_gaussian":
        sys = _gaussian_system(cfg["target.dim"])
    tol_scale = 1e-8 if base.scheme == "generalized_leapfrog" else 1e-10
    rng = np.random.default_rng(19)
    worst_ratio, worst_defect, worst_tol = 0.0, 0.0, 1.0
    for steps in (1, 10, 100):
        spec = IntegratorSpec(base.scheme, base.step_size, steps,
                              base.fixed_point_tol, base.max_iters)
        for z in _random_phase_points(sys, 5, rng):
            norm = max(np.max(np.abs(z.q)), np.max(np.abs(z.p)))
            try:
                defect = reversibility_defect(sys, z, spec)
            except (DivergenceError, NumericError):
                defect = float("inf")  # blown-up flow: maximally irreversible
            tol = tol_scale if base.scheme == "generalized_leapfrog" \
                else tol_scale * (1.0 + norm)
            if defect / tol > worst_ratio:
                worst_ratio, worst_defect, worst_tol = defect / tol, defect, tol
    return [CheckResult(
        f"reversibility defect ({base.scheme})", worst_ratio <= 1.0,
        worst_defect, worst_tol, detail="L in {1,10,100}",
    )]


def _gaussian_system(dim: int) -> HamiltonianSystem:
    target = iid_gaussian(dim)
    return HamiltonianSystem(target, KineticEnergy(IdentityMetric(dim)))


def energy_error_slope(sys: HamiltonianSystem, scheme: str, z: PhasePoint,
                       total_time: float = 1.0,
                       eps_values=(0.2, 0.1, 0.05, 0.025)) -> float:
    """Log-log slope of max|H_k - H_0| against eps at fixed trajectory time."""
    errs = []
    for eps in eps_values:
        steps = max(1, int(round(total_time / eps)))
        spec = IntegratorSpec(scheme, eps, steps)
        traj = integrate(sys, z, spec, divergence_threshold=np.inf)
        errs.append(traj.max_energy_error())
    slope = np.polyfit(np.log(eps_values), np.log(errs), 1)[0]
    return float(slope)


def _energy_order_check(cfg: RunConfig):
    scheme = build_integrator_spec(cfg).scheme
    sys = _gaussian_system(1)
    z = PhasePoint(np.array([1.0]), np.array([0.5]))
    if scheme == "exact_gaussian":
        spec = IntegratorSpec(scheme, 0.1, 10)
        _, _, h0, h1, _ = flow_endpoint(sys, z.q, z.p, spec)
        err = abs(h1 - h0)
        return [CheckResult("exact flow |dH|", err <= 1e-12, err, 1e-12)]
    slope = energy_error_slope(sys, scheme, z)
    return [CheckResult(
        f"energy error order ({scheme})", abs(slope - 2.0) <= 0.2, slope, 2.0,
        detail="log-log slope over eps in {0.2,0.1,0.05,0.025}, target 2.0 +- 0.2",
    )]


def _stationarity_check(cfg: RunConfig, n: int = 20000):
    sys = _gaussian_system(1)
    kernel = build_kernel(cfg, 1)
    if isinstance(kernel, HMCConfig):
        model = sys
    else:
        model = sys.target
    rng = np.random.default_rng(cfg["seed"])
    q0 = rng.standard_normal(1)  # exact draw from the target
    chain = run_chain(kernel, model, q0, n, seed=cfg["seed"] + 1)
    x = chain.states[:, 0]
    results = []
    for label, series, truth in (("mean", x, 0.0), ("second moment", x * x, 1.0)):
        ac = autocorrelation_series(series)
        se = float(np.std(series)) / np.sqrt(ac.ess)
        dev = abs(float(np.mean(series)) - truth)
        results.append(CheckResult(
            f"stationarity {label} ({cfg['kernel']})", dev <= 4 * se, dev, 4 * se,
            detail=f"N={n}, 1-D Gaussian, autocorrelation-adjusted",
        ))
    return results


def _energy_law_checks(cfg: RunConfig, n: int = 40000):
    # Chain energies at refresh points stay ~50% autocorrelated because the
    # flow conserves the position action within a transition, so the series is
    # thinned to near-independence before the iid-calibrated moment check.
    thin = 8
    dim = cfg["target.dim"]
    results = []
    for d, count in ((dim, n), (1, 10000)):
        sys = _gaussian_system(d)
        kernel = HMCConfig(build_integrator_spec(cfg), UniformTime(6.3))
        rng = np.random.default_rng(23 + d)
        q0 = rng.standard_normal(d)
        chain = run_chain(kernel, sys, q0, count, seed=29 + d)
        if d == dim:
            _, gamma_checks = energy_gamma_check(sys, chain.energies()[::thin])
            results.extend(gamma_checks)
        if d == 1:
            dos = density_of_states_histogram(sys, chain)
            results.append(CheckResult(
                "energy law KS vs Exp(1)", dos.ks_stat <= dos.ks_critical,
                dos.ks_stat, dos.ks_critical, detail=f"N={count}, 1-D system",
            ))
    return results


def run_check_suite(cfg: RunConfig) -> list[CheckResult]:
    sys = build_system(cfg)
    results = []
    results.extend(_gradient_checks(cfg, sys))
    results.extend(_volume_check(cfg, sys))
    results.extend(_reversibility_check(cfg, sys))
    results.extend(_energy_order_check(cfg))
    results.extend(_stationarity_check(cfg))
    results.extend(_energy_law_checks(cfg))
    return results
