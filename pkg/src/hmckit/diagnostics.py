"""Chain diagnostics: estimators, autocorrelation/ESS, energy-law checks.

The lag-1 autocorrelation of a stationary chain estimates the kernel's
test-function autocorrelation; the canonical-distribution energy checks give
distribution-level oracles for samplers on Gaussian systems, where the energy
law is Gamma(n, 1) in n dimensions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import stats as spstats

from .dynamics import HamiltonianSystem
from .errors import DegenerateChainError
from .fibers import IdentityMetric, KineticEnergy
from .kernels import Chain, KernelConfig, kernel_label, run_chain
from .targets import TargetDensity

Array = np.ndarray

# Asymptotic one-sample Kolmogorov-Smirnov critical coefficient at 1%.
KS_COEFF_1PCT = 1.628


@dataclass(frozen=True)
class TestFunction:
    label: str
    fn: Callable[[Array], float]


def coordinate(i: int) -> TestFunction:
    return TestFunction(f"q{i + 1}", lambda q: float(q[i]))


def coordinate_squared(i: int) -> TestFunction:
    return TestFunction(f"q{i + 1}^2", lambda q: float(q[i]) ** 2)


def _series(chain_or_values, f: Optional[TestFunction] = None) -> Array:
    if isinstance(chain_or_values, Chain):
        if f is None:
            raise ValueError("a test function is required with a chain")
        return np.apply_along_axis(f.fn, 1, chain_or_values.states).astype(float)
    return np.asarray(chain_or_values, dtype=float)


def mcmc_estimator(chain: Chain, f: TestFunction) -> float:
    """Arithmetic mean of f over the chain states."""
    if len(chain) == 0:
        raise ValueError("empty chain")
    return float(np.mean(_series(chain, f)))


@dataclass
class AutocorrResult:
    rho1: float
    rho_k: Array
    ess: float
    n: int


def autocorrelation_series(x: Sequence[float]) -> AutocorrResult:
    """Empirical autocorrelations of a scalar series.

    rho_k is retained up to (excluding) the first negative lag; the effective
    sample size is n / (1 + 2 sum rho_k) over the retained lags.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    if n < 10:
        raise ValueError("need at least 10 samples for autocorrelation")
    x = x - np.mean(x)
    c0 = float(x @ x) / n
    if c0 <= 0.0:
        raise DegenerateChainError("series has zero empirical variance")
    rho = []
    rho1 = float(x[:-1] @ x[1:]) / n / c0
    for k in range(1, min(n, 10_000)):
        r = float(x[:-k] @ x[k:]) / n / c0
        if r < 0.0:
            break
        rho.append(r)
    rho = np.asarray(rho)
    ess = n / (1.0 + 2.0 * float(np.sum(rho)))
    return AutocorrResult(rho1=rho1, rho_k=rho, ess=min(ess, float(n)), n=n)


def autocorrelation_rho(chain: Chain, f: TestFunction) -> AutocorrResult:
    """Autocorrelation of f along a chain (stationary-chain estimator)."""
    return autocorrelation_series(_series(chain, f))


def ranked_rho1(result: AutocorrResult) -> float:
    """Autocorrelation used for kernel ranking; anti-correlated chains clamp to 0."""
    return max(result.rho1, 0.0)


def stationary_error(chain_values: Sequence[float], true_value: float) -> float:
    """Deviation of the series mean from truth in autocorrelation-adjusted
    standard errors."""
    x = np.asarray(chain_values, dtype=float)
    ac = autocorrelation_series(x)
    se = float(np.std(x)) / np.sqrt(ac.ess)
    return abs(float(np.mean(x)) - true_value) / se


@dataclass
class EnergyStats:
    energies: Array
    mean: float
    variance: float
    bin_edges: Array
    counts: Array
    ks_stat: Optional[float] = None
    ks_critical: Optional[float] = None


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        extra = f" ({self.detail})" if self.detail else ""
        return f"[{tag}] {self.name}: value={self.value:.6g} threshold={self.threshold:.6g}{extra}"


def _require_gaussian_system(sys: HamiltonianSystem, what: str):
    ok = (
        sys.target.kind == "iid_gaussian"
        and isinstance(sys.kinetic.metric, IdentityMetric)
        and sys.kinetic.family == "gaussian"
    )
    if not ok:
        raise ValueError(f"{what} is specified for the iid Gaussian system only")


def _energies_of(chain_or_energies) -> Array:
    if isinstance(chain_or_energies, Chain):
        e = chain_or_energies.energies()
    else:
        e = np.asarray(chain_or_energies, dtype=float)
    if e.size == 0:
        raise ValueError("no recorded energies")
    return e


def energy_gamma_check(sys: HamiltonianSystem, chain_or_energies,
                       n_bins: int = 40):
    """Gamma(n, 1) moment check of energies recorded at momentum refresh.

    Returns (EnergyStats, [CheckResult for mean, CheckResult for variance]).
    """
    _require_gaussian_system(sys, "energy_gamma_check")
    e = _energies_of(chain_or_energies)
    n = sys.dim
    big_n = e.shape[0]
    mean = float(np.mean(e))
    var = float(np.var(e))
    counts, edges = np.histogram(e, bins=n_bins)
    stats = EnergyStats(e, mean, var, edges, counts)
    mean_tol = 4.0 * np.sqrt(n / big_n)
    var_tol = n * 5.0 / np.sqrt(big_n)
    checks = [
        CheckResult("energy mean vs Gamma(n,1)", abs(mean - n) <= mean_tol,
                    abs(mean - n), mean_tol, f"n={n} N={big_n}"),
        CheckResult("energy variance vs Gamma(n,1)", abs(var - n) <= var_tol,
                    abs(var - n), var_tol, f"n={n} N={big_n}"),
    ]
    return stats, checks


def density_of_states_histogram(sys: HamiltonianSystem, chain_or_energies,
                                n_bins: int = 40) -> EnergyStats:
    """Energy histogram with a KS comparison against the Gamma(n, 1) law.

    For the 1-D Gaussian system the level sets are circles and the state
    density is constant, so the energy law is Exp(1) = Gamma(1, 1).
    """
    _require_gaussian_system(sys, "density_of_states_histogram")
    e = _energies_of(chain_or_energies)
    if e.shape[0] < 1000:
        raise ValueError("need at least 1e3 samples for the energy histogram")
    counts, edges = np.histogram(e, bins=n_bins)
    ks = spstats.kstest(e, spstats.gamma(a=sys.dim, scale=1.0).cdf)
    return EnergyStats(
        e, float(np.mean(e)), float(np.var(e)), edges, counts,
        ks_stat=float(ks.statistic),
        ks_critical=KS_COEFF_1PCT / np.sqrt(e.shape[0]),
    )


@dataclass
class GradientReport:
    label: str
    max_rel_dev: float
    passed: bool
    n_points: int
    tolerance: float = 1e-6

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return (f"[{tag}] gradient check {self.label}: "
                f"max_rel_dev={self.max_rel_dev:.3e} tol={self.tolerance:.0e}")


def gradient_fd_check(target: TargetDensity, n_points: int = 100,
                      rng=None, spread: float = 2.0,
                      tolerance: float = 1e-6) -> GradientReport:
    """Compare the analytic gradient with central differences of the potential
    at random points; the deviation is relative to 1 + |dV| componentwise."""
    rng = np.random.default_rng(rng if rng is not None else 0)
    worst = 0.0
    h = 1e-5
    for _ in range(n_points):
        q = spread * rng.standard_normal(target.dim)
        grad = target.gradient(q)
        fd = np.empty(target.dim)
        for j in range(target.dim):
            step = np.zeros(target.dim)
            step[j] = h
            fd[j] = (target.potential(q + step) - target.potential(q - step)) / (2 * h)
        rel = np.abs(grad - fd) / (1.0 + np.abs(grad))
        worst = max(worst, float(np.max(rel)))
    return GradientReport(target.label, worst, worst <= tolerance, n_points, tolerance)


def kinetic_fd_check(kin: KineticEnergy, n_points: int = 50, rng=None,
                     spread: float = 1.5, tolerance: float = 1e-6) -> GradientReport:
    """Finite-difference check of both kinetic-energy gradients."""
    rng = np.random.default_rng(rng if rng is not None else 0)
    worst = 0.0
    h = 1e-5
    n = kin.dim
    for _ in range(n_points):
        q = spread * rng.standard_normal(n)
        p = spread * rng.standard_normal(n)
        for grad, wiggle in ((kin.grad_p(q, p), "p"), (kin.grad_q(q, p), "q")):
            fd = np.empty(n)
            for j in range(n):
                step = np.zeros(n)
                step[j] = h
                if wiggle == "p":
                    fd[j] = (kin.energy(q, p + step) - kin.energy(q, p - step)) / (2 * h)
                else:
                    fd[j] = (kin.energy(q + step, p) - kin.energy(q - step, p)) / (2 * h)
            rel = np.abs(grad - fd) / (1.0 + np.abs(grad))
            worst = max(worst, float(np.max(rel)))
    label = f"{kin.family} kinetic ({type(kin.metric).__name__})"
    return GradientReport(label, worst, worst <= tolerance, n_points, tolerance)


@dataclass
class BenchEntry:
    """One kernel in a budget-matched comparison.

    `transitions` is chosen by the caller so that every entry consumes the
    same target-evaluation budget; the rho1 column is then the kernel's
    per-application autocorrelation while ESS is directly comparable across
    kernels as effective samples per equal budget.
    """

    label: str
    cfg: KernelConfig
    model: object
    q0: Array
    transitions: int
    seed: int = 0


@dataclass
class BenchRow:
    kernel: str
    f: str
    rho1: float
    ess: float
    accept_rate: float
    divergences: int


def kernel_comparison(entries: Sequence[BenchEntry],
                      fs: Sequence[TestFunction]) -> list[BenchRow]:
    """Run each configured kernel and tabulate rho1/ESS/acceptance per test
    function.  Rankings should use `ranked_rho1` semantics: the rho1 column is
    clamped at 0 for anti-correlated chains."""
    rows = []
    for entry in entries:
        chain = run_chain(entry.cfg, entry.model, entry.q0,
                          entry.transitions, entry.seed, label=entry.label)
        for f in fs:
            series = np.apply_along_axis(f.fn, 1, chain.states).astype(float)
            ac = autocorrelation_series(series)
            rows.append(BenchRow(
                kernel=entry.label or kernel_label(entry.cfg),
                f=f.label,
                rho1=max(ac.rho1, 0.0),
                ess=ac.ess,
                accept_rate=chain.accept_rate(),
                divergences=chain.divergence_count(),
            ))
    return rows
