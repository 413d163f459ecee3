"""Markov transitions induced from measure-preserving maps.

The full Hamiltonian kernel (lift to the cotangent bundle, approximate flow,
momentum flip, Metropolis correction, projection) plus the classical
baselines: Gaussian random-walk Metropolis, random-scan Gibbs via numerical
conditional-CDF inversion, MALA, and the unadjusted Langevin path.

Every transition records a TransitionInfo whose `delta_h` is the negative log
acceptance ratio, so `min(1, exp(-delta_h))` is the acceptance probability for
every Metropolis-corrected kernel.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .dynamics import HamiltonianSystem, IntegratorSpec, flow_endpoint
from .errors import BracketError, ConfigError, NumericError
from .targets import TargetDensity, as_position

Array = np.ndarray

# Panels of the composite-Simpson grid behind the Gibbs conditional CDF.
_CDF_PANELS = 4096


@dataclass(frozen=True)
class FixedTime:
    """Deterministic integration time."""

    t: float

    def __post_init__(self):
        if not self.t > 0.0:
            raise ConfigError("fixed integration time must be positive")


@dataclass(frozen=True)
class UniformTime:
    """Integration time drawn uniformly from (0, t_max)."""

    t_max: float

    def __post_init__(self):
        if not self.t_max > 0.0:
            raise ConfigError("t_max must be positive")


TimeDistribution = Union[FixedTime, UniformTime]


def sample_integration_time(time_dist: TimeDistribution, eps: float,
                            rng: np.random.Generator):
    """Draw a time t and the corresponding step count L = max(1, round(t/eps))."""
    if isinstance(time_dist, FixedTime):
        t = time_dist.t
    else:
        t = rng.uniform(0.0, time_dist.t_max)
    return t, max(1, int(round(t / eps)))


@dataclass(frozen=True)
class HMCConfig:
    integrator: IntegratorSpec
    time_dist: TimeDistribution
    divergence_threshold: float = 1000.0


@dataclass(frozen=True)
class RWMConfig:
    """Gaussian random-walk proposals with covariance `cov`."""

    cov: Array

    def __post_init__(self):
        cov = np.atleast_2d(np.asarray(self.cov, dtype=float))
        try:
            chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError:
            raise ConfigError("proposal covariance must be SPD") from None
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "_chol", chol)


@dataclass(frozen=True)
class GibbsConfig:
    bisection_tol: float = 1e-8
    bracket_halfwidth: float = 50.0

    def __post_init__(self):
        if self.bisection_tol <= 0.0 or self.bracket_halfwidth <= 0.0:
            raise ConfigError("Gibbs tolerances must be positive")


@dataclass(frozen=True)
class MALAConfig:
    eps: float

    def __post_init__(self):
        if not self.eps > 0.0:
            raise ConfigError("MALA step size must be positive")


@dataclass(frozen=True)
class ULAConfig:
    """Unadjusted Langevin steps; biased by construction, for figures only."""

    eps: float

    def __post_init__(self):
        if not self.eps > 0.0:
            raise ConfigError("ULA step size must be positive")


KernelConfig = Union[HMCConfig, RWMConfig, GibbsConfig, MALAConfig, ULAConfig]


@dataclass(frozen=True)
class TransitionInfo:
    accepted: bool
    delta_h: float
    divergent: bool
    proposal: Array
    energy: Optional[float] = None


@dataclass
class Chain:
    """States and per-transition metadata; bit-reproducible from (seed, config)."""

    initial: Array
    states: Array  # (n_transitions, dim)
    infos: list[TransitionInfo]
    seed: Optional[int]
    label: str = ""

    def __len__(self) -> int:
        return self.states.shape[0]

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def accept_rate(self) -> float:
        return float(np.mean([info.accepted for info in self.infos]))

    def divergence_count(self) -> int:
        return sum(info.divergent for info in self.infos)

    def energies(self) -> Array:
        vals = [info.energy for info in self.infos if info.energy is not None]
        return np.asarray(vals, dtype=float)


def _metropolis(delta_h: float, rng: np.random.Generator) -> bool:
    return bool(np.log(rng.uniform()) < -delta_h)


def hmc_transition(sys: HamiltonianSystem, q: Array, cfg: HMCConfig,
                   rng: np.random.Generator):
    """Lift, flow, flip, Metropolis-correct, project.

    The momentum is freshly sampled from the fiber each transition.  The
    proposal is accepted with probability min(1, exp(H(z) - H(z'))); divergent
    trajectories are always rejected.
    """
    q = as_position(q, sys.dim)
    p = sys.kinetic.sample(q, rng)
    _, steps = sample_integration_time(cfg.time_dist, cfg.integrator.step_size, rng)
    spec = IntegratorSpec(
        cfg.integrator.scheme, cfg.integrator.step_size, steps,
        cfg.integrator.fixed_point_tol, cfg.integrator.max_iters,
    )
    q_new, p_new, h0, h1, divergent = flow_endpoint(
        sys, q, p, spec, cfg.divergence_threshold
    )
    # Momentum flip: T is even in p, so H is unchanged and the flip only
    # matters for reversibility of the map, not for the acceptance ratio.
    if divergent:
        info = TransitionInfo(False, float("inf"), True, q_new, energy=h0)
        return q, info
    delta_h = h1 - h0
    accepted = _metropolis(delta_h, rng)
    info = TransitionInfo(accepted, delta_h, False, q_new, energy=h0)
    return (q_new if accepted else q), info


def rwm_transition(target: TargetDensity, q: Array, cfg: RWMConfig,
                   rng: np.random.Generator):
    """Random translation q + eps, kept when eta < exp(V(q) - V(q + eps))."""
    q = as_position(q, target.dim)
    step = cfg._chol @ rng.standard_normal(target.dim)
    proposal = q + step
    delta = target.potential(proposal) - target.potential(q)
    accepted = _metropolis(delta, rng)
    info = TransitionInfo(accepted, delta, False, proposal)
    return (proposal if accepted else q), info


def mala_transition(target: TargetDensity, q: Array, cfg: MALAConfig,
                    rng: np.random.Generator):
    """Langevin proposal with Metropolis-Hastings correction."""
    q = as_position(q, target.dim)
    eps = cfg.eps
    grad_q = target.gradient(q)
    proposal = q - 0.5 * eps * eps * grad_q + eps * rng.standard_normal(target.dim)
    grad_prop = target.gradient(proposal)
    # log of the forward/reverse Gaussian proposal densities
    fwd = proposal - (q - 0.5 * eps * eps * grad_q)
    rev = q - (proposal - 0.5 * eps * eps * grad_prop)
    log_ratio = (
        target.potential(q) - target.potential(proposal)
        + (float(fwd @ fwd) - float(rev @ rev)) / (2.0 * eps * eps)
    )
    accepted = _metropolis(-log_ratio, rng)
    info = TransitionInfo(accepted, -log_ratio, False, proposal)
    return (proposal if accepted else q), info


def ula_transition(target: TargetDensity, q: Array, cfg: ULAConfig,
                   rng: np.random.Generator):
    """One unadjusted Euler-Maruyama step; always 'accepted'."""
    q = as_position(q, target.dim)
    proposal = (
        q - 0.5 * cfg.eps * target.gradient(q)
        + np.sqrt(cfg.eps) * rng.standard_normal(target.dim)
    )
    info = TransitionInfo(True, 0.0, not np.all(np.isfinite(proposal)), proposal)
    return proposal, info


def langevin_path(target: TargetDensity, q0: Array, eps: float, n_steps: int,
                  rng: np.random.Generator):
    """Unadjusted Langevin realization q_{k+1} = q_k - (eps/2) dV + sqrt(eps) xi.

    Returns (path, divergent): path has n_steps + 1 rows; on a non-finite state
    the path is truncated and flagged.
    """
    if eps < 0.0:
        raise ConfigError("Langevin step size must be nonnegative")
    q = as_position(q0, target.dim).copy()
    path = [q.copy()]
    scale = np.sqrt(eps)
    for _ in range(n_steps):
        q = q - 0.5 * eps * target.gradient(q) + scale * rng.standard_normal(target.dim)
        if not np.all(np.isfinite(q)):
            return np.array(path), True
        path.append(q.copy())
    return np.array(path), False


class _ConditionalCDF:
    """Numerical CDF of one coordinate's conditional density.

    The unnormalized conditional exp(-V) is evaluated on a uniform grid over
    [center - w, center + w], integrated by composite Simpson over point
    pairs, and interpolated inside each pair by a cubic Hermite matched to the
    density, which keeps inversion cheap and smooth.
    """

    def __init__(self, target: TargetDensity, q: Array, i: int, halfwidth: float):
        lo = q[i] - halfwidth
        hi = q[i] + halfwidth
        xs = np.linspace(lo, hi, 2 * _CDF_PANELS + 1)
        points = np.tile(q, (xs.shape[0], 1))
        points[:, i] = xs
        v = target.potential_batch(points)
        if not np.all(np.isfinite(v)):
            raise NumericError(f"conditional density non-finite for coordinate {i}")
        dens = np.exp(-(v - np.min(v)))
        peak = float(np.max(dens))
        if dens[0] > 1e-10 * peak or dens[-1] > 1e-10 * peak:
            raise BracketError(
                f"bracket halfwidth {halfwidth} leaves density mass at the edge; widen it"
            )
        h = xs[1] - xs[0]
        # Simpson over pairs: nodes 0, 2, 4, ... carry the cumulative integral.
        pair_mass = (h / 3.0) * (dens[:-2:2] + 4.0 * dens[1:-1:2] + dens[2::2])
        cdf = np.concatenate([[0.0], np.cumsum(pair_mass)])
        self.xs = xs[::2]
        self.dens = dens[::2]
        self.cdf = cdf
        self.total = float(cdf[-1])
        self.cell = 2.0 * h

    def _hermite(self, j: int, x: float) -> float:
        """Cumulative mass inside cell j up to x (cubic Hermite in the CDF)."""
        a = self.xs[j]
        s = (x - a) / self.cell
        c0 = self.cdf[j]
        c1 = self.cdf[j + 1]
        m0 = self.dens[j] * self.cell
        m1 = self.dens[j + 1] * self.cell
        h00 = 2 * s**3 - 3 * s**2 + 1
        h10 = s**3 - 2 * s**2 + s
        h01 = -2 * s**3 + 3 * s**2
        h11 = s**3 - s**2
        return h00 * c0 + h10 * m0 + h01 * c1 + h11 * m1

    def value(self, x: float) -> float:
        """P(x): normalized CDF, clamped to the bracket."""
        if x <= self.xs[0]:
            return 0.0
        if x >= self.xs[-1]:
            return 1.0
        j = min(int(np.searchsorted(self.xs, x) - 1), self.xs.shape[0] - 2)
        j = max(j, 0)
        return self._hermite(j, x) / self.total

    def invert(self, eta: float, tol: float) -> float:
        """x with P(x) = eta, by bisection to x-width `tol`."""
        mass = eta * self.total
        j = int(np.searchsorted(self.cdf, mass) - 1)
        j = min(max(j, 0), self.xs.shape[0] - 2)
        lo = self.xs[j]
        hi = self.xs[j + 1]
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if self._hermite(j, mid) < mass:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)


def conditional_cdf(target: TargetDensity, q: Array, i: int, x: float,
                    cfg: GibbsConfig) -> float:
    """CDF of coordinate i's conditional density at x, given q_{-i}."""
    q = as_position(q, target.dim)
    return _ConditionalCDF(target, q, i, cfg.bracket_halfwidth).value(x)


def conditional_cdf_invert(target: TargetDensity, q: Array, i: int, eta: float,
                           cfg: GibbsConfig) -> float:
    """Quantile of coordinate i's conditional density at level eta."""
    if not 0.0 < eta < 1.0:
        raise ValueError("eta must lie strictly inside (0, 1)")
    q = as_position(q, target.dim)
    return _ConditionalCDF(target, q, i, cfg.bracket_halfwidth).invert(
        eta, cfg.bisection_tol
    )


def gibbs_transition(target: TargetDensity, q: Array, cfg: GibbsConfig,
                     rng: np.random.Generator):
    """Random-scan Gibbs: redraw one uniformly chosen coordinate exactly."""
    q = as_position(q, target.dim)
    i = int(rng.integers(target.dim))
    eta = rng.uniform()
    new = q.copy()
    new[i] = conditional_cdf_invert(target, q, i, eta, cfg)
    info = TransitionInfo(True, 0.0, False, new)
    return new, info


def transition(cfg: KernelConfig, model, q: Array, rng: np.random.Generator):
    """Dispatch one transition for any kernel configuration.

    `model` is a HamiltonianSystem for HMC and a TargetDensity otherwise (a
    system is also accepted, its target is used).
    """
    if isinstance(cfg, HMCConfig):
        if not isinstance(model, HamiltonianSystem):
            raise TypeError("HMC kernels need a HamiltonianSystem")
        return hmc_transition(model, q, cfg, rng)
    target = model.target if isinstance(model, HamiltonianSystem) else model
    if isinstance(cfg, RWMConfig):
        return rwm_transition(target, q, cfg, rng)
    if isinstance(cfg, GibbsConfig):
        return gibbs_transition(target, q, cfg, rng)
    if isinstance(cfg, MALAConfig):
        return mala_transition(target, q, cfg, rng)
    if isinstance(cfg, ULAConfig):
        return ula_transition(target, q, cfg, rng)
    raise TypeError(f"unknown kernel configuration {type(cfg).__name__}")


def kernel_label(cfg: KernelConfig) -> str:
    return {
        HMCConfig: "hmc",
        RWMConfig: "rwm",
        GibbsConfig: "gibbs",
        MALAConfig: "mala",
        ULAConfig: "ula",
    }[type(cfg)]


def run_chain(cfg: KernelConfig, model, q0: Array, n_transitions: int,
              seed, label: str = "") -> Chain:
    """Run `n_transitions` sequential transitions from q0.

    `seed` may be an integer or a numpy SeedSequence; each chain owns its
    random stream, so chains with distinct seeds may run concurrently and a
    fixed (seed, config) pair replays bit-exactly.
    """
    if n_transitions < 1:
        raise ValueError("chain length must be >= 1")
    dim = model.dim
    q = as_position(q0, dim).copy()
    rng = np.random.default_rng(seed)
    states = np.empty((n_transitions, dim))
    infos: list[TransitionInfo] = []
    for k in range(n_transitions):
        q, info = transition(cfg, model, q, rng)
        states[k] = q
        infos.append(info)
    seed_int = seed if isinstance(seed, (int, np.integer)) else None
    return Chain(np.asarray(q0, dtype=float), states, infos,
                 seed_int, label or kernel_label(cfg))
