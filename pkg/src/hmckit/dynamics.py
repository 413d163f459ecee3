"""Hamiltonian systems H = T + V on phase space and their numerical flows.

Schemes
-------
leapfrog
    Explicit splitting for constant metrics: half-kick from H1 = V + log|g|/2
    (the log|g| term has zero gradient for constant g), full drift from
    H2 = p' g^{-1} p / 2, half-kick.  Symplectic and reversible.
generalized_leapfrog
    Implicit second-order scheme for position-dependent metrics; the two
    implicit stages are solved by fixed-point iteration.  Reduces exactly to
    leapfrog when the metric is constant.
euler
    Explicit Euler baseline; deliberately not volume-preserving.
exact_gaussian
    Closed-form flow of the standard Gaussian system (phase rotation).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DivergenceError, NumericError
from .fibers import KineticEnergy, IdentityMetric
from .targets import TargetDensity, as_position

Array = np.ndarray

SCHEMES = ("leapfrog", "generalized_leapfrog", "euler", "exact_gaussian")
DEFAULT_DIVERGENCE_THRESHOLD = 1000.0


@dataclass(frozen=True)
class PhasePoint:
    """Point z = (q, p) on the cotangent bundle."""

    q: Array
    p: Array

    def __post_init__(self):
        q = np.atleast_1d(np.asarray(self.q, dtype=float))
        p = np.atleast_1d(np.asarray(self.p, dtype=float))
        if q.shape != p.shape:
            raise ValueError(f"q shape {q.shape} != p shape {p.shape}")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)

    @property
    def dim(self) -> int:
        return self.q.shape[0]


def momentum_flip(z: PhasePoint) -> PhasePoint:
    """Parity inversion R(q, p) = (q, -p); an exact involution."""
    return PhasePoint(z.q, -z.p)


class HamiltonianSystem:
    """Target potential plus kinetic energy, at unit inverse temperature."""

    def __init__(self, target: TargetDensity, kinetic: KineticEnergy):
        if target.dim != kinetic.dim:
            raise ValueError(f"target dim {target.dim} != kinetic dim {kinetic.dim}")
        self.target = target
        self.kinetic = kinetic
        self.dim = target.dim
        # Raw evaluators for the integrator hot loops; validity of the state is
        # monitored through finiteness checks on H instead of per-call guards.
        self._v = target._potential
        self._dv = target._gradient
        metric = kinetic.metric
        if metric.is_constant:
            ev = metric.eval(np.zeros(self.dim))
            self._const_inv = ev.inv
            self._const_logdet = ev.log_det
        else:
            self._const_inv = None
            self._const_logdet = None

    @property
    def constant_metric(self) -> bool:
        return self._const_inv is not None

    def hamiltonian(self, z: PhasePoint) -> float:
        """H(z) = V(q) + T(q, p)."""
        return self.target.potential(z.q) + self.kinetic.energy(z.q, z.p)

    def grad_q(self, q: Array, p: Array) -> Array:
        """dH/dq, including metric terms for position-dependent metrics."""
        return self.target.gradient(q) + self.kinetic.grad_q(q, p)

    def grad_p(self, q: Array, p: Array) -> Array:
        """dH/dp."""
        return self.kinetic.grad_p(q, p)

    def energy(self, q: Array, p: Array) -> float:
        """Unvalidated H for inner loops; may return nan/inf on blowup."""
        if self._const_inv is not None and self.kinetic.family == "gaussian":
            t = 0.5 * float(p @ self._const_inv @ p) + 0.5 * self._const_logdet
        else:
            try:
                t = self.kinetic.energy(q, p)
            except (NumericError, FloatingPointError):
                return float("nan")
        try:
            v = float(self._v(q))
        except FloatingPointError:
            return float("nan")
        return v + t


@dataclass(frozen=True)
class IntegratorSpec:
    """Scheme selection with step size eps and step count L (time t = eps * L)."""

    scheme: str
    step_size: float
    steps: int = 1
    fixed_point_tol: float = 1e-10
    max_iters: int = 100

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme '{self.scheme}' (expected one of {SCHEMES})")
        if not self.step_size > 0.0:
            raise ValueError("step_size must be positive")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.fixed_point_tol <= 0.0 or self.max_iters < 1:
            raise ValueError("fixed-point tolerance and max_iters must be positive")


@dataclass
class Trajectory:
    """Integrator path: positions, momenta, and H recorded at every point."""

    qs: Array
    ps: Array
    energies: Array
    divergent: bool = False

    def __len__(self) -> int:
        return self.qs.shape[0]

    @property
    def initial(self) -> PhasePoint:
        return PhasePoint(self.qs[0], self.ps[0])

    @property
    def final(self) -> PhasePoint:
        return PhasePoint(self.qs[-1], self.ps[-1])

    @property
    def points(self) -> list[PhasePoint]:
        return [PhasePoint(q, p) for q, p in zip(self.qs, self.ps)]

    def max_energy_error(self) -> float:
        return float(np.max(np.abs(self.energies - self.energies[0])))


def _require_constant_metric(sys: HamiltonianSystem, what: str):
    if not sys.constant_metric:
        raise ValueError(f"{what} requires a constant metric; "
                         "use generalized_leapfrog for position-dependent metrics")


def leapfrog_step(sys: HamiltonianSystem, z: PhasePoint, eps: float) -> PhasePoint:
    """One explicit leapfrog step (constant metrics only)."""
    _require_constant_metric(sys, "leapfrog")
    q, p = _leapfrog_raw(sys, z.q.copy(), z.p.copy(), eps)
    return PhasePoint(q, p)


def _leapfrog_raw(sys, q, p, eps):
    inv = sys._const_inv
    p = p - 0.5 * eps * sys._dv(q)
    q = q + eps * (inv @ p)
    p = p - 0.5 * eps * sys._dv(q)
    return q, p


def euler_step(sys: HamiltonianSystem, z: PhasePoint, eps: float) -> PhasePoint:
    """One explicit Euler step; both updates use the initial point."""
    q, p = _euler_raw(sys, z.q, z.p, eps)
    return PhasePoint(q, p)


def _euler_raw(sys, q, p, eps):
    dq = sys.grad_p(q, p)
    dp = sys.grad_q(q, p)
    return q + eps * dq, p - eps * dp


def exact_gaussian_flow(z: PhasePoint, t: float) -> PhasePoint:
    """Exact flow of the standard Gaussian system: rotation in each (q_i, p_i)."""
    c, s = np.cos(t), np.sin(t)
    return PhasePoint(z.q * c + z.p * s, z.p * c - z.q * s)


@dataclass
class FixedPointStats:
    """Iteration counts of the two implicit stages of a generalized step."""

    momentum_iters: int = 0
    position_iters: int = 0


def generalized_leapfrog_step(
    sys: HamiltonianSystem,
    z: PhasePoint,
    eps: float,
    tol: float = 1e-10,
    max_iters: int = 100,
    stats: Optional[FixedPointStats] = None,
) -> PhasePoint:
    """One implicit second-order step valid for position-dependent metrics.

    Solves p_half = p - (eps/2) dH/dq(q, p_half), then
    q' = q + (eps/2)[dH/dp(q, p_half) + dH/dp(q', p_half)], both by fixed-point
    iteration to `tol`, then closes with the explicit half-kick.  Raises
    DivergenceError if either stage fails to converge.
    """
    q, p = z.q, z.p
    half = 0.5 * eps

    grad_v_q = sys.target.gradient(q)
    p_half = p.copy()
    for it in range(max_iters):
        p_next = p - half * (grad_v_q + sys.kinetic.grad_q(q, p_half))
        delta = float(np.max(np.abs(p_next - p_half)))
        p_half = p_next
        if delta <= tol:
            break
    else:
        raise DivergenceError("momentum fixed point did not converge", residual=delta)
    if stats is not None:
        stats.momentum_iters = it + 1

    v0 = sys.kinetic.grad_p(q, p_half)
    q_new = q.copy()
    for it in range(max_iters):
        q_next = q + half * (v0 + sys.kinetic.grad_p(q_new, p_half))
        delta = float(np.max(np.abs(q_next - q_new)))
        q_new = q_next
        if delta <= tol:
            break
    else:
        raise DivergenceError("position fixed point did not converge", residual=delta)
    if stats is not None:
        stats.position_iters = it + 1

    p_new = p_half - half * (sys.target.gradient(q_new) + sys.kinetic.grad_q(q_new, p_half))
    return PhasePoint(q_new, p_new)


def _validate_spec(sys: HamiltonianSystem, spec: IntegratorSpec):
    if spec.scheme == "leapfrog":
        _require_constant_metric(sys, "leapfrog")
    elif spec.scheme == "exact_gaussian":
        ok = (
            sys.target.kind == "iid_gaussian"
            and isinstance(sys.kinetic.metric, IdentityMetric)
            and sys.kinetic.family == "gaussian"
        )
        if not ok:
            raise ValueError("exact_gaussian flow is only valid for the iid Gaussian "
                             "target with identity metric and gaussian kinetic energy")


def _one_step(sys: HamiltonianSystem, q: Array, p: Array, spec: IntegratorSpec):
    if spec.scheme == "leapfrog":
        return _leapfrog_raw(sys, q, p, spec.step_size)
    if spec.scheme == "euler":
        return _euler_raw(sys, q, p, spec.step_size)
    if spec.scheme == "exact_gaussian":
        z = exact_gaussian_flow(PhasePoint(q, p), spec.step_size)
        return z.q, z.p
    z = generalized_leapfrog_step(
        sys, PhasePoint(q, p), spec.step_size, spec.fixed_point_tol, spec.max_iters
    )
    return z.q, z.p


def integrate(
    sys: HamiltonianSystem,
    z: PhasePoint,
    spec: IntegratorSpec,
    divergence_threshold: float = DEFAULT_DIVERGENCE_THRESHOLD,
) -> Trajectory:
    """Apply the scheme `spec.steps` times, recording H at every point.

    A non-finite state or an energy error beyond `divergence_threshold` stops
    integration and returns the truncated path with the divergent flag set;
    kernels must treat such trajectories as automatic rejections.
    """
    _validate_spec(sys, spec)
    q = as_position(z.q, sys.dim).copy()
    p = as_position(z.p, sys.dim).copy()
    qs = [q.copy()]
    ps = [p.copy()]
    h0 = sys.energy(q, p)
    energies = [h0]
    divergent = not np.isfinite(h0)
    if not divergent:
        # blow-ups are expected and handled via the divergent flag, so numpy
        # overflow warnings along the way are noise
        with np.errstate(over="ignore", invalid="ignore"):
            for _ in range(spec.steps):
                try:
                    q, p = _one_step(sys, q, p, spec)
                except (DivergenceError, NumericError, FloatingPointError):
                    divergent = True
                    break
                h = sys.energy(q, p)
                qs.append(q.copy())
                ps.append(p.copy())
                energies.append(h)
                if not np.isfinite(h) or abs(h - h0) > divergence_threshold:
                    divergent = True
                    break
    return Trajectory(np.array(qs), np.array(ps), np.array(energies), divergent)


def flow_endpoint(
    sys: HamiltonianSystem,
    q: Array,
    p: Array,
    spec: IntegratorSpec,
    divergence_threshold: float = DEFAULT_DIVERGENCE_THRESHOLD,
):
    """Endpoint-only integration for kernels: (q', p', h0, h_end, divergent).

    Performs the same per-step energy monitoring as `integrate` without
    materializing the path.
    """
    _validate_spec(sys, spec)
    h0 = sys.energy(q, p)
    if not np.isfinite(h0):
        return q, p, h0, h0, True
    if spec.scheme == "exact_gaussian":
        # The exact flow composes exactly; a single rotation by eps * L is the
        # whole trajectory and conserves H to roundoff.
        z = exact_gaussian_flow(PhasePoint(q, p), spec.step_size * spec.steps)
        h = sys.energy(z.q, z.p)
        return z.q, z.p, h0, h, not np.isfinite(h)
    if spec.scheme == "leapfrog":
        return _leapfrog_endpoint(sys, q, p, spec, h0, divergence_threshold)
    h = h0
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(spec.steps):
            try:
                q, p = _one_step(sys, q, p, spec)
            except (DivergenceError, NumericError, FloatingPointError):
                return q, p, h0, h, True
            h = sys.energy(q, p)
            if not np.isfinite(h) or abs(h - h0) > divergence_threshold:
                return q, p, h0, h, True
    return q, p, h0, h, False


def _leapfrog_endpoint(sys, q, p, spec, h0, threshold):
    # Fused kick-drift-kick loop reusing the boundary gradient between steps.
    eps = spec.step_size
    inv = sys._const_inv
    logdet_half = 0.5 * sys._const_logdet
    v = sys._v
    dv = sys._dv
    kinetic_gaussian = sys.kinetic.family == "gaussian"
    q = q.copy()
    p = p.copy()
    h = h0
    with np.errstate(over="ignore", invalid="ignore"):
        grad = dv(q)
        for _ in range(spec.steps):
            p_half = p - 0.5 * eps * grad
            q = q + eps * (inv @ p_half)
            grad = dv(q)
            p = p_half - 0.5 * eps * grad
            if kinetic_gaussian:
                h = float(v(q)) + 0.5 * float(p @ inv @ p) + logdet_half
            else:
                h = sys.energy(q, p)
            if not np.isfinite(h) or abs(h - h0) > threshold:
                return q, p, h0, h, True
    return q, p, h0, h, False


def jacobian_det_fd(sys: HamiltonianSystem, z: PhasePoint, spec: IntegratorSpec,
                    h: float = 1e-5) -> float:
    """Determinant of the central-finite-difference Jacobian of one step.

    Symplectic steps give det = 1 up to FD truncation; the Euler baseline does
    not for nonlinear targets.
    """
    _validate_spec(sys, spec)
    n = sys.dim
    x0 = np.concatenate([z.q, z.p])
    jac = np.empty((2 * n, 2 * n))
    for j in range(2 * n):
        step = np.zeros(2 * n)
        step[j] = h
        xp = x0 + step
        xm = x0 - step
        qp, pp = _one_step(sys, xp[:n].copy(), xp[n:].copy(), spec)
        qm, pm = _one_step(sys, xm[:n].copy(), xm[n:].copy(), spec)
        jac[:, j] = (np.concatenate([qp, pp]) - np.concatenate([qm, pm])) / (2.0 * h)
    if not np.all(np.isfinite(jac)):
        raise NumericError(f"non-finite Jacobian entries at z=({z.q}, {z.p})")
    return float(np.linalg.det(jac))


def reversibility_defect(sys: HamiltonianSystem, z: PhasePoint,
                         spec: IntegratorSpec) -> float:
    """Sup-norm displacement of R(Phi(R(Phi(z)))) from z.

    Reversible flows composed with the momentum flip return to the start; the
    defect measures how far a numerical scheme falls short.
    """
    _validate_spec(sys, spec)
    q, p, _, _, div = flow_endpoint(sys, z.q, z.p, spec, divergence_threshold=np.inf)
    if div:
        raise DivergenceError("flow diverged during reversibility measurement")
    q, p, _, _, div = flow_endpoint(sys, q, -p, spec, divergence_threshold=np.inf)
    if div:
        raise DivergenceError("return flow diverged during reversibility measurement")
    p = -p
    return float(max(np.max(np.abs(q - z.q)), np.max(np.abs(p - z.p))))
