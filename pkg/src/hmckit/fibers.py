"""Riemannian metrics and the kinetic energies they induce on cotangent fibers.

A metric g(q) defines the momentum distribution on each fiber.  Two families
are provided: the Gaussian energy

    T = p' g(q)^{-1} p / 2 + log|g(q)| / 2

whose fiber measure is N(0, g(q)), and the Student-t energy

    T = (nu + n)/2 * log(1 + p' g(q)^{-1} p / nu) + log|g(q)| / 2

whose fiber measure is t_nu(0, g(q)).  Additive constants are dropped.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericError
from .targets import TargetDensity, as_position

Array = np.ndarray

SOFTABS_TAYLOR_CUTOFF = 1e-8


def softabs_eigmap(lam, alpha: float):
    """Smooth absolute value lam * coth(alpha * lam), with limit 1/alpha at 0.

    Total on the reals; output is >= |lam| and >= 1/alpha, so the rebuilt
    matrix is SPD wherever the input eigenvalues are finite.  Accepts scalars
    or arrays.
    """
    if alpha <= 0.0:
        raise ValueError("alpha must be positive")
    lam_arr = np.asarray(lam, dtype=float)
    x = alpha * lam_arr
    small = np.abs(x) < SOFTABS_TAYLOR_CUTOFF
    safe = np.where(small, 1.0, np.tanh(x))
    out = np.where(small, 1.0 / alpha, lam_arr / safe)
    return float(out) if np.isscalar(lam) or lam_arr.ndim == 0 else out


@dataclass(frozen=True)
class MetricEval:
    """Metric at one point: g, lower Cholesky factor L (g = L L'), g^{-1}, log|g|."""

    matrix: Array
    chol: Array
    inv: Array
    log_det: float


class Metric:
    """Base class; concrete metrics implement eval() and derivative()."""

    dim: int
    is_constant: bool = False

    def eval(self, q: Array) -> MetricEval:
        raise NotImplementedError

    def derivative(self, q: Array) -> Array:
        """Stack of partial derivatives, shape (n, n, n): derivative(q)[k] = dg/dq_k.

        Constant metrics return exact zeros.
        """
        raise NotImplementedError


class IdentityMetric(Metric):
    is_constant = True

    def __init__(self, dim: int):
        self.dim = int(dim)
        eye = np.eye(dim)
        self._eval = MetricEval(eye, eye, eye, 0.0)
        self._zeros = np.zeros((dim, dim, dim))

    def eval(self, q: Array) -> MetricEval:
        return self._eval

    def derivative(self, q: Array) -> Array:
        return self._zeros


class DenseMetric(Metric):
    """Constant SPD matrix metric."""

    is_constant = True

    def __init__(self, matrix):
        g = np.atleast_2d(np.asarray(matrix, dtype=float))
        if g.shape[0] != g.shape[1]:
            raise ValueError("metric matrix must be square")
        if not np.allclose(g, g.T, atol=1e-12):
            raise ValueError("metric matrix must be symmetric")
        try:
            chol = np.linalg.cholesky(g)
        except np.linalg.LinAlgError:
            raise ValueError("metric matrix must be positive-definite") from None
        self.dim = g.shape[0]
        log_det = 2.0 * float(np.sum(np.log(np.diag(chol))))
        self._eval = MetricEval(g, chol, np.linalg.inv(g), log_det)
        self._zeros = np.zeros((self.dim,) * 3)

    def eval(self, q: Array) -> MetricEval:
        return self._eval

    def derivative(self, q: Array) -> Array:
        return self._zeros


class DiagonalMetric(Metric):
    """Position-dependent diagonal metric g(q) = diag(fn(q)).

    `dfn(q)[i, k]` must give the analytic partial d g_ii / d q_k; implicit
    integrators need these derivatives to be exact.
    """

    is_constant = False

    def __init__(self, dim: int, fn, dfn):
        self.dim = int(dim)
        self._fn = fn
        self._dfn = dfn

    def eval(self, q: Array) -> MetricEval:
        vals = np.asarray(self._fn(q), dtype=float)
        if vals.shape != (self.dim,) or np.any(vals <= 0.0) or not np.all(np.isfinite(vals)):
            raise NumericError(f"diagonal metric not positive-definite at q={q}")
        return MetricEval(
            np.diag(vals),
            np.diag(np.sqrt(vals)),
            np.diag(1.0 / vals),
            float(np.sum(np.log(vals))),
        )

    def derivative(self, q: Array) -> Array:
        dvals = np.asarray(self._dfn(q), dtype=float)  # (i, k)
        out = np.zeros((self.dim,) * 3)
        for k in range(self.dim):
            np.fill_diagonal(out[k], dvals[:, k])
        return out


class SoftAbsMetric(Metric):
    """Regularized Hessian metric: eigenvalues mapped through softabs_eigmap.

    Derivatives are central finite differences (step 1e-4); the analytic form
    would need third derivatives of the potential.
    """

    is_constant = False

    def __init__(self, target: TargetDensity, alpha: float = 1e6):
        if alpha <= 0.0:
            raise ValueError("alpha must be positive")
        self.dim = target.dim
        self.alpha = float(alpha)
        self._target = target

    def _matrix(self, q: Array) -> Array:
        hess = self._target.hessian(q)
        lam, vecs = np.linalg.eigh(0.5 * (hess + hess.T))
        mapped = softabs_eigmap(lam, self.alpha)
        return (vecs * mapped) @ vecs.T, vecs, mapped

    def eval(self, q: Array) -> MetricEval:
        g, vecs, mapped = self._matrix(q)
        inv = (vecs / mapped) @ vecs.T
        try:
            chol = np.linalg.cholesky(0.5 * (g + g.T))
        except np.linalg.LinAlgError:
            raise NumericError(f"softabs metric factorization failed at q={q}") from None
        return MetricEval(g, chol, inv, float(np.sum(np.log(mapped))))

    def derivative(self, q: Array) -> Array:
        n = self.dim
        out = np.empty((n, n, n))
        for k in range(n):
            h = 1e-4
            step = np.zeros(n)
            step[k] = h
            gp = self._matrix(q + step)[0]
            gm = self._matrix(q - step)[0]
            out[k] = (gp - gm) / (2.0 * h)
        return out


def metric_eval(metric: Metric, q) -> MetricEval:
    """Evaluate g(q) with its Cholesky factor and log-determinant."""
    q = as_position(q, metric.dim)
    return metric.eval(q)


class KineticEnergy:
    """Fiber distribution as an energy function with gradients and a sampler."""

    def __init__(self, metric: Metric, family: str = "gaussian", nu: float | None = None):
        if family not in ("gaussian", "student_t"):
            raise ValueError(f"unknown kinetic family '{family}'")
        if family == "student_t":
            if nu is None or nu <= 2.0:
                raise ValueError("student_t kinetic energy needs nu > 2")
            nu = float(nu)
        self.metric = metric
        self.family = family
        self.nu = nu
        self.dim = metric.dim

    def _check(self, q, p):
        q = as_position(q, self.dim)
        p = as_position(p, self.dim)
        return q, p

    def energy(self, q, p) -> float:
        q, p = self._check(q, p)
        ev = self.metric.eval(q)
        s = float(p @ ev.inv @ p)
        if self.family == "gaussian":
            return 0.5 * s + 0.5 * ev.log_det
        n = self.dim
        return 0.5 * (self.nu + n) * float(np.log1p(s / self.nu)) + 0.5 * ev.log_det

    def grad_p(self, q, p) -> Array:
        q, p = self._check(q, p)
        ev = self.metric.eval(q)
        w = ev.inv @ p
        if self.family == "gaussian":
            return w
        s = float(p @ w)
        return w * (self.nu + self.dim) / (self.nu + s)

    def grad_q(self, q, p) -> Array:
        q, p = self._check(q, p)
        if self.metric.is_constant:
            return np.zeros(self.dim)
        ev = self.metric.eval(q)
        w = ev.inv @ p
        if self.family == "gaussian":
            coeff = 0.5
        else:
            s = float(p @ w)
            coeff = 0.5 * (self.nu + self.dim) / (self.nu + s)
        deriv = self.metric.derivative(q)
        out = np.empty(self.dim)
        for k in range(self.dim):
            dg = deriv[k]
            out[k] = -coeff * float(w @ dg @ w) + 0.5 * float(np.trace(ev.inv @ dg))
        return out

    def sample(self, q, rng: np.random.Generator) -> Array:
        """Draw a momentum from the fiber distribution at q.

        Gaussian family: p = L z with z standard normal.  Student-t family:
        scale mixture p = L z * sqrt(nu / w) with w ~ chi^2_nu.
        """
        q = as_position(q, self.dim)
        ev = self.metric.eval(q)
        p = ev.chol @ rng.standard_normal(self.dim)
        if self.family == "student_t":
            w = rng.chisquare(self.nu)
            p *= np.sqrt(self.nu / w)
        return p


def kinetic_energy(kin: KineticEnergy, q, p) -> float:
    return kin.energy(q, p)


def grad_kinetic_p(kin: KineticEnergy, q, p) -> Array:
    return kin.grad_p(q, p)


def grad_kinetic_q(kin: KineticEnergy, q, p) -> Array:
    return kin.grad_q(q, p)


def sample_momentum(kin: KineticEnergy, q, rng: np.random.Generator) -> Array:
    return kin.sample(q, rng)
