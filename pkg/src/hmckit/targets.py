"""Target distributions expressed in chart coordinates as potential energies.

A target is stored unnormalized: only potential differences and gradients are
ever consumed downstream, so additive constants are dropped everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import NumericError

Array = np.ndarray


def as_position(q, dim: int) -> Array:
    """Coerce `q` to a float vector of length `dim`, rejecting bad shapes."""
    q = np.atleast_1d(np.asarray(q, dtype=float))
    if q.shape != (dim,):
        raise ValueError(f"position has shape {q.shape}, expected ({dim},)")
    return q


class TargetDensity:
    """Negative log density V (plus gradient, optional Hessian) in one chart.

    Evaluators must be pure functions of their arguments; instances are
    immutable after construction and safe to share across chains.
    """

    def __init__(
        self,
        dim: int,
        potential: Callable[[Array], float],
        gradient: Callable[[Array], Array],
        hessian: Optional[Callable[[Array], Array]] = None,
        label: str = "",
        kind: str = "custom",
        batch_potential: Optional[Callable[[Array], Array]] = None,
    ):
        if dim < 1:
            raise ValueError("dimension must be a positive integer")
        self.dim = int(dim)
        self.label = label or kind
        self.kind = kind
        self._potential = potential
        self._gradient = gradient
        self._hessian = hessian
        self._batch_potential = batch_potential

    def potential(self, q) -> float:
        q = as_position(q, self.dim)
        v = float(self._potential(q))
        if not np.isfinite(v):
            raise NumericError(f"potential of {self.label} non-finite at q={q}")
        return v

    def gradient(self, q) -> Array:
        q = as_position(q, self.dim)
        g = np.asarray(self._gradient(q), dtype=float)
        if not np.all(np.isfinite(g)):
            raise NumericError(f"gradient of {self.label} non-finite at q={q}")
        return g

    def hessian(self, q) -> Array:
        """Analytic Hessian when supplied, else central differences of the
        gradient with step 1e-4*(1+|q_i|) per coordinate."""
        q = as_position(q, self.dim)
        if self._hessian is not None:
            return np.asarray(self._hessian(q), dtype=float)
        n = self.dim
        hess = np.empty((n, n))
        for i in range(n):
            h = 1e-4 * (1.0 + abs(q[i]))
            step = np.zeros(n)
            step[i] = h
            hess[:, i] = (self._gradient(q + step) - self._gradient(q - step)) / (2.0 * h)
        return 0.5 * (hess + hess.T)

    def potential_batch(self, qs: Array) -> Array:
        """Potential on rows of `qs` (m, dim); vectorized for built-ins."""
        qs = np.asarray(qs, dtype=float)
        if self._batch_potential is not None:
            return np.asarray(self._batch_potential(qs), dtype=float)
        return np.array([float(self._potential(row)) for row in qs])


def iid_gaussian(dim: int) -> TargetDensity:
    """Standard normal in `dim` dimensions: V = ||q||^2 / 2."""
    eye = np.eye(dim)
    return TargetDensity(
        dim,
        potential=lambda q: 0.5 * float(q @ q),
        gradient=lambda q: q.copy(),
        hessian=lambda q: eye,
        label=f"iid_gaussian({dim})",
        kind="iid_gaussian",
        batch_potential=lambda qs: 0.5 * np.sum(qs * qs, axis=1),
    )


def gaussian(mean, cov) -> TargetDensity:
    """Multivariate normal with the given mean and SPD covariance."""
    mean = np.atleast_1d(np.asarray(mean, dtype=float))
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    dim = mean.shape[0]
    if cov.shape != (dim, dim):
        raise ValueError(f"covariance shape {cov.shape} does not match dim {dim}")
    if not np.allclose(cov, cov.T, atol=1e-12):
        raise ValueError("covariance must be symmetric")
    try:
        np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        raise ValueError("covariance must be positive-definite") from None
    prec = np.linalg.inv(cov)

    def batch(qs):
        d = qs - mean
        return 0.5 * np.sum((d @ prec) * d, axis=1)

    return TargetDensity(
        dim,
        potential=lambda q: 0.5 * float((q - mean) @ prec @ (q - mean)),
        gradient=lambda q: prec @ (q - mean),
        hessian=lambda q: prec,
        label=f"gaussian({dim})",
        kind="gaussian",
        batch_potential=batch,
    )


def warped_gaussian(dim: int = 2, sigma2: float = 100.0, b: float = 0.1) -> TargetDensity:
    """Warped ("banana") Gaussian benchmark.

    V(q) = q1^2/(2 sigma2) + (q2 + b q1^2 - sigma2 b)^2 / 2 + sum_{i>2} qi^2 / 2.
    The first coordinate has variance sigma2; the ridge is bent by b.  Defaults
    follow the standard strong-twist benchmark setting.
    """
    if dim < 2:
        raise ValueError("warped gaussian needs dim >= 2")
    if sigma2 <= 0.0:
        raise ValueError("sigma2 must be positive")
    shift = sigma2 * b

    def pot(q):
        w = q[1] + b * q[0] ** 2 - shift
        return 0.5 * q[0] ** 2 / sigma2 + 0.5 * w * w + 0.5 * float(q[2:] @ q[2:])

    def grad(q):
        w = q[1] + b * q[0] ** 2 - shift
        g = q.copy()
        g[0] = q[0] / sigma2 + 2.0 * b * q[0] * w
        g[1] = w
        return g

    def hess(q):
        w = q[1] + b * q[0] ** 2 - shift
        h = np.eye(dim)
        h[0, 0] = 1.0 / sigma2 + 2.0 * b * w + 4.0 * b * b * q[0] ** 2
        h[0, 1] = h[1, 0] = 2.0 * b * q[0]
        return h

    def batch(qs):
        w = qs[:, 1] + b * qs[:, 0] ** 2 - shift
        rest = np.sum(qs[:, 2:] ** 2, axis=1)
        return 0.5 * qs[:, 0] ** 2 / sigma2 + 0.5 * w * w + 0.5 * rest

    return TargetDensity(
        dim, pot, grad, hess,
        label=f"warped_gaussian({dim},{sigma2:g},{b:g})",
        kind="warped_gaussian",
        batch_potential=batch,
    )


def make_target(name: str, **params) -> TargetDensity:
    """Build a built-in target by name: iid_gaussian | gaussian | warped_gaussian."""
    builders = {
        "iid_gaussian": lambda: iid_gaussian(int(params.get("dim", 2))),
        "gaussian": lambda: gaussian(
            params.get("mean", np.zeros(np.atleast_2d(params["cov"]).shape[0])),
            params["cov"],
        ),
        "warped_gaussian": lambda: warped_gaussian(
            int(params.get("dim", 2)),
            float(params.get("sigma2", 100.0)),
            float(params.get("b", 0.1)),
        ),
    }
    if name not in builders:
        raise ValueError(f"unknown target '{name}' (expected one of {sorted(builders)})")
    return builders[name]()


@dataclass(frozen=True)
class ChartTransform:
    """Diffeomorphism between charts: q = forward(u), u = inverse(q).

    `log_jacobian(u)` is log|det d forward / du|.  `jacobian` and
    `grad_log_jacobian` are optional analytic evaluators; when absent they are
    replaced by central finite differences.
    """

    forward: Callable[[Array], Array]
    inverse: Callable[[Array], Array]
    log_jacobian: Callable[[Array], float]
    jacobian: Optional[Callable[[Array], Array]] = None
    grad_log_jacobian: Optional[Callable[[Array], Array]] = None

    def jacobian_at(self, u: Array) -> Array:
        if self.jacobian is not None:
            return np.asarray(self.jacobian(u), dtype=float)
        n = u.shape[0]
        jac = np.empty((n, n))
        for j in range(n):
            h = 1e-6 * (1.0 + abs(u[j]))
            step = np.zeros(n)
            step[j] = h
            jac[:, j] = (np.asarray(self.forward(u + step)) - np.asarray(self.forward(u - step))) / (2.0 * h)
        return jac

    def grad_log_jacobian_at(self, u: Array) -> Array:
        if self.grad_log_jacobian is not None:
            return np.asarray(self.grad_log_jacobian(u), dtype=float)
        n = u.shape[0]
        g = np.empty(n)
        for j in range(n):
            h = 1e-6 * (1.0 + abs(u[j]))
            step = np.zeros(n)
            step[j] = h
            g[j] = (self.log_jacobian(u + step) - self.log_jacobian(u - step)) / (2.0 * h)
        return g


def identity_chart(dim: int) -> ChartTransform:
    eye = np.eye(dim)
    return ChartTransform(
        forward=lambda u: u.copy(),
        inverse=lambda q: q.copy(),
        log_jacobian=lambda u: 0.0,
        jacobian=lambda u: eye,
        grad_log_jacobian=lambda u: np.zeros(dim),
    )


def scaling_chart(factors) -> ChartTransform:
    """Linear chart q = factors * u (componentwise); constant log-Jacobian."""
    factors = np.atleast_1d(np.asarray(factors, dtype=float))
    if np.any(factors == 0.0):
        raise ValueError("scaling factors must be nonzero")
    dim = factors.shape[0]
    log_jac = float(np.sum(np.log(np.abs(factors))))
    return ChartTransform(
        forward=lambda u: factors * u,
        inverse=lambda q: q / factors,
        log_jacobian=lambda u: log_jac,
        jacobian=lambda u: np.diag(factors),
        grad_log_jacobian=lambda u: np.zeros(dim),
    )


def sinh_chart(dim: int) -> ChartTransform:
    """Nonlinear chart q = sinh(u); log-Jacobian sum(log cosh(u_i)) varies
    with position, so the correction term is observable in sampled moments."""
    return ChartTransform(
        forward=np.sinh,
        inverse=np.arcsinh,
        log_jacobian=lambda u: float(np.sum(np.log(np.cosh(u)))),
        jacobian=lambda u: np.diag(np.cosh(u)),
        grad_log_jacobian=np.tanh,
    )


def invert_chart(chart: ChartTransform) -> ChartTransform:
    """Chart running in the opposite direction (u = forward(q))."""

    def log_jac(q):
        return -float(chart.log_jacobian(np.asarray(chart.inverse(q), dtype=float)))

    def jac(q):
        u = np.asarray(chart.inverse(q), dtype=float)
        return np.linalg.inv(chart.jacobian_at(u))

    return ChartTransform(
        forward=chart.inverse,
        inverse=chart.forward,
        log_jacobian=log_jac,
        jacobian=jac,
    )


def apply_chart(target: TargetDensity, chart: ChartTransform,
                include_jacobian: bool = True) -> TargetDensity:
    """Re-express `target` in a new chart.

    The returned potential is the negative log of the transformed density:
    V'(u) = V(forward(u)) - log|d forward/du|(u), so that expectations of any
    h(q) computed through q = forward(u) match the original target.  Setting
    `include_jacobian=False` drops the correction term; that variant is wrong
    by construction and exists only to demonstrate the resulting bias.
    """

    def pot(u):
        q = np.asarray(chart.forward(u), dtype=float)
        v = target.potential(q)
        if include_jacobian:
            lj = float(chart.log_jacobian(u))
            if not np.isfinite(lj):
                raise NumericError(f"log-Jacobian non-finite at u={u}")
            v -= lj
        return v

    def grad(u):
        q = np.asarray(chart.forward(u), dtype=float)
        g = chart.jacobian_at(u).T @ target.gradient(q)
        if include_jacobian:
            g = g - chart.grad_log_jacobian_at(u)
        return g

    suffix = "chart" if include_jacobian else "chart_uncorrected"
    return TargetDensity(
        target.dim, pot, grad,
        label=f"{target.label}|{suffix}",
        kind="transformed",
    )
