"""Shared fixtures-in-spirit: small helpers used by several test modules."""

import numpy as np

from hmckit import DiagonalMetric, HamiltonianSystem, IdentityMetric, KineticEnergy


def quadratic_diag_metric(dim):
    """Benchmark position-dependent metric g = diag(1 + q_i^2)."""
    def fn(q):
        return 1.0 + q * q

    def dfn(q):
        return np.diag(2.0 * q)

    return DiagonalMetric(dim, fn, dfn)


def euclidean_system(target) -> HamiltonianSystem:
    return HamiltonianSystem(target, KineticEnergy(IdentityMetric(target.dim)))
