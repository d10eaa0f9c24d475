"""Shared generators for the test suite. Everything is explicitly seeded."""

import numpy as np

import qchan as q


def rng_for(seed):
    return np.random.default_rng(seed)


def random_hermitian(n, rng):
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (A + A.conj().T) / 2.0


def random_density(n, rng, min_eig=0.05):
    """Full-rank density matrix with eigenvalues bounded away from zero."""
    V = q.random_unitary(n, rng)
    lam = rng.uniform(min_eig, 1.0, n)
    lam /= lam.sum()
    return (V * lam) @ V.conj().T


def random_tangent(point, rng, norm=1.0):
    raw = rng.standard_normal(point.matrix.shape) + 1j * rng.standard_normal(point.matrix.shape)
    delta = q.project_tangent(point, raw)
    return delta * (norm / np.linalg.norm(delta))


def fd_directional(obj, point, delta, h=1e-5):
    """Central finite difference of the objective along an ambient direction."""
    plus = q.StiefelPoint(point.dims, point.matrix + h * delta)
    minus = q.StiefelPoint(point.dims, point.matrix - h * delta)
    return (q.value(obj, plus) - q.value(obj, minus)) / (2.0 * h)
