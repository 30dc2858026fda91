"""Shared generators for randomized matrix tests."""
import numpy as np

from cohercause import BlockDims, CompositeCovariance

CORPUS_DIMS = (BlockDims(1, 1, 1), BlockDims(3, 2, 4), BlockDims(5, 5, 2))


def random_pd(rng, n, jitter=0.5):
    a = rng.standard_normal((n, n))
    return a @ a.T + jitter * n * np.eye(n)


def random_composite(rng, dims, jitter=0.5):
    return CompositeCovariance.from_matrix(random_pd(rng, dims.total, jitter), dims)


def random_nonsingular(rng, n):
    while True:
        t = rng.standard_normal((n, n))
        if n == 0 or abs(np.linalg.det(t)) > 1e-3:
            return t
