import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_stress_matrices(rng, n, k_lo=0.2, k_hi=2.0):
    """Random realizable stresses as (n,3,3) matrices: A A^T is positive
    semidefinite, which is exactly the realizability condition, then
    rescaled to a random kinetic energy."""
    a = rng.uniform(-1.0, 1.0, size=(n, 3, 3))
    r = a @ np.transpose(a, (0, 2, 1))
    k = 0.5 * np.einsum("nii->n", r)
    k = np.maximum(k, 1.0e-6)
    target = rng.uniform(k_lo, k_hi, size=n)
    return r * (target / k)[:, None, None]


def to_six(r):
    """(n,3,3) symmetric matrices -> (n,6) component rows."""
    return np.stack(
        [r[..., 0, 0], r[..., 1, 1], r[..., 2, 2],
         r[..., 0, 1], r[..., 0, 2], r[..., 1, 2]],
        axis=-1,
    )


def random_sorted_triples(rng, n, lo=-1.0, hi=1.0):
    """Random descending (t1 >= t2 >= t3) triples."""
    t = np.sort(rng.uniform(lo, hi, size=(n, 3)), axis=1)[:, ::-1]
    return t
