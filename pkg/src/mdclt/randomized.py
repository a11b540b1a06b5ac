"""Seeded random kernels, chains, joint laws and beta-sequences.

Rows are Dirichlet draws with a random concentration; a share of kernels is
pushed to the edges of the simplex (sparse rows, point masses, identity and
independence steps) because that is where coefficient bounds are tight.
"""

from __future__ import annotations

import numpy as np

from .ergodic import BetaSequence
from .markov_core import ChainSpec, Kernel, center_observables

__all__ = ["random_stochastic_rows", "random_kernel", "random_chain", "random_joint_table",
           "random_beta"]


def random_stochastic_rows(rng: np.random.Generator, rows: int, size: int) -> np.ndarray:
    conc = rng.choice([0.2, 1.0, 5.0])
    m = rng.dirichlet(np.full(size, conc), size=rows)
    if rng.random() < 0.3:
        m[rng.random(m.shape) < 0.3] = 0.0
        empty = m.sum(axis=1) == 0
        m[empty, rng.integers(size, size=int(empty.sum()))] = 1.0
    return m / m.sum(axis=1, keepdims=True)


def random_kernel(rng: np.random.Generator, size: int) -> Kernel:
    u = rng.random()
    if u < 0.05:
        return Kernel(np.eye(size))
    if u < 0.10:
        return Kernel(np.tile(random_stochastic_rows(rng, 1, size), (size, 1)))
    if u < 0.15:
        return Kernel(np.eye(size)[rng.permutation(size)])
    return Kernel(random_stochastic_rows(rng, size, size))


def random_chain(rng: np.random.Generator, n: int, size: int, centered: bool = True) -> ChainSpec:
    if rng.random() < 0.2:
        init = np.eye(size)[rng.integers(size)]
    else:
        init = random_stochastic_rows(rng, 1, size)[0]
    kernels = [random_kernel(rng, size) for _ in range(n - 1)]
    scale = rng.choice([0.5, 1.0, 3.0])
    fs = scale * rng.standard_normal((n, size))
    chain = ChainSpec.build(init, kernels, fs)
    return center_observables(chain) if centered else chain


def random_joint_table(rng: np.random.Generator, size: int) -> np.ndarray:
    u = rng.random()
    if u < 0.1:
        p = random_stochastic_rows(rng, 1, size)[0]
        return np.diag(p)
    if u < 0.2:
        a, b = random_stochastic_rows(rng, 2, size)
        return np.outer(a, b)
    t = random_stochastic_rows(rng, 1, size * size)[0].reshape(size, size)
    return t / t.sum()


def random_beta(rng: np.random.Generator, n: int) -> BetaSequence:
    density = rng.random()
    return BetaSequence((rng.random(n) < density).astype(np.int8))
