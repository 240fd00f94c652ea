"""Shared fixtures and independent oracle constructions.

The oracle helpers below build operators by explicit Kronecker products and
occupation-number bookkeeping, deliberately sharing no code with the
package's index-arithmetic embedding; agreement between the two paths is
itself part of the verification.
"""

from __future__ import annotations

from functools import reduce

import numpy as np
import pytest

from agsplab.config import ExperimentConfig
from agsplab.experiment import Pipeline, build_pipeline

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]])
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]])
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]])
EYE2 = np.eye(2)


def kron_chain(n: int, ops: dict[int, np.ndarray]) -> np.ndarray:
    """Oracle embedding: explicit kron product, sites 1-based."""
    return reduce(np.kron, [ops.get(i, EYE2) for i in range(1, n + 1)])


def oracle_ising(n: int, alpha: float, J: float, B: float) -> np.ndarray:
    """Independent construction of the power-law XX + transverse-field chain."""
    H = np.zeros((2**n, 2**n))
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            H += (J / (j - i) ** alpha) * kron_chain(n, {i: PAULI_X, j: PAULI_X})
        if B != 0.0:
            H += B * kron_chain(n, {i: PAULI_Z})
    return H


def oracle_fermion_annihilator(i: int, n: int) -> np.ndarray:
    """Annihilator in the occupation basis (site i 1-based, bit i-1 = occupied)."""
    dim = 2**n
    M = np.zeros((dim, dim))
    bit = 1 << (i - 1)
    for s in range(dim):
        if s & bit:
            sign = (-1) ** bin(s & (bit - 1)).count("1")
            M[s & ~bit, s] = sign
    return M


def oracle_fermion_chain(n: int, alpha: float, A: float, B: float) -> np.ndarray:
    """Occupation-basis construction of the quadratic long-range chain."""
    ops = [oracle_fermion_annihilator(i, n) for i in range(1, n + 1)]
    H = np.zeros((2**n, 2**n))
    for i in range(n):
        for j in range(i + 1, n):
            r = float(j - i) ** alpha
            t = (A / r) * ops[i] @ ops[j].T + (B / r) * ops[i] @ ops[j]
            H += t + t.T
    return H


def random_state(rng, dim: int) -> np.ndarray:
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v)


# The reference instance of the acceptance criteria: long-range Ising,
# n=10, alpha=3, J=1, B=2, q=2, l=2.  Building it once saves minutes.
REFERENCE_CONFIG = ExperimentConfig(
    family="long_range_ising",
    n=10,
    alpha=3.0,
    J=1.0,
    B=2.0,
    q=2,
    l=2,
    taus=[6.0],
    ms=[4, 8],
    seed=7,
)


@pytest.fixture(scope="session")
def reference_pipeline() -> Pipeline:
    return build_pipeline(REFERENCE_CONFIG)


@pytest.fixture(scope="session")
def small_pipeline() -> Pipeline:
    cfg = ExperimentConfig(n=8, alpha=3.0, J=1.0, B=2.0, q=2, l=2, taus=[5.0], ms=[4], seed=3)
    return build_pipeline(cfg)


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)
