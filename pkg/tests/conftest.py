"""Shared fixtures and independent brute-force reference implementations.

The brute-force functions below deliberately use plain Python loops and
per-cell index arithmetic (2k, 2k+1, k // 2) so they share no code path
with the vectorized library implementations they are checked against.
"""

import numpy as np
import pytest
from hypothesis import strategies as st

from barlineage import ObservationTree, ValueTree


# ---------------------------------------------------------------- oracles

def brute_counts(tree):
    """Per-generation observed counts by direct iteration over labels."""
    n = tree.depth
    z = [[0, 0] for _ in range(n + 1)]
    z[0][1] = 1
    for g in range(1, n + 1):
        for k in range(2 ** g, 2 ** (g + 1)):
            if tree.delta[k]:
                z[g][k % 2] += 1
    t01 = []
    both = 0
    for g in range(n + 1):
        for k in range(2 ** g, 2 ** (g + 1)):
            if 2 * k + 1 < len(tree.delta) and tree.delta[2 * k] and tree.delta[2 * k + 1]:
                both += 1
        t01.append(both)
    return z, t01


def brute_reproduction(tree):
    """Reproduction probability estimates by explicit summation."""
    n = tree.depth
    phat = np.zeros(8)
    counts = [0, 0]
    for i in (0, 1):
        num = {(0, 0): 0, (1, 0): 0, (0, 1): 0, (1, 1): 0}
        den = 0
        for k in range(1, 2 ** (n - 1)):  # sub-tree up to generation n-2
            m = 2 * k + i
            if tree.delta[m]:
                den += 1
                num[(int(tree.delta[2 * m]), int(tree.delta[2 * m + 1]))] += 1
        counts[i] = den
        if den:
            phat[4 * i + 0] = num[(0, 0)] / den
            phat[4 * i + 1] = num[(1, 0)] / den
            phat[4 * i + 2] = num[(0, 1)] / den
            phat[4 * i + 3] = num[(1, 1)] / den
    return phat, counts


def brute_sufficient_stats(values, tree):
    """Design sums by explicit per-mother accumulation."""
    n = tree.depth
    s0 = np.zeros((2, 2))
    s1 = np.zeros((2, 2))
    s01 = np.zeros((2, 2))
    rhs = np.zeros(4)
    for k in range(1, 2 ** n):
        xk = values.x[k]
        mm = np.array([[1.0, xk], [xk, xk * xk]])
        d0, d1 = int(tree.delta[2 * k]), int(tree.delta[2 * k + 1])
        s0 += d0 * mm
        s1 += d1 * mm
        s01 += d0 * d1 * mm
        rhs[0] += d0 * values.x[2 * k]
        rhs[1] += d0 * xk * values.x[2 * k]
        rhs[2] += d1 * values.x[2 * k + 1]
        rhs[3] += d1 * xk * values.x[2 * k + 1]
    return s0, s1, s01, rhs


def brute_noise(values, tree, theta):
    """Residual variance / sister covariance by explicit loops."""
    a, b, c, d = theta
    n = tree.depth
    sum_sq = 0.0
    sum_cross = 0.0
    n_pairs = 0
    n_tn = sum(int(tree.delta[k]) for k in range(1, 2 ** (n + 1)))
    for k in range(1, 2 ** n):
        e0 = tree.delta[2 * k] * (values.x[2 * k] - a - b * values.x[k])
        e1 = tree.delta[2 * k + 1] * (values.x[2 * k + 1] - c - d * values.x[k])
        sum_sq += e0 * e0 + e1 * e1
        sum_cross += e0 * e1
        if tree.delta[2 * k] and tree.delta[2 * k + 1]:
            n_pairs += 1
    rho = sum_cross / n_pairs if n_pairs else 0.0
    return sum_sq / n_tn, rho, n_pairs


def brute_sandwich(s0, s1, s01, t_star, sigma2, rho):
    """C = |T*| Sigma^-1 Gamma |T*| Sigma^-1 as one plain matrix product."""
    sigma = np.block([[s0, np.zeros((2, 2))], [np.zeros((2, 2)), s1]])
    gamma = np.block([[sigma2 * s0, rho * s01], [rho * s01, sigma2 * s1]]) / t_star
    si = np.linalg.inv(sigma)
    return (t_star * si) @ gamma @ (t_star * si)


# --------------------------------------------------------------- fixtures

def random_tree(depth, rng, p_obs=0.8):
    """Random valid observation tree: each daughter present w.p. p_obs
    given her mother is, built top-down so the orphan rule holds."""
    delta = np.zeros(2 ** (depth + 1), dtype=np.uint8)
    delta[1] = 1
    for k in range(1, 2 ** depth):
        if delta[k]:
            delta[2 * k] = rng.random() < p_obs
            delta[2 * k + 1] = rng.random() < p_obs
    return ObservationTree(depth, delta)


def random_values(depth, rng):
    return ValueTree(depth, np.concatenate([[0.0], rng.normal(size=2 ** (depth + 1) - 1)]))


@st.composite
def observation_trees(draw, min_depth=2, max_depth=5):
    """Hypothesis strategy for valid observation trees."""
    depth = draw(st.integers(min_depth, max_depth))
    delta = np.zeros(2 ** (depth + 1), dtype=np.uint8)
    delta[1] = 1
    for k in range(1, 2 ** depth):
        if delta[k]:
            delta[2 * k] = draw(st.booleans())
            delta[2 * k + 1] = draw(st.booleans())
    return ObservationTree(depth, delta)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
