"""Utility functions shared by the game services"""
import itertools
import logging

import numpy as np

logger = logging.getLogger(__name__)


def subsets(n):
    """All subsets of range(n) as frozensets, smallest first"""
    players = range(n)
    return [frozenset(c) for r in range(n + 1) for c in itertools.combinations(players, r)]


def make_rng(seed):
    return np.random.default_rng(seed)


def barycentric_grid(resolution):
    """
    Points (i/R, j/R, k/R) of the 2-simplex with i + j + k = R

    Args:
        resolution: R, number of steps along each edge (>= 1)

    Returns:
        array of shape (m, 3), rows in lexicographic order of (i, j)
    """
    rows = [(i, j, resolution - i - j)
            for i in range(resolution + 1)
            for j in range(resolution + 1 - i)]
    return np.array(rows, dtype=float) / resolution


def max_abs(array):
    """Largest absolute entry, 0.0 for empty input"""
    array = np.asarray(array)
    return float(np.max(np.abs(array))) if array.size else 0.0
