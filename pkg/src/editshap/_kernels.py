"""Hot numeric kernels for the exact-Shapley combination step.

Once every subset's delta-M value sits in a dense table, turning it into
per-player attributions is an O(N * 2^N) float loop. That loop is
JIT-compiled with numba when available; set ``ESH_NO_NUMBA=1`` to force
the pure-numpy fallback (the benchmark in ``benchmarks/`` compares both).
Both paths are exposed unconditionally so tests and benchmarks can pin
one implementation.
"""

from __future__ import annotations

import os

import numpy as np

_DISABLED = os.environ.get("ESH_NO_NUMBA", "").strip().lower() in {"1", "true", "yes"}

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAS_NUMBA = False


def popcount_table(n: int) -> np.ndarray:
    """Bit counts for every mask below ``2**n``."""
    masks = np.arange(1 << n, dtype=np.uint32)
    return np.bitwise_count(masks).astype(np.int64)


def exact_combine_numpy(delta: np.ndarray, weights: np.ndarray, pop: np.ndarray, n: int) -> np.ndarray:
    """Vectorized fallback: phi[i] = sum over masks without i of
    weights[|mask|] * (delta[mask | bit_i] - delta[mask])."""
    masks = np.arange(delta.shape[0], dtype=np.int64)
    phi = np.empty(n, dtype=np.float64)
    for i in range(n):
        bit = 1 << i
        without = masks[(masks & bit) == 0]
        phi[i] = np.sum(weights[pop[without]] * (delta[without | bit] - delta[without]))
    return phi


def _exact_combine_loops(delta, weights, pop, n):  # pragma: no cover - jitted
    phi = np.zeros(n, dtype=np.float64)
    comp = np.zeros(n, dtype=np.float64)  # Kahan compensation per player
    # The full mask has no unset bit, so pop[m] stays within the weight table.
    for m in range(delta.shape[0] - 1):
        d = delta[m]
        w = weights[pop[m]]
        for i in range(n):
            bit = 1 << i
            if m & bit == 0:
                y = w * (delta[m | bit] - d) - comp[i]
                t = phi[i] + y
                comp[i] = (t - phi[i]) - y
                phi[i] = t
    return phi


if HAS_NUMBA:
    exact_combine_numba = njit(cache=True)(_exact_combine_loops)
else:  # pragma: no cover
    exact_combine_numba = None


def use_numba() -> bool:
    return HAS_NUMBA and not _DISABLED


def exact_combine(delta: np.ndarray, weights: np.ndarray, n: int) -> np.ndarray:
    """Combine the dense delta-M table into per-player Shapley values."""
    pop = popcount_table(n)
    if use_numba():
        return exact_combine_numba(delta, weights, pop, n)
    return exact_combine_numpy(delta, weights, pop, n)
