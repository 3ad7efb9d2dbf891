"""
Compiled inner loops of the binning simulator. All kernels release the GIL so
trial workers in a thread pool run concurrently.
"""
import numba as nb
import numpy as np


@nb.njit(cache=True, nogil=True)
def first_covering_codeword(
    codebook: np.ndarray, x: np.ndarray, weights: np.ndarray, offsets: np.ndarray, threshold: float
) -> int:
    """Index of the first codeword i with offsets[i] + sum_t weights[x_t, z_t] >= threshold, or -1."""
    n = x.shape[0]
    for i in range(codebook.shape[0]):
        total = offsets[i]
        for t in range(n):
            w = weights[x[t], codebook[i, t]]
            if w == -np.inf:
                total = -np.inf
                break
            total += w
        if total >= threshold:
            return i
    return -1


@nb.njit(cache=True, nogil=True)
def word_scores(words: np.ndarray, table: np.ndarray) -> np.ndarray:
    """sum_t table[words[i, t]] for every row i."""
    out = np.zeros(words.shape[0])
    for i in range(words.shape[0]):
        total = 0.0
        for t in range(words.shape[1]):
            total += table[words[i, t]]
        out[i] = total
    return out


@nb.njit(cache=True, nogil=True)
def word_keys(words: np.ndarray, base: int) -> np.ndarray:
    """Big-endian base-``base`` integer of every row."""
    out = np.zeros(words.shape[0], dtype=np.int64)
    for i in range(words.shape[0]):
        key = 0
        for t in range(words.shape[1]):
            key = key * base + words[i, t]
        out[i] = key
    return out


@nb.njit(cache=True, nogil=True)
def cell_scores(cells: np.ndarray, table: np.ndarray) -> np.ndarray:
    """sum_t table[cells[i, t]] with -inf short-circuit, for flat cell indices."""
    out = np.zeros(cells.shape[0])
    for i in range(cells.shape[0]):
        total = 0.0
        for t in range(cells.shape[1]):
            v = table[cells[i, t]]
            if v == -np.inf:
                total = -np.inf
                break
            total += v
        out[i] = total
    return out
