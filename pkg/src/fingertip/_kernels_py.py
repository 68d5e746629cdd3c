"""Numpy implementations of the sample-level kernels.

These are the fallback twins of the compiled routines in ``_kernels.pyx``.
Both backends implement identical semantics; the compiled one only exists
because these functions run per-sample over 44.1 kHz streams inside every
detection trial. Keep the two files in sync.
"""

import numpy as np

BACKEND_NAME = "python"


def moving_rms(samples: np.ndarray, window: int) -> np.ndarray:
    """Root-mean-square over a trailing window, zero-padded before t=0.

    out[i] = sqrt(mean(x[i-window+1 : i+1] ** 2)) with x == 0 for negative
    indices. Window sums are differences of an extended-precision cumulative
    sum; prefixed zeros leave every partial sum bit-identical, so delaying
    the input delays the output exactly.
    """
    x = np.ascontiguousarray(samples, dtype=np.float64)
    n = x.shape[0]
    w = int(window)
    if w < 1:
        raise ValueError("window must be >= 1")
    if n == 0:
        return np.empty(0, dtype=np.float64)
    csum = np.cumsum((x * x).astype(np.longdouble))
    sums = csum.copy()
    sums[w:] -= csum[:-w]
    sums = np.maximum(sums, 0.0).astype(np.float64)
    return np.sqrt(sums / w)


def binary_runs(mask: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Maximal runs of ones in a 0/1 array as (starts, ends), end exclusive."""
    b = np.asarray(mask, dtype=np.uint8)
    if b.size == 0:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty
    padded = np.concatenate(([0], b, [0])).astype(np.int8)
    diff = np.diff(padded)
    starts = np.flatnonzero(diff == 1).astype(np.int64)
    ends = np.flatnonzero(diff == -1).astype(np.int64)
    return starts, ends


def merge_runs(
    starts: np.ndarray,
    ends: np.ndarray,
    max_gap: int,
    min_length: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Merge runs separated by a gap < max_gap, then drop runs < min_length.

    Runs must be sorted and non-overlapping. Gap and length are in samples;
    the merge comparison is strict, the length drop keeps runs >= min_length.
    """
    starts = np.asarray(starts, dtype=np.int64)
    ends = np.asarray(ends, dtype=np.int64)
    if starts.size == 0:
        return starts.copy(), ends.copy()
    out_starts = [int(starts[0])]
    out_ends = [int(ends[0])]
    for s, e in zip(starts[1:], ends[1:]):
        if s - out_ends[-1] < max_gap:
            out_ends[-1] = int(e)
        else:
            out_starts.append(int(s))
            out_ends.append(int(e))
    ss = np.array(out_starts, dtype=np.int64)
    ee = np.array(out_ends, dtype=np.int64)
    keep = (ee - ss) >= min_length
    return ss[keep], ee[keep]
