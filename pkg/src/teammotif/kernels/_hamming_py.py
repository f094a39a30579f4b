"""Pure-NumPy fallback for the window distance kernels."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

BACKEND = "python"


def min_hamming(window: np.ndarray, seq: np.ndarray) -> int:
    """Minimum Hamming mismatch count of ``window`` against every alignment of ``seq``."""
    w = window.shape[0]
    if seq.shape[0] < w:
        raise ValueError("sequence shorter than window")
    views = sliding_window_view(seq, w)
    return int((views != window).sum(axis=1).min())


def _fill_columns(windows: np.ndarray, seqs: Sequence[np.ndarray], out: np.ndarray, start: int, stop: int) -> None:
    w = windows.shape[1]
    for j in range(start, stop):
        views = sliding_window_view(seqs[j], w)
        mismatches = (windows[:, None, :] != views[None, :, :]).sum(axis=2)
        out[:, j] = mismatches.min(axis=1) / w


def distance_matrix(windows: np.ndarray, seqs: Sequence[np.ndarray], n_jobs: int = 1) -> np.ndarray:
    """Normalized minimum-Hamming distance of each window to each sequence.

    ``windows`` is an (n_windows, w) int8 array; ``seqs`` a list of int8
    arrays, each of length >= w.  Output shape (n_windows, len(seqs)).
    """
    n_w, w = windows.shape
    for seq in seqs:
        if seq.shape[0] < w:
            raise ValueError("sequence shorter than window")
    out = np.empty((n_w, len(seqs)), dtype=np.float64)
    if n_jobs <= 1 or len(seqs) < 2:
        _fill_columns(windows, seqs, out, 0, len(seqs))
        return out
    n_jobs = min(n_jobs, len(seqs))
    bounds = np.linspace(0, len(seqs), n_jobs + 1).astype(int)
    with ThreadPoolExecutor(max_workers=n_jobs) as pool:
        futures = [
            pool.submit(_fill_columns, windows, seqs, out, bounds[i], bounds[i + 1])
            for i in range(n_jobs)
        ]
        for future in futures:
            future.result()
    return out
