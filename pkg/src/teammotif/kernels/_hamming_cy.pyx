# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled window distance kernels.

Sequences are packed into one contiguous buffer so a whole block of columns
is processed without the GIL; with ``n_jobs > 1`` blocks run on real threads.
"""

from concurrent.futures import ThreadPoolExecutor

import numpy as np

BACKEND = "cython"


cdef int _min_hamming_span(const signed char[::1] window,
                           const signed char[::1] packed,
                           Py_ssize_t start, Py_ssize_t stop) nogil:
    cdef Py_ssize_t w = window.shape[0]
    cdef Py_ssize_t i, j
    cdef int best = <int> w
    cdef int mismatches
    for i in range(start, stop - w + 1):
        mismatches = 0
        for j in range(w):
            if packed[i + j] != window[j]:
                mismatches += 1
                if mismatches >= best:
                    break
        if mismatches < best:
            best = mismatches
            if best == 0:
                return 0
    return best


def min_hamming(window, seq):
    """Minimum Hamming mismatch count of ``window`` against every alignment of ``seq``."""
    cdef const signed char[::1] win_view = np.ascontiguousarray(window, dtype=np.int8)
    cdef const signed char[::1] seq_view = np.ascontiguousarray(seq, dtype=np.int8)
    if seq_view.shape[0] < win_view.shape[0]:
        raise ValueError("sequence shorter than window")
    return _min_hamming_span(win_view, seq_view, 0, seq_view.shape[0])


cdef void _fill_block(const signed char[:, ::1] windows,
                      const signed char[::1] packed,
                      const long long[::1] offsets,
                      double[:, ::1] out,
                      Py_ssize_t start, Py_ssize_t stop) nogil:
    cdef Py_ssize_t n_w = windows.shape[0]
    cdef Py_ssize_t w = windows.shape[1]
    cdef Py_ssize_t i, j
    for j in range(start, stop):
        for i in range(n_w):
            out[i, j] = _min_hamming_span(
                windows[i], packed, offsets[j], offsets[j + 1]
            ) / (<double> w)


def _fill_range(const signed char[:, ::1] windows,
                const signed char[::1] packed,
                const long long[::1] offsets,
                double[:, ::1] out,
                Py_ssize_t start, Py_ssize_t stop):
    with nogil:
        _fill_block(windows, packed, offsets, out, start, stop)


def distance_matrix(windows, seqs, int n_jobs=1):
    """Normalized minimum-Hamming distance of each window to each sequence.

    Same contract as the pure-Python backend.
    """
    win_arr = np.ascontiguousarray(windows, dtype=np.int8)
    cdef Py_ssize_t w = win_arr.shape[1]
    arrays = [np.ascontiguousarray(seq, dtype=np.int8) for seq in seqs]
    lengths = np.array([arr.shape[0] for arr in arrays], dtype=np.int64)
    if len(arrays) and lengths.min() < w:
        raise ValueError("sequence shorter than window")
    offsets = np.zeros(len(arrays) + 1, dtype=np.int64)
    np.cumsum(lengths, out=offsets[1:])
    packed = np.concatenate(arrays) if arrays else np.zeros(0, dtype=np.int8)
    out = np.empty((win_arr.shape[0], len(arrays)), dtype=np.float64)
    if not len(arrays):
        return out
    if n_jobs <= 1 or len(arrays) < 2:
        _fill_range(win_arr, packed, offsets, out, 0, len(arrays))
        return out
    n_jobs = min(n_jobs, len(arrays))
    bounds = np.linspace(0, len(arrays), n_jobs + 1).astype(int)
    with ThreadPoolExecutor(max_workers=n_jobs) as pool:
        futures = [
            pool.submit(_fill_range, win_arr, packed, offsets, out, bounds[i], bounds[i + 1])
            for i in range(n_jobs)
        ]
        for future in futures:
            future.result()
    return out
