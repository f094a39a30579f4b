"""Window distance kernels with a compiled core and a pure-Python fallback.

The compiled Cython extension is preferred when present; otherwise the NumPy
implementation is used.  Set ``TEAMMOTIF_KERNEL=python`` (or ``cython``) to
force a backend; forcing ``cython`` fails loudly if the extension is missing.
Both backends expose the same functions and produce identical results.
"""
from __future__ import annotations

import os

from . import _hamming_py

_forced = os.environ.get("TEAMMOTIF_KERNEL")
if _forced == "python":
    _impl = _hamming_py
elif _forced in (None, "", "cython"):
    try:
        from . import _hamming_cy as _impl  # type: ignore[no-redef]
    except ImportError:
        if _forced == "cython":
            raise
        _impl = _hamming_py
else:
    raise ValueError(f"unknown TEAMMOTIF_KERNEL value {_forced!r}")

BACKEND: str = _impl.BACKEND
min_hamming = _impl.min_hamming
distance_matrix = _impl.distance_matrix


def available_backends() -> dict[str, object]:
    """Importable backend modules keyed by name (for parity tests and benchmarks)."""
    backends: dict[str, object] = {"python": _hamming_py}
    try:
        from . import _hamming_cy

        backends["cython"] = _hamming_cy
    except ImportError:
        pass
    return backends
