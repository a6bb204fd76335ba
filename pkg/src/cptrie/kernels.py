"""Scan-kernel backend selection.

The compiled extension (``cptrie._scan_cy``) is preferred when it built;
otherwise the pure-Python reference (``cptrie._scan_py``) takes over with
identical semantics. Set ``CPTRIE_KERNELS=python`` or ``=cython`` to force a
backend (forcing cython raises if the extension is missing).

``benchmarks/bench_kernels.py`` compares the two on a calibration-shaped
workload.
"""

from __future__ import annotations

import os

from . import _scan_py

_forced = os.environ.get("CPTRIE_KERNELS", "").lower()

if _forced == "python":
    _impl = _scan_py
    BACKEND = "python"
elif _forced == "cython":
    from . import _scan_cy as _impl  # type: ignore[no-redef]

    BACKEND = "cython"
elif _forced:
    raise RuntimeError(
        f"CPTRIE_KERNELS must be 'python' or 'cython', got {_forced!r}"
    )
else:
    try:
        from . import _scan_cy as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _scan_py
        BACKEND = "python"

top_p_cut = _impl.top_p_cut
count_above = _impl.count_above
entropy_profile = _impl.entropy_profile
adaptive_cut = _impl.adaptive_cut
zipf_s_hat = _impl.zipf_s_hat


def available_backends() -> dict[str, object]:
    """Importable kernel modules by name (for parity tests and benchmarks)."""
    backends: dict[str, object] = {"python": _scan_py}
    try:
        from . import _scan_cy

        backends["cython"] = _scan_cy
    except ImportError:
        pass
    return backends
