"""Backend selection for the hot kernels.

The compiled extension is used when it was built and ``SPREADLAB_PURE`` is not
set to ``1``; otherwise the numpy implementations in ``_pykernels`` are used.
Both backends return identical results.
"""

from __future__ import annotations

import os

from spreadlab import _pykernels

BACKEND = "python"
_impl = _pykernels
if os.environ.get("SPREADLAB_PURE") != "1":
    try:
        from spreadlab import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels

popcount = _impl.popcount
first_subset_index = _impl.first_subset_index
upset_profile = _impl.upset_profile
union_profile = _impl.union_profile
axial3_dp = _impl.axial3_dp
hungarian = _impl.hungarian


def backends() -> dict[str, object]:
    """All importable backends by name (used by the benchmark and tests)."""
    out: dict[str, object] = {"python": _pykernels}
    try:
        from spreadlab import _kernels

        out["cython"] = _kernels
    except ImportError:
        pass
    return out
