"""Kernel backend selection.

The compiled extension is used when it imports; set ``MDSREL_PURE_PYTHON=1``
to force the numpy fallback.
"""
from __future__ import annotations

import os

import numpy as np

from mdsrel import _kernels_py

if os.environ.get("MDSREL_PURE_PYTHON"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from mdsrel import _kernels as _impl  # type: ignore[attr-defined]
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"


def score_dp(alpha, beta, gamma, mult, tail_eps=1e-15, init_offset=0, init_mass=None, impl=None):
    impl = impl or _impl
    init = np.ones(1) if init_mass is None else np.ascontiguousarray(init_mass, dtype=np.float64)
    return impl.score_dp(
        int(init_offset),
        init,
        np.ascontiguousarray(alpha, dtype=np.float64),
        np.ascontiguousarray(beta, dtype=np.float64),
        np.ascontiguousarray(gamma, dtype=np.float64),
        np.ascontiguousarray(mult, dtype=np.int64),
        float(tail_eps),
    )


def joint_dp(q0, qr, rel_eps=1e-12, cap=None, impl=None):
    impl = impl or _impl
    q0 = np.ascontiguousarray(q0, dtype=np.float64)
    qr = np.ascontiguousarray(qr, dtype=np.float64)
    if cap is None:
        cap = q0.size + 1
    return impl.joint_dp(q0, qr, float(rel_eps), int(cap))
