"""Evaluation kernel selection.

The hot kernels (piecewise-geodesic endpoints, walk stepping) exist twice:
a compiled Cython extension and a pure NumPy fallback.  The compiled module
is preferred when importable; set ``GEOWALK_BACKEND=python`` or
``GEOWALK_BACKEND=cython`` to force a choice (forcing ``cython`` raises if
the extension is missing).
"""

from __future__ import annotations

import os

import numpy as np

from ..spaces import EUCLIDEAN, FLAT_TORUS, HYPERBOLIC, ModelSpace
from . import _pykernels

_ENV = "GEOWALK_BACKEND"
_KIND_CODE = {EUCLIDEAN: 0, HYPERBOLIC: 1, FLAT_TORUS: 2}


def _load():
    requested = os.environ.get(_ENV, "auto").strip().lower()
    if requested in ("python", "numpy", "slow"):
        return _pykernels, "python"
    try:
        from . import _ckernels
    except ImportError:
        if requested in ("cython", "compiled", "fast"):
            raise ImportError(
                "GEOWALK_BACKEND requested the compiled kernels but the "
                "extension is not built; reinstall or set GEOWALK_BACKEND=python"
            )
        return _pykernels, "python"
    if requested not in ("auto", "cython", "compiled", "fast", ""):
        raise ValueError(f"unrecognized {_ENV} value {requested!r}")
    return _ckernels, "cython"


_impl, _backend_name = _load()


def backend() -> str:
    """Name of the active kernel backend: ``"cython"`` or ``"python"``."""
    return _backend_name


def available_backends() -> dict:
    """All importable kernel implementations, keyed by name."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels
        out["cython"] = _ckernels
    except ImportError:
        pass
    return out


def _unpack(space: ModelSpace):
    kind = _KIND_CODE[space.kind]
    a = float(space.curvature_scale) if space.kind == HYPERBOLIC else 0.0
    periods = np.ascontiguousarray(space.periods if space.periods else (), dtype=float)
    return kind, a, periods


def phi_endpoints(space: ModelSpace, x_coords, dirs, r: float, impl=None) -> np.ndarray:
    """Batch endpoints of the piecewise-geodesic map: ``dirs`` is (B, n, m)."""
    kind, a, periods = _unpack(space)
    x = np.ascontiguousarray(x_coords, dtype=float)
    d = np.ascontiguousarray(dirs, dtype=float)
    mod = impl if impl is not None else _impl
    return mod.phi_endpoints(kind, a, periods, x, d, float(r))


def walk_points(space: ModelSpace, x_coords, draws, r: float, impl=None) -> np.ndarray:
    """Batch walk trajectories driven by raw normal draws (B, n, m)."""
    kind, a, periods = _unpack(space)
    x = np.ascontiguousarray(x_coords, dtype=float)
    g = np.ascontiguousarray(draws, dtype=float)
    mod = impl if impl is not None else _impl
    return mod.walk_points(kind, a, periods, x, g, float(r))
