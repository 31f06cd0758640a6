"""Python interface to the flatflow flat-surface engine.

The compiled core is built by cargo (``cargo build -p flatflow-py``); this
package locates the resulting shared library and re-exports its API.
"""

import importlib.machinery
import importlib.util
import os
import sys
from pathlib import Path

_NATIVE = "flatflow._native"


def _candidates():
    override = os.environ.get("FLATFLOW_NATIVE")
    if override:
        yield Path(override)
    root = Path(__file__).resolve().parents[2]
    for profile in ("release", "debug"):
        yield root / "target" / profile / "libflatflow_native.so"


def _load():
    paths = [p for p in _candidates() if p.exists()]
    if not paths:
        raise ImportError(
            "flatflow native module not found; run `cargo build -p flatflow-py`"
            " or point FLATFLOW_NATIVE at libflatflow_native.so"
        )
    path = max(paths, key=lambda p: p.stat().st_mtime)
    loader = importlib.machinery.ExtensionFileLoader(_NATIVE, str(path))
    spec = importlib.util.spec_from_loader(_NATIVE, loader, origin=str(path))
    module = importlib.util.module_from_spec(spec)
    sys.modules[_NATIVE] = module
    loader.exec_module(module)
    return module


_native = _load()

Surface = _native.Surface
Cover = _native.Cover
holonomy = _native.holonomy
double = _native.double
orient = _native.orient
unfold = _native.unfold
trace = _native.trace
ergodicity = _native.ergodicity

__all__ = [
    "Surface",
    "Cover",
    "holonomy",
    "double",
    "orient",
    "unfold",
    "trace",
    "ergodicity",
]
