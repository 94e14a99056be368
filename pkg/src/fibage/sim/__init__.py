"""Discrete-event simulator with a compiled core and a pure-Python twin.

The compiled kernel (built from ``_kernel.pyx``) is preferred when its
extension module is importable; otherwise the pure-Python fallback runs.
Both consume the identical random stream and produce bit-identical
results, so the choice only affects speed. ``benchmarks/bench_backends.py``
compares the two.
"""

from __future__ import annotations

import os

from . import _kernel_py

try:  # compiled kernel is optional
    from . import _kernel as _compiled  # type: ignore[attr-defined]
except ImportError:  # pragma: no cover - depends on the build environment
    _compiled = None

DEFAULT_BACKEND = "compiled" if _compiled is not None else "python"


def available_backends() -> tuple[str, ...]:
    return ("compiled", "python") if _compiled is not None else ("python",)


def resolve_backend(name: str | None) -> str:
    if name is None:
        name = os.environ.get("FIBAGE_BACKEND") or None
    if name is None:
        return DEFAULT_BACKEND
    if name not in ("compiled", "python"):
        raise ValueError(f"unknown backend {name!r}; expected 'compiled' or 'python'")
    if name == "compiled" and _compiled is None:
        raise ValueError("compiled backend requested but the extension module is "
                         "not built; run: python setup.py build_ext --inplace")
    return name


def backend_module(name: str):
    return _compiled if resolve_backend(name) == "compiled" else _kernel_py


from .config import SimConfig, SimResult, sim_result_from_json  # noqa: E402
from .engine import kernel_tables, occupancy_check, run_sim  # noqa: E402

__all__ = [
    "DEFAULT_BACKEND", "SimConfig", "SimResult", "available_backends",
    "backend_module", "kernel_tables", "occupancy_check", "resolve_backend",
    "run_sim", "sim_result_from_json",
]
