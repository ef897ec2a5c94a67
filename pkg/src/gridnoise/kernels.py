"""Backend selection for the simulation stepping kernel.

The compiled Cython kernel is preferred when the extension built; the
NumPy fallback is semantically identical (identical estimates up to
floating-point reduction order). ``backend=`` arguments downstream accept
``"compiled"``, ``"python"`` or ``None`` for the default.
"""

from __future__ import annotations

from . import _fallback
from .errors import InputError

try:
    from . import _speedups
except ImportError:  # extension not built; NumPy fallback carries the load
    _speedups = None

DEFAULT_BACKEND = "compiled" if _speedups is not None else "python"


def available_backends() -> tuple[str, ...]:
    return ("compiled", "python") if _speedups is not None else ("python",)


def get_backend(name: str | None = None):
    """Resolve a backend name to its kernel module."""
    name = name or DEFAULT_BACKEND
    if name == "compiled":
        if _speedups is None:
            raise InputError("compiled kernel is not available in this installation")
        return _speedups
    if name == "python":
        return _fallback
    raise ValueError(f"unknown backend {name!r}; expected 'compiled' or 'python'")
