"""Selection between the compiled integrator and the numpy fallback.

``OQS_BACKEND=python`` forces the fallback even when the extension is built.
"""

from __future__ import annotations

import os

from ..errors import ConfigError
from ._fallback import integrate_batch as _python_batch

try:
    from ._core import integrate_batch as _compiled_batch
except ImportError:  # extension not built
    _compiled_batch = None

BACKENDS = ("auto", "compiled", "python")


def compiled_available() -> bool:
    return _compiled_batch is not None


def resolve_backend(name: str | None = None):
    """Return ``(resolved_name, integrate_batch)`` for ``name`` or the environment default."""
    name = name or os.environ.get("OQS_BACKEND", "auto")
    if name not in BACKENDS:
        raise ConfigError(f"backend must be one of {BACKENDS}, got {name!r}")
    if name == "auto":
        name = "compiled" if compiled_available() else "python"
    if name == "compiled":
        if _compiled_batch is None:
            raise ConfigError("compiled backend requested but the extension is not built")
        return name, _compiled_batch
    return name, _python_batch


DEFAULT_BACKEND = resolve_backend()[0]
