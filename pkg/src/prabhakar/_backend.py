"""Select the compiled kernels when available, the numpy fallback otherwise.

Set ``PRABHAKAR_BACKEND=python`` to force the fallback at import time, or call
:func:`use` at runtime (the benchmark and the backend-parity tests do).
"""

import os

from . import _fallback

try:
    from . import _kernels as _compiled
except ImportError:  # pragma: no cover - depends on the build
    _compiled = None

impl = _fallback
name = "python"


def use(backend):
    """Switch to ``"compiled"`` or ``"python"``; return the previous name."""
    global impl, name
    previous = name
    if backend == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not built")
        impl, name = _compiled, "compiled"
    elif backend == "python":
        impl, name = _fallback, "python"
    else:
        raise ValueError(f"unknown backend {backend!r}")
    return previous


def available():
    return ["compiled", "python"] if _compiled is not None else ["python"]


if _compiled is not None and os.environ.get("PRABHAKAR_BACKEND", "") != "python":
    use("compiled")
