"""Kernel backend selection.

The compiled extension (stylo._ckernels) is preferred when importable; the
numpy implementation is the fallback. STYLO_KERNELS=pure|c forces a choice
("c" raises if the extension is missing). Selection happens once at import.
"""
import os

from . import pure

_FORCED = os.environ.get("STYLO_KERNELS", "auto").lower()

if _FORCED not in ("auto", "c", "pure"):
    raise RuntimeError(f"STYLO_KERNELS must be auto, c or pure, got {_FORCED!r}")

if _FORCED == "pure":
    kernels = pure
else:
    try:
        from .. import _ckernels as kernels  # type: ignore[no-redef]
    except ImportError:
        if _FORCED == "c":
            raise RuntimeError("STYLO_KERNELS=c but the compiled extension is not available")
        kernels = pure


def active_backend() -> str:
    """Name of the kernel backend in use: "c" or "pure"."""
    return kernels.NAME
