"""Step-kernel backend selection.

The compiled extension is preferred when importable; the pure-Python
kernels are the fallback. Both produce bit-identical results for the
same RNG stream, so the choice affects speed only. Set
``PLASMODIUM_BACKEND=pure`` (or ``compiled``) to force one.
"""

from __future__ import annotations

import os

from . import _pure


def _select():
    choice = os.environ.get("PLASMODIUM_BACKEND", "auto")
    if choice == "pure":
        return _pure
    if choice in ("auto", "compiled"):
        try:
            from . import _core

            return _core
        except ImportError:
            if choice == "compiled":
                raise
            return _pure
    raise ValueError(f"PLASMODIUM_BACKEND must be auto, compiled or pure, not {choice!r}")


ACTIVE = _select()


def get(name: str | None = None):
    """Active backend module, or an explicit one by name."""
    if name is None:
        return ACTIVE
    if name == "pure":
        return _pure
    if name == "compiled":
        from . import _core

        return _core
    raise ValueError(f"unknown backend {name!r}")


def available() -> list[str]:
    names = []
    try:
        from . import _core  # noqa: F401

        names.append("compiled")
    except ImportError:
        pass
    names.append("pure")
    return names
