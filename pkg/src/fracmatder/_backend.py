"""Select the compiled kernels when importable, else the numpy fallback.

``FRACMATDER_BACKEND=python`` forces the fallback, ``compiled`` makes a
missing extension an import error.
"""

from __future__ import annotations

import os
from types import ModuleType

from fracmatder import _pykernels
from fracmatder.errors import ConfigError

try:
    from fracmatder import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

_choice = os.environ.get("FRACMATDER_BACKEND", "auto").strip().lower()
if _choice == "compiled" and _compiled is None:
    raise ImportError("FRACMATDER_BACKEND=compiled but the extension is not built")

kernels: ModuleType = _pykernels if _choice == "python" or _compiled is None else _compiled


def available() -> list[str]:
    return ["python"] + ([] if _compiled is None else ["compiled"])


def get(name: str | None = None) -> ModuleType:
    """Kernel module by name; ``None`` returns the import-time default."""
    if name is None:
        return kernels
    if name == "python":
        return _pykernels
    if name == "compiled":
        if _compiled is None:
            raise ConfigError("compiled kernels are not available in this build")
        return _compiled
    raise ConfigError(f"unknown backend {name!r}; expected 'python' or 'compiled'")
