"""Contraction-kernel selection: compiled extension with numpy fallback.

Set TRACESHIFT_PURE_PYTHON=1 to force the fallback.
"""

import os

if os.environ.get("TRACESHIFT_PURE_PYTHON"):
    from . import _contract_py as _impl
else:
    try:
        from . import _contract as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _contract_py as _impl

BACKEND = _impl.BACKEND_NAME
moi_contract = _impl.moi_contract
