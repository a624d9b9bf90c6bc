"""Pure-numpy twin of the compiled contraction kernel.

Expands the cluster-level symbol tensor to coordinate level and contracts
with a single einsum. Same contract as ``_contract.moi_contract``; used
when the extension is unavailable or when TRACESHIFT_PURE_PYTHON is set.
"""

import numpy as np

BACKEND_NAME = "numpy"

_LETTERS = "abcdefghijklmnop"


def moi_contract(phi, nclus, cmaps, w):
    k = w.shape[0]
    if k + 1 != len(nclus) or k + 1 != cmaps.shape[0]:
        raise ValueError("inconsistent slot counts")
    if k + 1 > len(_LETTERS):
        raise ValueError(f"arity {k + 1} exceeds kernel depth limit {len(_LETTERS)}")
    grid = phi.reshape(tuple(nclus))
    coord = grid[np.ix_(*[cmaps[i] for i in range(k + 1)])]
    sub = _LETTERS[: k + 1]
    spec = ",".join([sub] + [sub[i : i + 2] for i in range(k)])
    return np.einsum(f"{spec}->{sub[0]}{sub[-1]}", coord, *w, optimize=True)
