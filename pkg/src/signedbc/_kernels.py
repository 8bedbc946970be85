"""Compiled update loop.

Accumulates each node's numerator and denominator sequentially in CSR
order, the same order ``np.bincount`` uses, so results are bit-identical
to the numpy path in :mod:`signedbc.dynamics`.
"""

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None

HAVE_NUMBA = numba is not None


def _update_loop(x, out, c, indptr, cols, signs, scaled):
    n = x.shape[0]
    for i in range(n):
        xi = x[i]
        num = 0.0
        den = 0.0
        for p in range(indptr[i], indptr[i + 1]):
            j = cols[p]
            d = x[j] - xi
            absd = abs(d)
            if absd < c:
                s = signs[p]
                if s < 0 and scaled:
                    if d > 0.0:
                        off = abs(c - absd)
                    elif d < 0.0:
                        off = -abs(c - absd)
                    elif j > i:
                        off = c
                    else:
                        off = -c
                else:
                    off = d
                num += s * off
                den += 1.0
            else:
                num += 0.0
        out[i] = xi + num / (1.0 + den)
    return out


if HAVE_NUMBA:
    update_loop = numba.njit(cache=True, nogil=True)(_update_loop)
else:  # pragma: no cover
    update_loop = None
