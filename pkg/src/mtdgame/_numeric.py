import math

import numpy as np


def exp_tail(x, k):
    """``exp(x) - sum_{j<k} x**j / j!`` without cancellation near zero."""
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty_like(arr)
    small = np.abs(arr) < 0.5
    big = ~small
    if big.any():
        xb = arr[big]
        poly = sum(xb ** j / math.factorial(j) for j in range(k))
        out[big] = np.exp(xb) - poly
    if small.any():
        xs = arr[small]
        term = xs ** k / math.factorial(k)
        acc = term.copy()
        for j in range(k + 1, k + 30):
            term = term * xs / j
            acc = acc + term
        out[small] = acc
    if np.ndim(x) == 0:
        return float(out[0])
    return out.reshape(np.shape(x))
