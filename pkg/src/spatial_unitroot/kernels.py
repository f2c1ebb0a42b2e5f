"""Binomial weights of the moving-average kernel.

``kernel_weight(m, r, a, b) = C(m, r) a**r b**(m - r)``.  Up to ``m = 60``
the binomial coefficient comes from an exact integer table; beyond that the
whole term is evaluated in log space.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln, xlogy

from .errors import InvalidArgumentError

EXACT_LIMIT = 60

_COMB = np.zeros((EXACT_LIMIT + 1, EXACT_LIMIT + 1))
for _m in range(EXACT_LIMIT + 1):
    for _r in range(_m + 1):
        _COMB[_m, _r] = float(math.comb(_m, _r))


def kernel_weight(m, r, a: float, b: float):
    """Vectorised ``C(m, r) a^r b^(m-r)``, zero outside ``0 <= r <= m``."""
    m = np.asarray(m, dtype=np.int64)
    r = np.asarray(r, dtype=np.int64)
    m, r = np.broadcast_arrays(m, r)
    out = np.zeros(m.shape, dtype=float)
    valid = (r >= 0) & (r <= m)

    small = valid & (m <= EXACT_LIMIT)
    if small.any():
        ms, rs = m[small], r[small]
        out[small] = _COMB[ms, rs] * np.power(a, rs) * np.power(b, ms - rs)

    large = valid & (m > EXACT_LIMIT)
    if large.any():
        ml, rl = m[large].astype(float), r[large].astype(float)
        logw = (
            gammaln(ml + 1.0)
            - gammaln(rl + 1.0)
            - gammaln(ml - rl + 1.0)
            + xlogy(rl, abs(a))
            + xlogy(ml - rl, abs(b))
        )
        sign = np.ones_like(logw)
        if a < 0:
            sign = np.where(r[large] % 2 == 1, -sign, sign)
        if b < 0:
            sign = np.where((m[large] - r[large]) % 2 == 1, -sign, sign)
        out[large] = sign * np.exp(logw)
    return out if out.ndim else float(out)


def binomial_kernel_prob(m: int, r: int, alpha: float) -> float:
    """``P(S = r)`` for ``S ~ Binomial(m, alpha)``."""
    if not 0.0 < alpha < 1.0:
        raise InvalidArgumentError(f"alpha must lie in (0, 1), got {alpha}")
    if m < 0:
        raise InvalidArgumentError(f"m must be nonnegative, got {m}")
    return kernel_weight(m, r, alpha, 1.0 - alpha)


def binomial_pmf_vector(m: int, p: float):
    """Full pmf of Binomial(m, p) on ``0..m``."""
    return np.atleast_1d(kernel_weight(np.full(m + 1, m), np.arange(m + 1), p, 1.0 - p))
