"""Exact second-moment structure of the zero-start process.

Covariances come from the moving-average kernel: with unit-variance
innovations,

    Cov(X[k1,l1], X[k2,l2]) = sum over (i, j) in T_{min k, min l} of
        C(k1+l1-i-j, k1-i) C(k2+l2-i-j, k2-i) alpha^(k1+k2-2i) beta^(l1+l2-2j).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidArgumentError
from .kernels import binomial_pmf_vector, kernel_weight
from .lattice import ModelParams


@dataclass(frozen=True)
class LatticePoint:
    k: int
    ell: int


@dataclass(frozen=True)
class ScaledPoint:
    s: float
    t: float


def _as_point(p) -> tuple[int, int]:
    if isinstance(p, LatticePoint):
        return p.k, p.ell
    k, ell = p
    return int(k), int(ell)


def _as_scaled(p):
    if isinstance(p, ScaledPoint):
        return p.s, p.t
    s, t = p
    return s, t


def triangle_cells(k: int, ell: int):
    """Coordinates ``(i, j)`` of ``T_{k,l}``; empty when ``k + l < 1``."""
    if k + ell < 1:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty
    i_vals = np.arange(1 - ell, k + 1, dtype=np.int64)
    # for fixed i, j runs from 1 - i to l
    counts = ell - (1 - i_vals) + 1
    i = np.repeat(i_vals, counts)
    offsets = np.repeat(np.cumsum(counts) - counts, counts)
    j = np.arange(i.size, dtype=np.int64) - offsets + (1 - i)
    return i, j


def covariance_exact(p1, p2, params: ModelParams) -> float:
    """Covariance of ``X`` at two lattice points (0 when the index set is empty)."""
    k1, l1 = _as_point(p1)
    k2, l2 = _as_point(p2)
    i, j = triangle_cells(min(k1, k2), min(l1, l2))
    if i.size == 0:
        return 0.0
    a, b = params.alpha, params.beta
    w1 = kernel_weight(k1 + l1 - i - j, k1 - i, a, b)
    w2 = kernel_weight(k2 + l2 - i - j, k2 - i, a, b)
    return float(np.sum(w1 * w2))


def _check_unit(name, x):
    if not 0.0 < x < 1.0:
        raise InvalidArgumentError(f"{name} must lie in (0, 1), got {x}")


def conv_binomial_pmf_vector(k: int, ell: int, mu: float, nu: float):
    """pmf of ``Binomial(k, mu) + Binomial(l, nu)`` on ``0..k+l``."""
    _check_unit("mu", mu)
    _check_unit("nu", nu)
    if k < 0 or ell < 0:
        raise InvalidArgumentError("k and l must be nonnegative")
    return np.convolve(binomial_pmf_vector(k, mu), binomial_pmf_vector(ell, nu))


def conv_binomial_pmf(k: int, ell: int, mu: float, nu: float, i: int) -> float:
    pmf = conv_binomial_pmf_vector(k, ell, mu, nu)
    return float(pmf[i]) if 0 <= i <= k + ell else 0.0


def check_pmf_bounds(k: int, ell: int, mu: float, nu: float, D: float) -> bool:
    """Both pointwise and increment bounds of the convolved pmf for constant ``D``."""
    if k + ell < 1:
        raise InvalidArgumentError("bounds need k + l >= 1")
    pmf = conv_binomial_pmf_vector(k, ell, mu, nu)
    total = k + ell
    return bool(pmf.max() <= D / math.sqrt(total) and np.abs(np.diff(pmf)).max() <= D / total)


def _on_line_exact(values) -> bool:
    return all(isinstance(v, (int, Fraction)) and not isinstance(v, bool) for v in values)


def on_characteristic_line(p1, p2, alpha) -> bool:
    """Whether ``(1 - alpha)(s1 - s2) == alpha (t1 - t2)``.

    Integer and ``Fraction`` inputs are decided exactly; floats use a
    relative tolerance of 1e-12 on the linear form.
    """
    s1, t1 = _as_scaled(p1)
    s2, t2 = _as_scaled(p2)
    if _on_line_exact((s1, t1, s2, t2, alpha)):
        a = Fraction(alpha)
        return (1 - a) * (Fraction(s1) - Fraction(s2)) == a * (Fraction(t1) - Fraction(t2))
    gap = (1.0 - alpha) * (s1 - s2) - alpha * (t1 - t2)
    return abs(gap) <= 1e-12 * (1.0 + abs(s1) + abs(s2) + abs(t1) + abs(t2))


def z_alpha_limit(p1, p2, alpha) -> float:
    """Limit of the scaled covariances of the unit-root field (``beta = 1 - alpha``)."""
    s1, t1 = _as_scaled(p1)
    s2, t2 = _as_scaled(p2)
    _check_unit("alpha", float(alpha))
    if not (s1 + t1 > 0 and s2 + t2 > 0):
        raise InvalidArgumentError("scaled points need s + t > 0")
    if not on_characteristic_line((s1, t1), (s2, t2), alpha):
        return 0.0
    s1, t1, s2, t2, a = (float(v) for v in (s1, t1, s2, t2, alpha))
    num = math.sqrt(s1 + s2 + t1 + t2) - math.sqrt(abs(s1 - s2) + abs(t1 - t2))
    return num / math.sqrt(2.0 * math.pi * a * (1.0 - a))


def quadform_cov(a, b, c, d, fourth_moments) -> float:
    """``Cov(XY, ZW)`` for linear forms ``X = a.xi`` etc. in independent
    standardised variables with the given fourth moments."""
    vecs = [np.atleast_1d(np.asarray(v, dtype=float)) for v in (a, b, c, d)]
    m4 = np.atleast_1d(np.asarray(fourth_moments, dtype=float))
    if np.any(m4 < 0):
        raise InvalidArgumentError("fourth moments must be nonnegative")
    size = max(max(v.size for v in vecs), m4.size)
    a, b, c, d = (np.pad(v, (0, size - v.size)) for v in vecs)
    if m4.size < size:
        raise InvalidArgumentError("need a fourth moment for every variable")
    return float(np.sum((m4 - 3.0) * a * b * c * d) + (a @ c) * (b @ d) + (a @ d) * (b @ c))


@dataclass(frozen=True)
class GrowthRow:
    m: int
    s1: float
    t1: float
    s2: float
    t2: float
    scaled_cov: float
    neighbour_diff: float
    z_limit: float
    # |Cov(X, X')| / sqrt(k1 + l1 + k2 + l2), bounded for a covariance-growth witness
    cov_bound_ratio: float
    # |neighbour_diff| * sqrt(m), bounded for a neighbour-swap witness
    diff_ratio: float


GROWTH_CSV_HEADER = ["m", "s1", "t1", "s2", "t2", "scaled_cov", "neighbour_diff", "z_limit"]


def _z_points(m, s, t):
    ks, kt = math.floor(m * s), math.floor(m * t)
    return (ks + 1, kt), (ks, kt + 1)


def covariance_growth_scan(
    n: int,
    alpha: float,
    points: Iterable[Sequence],
    m_values: Iterable[int] | None = None,
) -> list[GrowthRow]:
    """Scaled covariances of the piecewise-constant fields for ``m <= n``.

    For each pair of scaled points and each ``m``, ``scaled_cov`` is
    ``Cov(Z10(p1), Z10(p2))`` with ``Z10(s, t) = m^(-1/4) X[[ms]+1, [mt]]``,
    and ``neighbour_diff`` is ``Cov(Z10(p1), Z01(p2)) - Cov(Z10(p1), Z10(p2))``.
    """
    _check_unit("alpha", alpha)
    params = ModelParams(alpha, 1.0 - alpha)
    ms = list(range(1, n + 1)) if m_values is None else [int(m) for m in m_values]
    rows = []
    for p1, p2 in points:
        s1, t1 = (float(v) for v in _as_scaled(p1))
        s2, t2 = (float(v) for v in _as_scaled(p2))
        z = z_alpha_limit((s1, t1), (s2, t2), alpha)
        for m in ms:
            q10_1, _ = _z_points(m, s1, t1)
            q10_2, q01_2 = _z_points(m, s2, t2)
            cov = covariance_exact(q10_1, q10_2, params)
            cross = covariance_exact(q10_1, q01_2, params)
            scale = 1.0 / math.sqrt(m)
            total = sum(q10_1) + sum(q10_2)
            diff = scale * (cross - cov)
            rows.append(
                GrowthRow(
                    m=m,
                    s1=s1,
                    t1=t1,
                    s2=s2,
                    t2=t2,
                    scaled_cov=scale * cov,
                    neighbour_diff=diff,
                    z_limit=z,
                    cov_bound_ratio=abs(cov) / math.sqrt(total) if total > 0 else 0.0,
                    diff_ratio=abs(diff) * math.sqrt(m),
                )
            )
    return rows


def growth_scan_to_csv(rows: Iterable[GrowthRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(GROWTH_CSV_HEADER)
    for row in rows:
        writer.writerow(
            [row.m] + [format(getattr(row, name), ".12g") for name in GROWTH_CSV_HEADER[1:]]
        )
    return buf.getvalue()


def diagonal_moments(t_max: int, params: ModelParams):
    """Per-diagonal second moments of the zero-start field.

    Returns ``(var, cross)`` arrays indexed by anti-diagonal ``t = 0..t_max``:
    ``var[t] = Var X[k, l]`` and ``cross[t] = Cov(X[k-1, l+1], X[k, l])`` for
    any cell with ``k + l = t``.  Both depend on ``t`` only.
    """
    var = np.zeros(t_max + 1)
    cross = np.zeros(t_max + 1)
    acc_v = acc_c = 0.0
    for t in range(1, t_max + 1):
        m = t - 1
        w = np.atleast_1d(kernel_weight(np.full(m + 1, m), np.arange(m + 1), params.alpha, params.beta))
        acc_v += float(np.dot(w, w))
        acc_c += float(np.dot(w[:-1], w[1:]))
        var[t], cross[t] = acc_v, acc_c
    return var, cross


def expected_s_sums(n: int, params: ModelParams):
    """Exact ``(E S1, E S2, E S3)`` over ``T_n`` for unit-variance innovations."""
    var, cross = diagonal_moments(2 * n - 1, params)
    s = np.arange(1, 2 * n + 1)
    count = 2 * n - s + 1
    v, c = var[s - 1], cross[s - 1]
    return (
        float(np.sum(count * (2.0 * v - 2.0 * c))),
        float(np.sum(count * (c - v))),
        float(np.sum(count * v)),
    )
