"""Least-squares estimation of the coefficients and the stability parameter.

The raw estimator solves the 2x2 normal equations ``A* theta* = b*`` built
from the regressors ``(X[k-1,l], X[k,l-1])``.  The canonical pair
``(alpha, rho)`` follows from the sign-dependent transform

    B = [[1, -sign(alpha beta)], [0, sign(beta)]],
    (alpha_hat, rho_hat) = (B^T)^-1 (alpha*_hat, beta*_hat),

which reduces to ``alpha_hat = alpha*_hat`` and
``rho_hat = sign(alpha) alpha*_hat + sign(beta) beta*_hat``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

from .errors import InvalidArgumentError, SingularSystemError, UnsupportedRegimeError
from .lattice import ModelParams, Stability, TriangularField

DET_GUARD = 1e-12


class Regime(str, enum.Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"


def lse_from_regressors(west, south, response):
    """Solve the normal equations for arbitrary regressor/response vectors.

    Returns ``(alpha_hat, beta_hat, A_star, b_star)``.
    """
    west, south, response = (np.asarray(v, dtype=float) for v in (west, south, response))
    A = np.array(
        [[np.sum(west * west), np.sum(west * south)], [np.sum(west * south), np.sum(south * south)]]
    )
    b = np.array([np.sum(response * west), np.sum(response * south)])
    det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
    if abs(det) <= DET_GUARD * (np.trace(A) / 2.0) ** 2:
        raise SingularSystemError(A)
    inv = np.array([[A[1, 1], -A[0, 1]], [-A[1, 0], A[0, 0]]]) / det
    theta = inv @ b
    return float(theta[0]), float(theta[1]), A, b


def lse_coefficients(field_: TriangularField):
    """Raw least-squares estimate ``(alpha*, beta*, A*, b*)`` over ``T_n``."""
    west, south = field_.neighbours()
    return lse_from_regressors(west, south, field_.values)


def _check_signs(sign_pattern) -> tuple[int, int]:
    try:
        sa, sb = (int(s) for s in sign_pattern)
    except (TypeError, ValueError) as exc:
        raise InvalidArgumentError(f"bad sign pattern {sign_pattern!r}") from exc
    if sa not in (-1, 1) or sb not in (-1, 1):
        raise InvalidArgumentError(f"sign pattern entries must be +1 or -1, got {sign_pattern!r}")
    return sa, sb


def canonical_matrix(sign_pattern) -> np.ndarray:
    sa, sb = _check_signs(sign_pattern)
    return np.array([[1.0, -float(sa * sb)], [0.0, float(sb)]])


@dataclass
class EstimateResult:
    n: int
    alpha_hat: float
    beta_hat: float
    rho_hat: float
    A_star: np.ndarray
    b_star: np.ndarray
    sign_pattern: tuple[int, int]
    alpha_star: float
    beta_star: float
    statistic: float | None = None
    p_value: float | None = None
    regime: str | None = None

    @property
    def B(self) -> np.ndarray:
        return canonical_matrix(self.sign_pattern)

    @property
    def A(self) -> np.ndarray:
        """Normal-equation matrix of the canonical regression, ``B A* B^T``."""
        B = self.B
        return B @ self.A_star @ B.T

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "alpha_hat": self.alpha_hat,
            "beta_hat": self.beta_hat,
            "rho_hat": self.rho_hat,
            "A_star": np.asarray(self.A_star).tolist(),
            "b_star": np.asarray(self.b_star).tolist(),
            "sign_pattern": list(self.sign_pattern),
            "statistic": self.statistic,
            "p_value": self.p_value,
            "regime": self.regime,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EstimateResult":
        try:
            sa, sb = _check_signs(data["sign_pattern"])
            alpha_hat = float(data["alpha_hat"])
            rho_hat = float(data["rho_hat"])
            beta_hat = float(data.get("beta_hat", (rho_hat - sa * alpha_hat) * sb))
            return cls(
                n=int(data["n"]),
                alpha_hat=alpha_hat,
                beta_hat=beta_hat,
                rho_hat=rho_hat,
                A_star=np.array(data.get("A_star", np.full((2, 2), np.nan)), dtype=float),
                b_star=np.array(data.get("b_star", np.full(2, np.nan)), dtype=float),
                sign_pattern=(sa, sb),
                alpha_star=alpha_hat,
                beta_star=beta_hat,
                statistic=data.get("statistic"),
                p_value=data.get("p_value"),
                regime=data.get("regime"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidArgumentError(f"malformed estimate JSON: {exc}") from exc


def lse_canonical(field_: TriangularField, sign_pattern=None) -> EstimateResult:
    """Estimate ``(alpha, rho)`` for the given sign pattern.

    Without a sign pattern the signs of the raw estimates are used.
    """
    a_star, b_star, A, b = lse_coefficients(field_)
    if sign_pattern is None:
        sign_pattern = (1 if a_star >= 0 else -1, 1 if b_star >= 0 else -1)
    sa, sb = _check_signs(sign_pattern)
    # (B^T)^-1 = [[1, 0], [sign(alpha), sign(beta)]]
    alpha_hat = a_star
    rho_hat = sa * a_star + sb * b_star
    beta_hat = (rho_hat - sa * alpha_hat) * sb
    return EstimateResult(
        n=field_.n,
        alpha_hat=alpha_hat,
        beta_hat=beta_hat,
        rho_hat=rho_hat,
        A_star=A,
        b_star=b,
        sign_pattern=(sa, sb),
        alpha_star=a_star,
        beta_star=b_star,
    )


def phi(alpha: float) -> float:
    """Unit-root limit variance of ``n(alpha_hat - alpha)``."""
    a = abs(alpha)
    if not 0.0 < a < 1.0:
        raise UnsupportedRegimeError(f"phi needs 0 < |alpha| < 1, got {alpha}")
    return a * (1.0 - a) / 2.0


def psi(alpha: float) -> float:
    """Unit-root limit variance of ``n^(5/4)(rho_hat - 1)``."""
    a = abs(alpha)
    if not 0.0 < a < 1.0:
        raise UnsupportedRegimeError(f"psi needs 0 < |alpha| < 1, got {alpha}")
    return 15.0 * math.sqrt(math.pi * a * (1.0 - a)) / 2.0**4.5


def stable_sigma2(alpha: float, beta: float) -> float:
    a, b = alpha, beta
    return ((1 + a + b) * (1 + a - b) * (1 - a + b) * (1 - a - b)) ** -0.5


def stable_kappa(alpha: float, beta: float) -> float:
    """``((1 - a^2 - b^2) sigma^2 - 1) / (2 a b sigma^2)``.

    The quartic product equals ``c^2 - 4 a^2 b^2`` with ``c = 1 - a^2 - b^2``,
    so the ratio simplifies to ``2ab / (c + sqrt(c^2 - 4a^2b^2))``, which
    avoids cancellation when ``ab`` is small.
    """
    a, b = alpha, beta
    c = 1.0 - a * a - b * b
    return 2.0 * a * b / (c + stable_sigma2(a, b) ** -1.0)


@dataclass(frozen=True)
class AsymptoticConstants:
    regime: Regime
    rho_stat_variance: float
    # limit covariance of (n(alpha_hat - alpha), n(beta_hat - beta))
    coefficient_covariance: np.ndarray = field(repr=False)
    sigma2: float | None = None
    kappa: float | None = None
    phi: float | None = None
    psi: float | None = None

    @property
    def rho_scale_exponent(self) -> float:
        return 1.25 if self.regime is Regime.UNSTABLE else 1.0


def asymptotic_constants(params: ModelParams) -> AsymptoticConstants:
    if params.alpha * params.beta == 0:
        raise InvalidArgumentError("asymptotic constants need alpha*beta != 0")
    sab = params.signs[0] * params.signs[1]
    stability = params.stability
    if stability is Stability.EXPLOSIVE:
        raise UnsupportedRegimeError(f"rho = {params.rho} > 1 has no normal limit")
    if stability is Stability.UNSTABLE:
        ph, ps = phi(params.alpha), psi(params.alpha)
        cov = ph * np.array([[1.0, -sab], [-sab, 1.0]])
        return AsymptoticConstants(Regime.UNSTABLE, ps, cov, phi=ph, psi=ps)
    s2 = stable_sigma2(params.alpha, params.beta)
    kap = stable_kappa(params.alpha, params.beta)
    cov = np.array([[1.0, -kap], [-kap, 1.0]]) / (2.0 * s2 * (1.0 - kap**2))
    return AsymptoticConstants(
        Regime.STABLE, 1.0 / ((1.0 + kap * sab) * s2), cov, sigma2=s2, kappa=kap
    )


def unit_root_statistic(
    result: EstimateResult,
    regime,
    known_alpha: float | None = None,
    one_sided: bool = False,
    null_rho: float = 1.0,
):
    """Scaled, studentised ``rho_hat - null_rho`` and its normal p-value.

    Unstable: ``n^(5/4)(rho_hat - 1) / sqrt(psi(alpha))`` with ``alpha`` the
    plug-in estimate unless ``known_alpha`` is given.  Stable:
    ``n(rho_hat - null_rho) / sqrt(v)`` with ``v`` the stable limit variance at
    the plug-in ``(alpha_hat, beta_hat)``.  Two-sided by default; the
    one-sided p-value is the lower tail (alternative ``rho < null_rho``).
    """
    regime = Regime(regime)
    n = result.n
    if regime is Regime.UNSTABLE:
        a = result.alpha_hat if known_alpha is None else known_alpha
        variance = psi(a)
        stat = n**1.25 * (result.rho_hat - 1.0) / math.sqrt(variance)
    else:
        a = result.alpha_hat if known_alpha is None else known_alpha
        b = result.beta_hat
        plug = ModelParams(a, b)
        if a * b == 0 or plug.stability is not Stability.STABLE:
            raise UnsupportedRegimeError(
                f"plug-in (alpha, beta) = ({a}, {b}) is not in the stable regime"
            )
        variance = asymptotic_constants(plug).rho_stat_variance
        stat = n * (result.rho_hat - null_rho) / math.sqrt(variance)
    p = float(ndtr(stat)) if one_sided else float(2.0 * ndtr(-abs(stat)))
    return float(stat), p


def s_sums(field_: TriangularField):
    """``(S1, S2, S3)``: sums of ``(W - S)^2``, ``(W - S) S`` and ``S^2`` over ``T_n``
    where ``W = X[k-1, l]`` and ``S = X[k, l-1]``."""
    west, south = field_.neighbours()
    diff = west - south
    return float(np.sum(diff * diff)), float(np.sum(diff * south)), float(np.sum(south * south))


def score_vector(field_: TriangularField, params: ModelParams, eps=None) -> np.ndarray:
    """Innovation-weighted canonical regressors summed over ``T_n``.

    Equals ``A (alpha_hat - alpha, rho_hat - rho)`` with ``A = B A* B^T`` when
    ``eps`` is the realised noise of ``field_`` under ``params``.
    """
    if eps is None:
        if field_.eps is None:
            raise InvalidArgumentError("field carries no noise; pass eps explicitly")
        eps = field_.eps
    eps = np.asarray(getattr(eps, "values", eps), dtype=float)
    if eps.shape != field_.values.shape:
        raise InvalidArgumentError(
            f"noise has {eps.size} cells, field has {field_.values.size}"
        )
    sa, sb = params.signs
    west, south = field_.neighbours()
    return np.array([np.sum(eps * (west - sa * sb * south)), np.sum(eps * (sb * south))])
