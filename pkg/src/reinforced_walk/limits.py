"""Closed-form limit objects of the diffusive regime.

The standardized walk converges to a centered Gaussian process whose
covariance for 0 < s <= t is

    cov(s, t) = c1 * s + c2 * s * (t/s)^rho,      rho = 1 - alpha(1-p),

with c1 = (1-alpha) / ((1-p)(1-alpha(1-p))) and
c2 = p(alpha(2-p)-1) / ((1-p)(2alpha(1-p)-1)(1-alpha(1-p))).  The same
object in stacked-martingale coordinates is the 2x2 matrix family V_t,
which splits into three one-exponent pieces t K1 + t^a2 K2 + t^a3 K3 with
a2 = alpha(1-p) and a3 = 2alpha(1-p)-1.  At alpha = 1 the covariance
reduces to the noise-reinforced Brownian motion s (t/s)^p / (1-2p).

Everything here is a pure function of (p, alpha); parameters on or outside
the diffusive boundaries are rejected because the denominators vanish there.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from reinforced_walk.walk import Regime, regime_classify

__all__ = [
    "CovarianceParams",
    "LimitMatrices",
    "NonDiffusiveError",
    "coefficient_signs",
    "covariance_params",
    "nrbm_cov",
    "theoretical_cov",
    "vt_decomposition",
    "vt_matrix",
]


class NonDiffusiveError(ValueError):
    """The pair (p, alpha) is outside the open diffusive region."""


@dataclass(frozen=True)
class CovarianceParams:
    """Scalars of the limit covariance for one diffusive (p, alpha)."""

    p: float
    alpha: float
    rho: float
    c1: float
    c2: float


def covariance_params(p: float, alpha: float) -> CovarianceParams:
    """Evaluate rho, c1, c2; rejects non-diffusive parameters."""
    regime = regime_classify(p, alpha)
    if regime is not Regime.DIFFUSIVE:
        lower = max(0.0, (alpha - 1.0) / alpha) if alpha > 0 else 0.0
        upper = (2.0 * alpha - 1.0) / (2.0 * alpha) if alpha > 0 else 0.0
        raise NonDiffusiveError(
            f"(p={p}, alpha={alpha}) is {regime.value}; need {lower:g} < p < {upper:g}"
        )
    rho = 1.0 - alpha * (1.0 - p)
    c1 = (1.0 - alpha) / ((1.0 - p) * rho)
    c2 = p * (alpha * (2.0 - p) - 1.0) / ((1.0 - p) * (2.0 * alpha * (1.0 - p) - 1.0) * rho)
    return CovarianceParams(p=p, alpha=alpha, rho=rho, c1=c1, c2=c2)


def theoretical_cov(params: CovarianceParams, s: float, t: float) -> float:
    """Limit covariance cov(s, t); symmetric in its time arguments.

    Zero on the axes: the limit process starts at the origin, and the
    (t/s)^rho form is singular at s = 0, so continuity forces cov = 0 there.
    """
    if s < 0.0 or t < 0.0:
        raise ValueError("time arguments must be nonnegative")
    lo, hi = (s, t) if s <= t else (t, s)
    if lo == 0.0:
        return 0.0
    return params.c1 * lo + params.c2 * lo * (hi / lo) ** params.rho


def nrbm_cov(p: float, s: float, t: float) -> float:
    """Noise-reinforced Brownian motion covariance s (t/s)^p / (1 - 2p)."""
    if not 0.0 < p < 0.5:
        raise ValueError(f"p={p} violates 0 < p < 1/2")
    if s < 0.0 or t < 0.0:
        raise ValueError("time arguments must be nonnegative")
    lo, hi = (s, t) if s <= t else (t, s)
    if lo == 0.0:
        return 0.0
    return lo * (hi / lo) ** p / (1.0 - 2.0 * p)


def vt_matrix(params: CovarianceParams, t: float) -> np.ndarray:
    """The 2x2 stacked-martingale limit matrix at time t (PSD)."""
    if t < 0.0:
        raise ValueError("t must be nonnegative")
    p, alpha, rho = params.p, params.alpha, params.rho
    pref = 1.0 / rho**2
    a2 = alpha * (1.0 - p)
    a3 = 2.0 * alpha * (1.0 - p) - 1.0
    if t == 0.0:
        return np.zeros((2, 2))
    off = pref * p * (1.0 - alpha) / (1.0 - p) * t**a2
    return np.array(
        [
            [pref * (1.0 - alpha) ** 2 * t, off],
            [off, pref * p**2 * alpha**2 / a3 * t**a3],
        ]
    )


@dataclass(frozen=True)
class LimitMatrices:
    """One-exponent decomposition V_t = t K1 + t^a2 K2 + t^a3 K3."""

    K1: np.ndarray
    K2: np.ndarray
    K3: np.ndarray
    exponents: tuple[float, float, float]
    rho: float

    def __post_init__(self) -> None:
        for arr in (self.K1, self.K2, self.K3):
            arr.setflags(write=False)

    def u(self, t: float) -> np.ndarray:
        """The combination vector (1, t^rho) that maps V back to cov."""
        return np.array([1.0, t**self.rho])

    def assemble(self, t: float) -> np.ndarray:
        a1, a2, a3 = self.exponents
        return t**a1 * self.K1 + t**a2 * self.K2 + t**a3 * self.K3


def vt_decomposition(params: CovarianceParams) -> LimitMatrices:
    """Split V_t into its three one-exponent pieces; exponents are positive."""
    p, alpha, rho = params.p, params.alpha, params.rho
    pref = 1.0 / rho**2
    a2 = alpha * (1.0 - p)
    a3 = 2.0 * alpha * (1.0 - p) - 1.0
    k1 = pref * (1.0 - alpha) ** 2 * np.array([[1.0, 0.0], [0.0, 0.0]])
    k2 = pref * p * (1.0 - alpha) / (1.0 - p) * np.array([[0.0, 1.0], [1.0, 0.0]])
    k3 = pref * p**2 * alpha**2 / a3 * np.array([[0.0, 0.0], [0.0, 1.0]])
    return LimitMatrices(K1=k1, K2=k2, K3=k3, exponents=(1.0, a2, a3), rho=rho)


def coefficient_signs(params: CovarianceParams) -> tuple[str, str]:
    """Signs of (c1, c2) in {-, 0, +}.

    c1's sign is decided on its symbolic numerator 1 - alpha, so alpha = 1
    yields an exact zero rather than a float comparison.
    """
    num = 1.0 - params.alpha
    sign1 = "0" if num == 0.0 else ("+" if num > 0.0 else "-")
    sign2 = "0" if params.c2 == 0.0 else ("+" if params.c2 > 0.0 else "-")
    return sign1, sign2
