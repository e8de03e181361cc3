"""Exact two-martingale decomposition of a trajectory.

With standardized steps (mean 0, variance 1) the walk splits exactly as
S_n = N_n + p eta_n M_n where M_n = a_n Y_n and N_n are martingales built
from deterministic sequences:

    gamma_n = 1 + p mu_{n+1} / nu_n
    a_n     = prod_{k<n} 1/gamma_k          (kept in log space)
    eta_n   = sum_{k<n} 1 / (a_k nu_k)

The common increment is t_{n+1} = X_{n+1} - (p/nu_n) Y_n with t_1 = X_1, and
the stacked martingale (N_n, M_n) has quadratic variation

    qv_n = sum_{k<=n} c_k v_k v_k^T,   v_k = (1 - p a_k eta_k mu_k, a_k mu_k)

where c_k is the conditional variance of t_k: c_1 = 1 and for k >= 2
c_k = (1-p) + (p/nu_{k-1}) U_{k-1} - (p^2/nu_{k-1}^2) Y_{k-1}^2.  The pure
Y^2 part is also accumulated separately as the correction matrix, since it
is the asymptotically negligible piece.

Because a_n decays polynomially, products such as a_k mu_k are formed by
exponentiating sums of logs rather than multiplying the raw values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from reinforced_walk.memory import PrefixWeights
from reinforced_walk.walk import Trajectory

__all__ = [
    "DeterministicSequences",
    "MartingaleTransform",
    "build_sequences",
    "empirical_un_ratio",
    "increment_series",
    "martingale_transform",
    "qv_entry_series",
    "qv_weights",
    "quadratic_variation",
]


@dataclass(frozen=True)
class DeterministicSequences:
    """Trajectory-independent sequences to n_max (0-indexed arrays).

    ``gamma[i]`` needs mu at time i + 2, so the final entry is NaN unless
    the builder was given the next weight.  ``a_mu``, ``a_eta_mu`` and
    ``a_nu`` are the stably-formed products the analysis actually consumes.
    """

    p: float
    gamma: np.ndarray
    log_a: np.ndarray
    eta: np.ndarray
    w: np.ndarray
    z: np.ndarray
    a_mu: np.ndarray
    a_eta_mu: np.ndarray
    a_nu: np.ndarray
    nu: np.ndarray
    mu: np.ndarray

    def __post_init__(self) -> None:
        for arr in (self.gamma, self.log_a, self.eta, self.w, self.z,
                    self.a_mu, self.a_eta_mu, self.a_nu, self.nu, self.mu):
            arr.setflags(write=False)

    @property
    def n_max(self) -> int:
        return len(self.log_a)


_SEQUENCE_CACHE: dict = {}
_SEQUENCE_CACHE_LIMIT = 8


def build_sequences(
    prefix: PrefixWeights, p: float, next_mu: float | None = None
) -> DeterministicSequences:
    """All deterministic sequences to prefix.n_max in O(n_max).

    ``next_mu`` (the weight at time n_max + 1) only affects the final
    gamma entry, which nothing downstream consumes; results are cached per
    (prefix identity, p).
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"p={p} violates 0 < p < 1")
    key = (id(prefix), p, next_mu)
    cached = _SEQUENCE_CACHE.get(key)
    # the entry pins the prefix object, so an id match implies identity
    if cached is not None and cached[0] is prefix:
        return cached[1]

    mu, nu = prefix.mu, prefix.nu
    n = prefix.n_max
    gamma = np.full(n, np.nan)
    gamma[: n - 1] = 1.0 + p * mu[1:] / nu[: n - 1]
    if next_mu is not None:
        gamma[n - 1] = 1.0 + p * next_mu / nu[n - 1]

    log_a = np.zeros(n)
    if n > 1:
        log_a[1:] = -np.cumsum(np.log(gamma[: n - 1]))

    eta = np.zeros(n)
    if n > 1:
        eta[1:] = np.cumsum(np.exp(-log_a[: n - 1]) / nu[: n - 1])

    log_mu = np.log(mu)
    a_mu = np.exp(log_a + log_mu)
    a_eta_mu = a_mu * eta
    a_nu = np.exp(log_a + np.log(nu))
    w = np.cumsum(a_mu * a_mu)
    z = np.cumsum((1.0 - p * a_eta_mu) ** 2)

    seqs = DeterministicSequences(
        p=p, gamma=gamma, log_a=log_a, eta=eta, w=w, z=z,
        a_mu=a_mu, a_eta_mu=a_eta_mu, a_nu=a_nu, nu=nu.copy(), mu=mu.copy(),
    )
    if len(_SEQUENCE_CACHE) >= _SEQUENCE_CACHE_LIMIT:
        _SEQUENCE_CACHE.pop(next(iter(_SEQUENCE_CACHE)))
    _SEQUENCE_CACHE[key] = (prefix, seqs)
    return seqs


def increment_series(x: np.ndarray, mu: np.ndarray, nu: np.ndarray, p: float) -> np.ndarray:
    """Martingale increments t_k from standardized steps; batched over leading axes."""
    y = np.cumsum(mu * x, axis=-1)
    t = np.empty_like(x)
    t[..., 0] = x[..., 0]
    t[..., 1:] = x[..., 1:] - p * y[..., :-1] / nu[: x.shape[-1] - 1]
    return t


def qv_weights(
    p: float, nu: np.ndarray, y: np.ndarray, u: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Conditional variance of t_k and its Y^2 correction part; batched.

    ``y`` and ``u`` are the running sums of mu*x and mu*x^2 for standardized
    steps.  The k = 1 term has no history: its conditional variance is the
    (unit) step variance and its correction is zero.
    """
    n = y.shape[-1]
    c = np.empty_like(y)
    cxi = np.zeros_like(y)
    c[..., 0] = 1.0
    inv_nu = 1.0 / nu[: n - 1]
    cxi[..., 1:] = (p * y[..., :-1] * inv_nu) ** 2
    c[..., 1:] = (1.0 - p) + p * u[..., :-1] * inv_nu - cxi[..., 1:]
    return c, cxi


def qv_entry_series(
    c: np.ndarray, w1: np.ndarray, w2: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Running (1,1), (1,2), (2,2) entries of sum c_k v_k v_k^T; batched."""
    e11 = np.cumsum(c * w1 * w1, axis=-1)
    e12 = np.cumsum(c * w1 * w2, axis=-1)
    e22 = np.cumsum(c * w2 * w2, axis=-1)
    return e11, e12, e22


@dataclass(frozen=True)
class MartingaleTransform:
    """Per-trajectory martingales, increments and quadratic variation.

    ``S`` is the standardized walk the identity S = N + p eta M refers to.
    ``qv[i]`` and ``correction[i]`` are the 2x2 matrices at time n = i + 1.
    """

    p: float
    S: np.ndarray
    M: np.ndarray
    N: np.ndarray
    t_inc: np.ndarray
    qv: np.ndarray
    correction: np.ndarray
    eta: np.ndarray

    def reconstruction_residual(self) -> float:
        """max_n |S_n - N_n - p eta_n M_n|, which should be float noise."""
        return float(np.max(np.abs(self.S - self.N - self.p * self.eta * self.M)))


def _standardized_steps(traj: Trajectory) -> np.ndarray:
    return (traj.X - traj.step_mean) / math.sqrt(traj.step_variance)


def martingale_transform(traj: Trajectory, seqs: DeterministicSequences) -> MartingaleTransform:
    """Compute M, N, increments and quadratic variation for one trajectory.

    Steps are standardized internally; the raw-scale walk is recovered as
    mean * n + sd * S.
    """
    n = len(traj)
    if seqs.n_max < n:
        raise ValueError(f"sequences built to {seqs.n_max} but trajectory has {n} steps")
    p = seqs.p
    mu, nu = seqs.mu[:n], seqs.nu[:n]
    x = _standardized_steps(traj)
    s = np.cumsum(x)
    y = np.cumsum(mu * x)
    u = np.cumsum(mu * x * x)
    eta = seqs.eta[:n]
    m = np.exp(seqs.log_a[:n]) * y
    nn = s - p * eta * m
    t = increment_series(x, mu, nu, p)
    w1 = 1.0 - p * seqs.a_eta_mu[:n]
    w2 = seqs.a_mu[:n]
    c, cxi = qv_weights(p, nu, y, u)
    qv = _stack_matrices(*qv_entry_series(c, w1, w2))
    correction = _stack_matrices(*qv_entry_series(cxi, w1, w2))
    return MartingaleTransform(p=p, S=s, M=m, N=nn, t_inc=t, qv=qv,
                               correction=correction, eta=eta)


def _stack_matrices(e11: np.ndarray, e12: np.ndarray, e22: np.ndarray) -> np.ndarray:
    out = np.empty(e11.shape + (2, 2))
    out[..., 0, 0] = e11
    out[..., 0, 1] = e12
    out[..., 1, 0] = e12
    out[..., 1, 1] = e22
    return out


def quadratic_variation(
    traj: Trajectory, seqs: DeterministicSequences
) -> tuple[np.ndarray, np.ndarray]:
    """The (qv, correction) matrix arrays of the stacked martingale."""
    transform = martingale_transform(traj, seqs)
    return transform.qv, transform.correction


def empirical_un_ratio(traj: Trajectory, prefix: PrefixWeights, n: int) -> float:
    """U_n / nu_n, which tends to E(X^2) of the raw steps."""
    if not 1 <= n <= len(traj):
        raise ValueError(f"n={n} outside [1, {len(traj)}]")
    return float(traj.U[n - 1] / prefix.nu[n - 1])
