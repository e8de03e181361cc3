"""Regularly varying memory-weight families and memory-index sampling.

The walk's memory is described by a positive weight sequence mu_1, mu_2, ...
with cumulative sums nu_n.  When the walk reinforces at time n+1, the
remembered index k in {1..n} is drawn with probability mu_k / nu_n, so a
weight family growing like n^beta biases the memory toward recent times.
The cumulative sums then grow with index alpha = beta + 1, which is the
parameter the rest of the package works with.

Implemented families:

* ``constant``         mu_n = 1                       (alpha = 1)
* ``power``            mu_n = n^beta                  (alpha = beta + 1)
* ``gamma``            mu_n = Gamma(n+d)/(Gamma(n)Gamma(d+1)), computed by
                       the multiplicative recurrence mu_{n+1} = mu_n (n+d)/n
                       so no gamma function is evaluated at large n
* ``powerlog``         mu_n = n^beta (1 + ln n)^g     (alpha = beta + 1)
* ``table``            finite user-supplied weights with a declared index

All arrays are float64 and immutable after construction.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "MemoryDiagnosticWarning",
    "MemorySpec",
    "PrefixWeights",
    "bojanic_ratio",
    "build_prefix",
    "estimate_rv_index",
    "memory_spec_label",
    "mu",
    "mu_array",
    "parse_memory_spec",
    "sample_memory_index",
]

_PARAMETRIC = ("constant", "power", "gamma", "powerlog")


class MemoryDiagnosticWarning(UserWarning):
    """Raised when a memory family looks inconsistent with its declared index."""


@dataclass(frozen=True)
class MemorySpec:
    """A memory-weight family together with its regular-variation index.

    ``beta`` is the index of the weights themselves; the prefix sums have
    index ``alpha = beta + 1``.  ``log_exponent`` is only used by the
    ``powerlog`` family.  ``table`` holds the raw weights of a ``table``
    family, whose index cannot be certified from finite data and must be
    declared by the caller.
    """

    family: str
    beta: float = 0.0
    log_exponent: float = 0.0
    table: tuple[float, ...] | None = None
    low_alpha_warning: bool = field(default=False, compare=False)

    def __post_init__(self) -> None:
        if self.family not in _PARAMETRIC + ("table",):
            raise ValueError(f"unknown memory family {self.family!r}")
        if not np.isfinite(self.beta):
            raise ValueError("memory index must be finite")
        alpha = self.beta + 1.0
        if alpha <= 0.5:
            raise ValueError(
                f"memory index alpha={alpha} rejected: the diffusive theory needs alpha > 1/2"
            )
        if self.family == "gamma" and self.beta < 0.0:
            raise ValueError("gamma-ratio family needs delta >= 0")
        if self.family == "table":
            if not self.table:
                raise ValueError("table family needs at least one weight")
            if any(v <= 0.0 or not np.isfinite(v) for v in self.table):
                raise ValueError("table weights must be positive and finite")
        if alpha < 1.0:
            object.__setattr__(self, "low_alpha_warning", True)

    @property
    def alpha(self) -> float:
        """Regular-variation index of the cumulative weights."""
        return self.beta + 1.0

    @staticmethod
    def constant() -> "MemorySpec":
        return MemorySpec("constant", 0.0)

    @staticmethod
    def power_law(beta: float) -> "MemorySpec":
        return MemorySpec("power", float(beta))

    @staticmethod
    def gamma_ratio(delta: float) -> "MemorySpec":
        return MemorySpec("gamma", float(delta))

    @staticmethod
    def power_log(beta: float, log_exponent: float) -> "MemorySpec":
        return MemorySpec("powerlog", float(beta), float(log_exponent))

    @staticmethod
    def custom_table(values, declared_index: float) -> "MemorySpec":
        spec = MemorySpec("table", float(declared_index), table=tuple(float(v) for v in values))
        if len(spec.table) >= 16:
            est = estimate_rv_index(np.asarray(spec.table))
            if abs(est - spec.beta) > 0.1:
                warnings.warn(
                    f"declared index {spec.beta} but the empirical estimate is {est:.3f}",
                    MemoryDiagnosticWarning,
                    stacklevel=2,
                )
        return spec


@dataclass(frozen=True)
class PrefixWeights:
    """Weights mu_1..mu_n_max and their running sums nu_1..nu_n_max.

    Arrays are 0-indexed: ``mu[i]`` and ``nu[i]`` hold the values at time
    n = i + 1, with nu_0 = 0 implicit.
    """

    n_max: int
    mu: np.ndarray
    nu: np.ndarray

    def __post_init__(self) -> None:
        self.mu.setflags(write=False)
        self.nu.setflags(write=False)


def mu_array(spec: MemorySpec, n_max: int) -> np.ndarray:
    """Weights mu_1..mu_{n_max} of the family as a float64 array."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if spec.family == "constant":
        return np.ones(n_max)
    n = np.arange(1, n_max + 1, dtype=float)
    # overflow surfaces as a clean OverflowError from build_prefix
    if spec.family == "power":
        with np.errstate(over="ignore"):
            return n ** spec.beta
    if spec.family == "powerlog":
        with np.errstate(over="ignore"):
            return n ** spec.beta * (1.0 + np.log(n)) ** spec.log_exponent
    if spec.family == "gamma":
        out = np.empty(n_max)
        out[0] = 1.0
        if n_max > 1:
            k = np.arange(1, n_max, dtype=float)
            np.cumprod((k + spec.beta) / k, out=out[1:])
        return out
    # table
    if n_max > len(spec.table):
        raise ValueError(f"table holds {len(spec.table)} weights, {n_max} requested")
    return np.asarray(spec.table[:n_max], dtype=float)


def mu(spec: MemorySpec, n: int) -> float:
    """Single weight mu_n of the family."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return float(mu_array(spec, n)[n - 1])


def build_prefix(spec: MemorySpec, n_max: int) -> PrefixWeights:
    """Weights and running sums up to n_max in O(n_max)."""
    weights = mu_array(spec, n_max)
    if not np.all(weights > 0.0):
        raise ValueError("memory weights must be positive")
    sums = np.cumsum(weights)
    if not np.isfinite(sums[-1]):
        raise OverflowError(f"cumulative weight overflows float64 at n_max={n_max}")
    return PrefixWeights(n_max=n_max, mu=weights, nu=sums)


def sample_memory_index(prefix: PrefixWeights, n: int, u: float) -> int:
    """Inverse-CDF sample of the memory distribution over {1..n}.

    Returns the smallest k with nu_k > u * nu_n, in O(log n) by binary
    search on the prefix sums.
    """
    if not 1 <= n <= prefix.n_max:
        raise ValueError(f"n={n} outside [1, {prefix.n_max}]")
    if not 0.0 <= u < 1.0:
        raise ValueError("u must lie in [0, 1)")
    idx = int(np.searchsorted(prefix.nu[:n], u * prefix.nu[n - 1], side="right"))
    # u*nu_n can round up to nu_n exactly at the right edge; clamp to {1..n}
    return min(idx, n - 1) + 1


def estimate_rv_index(values: np.ndarray, tail_average: bool = False) -> float:
    """Regular-variation index estimate n (1 - u_{n-1}/u_n).

    Evaluated at the largest available n; with ``tail_average`` the
    estimate is averaged over the last decade of indices, which steadies it
    on noisy inputs.
    """
    u = np.asarray(values, dtype=float)
    if u.ndim != 1 or len(u) < 16:
        raise ValueError("need a 1-d array of at least 16 values")
    if not np.all(u > 0.0):
        raise ValueError("values must be positive")
    n = len(u)
    if not tail_average:
        return float(n * (1.0 - u[n - 2] / u[n - 1]))
    k = np.arange(max(2, n // 10), n + 1)
    return float(np.mean(k * (1.0 - u[k - 2] / u[k - 1])))


def bojanic_ratio(values: np.ndarray, n: int) -> float:
    """Partial-sum ratio (sum_{k<=n} u_k) / (n u_n).

    For a regularly varying sequence of index a > -1 this converges to
    1 / (1 + a), which makes it a cheap diagnostic for the index.
    """
    u = np.asarray(values, dtype=float)
    if not 1 <= n <= len(u):
        raise ValueError(f"n={n} outside [1, {len(u)}]")
    if not np.all(u[:n] > 0.0):
        raise ValueError("values must be positive")
    return float(np.sum(u[:n]) / (n * u[n - 1]))


def parse_memory_spec(text: str) -> MemorySpec:
    """Parse a family:parameter string.

    Accepted forms: ``constant``, ``power:B``, ``gamma:D``,
    ``powerlog:B:G``, ``table:PATH:INDEX`` where PATH is a text file with
    one positive weight per line.
    """
    parts = text.strip().split(":")
    name = parts[0].lower()
    try:
        if name == "constant" and len(parts) == 1:
            return MemorySpec.constant()
        if name == "power" and len(parts) == 2:
            return MemorySpec.power_law(float(parts[1]))
        if name == "gamma" and len(parts) == 2:
            return MemorySpec.gamma_ratio(float(parts[1]))
        if name == "powerlog" and len(parts) == 3:
            return MemorySpec.power_log(float(parts[1]), float(parts[2]))
        if name == "table" and len(parts) == 3:
            with open(parts[1]) as fh:
                values = [float(line) for line in fh if line.strip()]
            return MemorySpec.custom_table(values, float(parts[2]))
    except (OSError, ValueError) as exc:
        raise ValueError(f"cannot parse memory spec {text!r}: {exc}") from exc
    raise ValueError(
        f"cannot parse memory spec {text!r}; expected constant, power:B, gamma:D, "
        "powerlog:B:G or table:PATH:INDEX"
    )


def memory_spec_label(spec: MemorySpec) -> str:
    """Canonical CLI string for a memory spec (table contents are not embedded)."""
    if spec.family == "constant":
        return "constant"
    if spec.family == "power":
        return f"power:{spec.beta:g}"
    if spec.family == "gamma":
        return f"gamma:{spec.beta:g}"
    if spec.family == "powerlog":
        return f"powerlog:{spec.beta:g}:{spec.log_exponent:g}"
    return f"table:<{len(spec.table)} weights>:{spec.beta:g}"
