"""Simulation of the amnesic step-reinforced random walk.

The step recursion: X_1 is a fresh draw from the step distribution, and for
n >= 1 the step X_{n+1} is, with probability p, a bit-exact copy of X_k
where k is drawn over {1..n} with probability mu_k / nu_n, and otherwise a
fresh i.i.d. draw.

Each trajectory consumes a dedicated random stream that is a pure function
of (master_seed, trajectory_id), mixed through ``numpy.random.SeedSequence``.
Within a trajectory the stream is consumed in a fixed, documented block
order: the n-1 reinforcement coins, then n-1 memory uniforms, then n fresh
steps (memory uniforms and fresh draws are consumed whether or not the
corresponding coin uses them, which keeps the layout independent of the
coin outcomes and lets whole trajectories be generated vectorized).
Identical inputs therefore give bit-identical trajectories under any
parallel schedule.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from reinforced_walk.memory import MemorySpec, PrefixWeights, build_prefix

__all__ = [
    "Regime",
    "StepModel",
    "Trajectory",
    "WalkConfig",
    "parse_step_model",
    "regime_classify",
    "simulate",
    "simulate_steps_batch",
    "standardized_path",
    "step_model_label",
    "trajectory_rng",
]


class Regime(enum.Enum):
    """Parameter regime of the pair (p, alpha)."""

    DIFFUSIVE = "diffusive"
    NOT_DIFFUSIVE = "not_diffusive"
    LLN_RANGE_ONLY = "lln_range_only"  # reserved, currently never returned
    INVALID = "invalid"


def regime_classify(p: float, alpha: float) -> Regime:
    """Classify (p, alpha); total function, never raises.

    Diffusive means max(0, (alpha-1)/alpha) < p < (2*alpha-1)/(2*alpha);
    both boundaries are excluded.  Invalid means p outside (0, 1) or
    alpha <= 1/2.
    """
    if not (np.isfinite(p) and np.isfinite(alpha)):
        return Regime.INVALID
    if not 0.0 < p < 1.0 or alpha <= 0.5:
        return Regime.INVALID
    lower = max(0.0, (alpha - 1.0) / alpha)
    upper = (2.0 * alpha - 1.0) / (2.0 * alpha)
    if lower < p < upper:
        return Regime.DIFFUSIVE
    return Regime.NOT_DIFFUSIVE


@dataclass(frozen=True)
class StepModel:
    """Distribution of the fresh steps, with its first two moments.

    ``bound`` is a finite almost-sure bound on |X| when one exists
    (Rademacher, uniform, discrete tables) and None for Gaussian steps.
    The Lindeberg diagnostics require a finite bound.
    """

    family: str
    mean: float
    variance: float
    bound: float | None = None
    params: tuple[float, ...] = ()
    values: tuple[float, ...] | None = None
    probabilities: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if not (np.isfinite(self.mean) and np.isfinite(self.variance)):
            raise ValueError("step moments must be finite")
        if self.variance <= 0.0:
            raise ValueError("step variance must be positive")

    @property
    def sd(self) -> float:
        return math.sqrt(self.variance)

    @staticmethod
    def rademacher() -> "StepModel":
        return StepModel("rademacher", 0.0, 1.0, bound=1.0)

    @staticmethod
    def gaussian(mean: float, sd: float) -> "StepModel":
        if sd <= 0.0:
            raise ValueError("gaussian sd must be positive")
        return StepModel("gaussian", float(mean), float(sd) ** 2, bound=None,
                         params=(float(mean), float(sd)))

    @staticmethod
    def uniform(a: float, b: float) -> "StepModel":
        if not b > a:
            raise ValueError("uniform needs a < b")
        return StepModel("uniform", (a + b) / 2.0, (b - a) ** 2 / 12.0,
                         bound=max(abs(a), abs(b)), params=(float(a), float(b)))

    @staticmethod
    def discrete_table(values, probabilities) -> "StepModel":
        vals = tuple(float(v) for v in values)
        probs = tuple(float(q) for q in probabilities)
        if len(vals) != len(probs) or not vals:
            raise ValueError("discrete table needs matching nonempty values/probabilities")
        if any(q < 0.0 for q in probs) or abs(sum(probs) - 1.0) > 1e-12:
            raise ValueError("discrete probabilities must be nonnegative and sum to 1 (1e-12)")
        m = sum(v * q for v, q in zip(vals, probs))
        var = sum((v - m) ** 2 * q for v, q in zip(vals, probs))
        return StepModel("discrete", m, var, bound=max(abs(v) for v in vals),
                         values=vals, probabilities=probs)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """One block of fresh draws."""
        if self.family == "rademacher":
            return rng.integers(0, 2, size=size).astype(float) * 2.0 - 1.0
        if self.family == "gaussian":
            m, sd = self.params
            return m + sd * rng.standard_normal(size)
        if self.family == "uniform":
            a, b = self.params
            return rng.uniform(a, b, size=size)
        cum = np.cumsum(self.probabilities)
        cum[-1] = 1.0
        idx = np.searchsorted(cum, rng.random(size), side="right")
        return np.asarray(self.values, dtype=float)[idx]


def parse_step_model(text: str) -> StepModel:
    """Parse ``rademacher``, ``gaussian:M:SD``, ``uniform:A:B`` or ``discrete:PATH``.

    A discrete table file has one "value probability" pair per line,
    separated by whitespace or a comma.
    """
    parts = text.strip().split(":")
    name = parts[0].lower()
    try:
        if name == "rademacher" and len(parts) == 1:
            return StepModel.rademacher()
        if name == "gaussian" and len(parts) == 3:
            return StepModel.gaussian(float(parts[1]), float(parts[2]))
        if name == "uniform" and len(parts) == 3:
            return StepModel.uniform(float(parts[1]), float(parts[2]))
        if name == "discrete" and len(parts) == 2:
            vals, probs = [], []
            with open(parts[1]) as fh:
                for line in fh:
                    if not line.strip():
                        continue
                    v, q = line.replace(",", " ").split()
                    vals.append(float(v))
                    probs.append(float(q))
            return StepModel.discrete_table(vals, probs)
    except (OSError, ValueError) as exc:
        raise ValueError(f"cannot parse step model {text!r}: {exc}") from exc
    raise ValueError(
        f"cannot parse step model {text!r}; expected rademacher, gaussian:M:SD, "
        "uniform:A:B or discrete:PATH"
    )


def step_model_label(model: StepModel) -> str:
    if model.family == "rademacher":
        return "rademacher"
    if model.family == "gaussian":
        return f"gaussian:{model.params[0]:g}:{model.params[1]:g}"
    if model.family == "uniform":
        return f"uniform:{model.params[0]:g}:{model.params[1]:g}"
    return f"discrete:<{len(model.values)} atoms>"


@dataclass(frozen=True)
class WalkConfig:
    """Everything a simulation needs: memory, steps, horizon and seed."""

    p: float
    memory: MemorySpec
    step: StepModel
    horizon: int
    master_seed: int
    allow_nondiffusive: bool = False

    def __post_init__(self) -> None:
        if not 0.0 < self.p < 1.0:
            raise ValueError(f"p={self.p} violates 0 < p < 1")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.master_seed < 0:
            raise ValueError("master_seed must be a nonnegative integer")
        regime = regime_classify(self.p, self.memory.alpha)
        if regime is not Regime.DIFFUSIVE and not self.allow_nondiffusive:
            lower = max(0.0, (self.memory.alpha - 1.0) / self.memory.alpha)
            upper = (2.0 * self.memory.alpha - 1.0) / (2.0 * self.memory.alpha)
            raise ValueError(
                f"(p={self.p}, alpha={self.memory.alpha}) is {regime.value}; the diffusive "
                f"regime needs {lower:g} < p < {upper:g} (pass allow_nondiffusive to simulate anyway)"
            )


@dataclass(frozen=True)
class Trajectory:
    """One simulated walk with every per-step series the analysis needs.

    Arrays are 0-indexed (position i holds time n = i + 1).  ``memory_index``
    stores the sampled 1-based index k when the step was reinforced and 0
    otherwise.  ``step_mean``/``step_variance`` echo the step model so the
    martingale layer can standardize without re-resolving the model.
    """

    X: np.ndarray
    S: np.ndarray
    Y: np.ndarray
    U: np.ndarray
    reinforced: np.ndarray
    memory_index: np.ndarray
    step_mean: float
    step_variance: float

    def __post_init__(self) -> None:
        for arr in (self.X, self.S, self.Y, self.U, self.reinforced, self.memory_index):
            arr.setflags(write=False)

    def __len__(self) -> int:
        return len(self.X)


def trajectory_rng(master_seed: int, trajectory_id: int) -> np.random.Generator:
    """The dedicated generator of one trajectory.

    The stream is seeded by hashing the pair (master_seed, trajectory_id)
    through SeedSequence, which is deterministic across platforms.
    """
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), int(trajectory_id)]))


def _memory_targets(nu: np.ndarray, u: np.ndarray) -> np.ndarray:
    """0-based remembered positions for steps 2..N, from one uniform each.

    Row layout (..., N-1): entry i-1 belongs to step n+1 = i+1 and is the
    smallest j with nu[j] > u * nu[i-1], hence always <= i-1.
    """
    n = u.shape[-1] + 1
    vals = u * nu[: n - 1]
    tgt = np.searchsorted(nu, vals.ravel(), side="right").reshape(u.shape)
    # float rounding can push u*nu_i onto nu_i exactly; clamp into {0..i-1}
    return np.minimum(tgt, np.arange(0, n - 1, dtype=tgt.dtype))


def _resolve_steps(fresh: np.ndarray, reinforced: np.ndarray, tgt: np.ndarray) -> np.ndarray:
    """Turn fresh draws + copy pointers into realized steps (batched).

    Every reinforced position points strictly backwards, so iterated
    pointer-jumping reaches the originating fresh draw in at most log2(N)
    rounds; the gather is bit-exact.
    """
    B, N = fresh.shape
    parent = np.broadcast_to(np.arange(N, dtype=np.int64), (B, N)).copy()
    parent[:, 1:][reinforced] = tgt[reinforced]
    flat = (parent + (np.arange(B, dtype=np.int64)[:, None] * N)).ravel()
    for _ in range(max(1, math.ceil(math.log2(max(N, 2))))):
        nxt = flat[flat]
        if np.array_equal(nxt, flat):
            break
        flat = nxt
    return fresh.ravel()[flat].reshape(B, N)


def simulate_steps_batch(
    config: WalkConfig,
    trajectory_ids,
    prefix: PrefixWeights | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Realized steps for a batch of trajectories.

    Returns (X, reinforced, tgt) with shapes (B, N), (B, N-1), (B, N-1);
    ``tgt`` holds 0-based remembered positions (meaningful where
    ``reinforced``).  Row j is the trajectory of id trajectory_ids[j],
    bit-identical to a single-trajectory run of the same id.
    """
    ids = list(trajectory_ids)
    N = config.horizon
    if prefix is None:
        prefix = build_prefix(config.memory, N)
    elif prefix.n_max < N:
        raise ValueError("prefix shorter than the horizon")
    B = len(ids)
    coins = np.empty((B, max(N - 1, 0)))
    u_mem = np.empty((B, max(N - 1, 0)))
    fresh = np.empty((B, N))
    for j, tid in enumerate(ids):
        rng = trajectory_rng(config.master_seed, tid)
        coins[j] = rng.random(N - 1)
        u_mem[j] = rng.random(N - 1)
        fresh[j] = config.step.sample(rng, N)
    reinforced = coins < config.p
    if N == 1:
        return fresh, reinforced, np.zeros((B, 0), dtype=np.int64)
    tgt = _memory_targets(prefix.nu[:N], u_mem)
    X = _resolve_steps(fresh, reinforced, tgt)
    return X, reinforced, tgt


def simulate(config: WalkConfig, trajectory_id: int, prefix: PrefixWeights | None = None) -> Trajectory:
    """Simulate one trajectory; pure function of (config, trajectory_id)."""
    if prefix is None:
        prefix = build_prefix(config.memory, config.horizon)
    X, rein, tgt = simulate_steps_batch(config, [trajectory_id], prefix)
    X = X[0]
    N = config.horizon
    mu_w = prefix.mu[:N]
    reinforced = np.zeros(N, dtype=bool)
    reinforced[1:] = rein[0]
    memory_index = np.zeros(N, dtype=np.int64)
    memory_index[1:][rein[0]] = tgt[0][rein[0]] + 1
    return Trajectory(
        X=X,
        S=np.cumsum(X),
        Y=np.cumsum(mu_w * X),
        U=np.cumsum(mu_w * (X * X)),
        reinforced=reinforced,
        memory_index=memory_index,
        step_mean=config.step.mean,
        step_variance=config.step.variance,
    )


def standardized_path(
    traj: Trajectory, step: StepModel, n: int, t_grid
) -> np.ndarray:
    """Path values (S_{floor(nt)} - floor(nt) * mean) / sqrt(n * variance).

    The centering uses floor(nt) times the step mean so that t = 1 exactly
    standardizes S_n; the difference from nt * mean vanishes like 1/sqrt(n).
    """
    t = np.asarray(t_grid, dtype=float)
    if np.any(t < 0.0):
        raise ValueError("t_grid must be nonnegative")
    idx = np.floor(n * t).astype(np.int64)
    if idx.max(initial=0) > len(traj):
        raise ValueError(
            f"grid point t={t[np.argmax(idx)]:g} needs step {idx.max()} beyond horizon {len(traj)}"
        )
    scale = math.sqrt(n * step.variance)
    out = np.zeros_like(t)
    pos = idx > 0
    out[pos] = (traj.S[idx[pos] - 1] - idx[pos] * step.mean) / scale
    return out
