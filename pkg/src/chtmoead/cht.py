"""Penalty-based constraint handling for decomposition fitness.

Every strategy maps a scalarized (aggregated) objective value plus violation
information to a penalized fitness, lower is better. Strategies are frozen
dataclasses and operate elementwise on numpy arrays, so the MOEA/D loop can
score a whole (subproblem x candidate) matrix in one call.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Any, ClassVar

import numpy as np


@dataclass(frozen=True)
class SearchState:
    """Search-wide information a penalty may depend on.

    ``generation`` is the index of the generation being produced (1 for the
    first offspring generation). ``feasibility_ratio`` is the feasible fraction
    n_f / (n_f + n_u) of the incumbent population.
    """

    generation: int
    n_feasible: int = 0
    n_unfeasible: int = 0

    def __post_init__(self):
        if self.generation < 0:
            raise ValueError("generation must be nonnegative")
        if self.n_feasible < 0 or self.n_unfeasible < 0:
            raise ValueError("population counts must be nonnegative")

    @property
    def feasibility_ratio(self) -> float:
        n = self.n_feasible + self.n_unfeasible
        return self.n_feasible / n if n else 0.0


@dataclass
class PenaltyInput:
    """Arrays broadcastable against each other.

    Attributes:
        f_agg: Tchebycheff value on scaled objectives.
        f_agg_norm: ``f_agg`` min-max rescaled to [0, 1] over the current union.
        v_scaled: total violation scaled to [0, 1] over the current union.
        raw_constraints: raw g_i(x) values, constraint index on the last axis.
        feasible: raw feasibility flag (all g_i <= 0).
        state: search-wide state.
    """

    f_agg: Any
    v_scaled: Any
    state: SearchState
    f_agg_norm: Any = None
    raw_constraints: Any = None
    feasible: Any = None

    def __post_init__(self):
        self.f_agg = np.asarray(self.f_agg, dtype=float)
        self.v_scaled = np.asarray(self.v_scaled, dtype=float)
        if self.f_agg_norm is not None:
            self.f_agg_norm = np.asarray(self.f_agg_norm, dtype=float)
        if self.raw_constraints is not None:
            self.raw_constraints = np.asarray(self.raw_constraints, dtype=float)
        if self.feasible is None:
            if self.raw_constraints is not None:
                self.feasible = np.all(self.raw_constraints <= 0.0, axis=-1)
            else:
                self.feasible = self.v_scaled == 0.0
        self.feasible = np.asarray(self.feasible, dtype=bool)


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


class ChtStrategy:
    """Base class; subclasses implement ``penalize``."""

    name: ClassVar[str] = ""

    def penalize(self, inp: PenaltyInput) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, inp: PenaltyInput):
        return _out(self.penalize(inp))

    def params(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class NoPenalty(ChtStrategy):
    name: ClassVar[str] = "none"

    def penalize(self, inp):
        return inp.f_agg + 0.0 * inp.v_scaled


@dataclass(frozen=True)
class StaticPenalty(ChtStrategy):
    """Constant coefficient on the scaled violation."""

    name: ClassVar[str] = "static"
    beta: float = 1000.0

    def __post_init__(self):
        if not self.beta >= 0:
            raise ValueError(f"static penalty: beta must be >= 0, got {self.beta}")

    def penalize(self, inp):
        return inp.f_agg + self.beta * inp.v_scaled


@dataclass(frozen=True)
class MultiStagedPenalty(ChtStrategy):
    """Per-constraint squared violation with a level-dependent coefficient.

    Each constraint's raw violation ``max(g_i, 0)`` picks its own level: level k
    (0-based) is the number of ``thresholds`` that are <= the violation.
    ``coefficients`` has one row per level; a row is either a scalar (shared by
    all constraints) or one entry per constraint.
    """

    name: ClassVar[str] = "multistaged"
    thresholds: tuple[float, ...] = (0.5,)
    coefficients: tuple[Any, ...] = (5.0, 50.0)

    def __post_init__(self):
        th = tuple(float(t) for t in self.thresholds)
        if any(b <= a for a, b in zip(th, th[1:])):
            raise ValueError("multistaged penalty: thresholds must be strictly increasing")
        rows = tuple(
            tuple(float(c) for c in row) if np.ndim(row) else float(row)
            for row in self.coefficients
        )
        if len(rows) != len(th) + 1:
            raise ValueError(
                f"multistaged penalty: need {len(th) + 1} coefficient rows for "
                f"{len(th)} thresholds, got {len(rows)}"
            )
        object.__setattr__(self, "thresholds", th)
        object.__setattr__(self, "coefficients", rows)

    def coefficient_matrix(self, n_con: int) -> np.ndarray:
        R = np.empty((len(self.coefficients), n_con))
        for k, row in enumerate(self.coefficients):
            if isinstance(row, tuple):
                if len(row) != n_con:
                    raise ValueError(
                        f"multistaged penalty: coefficient row {k} has {len(row)} "
                        f"entries for {n_con} constraints"
                    )
                R[k] = row
            else:
                R[k] = row
        return R

    def penalize(self, inp):
        if inp.raw_constraints is None:
            raise ValueError("multistaged penalty needs raw constraint values")
        g = np.atleast_1d(inp.raw_constraints)
        viol = np.maximum(g, 0.0)
        R = self.coefficient_matrix(g.shape[-1])
        level = np.searchsorted(np.asarray(self.thresholds), viol, side="right")
        coef = R[level, np.arange(g.shape[-1])]
        penalty = (coef * viol**2).sum(axis=-1)
        if np.ndim(inp.raw_constraints) == 1:
            penalty = penalty.reshape(())
        return inp.f_agg + penalty


@dataclass(frozen=True)
class DynamicPenalty(ChtStrategy):
    """Coefficient (C * t) ** alpha grows with the generation counter."""

    name: ClassVar[str] = "dynamic"
    C: float = 2.0
    alpha: float = 2.0

    def __post_init__(self):
        if not (self.C > 0 and self.alpha > 0):
            raise ValueError(f"dynamic penalty: C and alpha must be > 0, got C={self.C}, alpha={self.alpha}")

    def coefficient(self, t: int) -> float:
        return (self.C * t) ** self.alpha

    def penalize(self, inp):
        return inp.f_agg + self.coefficient(inp.state.generation) * inp.v_scaled


@dataclass(frozen=True)
class SelfAdaptivePenalty(ChtStrategy):
    """Parameter-free distance + adaptive penalty driven by the feasible fraction.

    Works on the normalized aggregation ``f_agg_norm``; the returned fitness is
    ``d(x) + p(x)``.
    """

    name: ClassVar[str] = "selfadaptive"

    def penalize(self, inp):
        if inp.f_agg_norm is None:
            raise ValueError("self-adaptive penalty needs f_agg_norm")
        f, v = inp.f_agg_norm, inp.v_scaled
        rf = inp.state.feasibility_ratio
        tol = 1e-12
        if np.any((f < -tol) | (f > 1 + tol)) or np.any((v < -tol) | (v > 1 + tol)):
            raise ValueError("self-adaptive penalty: f_agg_norm and v_scaled must lie in [0, 1]")
        if rf == 0.0:
            distance = v + 0.0 * f
            M = 0.0
        else:
            distance = np.sqrt(f**2 + v**2)
            M = v
        N = np.where(inp.feasible, 0.0, f)
        return distance + (1.0 - rf) * M + rf * N


@dataclass(frozen=True)
class ThreeStagePenalty(ChtStrategy):
    """Generation-scheduled coefficient: p1 before t1, p2 before t2, p3 afterwards."""

    name: ClassVar[str] = "threestage"
    t1: int = 25
    t2: int = 50
    p1: float = 0.0
    p2: float = 10.0
    p3: float = 1000.0

    def __post_init__(self):
        if not 0 < self.t1 < self.t2:
            raise ValueError(f"three-stage penalty: need 0 < t1 < t2, got t1={self.t1}, t2={self.t2}")
        if not 0 <= self.p1 <= self.p2 <= self.p3:
            raise ValueError("three-stage penalty: need 0 <= p1 <= p2 <= p3")

    def stage(self, t: int) -> int:
        if t < self.t1:
            return 1
        if t < self.t2:
            return 2
        return 3

    def coefficient(self, t: int) -> float:
        return (self.p1, self.p2, self.p3)[self.stage(t) - 1]

    def penalize(self, inp):
        P = self.coefficient(inp.state.generation)
        if P == 0.0:
            return inp.f_agg + 0.0 * inp.v_scaled
        return inp.f_agg + inp.v_scaled * P


# Functional forms of the individual rules.

def no_penalty(inp: PenaltyInput):
    return NoPenalty()(inp)


def static_penalty(inp: PenaltyInput, beta: float):
    return StaticPenalty(beta)(inp)


def multi_staged_penalty(inp: PenaltyInput, thresholds, coefficients):
    return MultiStagedPenalty(tuple(thresholds), tuple(coefficients))(inp)


def dynamic_penalty(inp: PenaltyInput, C: float, alpha: float):
    return DynamicPenalty(C, alpha)(inp)


def self_adaptive_fitness(inp: PenaltyInput):
    return SelfAdaptivePenalty()(inp)


def three_stage_penalty(inp: PenaltyInput, t1=25, t2=50, p1=0.0, p2=10.0, p3=1000.0):
    return ThreeStagePenalty(t1, t2, p1, p2, p3)(inp)


STRATEGIES: dict[str, type[ChtStrategy]] = {
    cls.name: cls
    for cls in (NoPenalty, StaticPenalty, MultiStagedPenalty, DynamicPenalty,
                SelfAdaptivePenalty, ThreeStagePenalty)
}

# Named instances used in the comparison study.
PRESETS: dict[str, tuple[str, dict[str, Any]]] = {
    "none": ("none", {}),
    "low_static": ("static", {"beta": 1.0}),
    "high_static": ("static", {"beta": 1000.0}),
    "multistaged": ("multistaged", {"thresholds": [0.5], "coefficients": [5.0, 50.0]}),
    "slow_dynamic": ("dynamic", {"C": 0.5, "alpha": 1.0}),
    "fast_dynamic": ("dynamic", {"C": 2.0, "alpha": 2.0}),
    "selfadaptive": ("selfadaptive", {}),
    "threestage": ("threestage", {"t1": 25, "t2": 50, "p1": 0.0, "p2": 10.0, "p3": 1000.0}),
}


def make_strategy(name: str, params: dict[str, Any] | None = None) -> ChtStrategy:
    """Build a strategy from a base name or preset name plus parameter overrides."""
    params = dict(params or {})
    key = name.strip().lower()
    if key in PRESETS:
        base, defaults = PRESETS[key]
        params = {**defaults, **params}
    elif key in STRATEGIES:
        base = key
    else:
        raise ValueError(f"unknown CHT {name!r}; choose from {sorted(set(STRATEGIES) | set(PRESETS))}")
    cls = STRATEGIES[base]
    allowed = set(cls.__dataclass_fields__)
    unknown = set(params) - allowed
    if unknown:
        raise ValueError(f"unknown parameter(s) for CHT {base!r}: {sorted(unknown)}")
    if cls is MultiStagedPenalty:
        params = {k: tuple(v) if k == "thresholds" else tuple(
            tuple(r) if isinstance(r, (list, tuple)) else r for r in v) for k, v in params.items()}
    return cls(**params)


def strategy_params(strategy: ChtStrategy) -> dict[str, Any]:
    """JSON-friendly parameter dict (tuples become lists)."""
    def plain(v):
        if isinstance(v, (tuple, list)):
            return [plain(x) for x in v]
        return v
    return {k: plain(v) for k, v in strategy.params().items()}


def penalized_fitness(
    tch: np.ndarray,
    v_scaled: np.ndarray,
    G: np.ndarray,
    feasible: np.ndarray,
    strategy: ChtStrategy,
    state: SearchState,
) -> np.ndarray:
    """Penalized fitness of every (subproblem, candidate) pair.

    Args:
        tch: ``(n_sub, n_cand)`` Tchebycheff values on scaled objectives.
        v_scaled: ``(n_cand,)`` scaled total violations.
        G: ``(n_cand, n_con)`` raw constraint values.
        feasible: ``(n_cand,)`` raw feasibility flags.
    """
    tch = np.asarray(tch, dtype=float)
    lo = tch.min(axis=1, keepdims=True)
    span = tch.max(axis=1, keepdims=True) - lo
    safe = np.where(span > 0, span, 1.0)
    f_norm = np.where(span > 0, np.clip((tch - lo) / safe, 0.0, 1.0), 0.0)
    inp = PenaltyInput(
        f_agg=tch,
        f_agg_norm=f_norm,
        v_scaled=np.asarray(v_scaled)[None, :],
        raw_constraints=np.asarray(G)[None, :, :],
        feasible=np.asarray(feasible)[None, :],
        state=state,
    )
    return np.broadcast_to(strategy.penalize(inp), tch.shape)


def describe(strategy: ChtStrategy) -> str:
    ps = ", ".join(f"{k}={v}" for k, v in strategy_params(strategy).items())
    return f"{strategy.name}({ps})"


__all__ = [
    "ChtStrategy", "DynamicPenalty", "MultiStagedPenalty", "NoPenalty", "PRESETS",
    "PenaltyInput", "STRATEGIES", "SearchState", "SelfAdaptivePenalty", "StaticPenalty",
    "ThreeStagePenalty", "describe", "dynamic_penalty", "make_strategy", "multi_staged_penalty",
    "no_penalty", "penalized_fitness", "self_adaptive_fitness", "static_penalty",
    "strategy_params", "three_stage_penalty",
]
