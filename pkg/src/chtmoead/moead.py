"""MOEA/D with a pluggable penalty layer.

One generation produces one child per subproblem, evaluates the batch, scales
objectives and violations over the union of incumbents and children, and then
lets each child replace up to ``nr`` incumbents of its mating pool whose
penalized Tchebycheff fitness it strictly improves.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .cht import ChtStrategy, SearchState, penalized_fitness
from .metrics import (
    AnytimeTrace,
    TraceRecord,
    feasibility_ratio,
    filter_nondominated,
    hypervolume,
    minmax_scale,
    reference_point,
)
from .problems import ProblemDefinition, total_violation

EPS_WEIGHT = 1e-6
# "total": min-max of the summed violation; "per_constraint": min-max each
# constraint's violation over the union, then sum.
VIOLATION_SCALINGS = ("per_constraint", "total")


@dataclass(frozen=True)
class Solution:
    decision: np.ndarray
    objectives: np.ndarray
    constraints: np.ndarray
    violation: float

    @property
    def feasible(self) -> bool:
        return self.violation == 0.0


@dataclass(frozen=True)
class Population:
    """Row-aligned arrays: decisions X, objectives F, constraints G, violations V."""

    X: np.ndarray
    F: np.ndarray
    G: np.ndarray
    V: np.ndarray

    @classmethod
    def evaluate(cls, problem: ProblemDefinition, X: np.ndarray) -> "Population":
        X = np.atleast_2d(np.asarray(X, dtype=float))
        F, G = problem.evaluate(X)
        return cls(X, F, G, total_violation(G))

    def __len__(self):
        return len(self.X)

    def __getitem__(self, idx) -> "Population":
        return Population(self.X[idx], self.F[idx], self.G[idx], self.V[idx])

    def concat(self, other: "Population") -> "Population":
        return Population(
            np.vstack([self.X, other.X]),
            np.vstack([self.F, other.F]),
            np.vstack([self.G, other.G]),
            np.concatenate([self.V, other.V]),
        )

    @property
    def feasible(self) -> np.ndarray:
        return self.V == 0.0

    def solutions(self) -> list[Solution]:
        return [Solution(x, f, g, float(v)) for x, f, g, v in zip(self.X, self.F, self.G, self.V)]


@dataclass(frozen=True)
class MoeadParams:
    """Algorithm parameters.

    ``H`` is the simplex-lattice resolution; when omitted it is chosen so the
    number of weight vectors is as close as possible to ``population`` (ties go
    to the larger lattice). ``pm=None`` means 1 / n_var.
    """

    population: int = 100
    H: int | None = None
    T: int = 20
    delta: float = 0.9
    nr: int = 2
    eta_x: float = 20.0
    eta_m: float = 20.0
    pc: float = 1.0
    pm: float | None = None
    budget: int = 20_000
    violation_scaling: str = "per_constraint"

    def resolve(self, problem: ProblemDefinition) -> "MoeadParams":
        """Materialize derived defaults for ``problem`` and validate."""
        H = self.H if self.H is not None else lattice_resolution(problem.n_obj, self.population)
        n_weights = math.comb(H + problem.n_obj - 1, problem.n_obj - 1)
        pm = self.pm if self.pm is not None else 1.0 / problem.n_var
        out = replace(self, H=H, population=n_weights, pm=pm)
        out.validate()
        return out

    def validate(self) -> None:
        if self.H is None or self.H < 1:
            raise ValueError(f"H must be >= 1, got {self.H}")
        if self.population < 1:
            raise ValueError("population must be positive")
        if not 1 <= self.T <= self.population:
            raise ValueError(f"T must be in [1, {self.population}], got {self.T}")
        if not 0.0 <= self.delta <= 1.0:
            raise ValueError(f"delta must be in [0, 1], got {self.delta}")
        if self.nr < 0:
            raise ValueError(f"nr must be >= 0, got {self.nr}")
        if not (self.eta_x > 0 and self.eta_m > 0):
            raise ValueError("distribution indices must be positive")
        if not 0.0 <= self.pc <= 1.0:
            raise ValueError(f"pc must be in [0, 1], got {self.pc}")
        if self.pm is None or not 0.0 <= self.pm <= 1.0:
            raise ValueError(f"pm must be in [0, 1], got {self.pm}")
        if self.violation_scaling not in VIOLATION_SCALINGS:
            raise ValueError(
                f"violation_scaling must be one of {VIOLATION_SCALINGS}, got {self.violation_scaling!r}"
            )
        if self.budget < self.population:
            raise ValueError(
                f"budget ({self.budget}) must cover at least the initial population ({self.population})"
            )


def lattice_resolution(n_obj: int, population: int) -> int:
    best, best_gap = 1, None
    H = 1
    while True:
        count = math.comb(H + n_obj - 1, n_obj - 1)
        gap = abs(count - population)
        if best_gap is None or gap <= best_gap:
            best, best_gap = H, gap
        if count >= population:
            return best
        H += 1


def generate_weights(m: int, H: int) -> np.ndarray:
    """All simplex-lattice vectors (i_1/H, ..., i_m/H), lexicographic order."""
    if m < 2 or H < 1:
        raise ValueError(f"need m >= 2 and H >= 1, got m={m}, H={H}")
    rows = []
    for bars in itertools.combinations(range(H + m - 1), m - 1):
        edges = (-1,) + bars + (H + m - 1,)
        rows.append([edges[k + 1] - edges[k] - 1 for k in range(m)])
    return np.asarray(rows, dtype=float) / H


def compute_neighborhoods(weights, T: int) -> np.ndarray:
    """Indices of the T nearest weights (self included), ties to the lower index."""
    W = np.asarray(weights, dtype=float)
    if not 1 <= T <= len(W):
        raise ValueError(f"neighborhood size must be in [1, {len(W)}], got {T}")
    D = np.linalg.norm(W[:, None, :] - W[None, :, :], axis=2)
    return np.argsort(D, axis=1, kind="stable")[:, :T]


@dataclass(frozen=True)
class NormalizationSnapshot:
    obj_min: np.ndarray
    obj_max: np.ndarray
    viol_min: float
    viol_max: float

    @classmethod
    def from_union(cls, F, V) -> "NormalizationSnapshot":
        F = np.asarray(F, dtype=float)
        V = np.asarray(V, dtype=float)
        if len(F) == 0:
            raise ValueError("cannot normalize an empty set of solutions")
        return cls(F.min(axis=0), F.max(axis=0), float(V.min()), float(V.max()))

    def scale_objectives(self, F) -> np.ndarray:
        return minmax_scale(F, self.obj_min, self.obj_max)

    def scale_violations(self, V) -> np.ndarray:
        V = np.asarray(V, dtype=float)
        span = self.viol_max - self.viol_min
        if span <= 0:
            return np.zeros_like(V)
        return (V - self.viol_min) / span


def _union_rows(new, incumbent, ndim):
    parts = []
    for arr in (new, incumbent):
        arr = np.asarray(arr, dtype=float)
        if arr.size:
            parts.append(arr.reshape(-1, arr.shape[-1]) if ndim == 2 else arr.ravel())
    if not parts:
        raise ValueError("cannot normalize an empty set of solutions")
    return np.concatenate(parts)


def scale_objectives(new, incumbent=()) -> tuple[np.ndarray, NormalizationSnapshot]:
    """Scale the objective rows of ``new`` followed by ``incumbent`` onto [0, 1] per column."""
    F = _union_rows(new, incumbent, 2)
    snap = NormalizationSnapshot(F.min(axis=0), F.max(axis=0), 0.0, 0.0)
    return snap.scale_objectives(F), snap


def scale_violations(new, incumbent=()) -> np.ndarray:
    """Scale raw violations of ``new`` followed by ``incumbent`` onto [0, 1]."""
    V = _union_rows(new, incumbent, 1)
    snap = NormalizationSnapshot(np.zeros(0), np.zeros(0), float(V.min()), float(V.max()))
    return snap.scale_violations(V)


def per_constraint_violation(G) -> np.ndarray:
    viol = np.maximum(np.asarray(G, dtype=float), 0.0)
    lo = viol.min(axis=0)
    return minmax_scale(viol, lo, viol.max(axis=0)).sum(axis=1)


def tchebycheff(f_scaled, weight, z_scaled, eps: float = EPS_WEIGHT):
    """Weighted Tchebycheff value max_i(max(w_i, eps) * |f_i - z_i|); broadcasts over leading axes."""
    f = np.asarray(f_scaled, dtype=float)
    w = np.asarray(weight, dtype=float)
    z = np.asarray(z_scaled, dtype=float)
    if not (f.shape[-1] == w.shape[-1] == z.shape[-1]):
        raise ValueError(
            f"objective, weight and ideal lengths differ: {f.shape[-1]}, {w.shape[-1]}, {z.shape[-1]}"
        )
    out = np.max(np.maximum(w, eps) * np.abs(f - z), axis=-1)
    return float(out) if out.ndim == 0 else out


def update_ideal(ideal, objectives) -> np.ndarray:
    z = np.asarray(ideal, dtype=float)
    F = np.atleast_2d(np.asarray(objectives, dtype=float))
    if F.shape[-1] != z.shape[-1]:
        raise ValueError(f"ideal point has {z.shape[-1]} entries, objectives have {F.shape[-1]}")
    return np.minimum(z, F.min(axis=0))


def sbx_crossover(p1, p2, lower, upper, eta_x: float, pc: float, rng: np.random.Generator):
    """Simulated binary crossover, clamped to the box.

    Each variable is crossed with probability ``pc`` and copied otherwise.
    Works on single vectors or on row-aligned batches.
    """
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    if p1.shape != p2.shape:
        raise ValueError(f"parent shapes differ: {p1.shape} vs {p2.shape}")
    u = rng.random(p1.shape)
    cross = rng.random(p1.shape) < pc
    expo = 1.0 / (eta_x + 1.0)
    beta = np.where(u <= 0.5, (2.0 * u) ** expo, (1.0 / (2.0 * (1.0 - u))) ** expo)
    c1 = 0.5 * ((1.0 + beta) * p1 + (1.0 - beta) * p2)
    c2 = 0.5 * ((1.0 - beta) * p1 + (1.0 + beta) * p2)
    c1 = np.clip(np.where(cross, c1, p1), lower, upper)
    c2 = np.clip(np.where(cross, c2, p2), lower, upper)
    return c1, c2


def polynomial_mutation(x, lower, upper, eta_m: float, pm: float, rng: np.random.Generator):
    """Polynomial mutation of each variable with probability ``pm``, clamped to the box."""
    x = np.asarray(x, dtype=float)
    u = rng.random(x.shape)
    hit = rng.random(x.shape) < pm
    expo = 1.0 / (eta_m + 1.0)
    delta = np.where(u < 0.5, (2.0 * u) ** expo - 1.0, 1.0 - (2.0 * (1.0 - u)) ** expo)
    y = x + delta * (np.asarray(upper) - np.asarray(lower))
    return np.where(hit, np.clip(y, lower, upper), x)


@dataclass(frozen=True)
class StepInfo:
    """Bookkeeping of the last generation.

    ``fitness`` and ``aggregation`` are (subproblem x union) matrices with and
    without penalty; ``before``/``after`` index each subproblem's incumbent in
    the union (incumbent population followed by the children).
    """

    fitness: np.ndarray
    aggregation: np.ndarray
    v_scaled: np.ndarray
    search: SearchState
    before: np.ndarray
    after: np.ndarray
    snapshot: NormalizationSnapshot


@dataclass(frozen=True)
class MoeadState:
    weights: np.ndarray
    neighbors: np.ndarray
    population: Population
    ideal: np.ndarray
    generation: int = 0
    evaluations: int = 0
    # Running per-objective bounds of every feasible solution evaluated so far.
    feasible_lo: np.ndarray | None = None
    feasible_hi: np.ndarray | None = None
    last_step: StepInfo | None = field(default=None, repr=False, compare=False)


def _feasible_bounds(lo, hi, pop: Population):
    F = pop.F[pop.feasible]
    if len(F) == 0:
        return lo, hi
    if lo is None:
        return F.min(axis=0), F.max(axis=0)
    return np.minimum(lo, F.min(axis=0)), np.maximum(hi, F.max(axis=0))


def initialize(problem: ProblemDefinition, params: MoeadParams, rng: np.random.Generator) -> MoeadState:
    """Uniform random population inside the box, one member per weight vector."""
    params.validate()
    W = generate_weights(problem.n_obj, params.H)
    if len(W) != params.population:
        raise ValueError(f"population ({params.population}) must equal the weight count ({len(W)})")
    B = compute_neighborhoods(W, params.T)
    X = problem.lower + rng.random((len(W), problem.n_var)) * (problem.upper - problem.lower)
    pop = Population.evaluate(problem, X)
    lo, hi = _feasible_bounds(None, None, pop)
    ideal = update_ideal(np.full(problem.n_obj, np.inf), pop.F)
    return MoeadState(W, B, pop, ideal, 0, len(pop), lo, hi)


def run_generation(
    state: MoeadState,
    problem: ProblemDefinition,
    cht: ChtStrategy,
    params: MoeadParams,
    rng: np.random.Generator,
) -> MoeadState:
    """One generation; returns a new state (the input is not modified).

    Only ``min(N, budget - evaluations)`` children are produced, so the last
    generation may be partial.
    """
    pop = state.population
    N, T = len(pop), state.neighbors.shape[1]
    k = min(N, params.budget - state.evaluations)
    if k <= 0:
        return state

    # mating selection
    use_nb = rng.random(k) < params.delta
    pool_size = np.where(use_nb, T, N)
    a = rng.integers(0, pool_size)
    b = rng.integers(0, np.maximum(pool_size - 1, 1))
    b = np.where(pool_size > 1, b + (b >= a), a)
    rows = np.arange(k)
    pa = np.where(use_nb, state.neighbors[rows, np.minimum(a, T - 1)], a)
    pb = np.where(use_nb, state.neighbors[rows, np.minimum(b, T - 1)], b)

    child_x, _ = sbx_crossover(pop.X[pa], pop.X[pb], problem.lower, problem.upper,
                               params.eta_x, params.pc, rng)
    child_x = polynomial_mutation(child_x, problem.lower, problem.upper, params.eta_m, params.pm, rng)
    children = Population.evaluate(problem, child_x)
    ideal = update_ideal(state.ideal, children.F)

    union = pop.concat(children)
    snap = NormalizationSnapshot.from_union(union.F, union.V)
    f_scaled = snap.scale_objectives(union.F)
    z_scaled = snap.scale_objectives(ideal)
    if params.violation_scaling == "per_constraint":
        v_scaled = scale_violations(per_constraint_violation(union.G))
    else:
        v_scaled = snap.scale_violations(union.V)
    tch = tchebycheff(f_scaled[None, :, :], state.weights[:, None, :], z_scaled)
    n_feas = int(np.count_nonzero(pop.feasible))
    search = SearchState(state.generation + 1, n_feas, N - n_feas)
    fitness = penalized_fitness(tch, v_scaled, union.G, union.feasible, cht, search)

    before = np.arange(N)
    current = before.copy()
    everyone = np.arange(N)
    for i in range(k):
        pool = state.neighbors[i] if use_nb[i] else everyone
        order = rng.permutation(pool)
        if params.nr == 0:
            continue
        c = N + i
        better = order[fitness[order, c] < fitness[order, current[order]]]
        current[better[: params.nr]] = c

    new_pop = union[current]
    lo, hi = _feasible_bounds(state.feasible_lo, state.feasible_hi, children)
    return replace(
        state,
        population=new_pop,
        ideal=ideal,
        generation=state.generation + 1,
        evaluations=state.evaluations + k,
        feasible_lo=lo,
        feasible_hi=hi,
        last_step=StepInfo(fitness, tch, v_scaled, search, before, current, snap),
    )


@dataclass
class RunResult:
    population: Population
    trace: AnytimeTrace
    state: MoeadState
    params: MoeadParams
    # Feasible population objectives after each generation (initialization first).
    feasible_history: list[np.ndarray] = field(default_factory=list, repr=False)


def scaled_front(F_feasible, lo, hi) -> np.ndarray:
    """Feasible objectives min-max scaled against run-level bounds, nondominated rows only."""
    F = np.asarray(F_feasible, dtype=float)
    if len(F) == 0 or lo is None:
        return np.empty((0, F.shape[-1] if F.ndim == 2 else 0))
    return filter_nondominated(minmax_scale(F, lo, hi))


def run(
    problem: ProblemDefinition,
    cht: ChtStrategy,
    params: MoeadParams,
    seed: int,
) -> RunResult:
    """Full seeded run until the evaluation budget is used up.

    The hypervolume column of the trace is computed afterwards, scaling every
    generation's feasible solutions against the bounds of all feasible
    solutions evaluated during the run, so the curve is comparable within it.
    """
    params = params.resolve(problem)
    rng = np.random.default_rng(seed)
    state = initialize(problem, params, rng)

    snapshots = [(state.generation, state.evaluations, state.population)]
    while state.evaluations < params.budget:
        state = run_generation(state, problem, cht, params, rng)
        snapshots.append((state.generation, state.evaluations, state.population))

    ref = reference_point(problem.n_obj)
    trace = AnytimeTrace()
    history = []
    for gen, evals, pop in snapshots:
        Ff = pop.F[pop.feasible]
        history.append(Ff)
        front = scaled_front(Ff, state.feasible_lo, state.feasible_hi)
        hv = hypervolume(front, ref) if len(front) else 0.0
        trace.append(TraceRecord(gen, evals, hv, feasibility_ratio(pop.V)))
    return RunResult(state.population, trace, state, params, history)
