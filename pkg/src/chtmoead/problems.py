"""Constrained benchmark problems.

The CRE problems come from the real-world constrained suite of Tanabe and
Ishibuchi (2020). All constraints are returned in the ``g <= 0 is feasible``
form: the suite states each constraint as ``c(x) >= 0`` and we return
``g(x) = -c(x)``, so the total violation ``sum(max(g, 0))`` equals the suite's
own violation measure.

Evaluators are vectorized: they take an ``(k, n_var)`` array and return
``(k, n_obj)`` objectives and ``(k, n_con)`` constraint values.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

Evaluator = Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class ProblemDefinition:
    """A box-bounded problem with objectives to minimize and ``g <= 0`` constraints."""

    name: str
    n_var: int
    n_obj: int
    n_con: int
    lower: np.ndarray
    upper: np.ndarray
    func: Evaluator = field(repr=False)
    description: str = ""
    # HV of the exact feasible front after min-max scaling, ref 1.1 in every axis.
    # Only known for the toy problems.
    front_hv: float | None = None

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        if lower.shape != (self.n_var,) or upper.shape != (self.n_var,):
            raise ValueError(f"{self.name}: bounds must have length n_var={self.n_var}")
        if not np.all(lower < upper):
            raise ValueError(f"{self.name}: lower bounds must be strictly below upper bounds")
        lower.setflags(write=False)
        upper.setflags(write=False)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    def evaluate(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Evaluate one decision vector or a batch of them."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        X = np.atleast_2d(x)
        if X.shape[1] != self.n_var:
            raise ValueError(f"{self.name}: expected {self.n_var} variables, got {X.shape[1]}")
        F, G = self.func(X)
        F = np.asarray(F, dtype=float).reshape(len(X), self.n_obj)
        G = np.asarray(G, dtype=float).reshape(len(X), self.n_con)
        if single:
            return F[0], G[0]
        return F, G


def total_violation(G: np.ndarray) -> np.ndarray:
    """Sum of positive constraint values along the last axis."""
    return np.maximum(np.asarray(G, dtype=float), 0.0).sum(axis=-1)


def _cre21(X):
    x1, x2, x3 = X.T
    s16 = np.sqrt(16.0 + x3 * x3)
    s1 = np.sqrt(1.0 + x3 * x3)
    f1 = x1 * s16 + x2 * s1
    f2 = 20.0 * s16 / (x1 * x3)
    c = np.column_stack([
        0.1 - f1,
        100000.0 - f2,
        100000.0 - 80.0 * s1 / (x3 * x2),
    ])
    return np.column_stack([f1, f2]), -c


def _cre22(X):
    x1, x2, x3, x4 = X.T
    load, length, E, G = 6000.0, 14.0, 30e6, 12e6
    f1 = 1.10471 * x1**2 * x2 + 0.04811 * x3 * x4 * (14.0 + x2)
    f2 = 2.1952 / (x4 * x3**3)

    moment = load * (length + x2 / 2.0)
    half = ((x1 + x3) / 2.0) ** 2
    radius = np.sqrt(x2**2 / 4.0 + half)
    polar = 2.0 * np.sqrt(2.0) * x1 * x2 * (x2**2 / 12.0 + half)
    tau_pp = moment * radius / polar
    tau_p = load / (np.sqrt(2.0) * x1 * x2)
    tau = np.sqrt(tau_p**2 + tau_p * tau_pp * x2 / radius + tau_pp**2)
    sigma = 6.0 * load * length / (x4 * x3**2)
    buckling = (4.013 * E * np.sqrt(x3**2 * x4**6 / 36.0) / length**2) * (
        1.0 - x3 / (2.0 * length) * np.sqrt(E / (4.0 * G))
    )
    c = np.column_stack([13600.0 - tau, 30000.0 - sigma, x4 - x1, buckling - load])
    return np.column_stack([f1, f2]), -c


def _cre23(X):
    x1, x2, x3, x4 = X.T
    area = x2**2 - x1**2
    cube = x2**3 - x1**3
    f1 = 4.9e-5 * area * (x4 - 1.0)
    f2 = 9.82e6 * area / (x3 * x4 * cube)
    c = np.column_stack([
        (x2 - x1) - 20.0,
        0.4 - x3 / (3.14 * area),
        1.0 - 2.22e-3 * x3 * cube / area**2,
        2.66e-2 * x3 * x4 * cube / area - 900.0,
    ])
    return np.column_stack([f1, f2]), -c


def _cre31(X):
    x1, x2, x3, x4, x5, x6, x7 = X.T
    f1 = (1.98 + 4.9 * x1 + 6.67 * x2 + 6.98 * x3 + 4.01 * x4 + 1.78 * x5
          + 0.00001 * x6 + 2.73 * x7)
    f2 = 4.72 - 0.5 * x4 - 0.19 * x2 * x3
    v_mbp = 10.58 - 0.674 * x1 * x2 - 0.67275 * x2
    v_fd = 16.45 - 0.489 * x3 * x7 - 0.843 * x5 * x6
    f3 = 0.5 * (v_mbp + v_fd)
    c = np.column_stack([
        1.0 - (1.16 - 0.3717 * x2 * x4 - 0.0092928 * x3),
        0.32 - (0.261 - 0.0159 * x1 * x2 - 0.06486 * x1 - 0.019 * x2 * x7
                + 0.0144 * x3 * x5 + 0.0154464 * x6),
        0.32 - (0.214 + 0.00817 * x5 - 0.045195 * x1 - 0.0135168 * x1
                + 0.03099 * x2 * x6 - 0.018 * x2 * x7 + 0.007176 * x3
                + 0.023232 * x3 - 0.00364 * x5 * x6 - 0.018 * x2**2),
        0.32 - (0.74 - 0.61 * x2 - 0.031296 * x3 - 0.031872 * x7 + 0.227 * x2**2),
        32.0 - (28.98 + 3.818 * x3 - 4.2 * x1 * x2 + 1.27296 * x6 - 2.68065 * x7),
        32.0 - (33.86 + 2.95 * x3 - 5.057 * x1 * x2 - 3.795 * x2 - 3.4431 * x7 + 1.45728),
        32.0 - (46.36 - 9.9 * x2 - 4.4505 * x1),
        4.0 - f2,
        9.9 - v_mbp,
        15.7 - v_fd,
    ])
    return np.column_stack([f1, f2, f3]), -c


def _cre32(X):
    L, B, D, T, Vk, CB = X.T
    displacement = 1.025 * L * B * T * CB
    froude = 0.5144 * Vk / np.sqrt(9.8065 * L)
    a = 4977.06 * CB**2 - 8105.61 * CB + 4456.51
    b = -10847.2 * CB**2 + 12817.0 * CB - 6960.32
    power = displacement ** (2.0 / 3.0) * Vk**3 / (a + b * froude)

    outfit_w = L**0.8 * B**0.6 * D**0.3 * CB**0.1
    steel_w = 0.034 * L**1.7 * B**0.7 * D**0.4 * CB**0.5
    machinery_w = 0.17 * power**0.9
    light_ship = steel_w + outfit_w + machinery_w

    ship_cost = 1.3 * (2000.0 * steel_w**0.85 + 3500.0 * outfit_w + 2400.0 * power**0.8)
    dwt = displacement - light_ship
    running_costs = 40000.0 * dwt**0.3
    # The suite multiplies by speed here (not divides); kept as published.
    sea_days = 5000.0 / 24.0 * Vk
    daily_fuel = 0.19 * power * 24.0 / 1000.0 + 0.2
    fuel_cost = 1.05 * daily_fuel * sea_days * 100.0
    port_cost = 6.3 * dwt**0.8
    cargo_dwt = dwt - daily_fuel * (sea_days + 5.0) - 2.0 * dwt**0.5
    port_days = 2.0 * (cargo_dwt / 8000.0 + 0.5)
    trips = 350.0 / (sea_days + port_days)
    annual_costs = 0.2 * ship_cost + running_costs + (fuel_cost + port_cost) * trips
    annual_cargo = cargo_dwt * trips

    kb = 0.53 * T
    bmt = (0.085 * CB - 0.002) * B**2 / (T * CB)
    kg = 1.0 + 0.52 * D
    c = np.column_stack([
        L / B - 6.0,
        15.0 - L / D,
        19.0 - L / T,
        0.45 * dwt**0.31 - T,
        0.7 * D + 0.7 - T,
        500000.0 - dwt,
        dwt - 3000.0,
        0.32 - froude,
        (kb + bmt - kg) - 0.07 * B,
    ])
    F = np.column_stack([annual_costs / annual_cargo, light_ship, -annual_cargo])
    return F, -c


def _cre51(X):
    x1, x2, x3 = X.T
    p = x1 * x2
    F = np.column_stack([
        106780.37 * (x2 + x3) + 61704.67,
        3000.0 * x1,
        305700.0 * 2289.0 * x2 / (0.06 * 2289.0) ** 0.65,
        250.0 * 2289.0 * np.exp(-39.75 * x2 + 9.9 * x3 + 2.74),
        25.0 * (1.39 / p + 4940.0 * x3 - 80.0),
    ])
    c = np.column_stack([
        1.0 - (0.00139 / p + 4.94 * x3 - 0.08),
        1.0 - (0.000306 / p + 1.082 * x3 - 0.0986),
        50000.0 - (12.307 / p + 49408.24 * x3 + 4051.02),
        16000.0 - (2.098 / p + 8046.33 * x3 - 696.71),
        10000.0 - (2.138 / p + 7883.39 * x3 - 705.04),
        2000.0 - (0.417 * p + 1721.26 * x3 - 136.54),
        550.0 - (0.164 / p + 631.13 * x3 - 54.48),
    ])
    return F, -c


def cre21() -> ProblemDefinition:
    return ProblemDefinition(
        "cre21", 3, 2, 3, [1e-5, 1e-5, 1.0], [100.0, 100.0, 3.0], _cre21,
        "two-bar truss design: structural weight vs. joint displacement",
    )


def cre22() -> ProblemDefinition:
    return ProblemDefinition(
        "cre22", 4, 2, 4, [0.125, 0.1, 0.1, 0.125], [5.0, 10.0, 10.0, 5.0], _cre22,
        "welded beam design: fabrication cost vs. end deflection",
    )


def cre23() -> ProblemDefinition:
    return ProblemDefinition(
        "cre23", 4, 2, 4, [55.0, 75.0, 1000.0, 11.0], [80.0, 110.0, 3000.0, 20.0], _cre23,
        "disc brake design: brake mass vs. stopping time",
    )


def cre31() -> ProblemDefinition:
    return ProblemDefinition(
        "cre31", 7, 3, 10,
        [0.5, 0.45, 0.5, 0.5, 0.875, 0.4, 0.4],
        [1.5, 1.35, 1.5, 1.5, 2.625, 1.2, 1.2],
        _cre31,
        "car side impact: weight, pubic force, mean V-pillar velocity",
    )


def cre32() -> ProblemDefinition:
    return ProblemDefinition(
        "cre32", 6, 3, 9,
        [150.0, 20.0, 13.0, 10.0, 14.0, 0.63],
        [274.32, 32.31, 25.0, 11.71, 18.0, 0.75],
        _cre32,
        "conceptual marine design: transport cost, light ship weight, -annual cargo",
    )


def cre51() -> ProblemDefinition:
    return ProblemDefinition(
        "cre51", 3, 5, 7, [0.01, 0.01, 0.01], [0.45, 0.10, 0.10], _cre51,
        "water resource planning: five cost/loss objectives",
    )


# Toy problems with closed-form feasible fronts. After scaling the front to
# [0, 1]^2 both are the segment from (0, 1) to (1, 0) (HV 1.21 - 0.5 = 0.71).

def _toy_linear(X):
    x = X[:, 0]
    return np.column_stack([x, 1.0 - x]), (0.3 - x)[:, None]


def _toy_linear2(X):
    x1, x2 = X.T
    h = 1.0 + x2
    return np.column_stack([x1 * h, (1.0 - x1) * h]), np.column_stack([0.3 - x1, x2 - 0.5])


TOYS: dict[str, Callable[[], ProblemDefinition]] = {
    # f = (x, 1 - x), g = 0.3 - x; feasible front is x in [0.3, 1].
    "linear": lambda: ProblemDefinition(
        "toy:linear", 1, 2, 1, [0.0], [1.0], _toy_linear,
        "f=(x, 1-x), g=0.3-x; feasible front x in [0.3, 1]", front_hv=0.71,
    ),
    # Same front reached at x2 = 0; the second constraint is inactive there.
    "linear2": lambda: ProblemDefinition(
        "toy:linear2", 2, 2, 2, [0.0, 0.0], [1.0, 1.0], _toy_linear2,
        "f=(x1, 1-x1)(1+x2), g=(0.3-x1, x2-0.5); front x1 in [0.3, 1], x2=0",
        front_hv=0.71,
    ),
}


def toy_constrained(name: str) -> ProblemDefinition:
    try:
        return TOYS[name]()
    except KeyError:
        raise ValueError(f"unknown toy problem {name!r}; choose from {sorted(TOYS)}") from None


CRE = {
    "cre21": cre21,
    "cre22": cre22,
    "cre23": cre23,
    "cre31": cre31,
    "cre32": cre32,
    "cre51": cre51,
}


def problem_names() -> list[str]:
    return list(CRE) + ["toy"] + [f"toy:{k}" for k in TOYS]


def get_problem(name: str) -> ProblemDefinition:
    """Look up a problem by registry name ("cre21" ... "cre51", "toy", "toy:<name>")."""
    key = name.strip().lower()
    if key in CRE:
        return CRE[key]()
    if key == "toy":
        return toy_constrained("linear")
    if key.startswith("toy:"):
        return toy_constrained(key[4:])
    raise ValueError(f"unknown problem {name!r}; choose from {problem_names()}")
