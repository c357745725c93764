"""Quality indicators: hypervolume, dominance filtering, feasibility ratio."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def _as_points(points, dim=None) -> np.ndarray:
    P = np.asarray(points, dtype=float)
    if P.size == 0:
        width = P.shape[1] if P.ndim == 2 and dim is None else (dim or 0)
        return np.empty((0, width))
    if P.ndim != 2:
        raise ValueError(f"points must be a 2-D array of objective vectors, got shape {P.shape}")
    if dim is not None and P.shape[1] != dim:
        raise ValueError(f"point dimension {P.shape[1]} does not match reference dimension {dim}")
    return P


def nondominated_mask(points) -> np.ndarray:
    """Boolean mask of the points kept by :func:`filter_nondominated`."""
    P = _as_points(points)
    n = len(P)
    if n == 0:
        return np.zeros(0, dtype=bool)
    leq = np.all(P[:, None, :] <= P[None, :, :], axis=2)  # leq[j, i]: p_j <= p_i
    lt = np.any(P[:, None, :] < P[None, :, :], axis=2)
    dominated = np.any(leq & lt, axis=0)
    equal = leq & leq.T
    earlier_twin = np.any(np.triu(equal, k=1), axis=0)
    return ~(dominated | earlier_twin)


def filter_nondominated(points) -> np.ndarray:
    """Mutually nondominated subset (minimization), first occurrence of duplicates kept."""
    P = _as_points(points)
    return P[nondominated_mask(P)]


def _hv2d(P: np.ndarray, ref: np.ndarray) -> float:
    order = np.lexsort((P[:, 1], P[:, 0]))
    x, y = P[order, 0], P[order, 1]
    best_y = np.minimum.accumulate(y)
    prev = np.concatenate(([ref[1]], best_y[:-1]))
    return float(np.sum((ref[0] - x) * np.maximum(prev - y, 0.0)))


def _hv_slice(P: np.ndarray, ref: np.ndarray) -> float:
    d = P.shape[1]
    if len(P) == 0:
        return 0.0
    if d == 1:
        return float(ref[0] - P[:, 0].min())
    if d == 2:
        return _hv2d(P, ref)
    P = P[np.argsort(P[:, -1], kind="stable")]
    z = np.append(P[:, -1], ref[-1])
    total = 0.0
    for i in range(len(P)):
        depth = z[i + 1] - z[i]
        if depth <= 0.0:
            continue
        section = filter_nondominated(P[: i + 1, :-1])
        total += depth * _hv_slice(section, ref[:-1])
    return total


def _hv_wfg(P: np.ndarray, ref: np.ndarray) -> float:
    # Sum of exclusive contributions; each one is the point's box minus the
    # volume of the remaining points limited to that box.
    d = P.shape[1]
    if len(P) == 0:
        return 0.0
    if len(P) == 1:
        return float(np.prod(ref - P[0]))
    if d == 2:
        return _hv2d(P, ref)
    if d == 3:
        return _hv_slice(P, ref)
    P = P[np.argsort(-P[:, -1], kind="stable")]
    total = 0.0
    for i in range(len(P)):
        p = P[i]
        box = float(np.prod(ref - p))
        if i + 1 < len(P):
            box -= _hv_wfg(filter_nondominated(np.maximum(P[i + 1:], p)), ref)
        total += box
    return total


def _hv_slice_generic(P: np.ndarray, ref: np.ndarray) -> float:
    # Slicing along the last objective all the way down to 1-D intervals.
    d = P.shape[1]
    if d == 1:
        return float(ref[0] - P[:, 0].min())
    P = P[np.argsort(P[:, -1], kind="stable")]
    z = np.append(P[:, -1], ref[-1])
    total = 0.0
    for i in range(len(P)):
        depth = z[i + 1] - z[i]
        if depth > 0.0:
            total += depth * _hv_slice_generic(filter_nondominated(P[: i + 1, :-1]), ref[:-1])
    return total


_METHODS = {"sweep", "slice", "wfg"}


def hypervolume(front, ref, method: str = "auto") -> float:
    """Lebesgue measure dominated by ``front`` and bounded by ``ref`` (minimization).

    Points that do not strictly dominate ``ref`` in every coordinate contribute
    nothing. Methods:

    * ``"sweep"``: sort-and-sweep, two objectives only.
    * ``"slice"``: slice along one objective at a time down to 1-D intervals.
    * ``"wfg"``: exclusive-contribution recursion with a 3-D slicing base case.
    * ``"auto"``: sweep for 2 objectives, slicing (2-D sweep base) for 3,
      wfg for 4 or more.
    """
    if method != "auto" and method not in _METHODS:
        raise ValueError(f"unknown hypervolume method {method!r}")
    ref = np.asarray(ref, dtype=float).ravel()
    P = _as_points(front, dim=len(ref))
    if len(P) == 0:
        return 0.0
    P = P[np.all(P < ref, axis=1)]
    if len(P) == 0:
        return 0.0
    P = filter_nondominated(P)
    d = len(ref)
    if method == "sweep":
        if d != 2:
            raise ValueError("the sweep method is only defined for two objectives")
        return _hv2d(P, ref)
    if method == "slice":
        return _hv_slice_generic(P, ref)
    if method == "wfg":
        return _hv_wfg(P, ref)
    if d == 1:
        return float(ref[0] - P[:, 0].min())
    if d == 2:
        return _hv2d(P, ref)
    if d == 3:
        return _hv_slice(P, ref)
    return _hv_wfg(P, ref)


def feasibility_ratio(violations) -> float:
    """Fraction of solutions with zero total violation."""
    v = np.asarray(violations, dtype=float).ravel()
    if v.size == 0:
        raise ValueError("feasibility ratio of an empty population is undefined")
    return float(np.mean(v == 0.0))


def minmax_scale(F, lo, hi) -> np.ndarray:
    """Column-wise linear map of ``F`` from ``[lo, hi]`` onto ``[0, 1]``; zero-width columns map to 0."""
    F = np.asarray(F, dtype=float)
    lo = np.asarray(lo, dtype=float)
    span = np.asarray(hi, dtype=float) - lo
    out = np.zeros_like(F)
    ok = span > 0
    out[..., ok] = (F[..., ok] - lo[ok]) / span[ok]
    return out


def reference_point(n_obj: int) -> np.ndarray:
    return np.full(n_obj, 1.1)


@dataclass(frozen=True)
class TraceRecord:
    generation: int
    evaluations: int
    hypervolume: float
    feasibility_ratio: float


@dataclass
class AnytimeTrace:
    """Per-generation quality records of one run, initialization included."""

    records: list[TraceRecord] = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def append(self, rec: TraceRecord) -> None:
        if self.records:
            last = self.records[-1]
            if rec.generation <= last.generation:
                raise ValueError("trace generations must be strictly increasing")
            if rec.evaluations < last.evaluations:
                raise ValueError("trace evaluation counts must be nondecreasing")
        self.records.append(rec)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])

    @property
    def best_so_far(self) -> np.ndarray:
        return np.maximum.accumulate(self.column("hypervolume"))

    @property
    def final(self) -> TraceRecord:
        return self.records[-1]
