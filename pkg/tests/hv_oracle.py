"""Monte Carlo hypervolume estimator, kept independent of ``chtmoead.metrics``.

Samples are drawn uniformly from the box between the origin (or the front's
componentwise minimum, if lower) and the reference point. A sample counts when at least one front
point weakly dominates it.
"""

import numpy as np


def mc_hypervolume(front, ref, n_samples=1_000_000, rng=None, chunk=250_000):
    """Return ``(estimate, standard_error)``."""
    rng = np.random.default_rng(rng)
    P = np.asarray(front, dtype=float)
    ref = np.asarray(ref, dtype=float)
    P = P[np.all(P < ref, axis=1)]
    if len(P) == 0:
        return 0.0, 0.0
    lo = np.minimum(P.min(axis=0), 0.0)
    box = float(np.prod(ref - lo))
    hits = 0
    done = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        S = lo + rng.random((m, len(ref))) * (ref - lo)
        covered = np.zeros(m, dtype=bool)
        for p in P:
            covered |= np.all(S >= p, axis=1)
        hits += int(covered.sum())
        done += m
    frac = hits / n_samples
    se = box * np.sqrt(frac * (1.0 - frac) / n_samples)
    return box * frac, float(se)


def random_front(rng, max_points=8, dims=(2, 3, 4)):
    d = int(rng.choice(dims))
    n = int(rng.integers(1, max_points + 1))
    return rng.random((n, d))
