"""Shared numerical policy: tolerances, seeded RNG streams, batch-means CIs."""

from __future__ import annotations

import numpy as np

# Exact linear-algebra identities (no factorization in the error path).
TOL_EXACT = 1e-12
# Identities mediated by a matrix factorization or eigensolve.
TOL_FACTORED = 1e-9


class ValidationError(ValueError):
    """Malformed input: bad graph data, violated precondition."""


class ToleranceBreach(ArithmeticError):
    """A quantity left its certified numerical window (signals solver failure)."""


def make_rng(seed):
    """Counter-based seeded generator (Philox).

    Every sampling routine takes an explicit seed and builds its stream here,
    so results are reproducible bit-for-bit from the seed alone.
    """
    return np.random.Generator(np.random.Philox(key=np.uint64(seed)))


def split_seeds(seed, n):
    """Derive ``n`` child seeds from a master seed.

    Splitting rule: child k is ``SeedSequence([seed, k])``'s first 64-bit
    word.  Chunked estimators consume chunks in index order, so the result
    is independent of how chunks are scheduled.
    """
    return [int(np.random.SeedSequence([int(seed), k]).generate_state(1, np.uint64)[0])
            for k in range(n)]


def batch_means_ci(samples, nbatch=32, z=1.96):
    """Mean and normal CI half-width via batch means.

    Returns (mean, half_width).  Robust to the mild serial correlation of
    chunked Monte Carlo output.
    """
    x = np.asarray(samples, dtype=float)
    n = x.size
    if n < 2:
        return float(x.mean()) if n else float("nan"), float("inf")
    nbatch = max(2, min(nbatch, n))
    cut = (n // nbatch) * nbatch
    means = x[:cut].reshape(nbatch, -1).mean(axis=1)
    se = means.std(ddof=1) / np.sqrt(nbatch)
    return float(x.mean()), float(z * se)


def clamp_probability(p, tol=TOL_FACTORED):
    """Clamp a determinant-derived probability into [0, 1].

    Values outside [-tol, 1+tol] indicate numerical failure and raise.
    """
    if p < -tol or p > 1.0 + tol:
        raise ToleranceBreach(f"probability {p} outside [-{tol}, 1+{tol}]")
    return min(max(p, 0.0), 1.0)
