"""Independent reference implementations used to cross-check the fast paths.

Everything here is deliberately naive: repeated peeling with direct pairwise
scans instead of domination-count bookkeeping, Monte-Carlo area estimation
instead of strip sums, and exhaustive genotype enumeration instead of search.
They exist so the optimized implementations can be validated against a second
route, both in the test suite and via the ``verify`` CLI subcommand.
"""

from __future__ import annotations

import numpy as np


def _dominated_by_any(point, others) -> bool:
    for other in others:
        if all(o <= p for o, p in zip(other, point)) and any(
            o < p for o, p in zip(other, point)
        ):
            return True
    return False


def brute_force_fronts(objectives) -> list[list[int]]:
    """Non-dominated fronts by literal peeling.

    Repeatedly extracts the set of points not dominated by any other
    remaining point, preserving input order within each front.  Quadratic
    per peel; intended for populations of at most a few hundred.
    """
    objs = [tuple(map(float, row)) for row in np.asarray(objectives, dtype=np.float64)]
    remaining = list(range(len(objs)))
    fronts: list[list[int]] = []
    while remaining:
        front = [
            i
            for i in remaining
            if not _dominated_by_any(objs[i], (objs[j] for j in remaining if j != i))
        ]
        fronts.append(front)
        front_set = set(front)
        remaining = [i for i in remaining if i not in front_set]
    return fronts


def monte_carlo_hypervolume(
    front,
    ref=(1.0, 1.0),
    n_samples: int = 1_000_000,
    seed: int = 0,
    samples: np.ndarray | None = None,
) -> tuple[float, float]:
    """Estimate the dominated area by uniform sampling of the reference box.

    Returns ``(estimate, standard_error)`` where the standard error is the
    binomial one, ``sqrt(p * (1 - p) / n)`` scaled by the box area.  A
    pre-drawn ``samples`` array (n, 2) of uniforms in the reference box may
    be supplied to share one panel across many fronts; the estimate stays a
    valid Monte-Carlo estimate for each front individually.
    """
    ref = np.asarray(ref, dtype=np.float64)
    objs = np.asarray(front, dtype=np.float64)
    if objs.size == 0:
        return 0.0, 0.0
    if objs.ndim == 1:
        objs = objs.reshape(1, -1)
    if samples is None:
        rng = np.random.default_rng(seed)
        samples = rng.random((n_samples, 2)) * ref
    n = samples.shape[0]

    dominated = np.zeros(n, dtype=bool)
    for point in objs:
        dominated |= np.all(samples >= point, axis=1)
    p = dominated.mean()
    box = float(ref[0] * ref[1])
    estimate = float(p * box)
    stderr = float(np.sqrt(p * (1.0 - p) / n) * box)
    return estimate, stderr


def enumerate_pareto_masks(evaluate_fn, n_features: int) -> dict[bytes, tuple[float, float]]:
    """Evaluate every genotype of a small problem and keep the Pareto set.

    ``evaluate_fn`` maps a boolean mask of length ``n_features`` to an
    objective pair.  Returns the non-dominated genotypes keyed by their
    packed-bit bytes.  Only feasible for ``n_features`` up to ~16.
    """
    if n_features > 16:
        raise ValueError("exhaustive enumeration limited to 16 features")
    masks = []
    objs = []
    for code in range(2**n_features):
        bits = np.array(
            [(code >> (n_features - 1 - i)) & 1 for i in range(n_features)], dtype=bool
        )
        masks.append(bits)
        objs.append(tuple(map(float, evaluate_fn(bits))))

    pareto: dict[bytes, tuple[float, float]] = {}
    for i, mask in enumerate(masks):
        if not _dominated_by_any(objs[i], (objs[j] for j in range(len(objs)) if j != i)):
            pareto[np.packbits(mask).tobytes()] = objs[i]
    return pareto
