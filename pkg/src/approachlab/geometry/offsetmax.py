"""The N-offset maximum and its order-statistic identities."""

import math

import numpy as np


def offmax(values, n_offset) -> float:
    """The (n_offset+1)-th largest value; 0 by convention when too few values."""
    v = np.asarray(values, dtype=np.float64).ravel()
    if n_offset < 0:
        raise ValueError("offset must be nonnegative")
    if v.size <= n_offset:
        return 0.0
    return float(np.partition(v, v.size - 1 - n_offset)[v.size - 1 - n_offset])


def offmax_subset_monotonicity_check(values, subset_indices, n_offset) -> bool:
    """Check the two offmax identities on a concrete (values, subset, N) triple.

    Subset monotonicity: offmax over the subset at offset N is at least the
    offmax over the full set at offset N + (dropped count). Summation: the
    offsets 0..n-1 enumerate the values, so their offmaxes sum to the total
    (compared through exact float summation). Test utility; returns whether
    both hold.
    """
    v = np.asarray(values, dtype=np.float64).ravel()
    sub = v[np.asarray(subset_indices, dtype=int)]
    dropped = v.size - sub.size
    if dropped < 0:
        raise ValueError("subset larger than the full set")
    mono = offmax(sub, n_offset) >= offmax(v, n_offset + dropped)
    total = math.fsum(offmax(v, s) for s in range(v.size))
    summation = total == math.fsum(v.tolist())
    return bool(mono and summation)
