"""Sequence acceleration."""

import numpy as np


def wynn_epsilon(partial_sums):
    """
    Limit estimate of a sequence by Wynn's epsilon algorithm.

    Parameters
    ----------
    partial_sums : array_like
        Real or complex sequence S_0, S_1, ...

    Returns
    -------
    limit : float or complex
        Best estimate, taken from the last even column of the epsilon table.
    error : float
        Difference between the two most recent even-column estimates.
    """
    s = np.asarray(partial_sums)
    n = s.size
    if n < 3:
        return s[-1], np.inf
    prev = np.zeros(n + 1, dtype=s.dtype)
    cur = s.copy()
    estimates = [s[-1]]
    col = 0
    while cur.size > 1:
        diff = cur[1:] - cur[:-1]
        with np.errstate(divide="ignore", invalid="ignore"):
            nxt = prev[1 : cur.size] + 1.0 / diff
        if not np.all(np.isfinite(nxt)):
            break
        prev, cur = cur, nxt
        col += 1
        if col % 2 == 0:
            estimates.append(cur[-1])
    if len(estimates) < 2:
        return estimates[-1], np.inf
    return estimates[-1], float(abs(estimates[-1] - estimates[-2]))
