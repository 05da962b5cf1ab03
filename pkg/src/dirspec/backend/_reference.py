"""NumPy implementation of the hot kernels.

Mirrors the semantics of the compiled module ``_kernels``; one of the two is
selected at import time by ``dirspec.backend``. To keep the pair-sweep loop
out of Python, rotations are applied round by round on a round-robin schedule
of disjoint column pairs, so each round is a handful of vectorized array ops.
"""

import numpy as np


def _round_robin_schedule(n):
    # Circle method: n-1 rounds of n//2 disjoint pairs (odd n gets a bye).
    padded = n + (n % 2)
    players = list(range(padded))
    rounds = []
    for _ in range(padded - 1):
        p = np.array(players[: padded // 2])
        q = np.array(players[padded // 2:][::-1])
        keep = (p < n) & (q < n)
        rounds.append((p[keep], q[keep]))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def jacobi_sweeps(gt, vt, tol, max_sweeps):
    """One-sided Jacobi orthogonalization, in place.

    ``gt`` is the working matrix stored transposed (row j holds column j of
    the original m-by-n matrix) and ``vt`` accumulates the right rotations
    the same way. Sweeps run until a full pass applies no rotation, i.e.
    every pair satisfies ``|<gp, gq>| <= tol * |gp| * |gq|``.

    Returns the number of sweeps used, or -1 if ``max_sweeps`` was hit.
    """
    n = gt.shape[0]
    if n < 2:
        return 1
    schedule = _round_robin_schedule(n)
    for sweep in range(max_sweeps):
        rotated = False
        for p_all, q_all in schedule:
            gp = gt[p_all]
            gq = gt[q_all]
            app = np.einsum("ij,ij->i", gp, gp)
            aqq = np.einsum("ij,ij->i", gq, gq)
            apq = np.einsum("ij,ij->i", gp, gq)
            live = (app > 0.0) & (aqq > 0.0)
            live &= np.abs(apq) > tol * np.sqrt(app * aqq, where=live, out=np.zeros_like(app))
            if not live.any():
                continue
            rotated = True
            p = p_all[live]
            q = q_all[live]
            a, b, g = app[live], aqq[live], apq[live]
            tau = (b - a) / (2.0 * g)
            root = np.sqrt(1.0 + tau * tau)
            # smaller-magnitude root of t^2 + 2*tau*t - 1 = 0; the denominator
            # is >= 1 so this form never divides by zero
            t = np.where(tau >= 0.0, 1.0, -1.0) / (np.abs(tau) + root)
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            gp, gq = gt[p], gt[q]
            gt[p] = c[:, None] * gp - s[:, None] * gq
            gt[q] = s[:, None] * gp + c[:, None] * gq
            vp, vq = vt[p], vt[q]
            vt[p] = c[:, None] * vp - s[:, None] * vq
            vt[q] = s[:, None] * vp + c[:, None] * vq
        if not rotated:
            return sweep + 1
    return -1


def csr_matmul(indptr, indices, data, dense):
    """Product of a CSR matrix with a dense matrix, row by row."""
    n_rows = indptr.shape[0] - 1
    out = np.zeros((n_rows, dense.shape[1]))
    for i in range(n_rows):
        lo, hi = indptr[i], indptr[i + 1]
        if lo != hi:
            out[i] = data[lo:hi] @ dense[indices[lo:hi]]
    return out
