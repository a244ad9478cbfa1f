"""Pure numpy versions of the hot recurrences.

These are the reference semantics for ``mdsrel._kernels``; results agree with
the compiled versions to rounding (about 1e-14 elementwise).
"""
from __future__ import annotations

import numpy as np


def _trim(mass: np.ndarray, lo: int, hi: int, lost_lo: float, lost_hi: float, eps: float):
    while lo < hi and lost_lo + mass[lo] <= eps:
        lost_lo += mass[lo]
        lo += 1
    while hi > lo and lost_hi + mass[hi] <= eps:
        lost_hi += mass[hi]
        hi -= 1
    return lo, hi, lost_lo, lost_hi


def score_dp(init_offset, init_mass, alpha, beta, gamma, mult, tail_eps):
    """Apply the three-point score recurrence group by group.

    Group ``g`` contributes ``mult[g]`` independent steps with outcome +1, -1, 0
    taken with probabilities ``alpha[g]``, ``beta[g]``, ``gamma[g]``.  Tail
    entries are discarded as long as the cumulative discarded mass on that side
    stays within ``tail_eps``.  Returns ``(offset, mass, lost_lo, lost_hi)``.
    """
    mass = np.array(init_mass, dtype=np.float64)
    offset = int(init_offset)
    lo, hi, lost_lo, lost_hi = _trim(mass, 0, mass.size - 1, 0.0, 0.0, tail_eps)
    mass = mass[lo:hi + 1]
    offset += lo
    for a, b, c, reps in zip(alpha, beta, gamma, mult):
        reps = int(reps)
        if reps <= 0:
            continue
        if a == 0.0 and b == 0.0:
            mass = mass * c**reps
            continue
        kernel = np.array([b, c, a])
        for _ in range(reps):
            mass = np.convolve(mass, kernel)
            offset -= 1
            lo, hi, lost_lo, lost_hi = _trim(mass, 0, mass.size - 1, lost_lo, lost_hi, tail_eps)
            mass = mass[lo:hi + 1]
            offset += lo
    return offset, mass.copy(), lost_lo, lost_hi


def joint_dp(q0, qr, rel_eps, cap):
    """Joint PMF of (#strands with zero reads, #strands with at most r' reads).

    Strand ``j`` lands in the zero class with probability ``q0[j]``, in the
    1..r' class with probability ``qr[j]`` and above r' otherwise.  After each
    step, states below ``rel_eps`` times the current maximum are dropped and the
    window is capped at ``cap`` per axis.  Returns ``(off0, off1, grid, dropped)``
    with ``grid[a, b] = Pr(H0 = off0 + a, H' = off1 + b)``.
    """
    cur = np.ones((1, 1))
    off0 = off1 = 0
    dropped = 0.0
    for z, l in zip(q0, qr):
        h = max(1.0 - z - l, 0.0)
        rows, cols = cur.shape
        nxt = np.zeros((rows + 1, cols + 1))
        nxt[:rows, :cols] += h * cur
        nxt[:rows, 1:] += l * cur
        nxt[1:, 1:] += z * cur
        thr = rel_eps * nxt.max()
        small = (nxt < thr) & (nxt != 0.0)
        if small.any():
            dropped += float(nxt[small].sum())
            nxt[small] = 0.0
        nz_rows = np.flatnonzero(nxt.any(axis=1))
        nz_cols = np.flatnonzero(nxt.any(axis=0))
        r0, r1 = nz_rows[0], nz_rows[-1]
        c0, c1 = nz_cols[0], nz_cols[-1]
        while r1 - r0 + 1 > cap:
            top = nxt[r0, c0:c1 + 1].sum()
            bot = nxt[r1, c0:c1 + 1].sum()
            if top <= bot:
                dropped += float(top)
                r0 += 1
            else:
                dropped += float(bot)
                r1 -= 1
        while c1 - c0 + 1 > cap:
            left = nxt[r0:r1 + 1, c0].sum()
            right = nxt[r0:r1 + 1, c1].sum()
            if left <= right:
                dropped += float(left)
                c0 += 1
            else:
                dropped += float(right)
                c1 -= 1
        cur = nxt[r0:r1 + 1, c0:c1 + 1]
        off0 += int(r0)
        off1 += int(c0)
    return off0, off1, np.array(cur), dropped
