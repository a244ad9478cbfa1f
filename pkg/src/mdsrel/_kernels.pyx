# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops for the score and joint-frequency recurrences.

Signatures mirror ``mdsrel._kernels_py``; see that module for the reference
semantics.
"""
import numpy as np

cimport numpy as cnp

cnp.import_array()


def score_dp(long init_offset, double[::1] init_mass, double[::1] alpha,
             double[::1] beta, double[::1] gamma, cnp.int64_t[::1] mult,
             double tail_eps):
    cdef Py_ssize_t ngroups = alpha.shape[0]
    cdef Py_ssize_t g, idx
    cdef long long steps = 0, k, reps
    for g in range(ngroups):
        if alpha[g] != 0.0 or beta[g] != 0.0:
            steps += mult[g]
    cdef Py_ssize_t n0 = init_mass.shape[0]
    cdef Py_ssize_t size = n0 + 2 * steps + 2
    buf_arr = np.zeros(size, dtype=np.float64)
    cdef double[::1] buf = buf_arr
    cdef Py_ssize_t base = steps + 1
    cdef Py_ssize_t lo = base, hi = base + n0 - 1
    for idx in range(n0):
        buf[base + idx] = init_mass[idx]
    cdef double lost_lo = 0.0, lost_hi = 0.0
    cdef double a, b, c, prev_old, cur_old, next_old, scale

    while lo < hi and lost_lo + buf[lo] <= tail_eps:
        lost_lo += buf[lo]
        buf[lo] = 0.0
        lo += 1
    while hi > lo and lost_hi + buf[hi] <= tail_eps:
        lost_hi += buf[hi]
        buf[hi] = 0.0
        hi -= 1

    for g in range(ngroups):
        a = alpha[g]
        b = beta[g]
        c = gamma[g]
        reps = mult[g]
        if reps <= 0:
            continue
        if a == 0.0 and b == 0.0:
            scale = c ** reps
            for idx in range(lo, hi + 1):
                buf[idx] *= scale
            continue
        for k in range(reps):
            prev_old = 0.0
            for idx in range(lo - 1, hi + 2):
                cur_old = buf[idx]
                if idx + 1 <= hi:
                    next_old = buf[idx + 1]
                else:
                    next_old = 0.0
                buf[idx] = a * prev_old + c * cur_old + b * next_old
                prev_old = cur_old
            lo -= 1
            hi += 1
            while lo < hi and lost_lo + buf[lo] <= tail_eps:
                lost_lo += buf[lo]
                buf[lo] = 0.0
                lo += 1
            while hi > lo and lost_hi + buf[hi] <= tail_eps:
                lost_hi += buf[hi]
                buf[hi] = 0.0
                hi -= 1

    offset = init_offset + (lo - base)
    return offset, buf_arr[lo:hi + 1].copy(), lost_lo, lost_hi


def joint_dp(double[::1] q0, double[::1] qr, double rel_eps, Py_ssize_t cap):
    cdef Py_ssize_t n = q0.shape[0]
    cdef Py_ssize_t rows = 1, cols = 1, bufr = 64, bufc = 64
    cdef Py_ssize_t i, j, j_step, r_first, r_last, c_first, c_last
    cdef Py_ssize_t new_rows, new_cols
    cdef long off0 = 0, off1 = 0
    cdef double z, l, h, v, vmax, thr, dropped = 0.0, rs_top, rs_bot
    cur_arr = np.zeros((bufr, bufc), dtype=np.float64)
    nxt_arr = np.zeros((bufr, bufc), dtype=np.float64)
    cdef double[:, ::1] cur = cur_arr
    cdef double[:, ::1] nxt = nxt_arr
    cur[0, 0] = 1.0

    for j_step in range(n):
        z = q0[j_step]
        l = qr[j_step]
        h = 1.0 - z - l
        if h < 0.0:
            h = 0.0
        new_rows = rows + 1
        new_cols = cols + 1
        if new_rows > bufr or new_cols > bufc:
            bufr = max(bufr, new_rows * 3 // 2 + 2)
            bufc = max(bufc, new_cols * 3 // 2 + 2)
            grown = np.zeros((bufr, bufc), dtype=np.float64)
            grown[:rows, :cols] = cur_arr[:rows, :cols]
            cur_arr = grown
            cur = cur_arr
            nxt_arr = np.zeros((bufr, bufc), dtype=np.float64)
            nxt = nxt_arr
        vmax = 0.0
        for i in range(new_rows):
            for j in range(new_cols):
                v = 0.0
                if i < rows and j < cols:
                    v = h * cur[i, j]
                if i < rows and j >= 1 and j - 1 < cols:
                    v = v + l * cur[i, j - 1]
                if i >= 1 and j >= 1 and i - 1 < rows and j - 1 < cols:
                    v = v + z * cur[i - 1, j - 1]
                nxt[i, j] = v
                if v > vmax:
                    vmax = v
        thr = rel_eps * vmax
        r_first = new_rows
        r_last = -1
        c_first = new_cols
        c_last = -1
        for i in range(new_rows):
            for j in range(new_cols):
                v = nxt[i, j]
                if v != 0.0:
                    if v < thr:
                        dropped += v
                        nxt[i, j] = 0.0
                    else:
                        if i < r_first:
                            r_first = i
                        if i > r_last:
                            r_last = i
                        if j < c_first:
                            c_first = j
                        if j > c_last:
                            c_last = j
        # hard window cap: shave the lighter edge until the window fits
        while r_last - r_first + 1 > cap:
            rs_top = 0.0
            rs_bot = 0.0
            for j in range(c_first, c_last + 1):
                rs_top += nxt[r_first, j]
                rs_bot += nxt[r_last, j]
            if rs_top <= rs_bot:
                dropped += rs_top
                r_first += 1
            else:
                dropped += rs_bot
                r_last -= 1
        while c_last - c_first + 1 > cap:
            rs_top = 0.0
            rs_bot = 0.0
            for i in range(r_first, r_last + 1):
                rs_top += nxt[i, c_first]
                rs_bot += nxt[i, c_last]
            if rs_top <= rs_bot:
                dropped += rs_top
                c_first += 1
            else:
                dropped += rs_bot
                c_last -= 1
        rows = r_last - r_first + 1
        cols = c_last - c_first + 1
        for i in range(rows):
            for j in range(cols):
                cur[i, j] = nxt[r_first + i, c_first + j]
        off0 += r_first
        off1 += c_first

    return off0, off1, cur_arr[:rows, :cols].copy(), dropped
