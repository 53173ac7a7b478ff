"""Compiled inner slot loop for :mod:`pmsched.engine`.

Mirrors the reference loop in ``engine._advance_python`` exactly; the two are
cross-checked in the test suite.
"""

from __future__ import annotations

import numpy as np
from numba import njit

ORDERED = 0
LQF = 1
MAX_WEIGHT = 2


@njit(cache=True)
def advance(kind, nbr, order, candidates, lex, queues, arrived, departed, qmax, arrivals, t0, every, traj_t, traj_q, n_traj):
    """Run ``len(arrivals)`` slots starting after slot ``t0``; returns the new trajectory count.

    Per slot: schedule on current queues, serve one packet per scheduled link,
    then add the end-of-slot arrivals.
    """
    length, n = arrivals.shape
    lqf = np.empty(n, dtype=np.int64)
    for s in range(length):
        selected = 0
        if kind == ORDERED:
            for r in range(n):
                i = order[r]
                if queues[i] > 0 and (nbr[i] & selected) == 0:
                    selected |= np.int64(1) << i
        elif kind == LQF:
            # stable insertion sort: decreasing queue length, ties by id
            for i in range(n):
                lqf[i] = i
            for a in range(1, n):
                v = lqf[a]
                b = a - 1
                while b >= 0 and queues[lqf[b]] < queues[v]:
                    lqf[b + 1] = lqf[b]
                    b -= 1
                lqf[b + 1] = v
            for r in range(n):
                i = lqf[r]
                if queues[i] > 0 and (nbr[i] & selected) == 0:
                    selected |= np.int64(1) << i
        else:
            backlogged = 0
            for i in range(n):
                if queues[i] > 0:
                    backlogged |= np.int64(1) << i
            best_w = -1
            best_key = 0
            for c in range(candidates.shape[0]):
                m = candidates[c] & backlogged
                w = 0
                key = 0
                for i in range(n):
                    if (m >> i) & 1:
                        w += queues[i]
                        key |= lex[i]
                if w > best_w or (w == best_w and key < best_key):
                    best_w = w
                    best_key = key
                    selected = m
        t = t0 + s + 1
        for i in range(n):
            if (selected >> i) & 1:
                queues[i] -= 1
                departed[i] += 1
            a = arrivals[s, i]
            queues[i] += a
            arrived[i] += a
            if queues[i] > qmax[i]:
                qmax[i] = queues[i]
        if t % every == 0:
            traj_t[n_traj] = t
            for i in range(n):
                traj_q[n_traj, i] = queues[i]
            n_traj += 1
    return n_traj
