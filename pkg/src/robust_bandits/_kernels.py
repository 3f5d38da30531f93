"""Compiled inner loop for one simulated run.

Mirrors ``policies.ucb_index`` / ``select_arm`` operation for operation, so a
run here and a run through ``PolicyState`` produce the same arm sequence.
Per-round schedule values (f(t), aux(t), log t, q(t)) are computed in Python
and passed in as arrays indexed by round.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

R_UCB = 0  # also alpha-UCB, with a constant f array
R_UCB_G = 1
MOM = 2


@njit(cache=True, nogil=True)
def _heap_push(heap, size, x):
    i = size
    heap[i] = x
    while i > 0:
        parent = (i - 1) // 2
        if abs(heap[parent]) <= abs(heap[i]):
            break
        heap[parent], heap[i] = heap[i], heap[parent]
        i = parent
    return size + 1


@njit(cache=True, nogil=True)
def _heap_pop(heap, size):
    top = heap[0]
    size -= 1
    heap[0] = heap[size]
    i = 0
    while True:
        left = 2 * i + 1
        if left >= size:
            break
        child = left
        if left + 1 < size and abs(heap[left + 1]) < abs(heap[left]):
            child = left + 1
        if abs(heap[i]) <= abs(heap[child]):
            break
        heap[i], heap[child] = heap[child], heap[i]
        i = child
    return top, size


@njit(cache=True, nogil=True)
def _median_sorted(s):
    n = s.shape[0]
    m = n // 2
    if n % 2 == 1:
        return s[m]
    return (s[m - 1] + s[m]) / 2


@njit(cache=True, nogil=True)
def run_policy(kind, rewards, gaps, ft, aux, lnt, qt, checkpoints, out, arms_out):
    k, horizon = rewards.shape
    counts = np.zeros(k, np.int64)
    sums = np.zeros(k)
    # truncated mean state
    comp = np.zeros(k)
    water = np.full(k, -np.inf)
    heap = np.empty((k, horizon if kind == R_UCB_G else 0))
    hsize = np.zeros(k, np.int64)
    # median-of-means state
    qmax = 1
    if kind == MOM:
        qmax = int(qt.max()) + 1
    bins = np.zeros((k, qmax))
    bin_n = np.zeros(k, np.int64)
    nbins = np.zeros(k, np.int64)
    done = np.zeros(k, np.int64)
    cache_u = np.full(k, -1, np.int64)
    cache_q = np.full(k, -1, np.int64)
    cache_v = np.zeros(k)
    tmp = np.empty(qmax)

    record = arms_out.shape[0] == horizon
    cum = 0.0
    cp = 0
    ncp = checkpoints.shape[0]
    for t in range(1, horizon + 1):
        if t <= k:
            arm = t - 1
        elif k == 1:
            arm = 0
        else:
            f_t = ft[t]
            a_t = aux[t]
            l_t = lnt[t]
            best = 0
            best_val = -np.inf
            for i in range(k):
                u = counts[i]
                if kind == R_UCB:
                    v = sums[i] / u + math.sqrt(f_t * l_t / u)
                elif kind == R_UCB_G:
                    if f_t < water[i]:
                        raise ValueError("truncation threshold decreased")
                    water[i] = f_t
                    while hsize[i] > 0 and abs(heap[i, 0]) <= f_t:
                        x, hsize[i] = _heap_pop(heap[i], hsize[i])
                        s = sums[i]
                        tt = s + x
                        if abs(s) >= abs(x):
                            comp[i] += (s - tt) + x
                        else:
                            comp[i] += (x - tt) + s
                        sums[i] = tt
                    v = (sums[i] + comp[i]) / u + (a_t + 16.0 * f_t * l_t / u)
                else:
                    q = qt[t]
                    if cache_u[i] != u or cache_q[i] != q:
                        if u > 32.0 * l_t:
                            n = (u + q - 1) // q
                            if n != bin_n[i]:
                                bin_n[i] = n
                                nbins[i] = 0
                                done[i] = 0
                            for j in range(done[i], u):
                                b = j // n
                                if b == nbins[i]:
                                    bins[i, b] = 0.0
                                    nbins[i] += 1
                                bins[i, b] += rewards[i, j]
                            done[i] = u
                            nb = nbins[i]
                            for b in range(nb - 1):
                                tmp[b] = bins[i, b] / n
                            tmp[nb - 1] = bins[i, nb - 1] / (u - (nb - 1) * n)
                            cache_v[i] = _median_sorted(np.sort(tmp[:nb]))
                        else:
                            cache_v[i] = _median_sorted(np.sort(rewards[i, :u]))
                        cache_u[i] = u
                        cache_q[i] = q
                    v = cache_v[i] + f_t * (32.0 * l_t / u) ** a_t
                if v > best_val:
                    best = i
                    best_val = v
            arm = best

        x = rewards[arm, counts[arm]]
        counts[arm] += 1
        if kind == R_UCB:
            sums[arm] += x
        elif kind == R_UCB_G:
            if abs(x) <= water[arm]:
                s = sums[arm]
                tt = s + x
                if abs(s) >= abs(x):
                    comp[arm] += (s - tt) + x
                else:
                    comp[arm] += (x - tt) + s
                sums[arm] = tt
            else:
                hsize[arm] = _heap_push(heap[arm], hsize[arm], x)
        if record:
            arms_out[t - 1] = arm
        cum += gaps[arm]
        while cp < ncp and checkpoints[cp] == t:
            out[cp] = cum
            cp += 1
    return counts
