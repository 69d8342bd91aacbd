"""Hot loops: power iteration and the Monte Carlo walker.

Each kernel has a numba-compiled loop version and a numpy/python fallback.
Both consume identical inputs and are written so that results agree to
rounding (power iteration) or exactly (the walker, which draws its random
numbers outside the kernel).
"""

from bisect import bisect_right

import numpy as np

from ._accel import njit, resolve_backend

# ---------------------------------------------------------------------------
# power iteration
# ---------------------------------------------------------------------------


@njit
def _power_iterate_jit(src, dst, prob, n, alpha, tol, max_iter, residuals):
    x = np.full(n, 1.0 / n)
    base = (1.0 - alpha) / n
    acc = np.empty(n)
    done = 0
    while done < max_iter:
        acc[:] = 0.0
        for e in range(src.shape[0]):
            acc[dst[e]] += prob[e] * x[src[e]]
        change = 0.0
        for i in range(n):
            y = alpha * acc[i] + base
            change += abs(y - x[i])
            x[i] = y
        residuals[done] = change
        done += 1
        if change <= tol:
            break
    return x, done


def _power_iterate_np(src, dst, prob, n, alpha, tol, max_iter, residuals):
    x = np.full(n, 1.0 / n)
    base = (1.0 - alpha) / n
    done = 0
    while done < max_iter:
        acc = np.bincount(dst, weights=prob * x[src], minlength=n)
        y = alpha * acc + base
        change = float(np.abs(y - x).sum())
        x = y
        residuals[done] = change
        done += 1
        if change <= tol:
            break
    return x, done


def power_iterate(src, dst, prob, n, alpha, tol, max_iter, backend=None):
    """Iterate ``x <- alpha * P x + (1 - alpha) / n`` from the uniform vector.

    ``P`` is given edge-wise: column ``src[e]`` row ``dst[e]`` holds
    ``prob[e]``. Returns ``(x, residuals)`` where ``residuals[k]`` is the L1
    change of iteration ``k``. ``x`` is not renormalised.
    """
    src = np.ascontiguousarray(src, dtype=np.int64)
    dst = np.ascontiguousarray(dst, dtype=np.int64)
    prob = np.ascontiguousarray(prob, dtype=np.float64)
    residuals = np.empty(max(int(max_iter), 0))
    fn = _power_iterate_jit if resolve_backend(backend) == "numba" else _power_iterate_np
    x, done = fn(src, dst, prob, int(n), float(alpha), float(tol), int(max_iter), residuals)
    return x, residuals[:done].copy()


# ---------------------------------------------------------------------------
# Monte Carlo walker
# ---------------------------------------------------------------------------


@njit
def _walk_jit(indptr, indices, cumw, n, alpha, u_move, u_pick, node, counts):
    for s in range(u_move.shape[0]):
        lo = indptr[node]
        hi = indptr[node + 1]
        if hi == lo or u_move[s] >= alpha:
            node = int(u_pick[s] * n)
            if node >= n:
                node = n - 1
        else:
            target = u_pick[s] * cumw[hi - 1]
            # first e in [lo, hi) with cumw[e] > target (bisect_right)
            a = lo
            b = hi
            while a < b:
                mid = (a + b) // 2
                if target < cumw[mid]:
                    b = mid
                else:
                    a = mid + 1
            if a >= hi:
                a = hi - 1
            node = indices[a]
        counts[node] += 1
    return node


def _walk_py(indptr, indices, cumw, n, alpha, u_move, u_pick, node, counts):
    indptr = indptr.tolist()
    indices = indices.tolist()
    cumw = cumw.tolist()
    local = [0] * n
    for m, p in zip(u_move.tolist(), u_pick.tolist()):
        lo = indptr[node]
        hi = indptr[node + 1]
        if hi == lo or m >= alpha:
            node = min(int(p * n), n - 1)
        else:
            a = bisect_right(cumw, p * cumw[hi - 1], lo, hi)
            node = indices[min(a, hi - 1)]
        local[node] += 1
    counts += np.asarray(local, dtype=counts.dtype)
    return node


def walk_counts(indptr, indices, cumw, n, alpha, steps, seed, backend=None, chunk=1 << 20):
    """Simulate ``steps`` moves of a teleporting walker and return visit counts.

    ``cumw`` holds per-node cumulative out-edge weights aligned with
    ``indices``. Random numbers come from ``numpy.random.default_rng(seed)``
    in fixed-size chunks so both backends see the same stream.
    """
    fn = _walk_jit if resolve_backend(backend) == "numba" else _walk_py
    indptr = np.ascontiguousarray(indptr, dtype=np.int64)
    indices = np.ascontiguousarray(indices, dtype=np.int64)
    cumw = np.ascontiguousarray(cumw, dtype=np.float64)
    rng = np.random.default_rng(seed)
    counts = np.zeros(n, dtype=np.int64)
    node = min(int(rng.random() * n), n - 1)
    remaining = int(steps)
    while remaining > 0:
        m = min(chunk, remaining)
        u = rng.random((2, m))
        node = fn(indptr, indices, cumw, int(n), float(alpha), u[0], u[1], node, counts)
        remaining -= m
    return counts
