"""Dense transportation-problem solver (network simplex, u-v method).

Solves  min <W, D>  over W >= 0 with row sums s and column sums t, for
equal total masses.  Starts from a northwest-corner basis and pivots on
the most negative reduced cost until dual feasible.  Exact in the LP
sense: terminates at an optimal basic solution, no regularization.

Kept numba-jitted so the test oracles can afford tens of thousands of
solves; the first call in a fresh environment pays a one-off compile.
"""

import numpy as np
from numba import njit

#: return statuses of ``transport_simplex``
OPTIMAL = 0
PIVOT_LIMIT = 1
BROKEN_BASIS = 2


@njit(cache=True)
def transport_simplex(s, t, D, max_pivots):  # pragma: no cover - exercised via exact.lp_oracle
    n = s.shape[0]
    m = t.shape[0]
    flow = np.zeros((n, m))
    basic = np.zeros((n, m), dtype=np.bool_)
    a = s.copy()
    b = t.copy()

    # Northwest-corner initial basis: a staircase of exactly n+m-1 cells,
    # possibly with zero-flow (degenerate) members.
    i = 0
    j = 0
    for _ in range(n + m - 1):
        basic[i, j] = True
        q = a[i] if a[i] < b[j] else b[j]
        flow[i, j] = q
        a[i] -= q
        b[j] -= q
        if i == n - 1:
            j += 1
        elif j == m - 1:
            i += 1
        elif a[i] <= b[j]:
            i += 1
        else:
            j += 1

    u = np.empty(n)
    v = np.empty(m)
    labeled_u = np.zeros(n, dtype=np.bool_)
    labeled_v = np.zeros(m, dtype=np.bool_)
    # node ids: 0..n-1 are sources, n..n+m-1 are sinks
    queue = np.empty(n + m, dtype=np.int64)
    parent = np.empty(n + m, dtype=np.int64)
    path = np.empty(n + m, dtype=np.int64)

    pivots = 0
    while True:
        # dual potentials from the basis tree: u[i] + v[j] = D[i, j] on
        # basic cells, anchored at u[0] = 0, propagated by BFS
        for k in range(n):
            labeled_u[k] = False
        for k in range(m):
            labeled_v[k] = False
        u[0] = 0.0
        labeled_u[0] = True
        queue[0] = 0
        head = 0
        tail = 1
        while head < tail:
            node = queue[head]
            head += 1
            if node < n:
                ii = node
                for jj in range(m):
                    if basic[ii, jj] and not labeled_v[jj]:
                        v[jj] = D[ii, jj] - u[ii]
                        labeled_v[jj] = True
                        queue[tail] = n + jj
                        tail += 1
            else:
                jj = node - n
                for ii in range(n):
                    if basic[ii, jj] and not labeled_u[ii]:
                        u[ii] = D[ii, jj] - v[jj]
                        labeled_u[ii] = True
                        queue[tail] = ii
                        tail += 1
        if tail != n + m:
            return -1.0, flow, BROKEN_BASIS, pivots

        # entering arc: most negative reduced cost among nonbasic cells
        best = -1e-11
        ei = -1
        ej = -1
        for ii in range(n):
            for jj in range(m):
                if not basic[ii, jj]:
                    r = D[ii, jj] - u[ii] - v[jj]
                    if r < best:
                        best = r
                        ei = ii
                        ej = jj
        if ei < 0:
            cost = 0.0
            for ii in range(n):
                for jj in range(m):
                    if flow[ii, jj] != 0.0:
                        cost += flow[ii, jj] * D[ii, jj]
            return cost, flow, OPTIMAL, pivots

        pivots += 1
        if pivots > max_pivots:
            return -1.0, flow, PIVOT_LIMIT, pivots

        # unique tree path from source ei to sink ej; adding the entering
        # arc closes it into the pivot cycle
        for k in range(n + m):
            parent[k] = -2
        parent[ei] = -1
        queue[0] = ei
        head = 0
        tail = 1
        target = n + ej
        while head < tail:
            node = queue[head]
            head += 1
            if node == target:
                break
            if node < n:
                ii = node
                for jj in range(m):
                    if basic[ii, jj] and parent[n + jj] == -2:
                        parent[n + jj] = node
                        queue[tail] = n + jj
                        tail += 1
            else:
                jj = node - n
                for ii in range(n):
                    if basic[ii, jj] and parent[ii] == -2:
                        parent[ii] = node
                        queue[tail] = ii
                        tail += 1
        plen = 0
        node = target
        while node != -1:
            path[plen] = node
            plen += 1
            node = parent[node]

        # walk the path from ei towards the sink end; tree edges alternate
        # -theta, +theta, ... starting right after the (+theta) entering arc
        theta = np.inf
        li = -1
        lj = -1
        for k in range(plen - 1):
            na = path[plen - 1 - k]
            nb = path[plen - 2 - k]
            if na < n:
                ii = na
                jj = nb - n
            else:
                ii = nb
                jj = na - n
            if k % 2 == 0 and flow[ii, jj] < theta:
                theta = flow[ii, jj]
                li = ii
                lj = jj
        flow[ei, ej] += theta
        for k in range(plen - 1):
            na = path[plen - 1 - k]
            nb = path[plen - 2 - k]
            if na < n:
                ii = na
                jj = nb - n
            else:
                ii = nb
                jj = na - n
            if k % 2 == 0:
                flow[ii, jj] -= theta
            else:
                flow[ii, jj] += theta
        basic[ei, ej] = True
        basic[li, lj] = False
        flow[li, lj] = 0.0
