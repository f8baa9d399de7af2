"""Float-capacity max-flow kernel for bipartite mass-transport cuts.

Used by the point-measure metric: for atomic measures mu (left atoms,
common mass w_left) and nu (right atoms, common mass w_right) linked by
an adjacency relation, the quantity of interest is

    max over S subseteq left of  w_left*|S| - w_right*|N(S)|,

the worst mass deficiency of any atom subset against its adjacency
neighborhood.  By max-flow/min-cut duality on the network

    source -> left atom (capacity w_left)
    left -> right for adjacent pairs (effectively infinite capacity)
    right atom -> sink (capacity w_right)

a minimum cut keeps a set S of left atoms on the source side and must
then pay for every right atom adjacent to S, so

    min cut = w_left*(n_left - |S*|) + w_right*|N(S*)|

with S* maximizing the deficiency.  After running Dinic's algorithm,
the source-reachable set of the residual graph is exactly (S*, N(S*)),
and the deficiency is recomputed from the two set sizes alone, which
keeps the result exact in floating point.

Residual capacities below a small tolerance are snapped to zero to stop
float dust from generating spurious augmenting paths.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]):
            return args[0]

        def deco(f):
            return f

        return deco

__all__ = ["max_deficiency", "HAVE_NUMBA"]


@njit(cache=True)
def _dinic(adj_start, adj_edges, eto, ecap, source, sink, tol):
    """Dinic blocking-flow max-flow; mutates ecap into residuals."""
    n_nodes = adj_start.size - 1
    level = np.empty(n_nodes, np.int64)
    itpos = np.empty(n_nodes, np.int64)
    queue = np.empty(n_nodes, np.int64)
    estack = np.empty(n_nodes + 1, np.int64)
    nstack = np.empty(n_nodes + 1, np.int64)
    total = 0.0

    while True:
        for i in range(n_nodes):
            level[i] = -1
        level[source] = 0
        qh, qt = 0, 0
        queue[qt] = source
        qt += 1
        while qh < qt:
            v = queue[qh]
            qh += 1
            for pos in range(adj_start[v], adj_start[v + 1]):
                e = adj_edges[pos]
                w = eto[e]
                if ecap[e] > tol and level[w] < 0:
                    level[w] = level[v] + 1
                    queue[qt] = w
                    qt += 1
        if level[sink] < 0:
            return total

        for i in range(n_nodes):
            itpos[i] = adj_start[i]

        while True:
            v = source
            depth = 0
            nstack[0] = source
            found = False
            while True:
                if v == sink:
                    found = True
                    break
                moved = False
                pos = itpos[v]
                while pos < adj_start[v + 1]:
                    e = adj_edges[pos]
                    w = eto[e]
                    if ecap[e] > tol and level[w] == level[v] + 1:
                        moved = True
                        break
                    pos += 1
                itpos[v] = pos
                if moved:
                    e = adj_edges[pos]
                    estack[depth] = e
                    depth += 1
                    v = eto[e]
                    nstack[depth] = v
                else:
                    level[v] = -1
                    if depth == 0:
                        break
                    depth -= 1
                    v = nstack[depth]
                    itpos[v] += 1
            if not found:
                break
            b = np.inf
            for d in range(depth):
                e = estack[d]
                if ecap[e] < b:
                    b = ecap[e]
            for d in range(depth):
                e = estack[d]
                ecap[e] -= b
                if ecap[e] < tol:
                    ecap[e] = 0.0
                ecap[e ^ 1] += b
            total += b


@njit(cache=True)
def _residual_reachable(adj_start, adj_edges, eto, ecap, source, tol):
    n_nodes = adj_start.size - 1
    reached = np.zeros(n_nodes, np.bool_)
    queue = np.empty(n_nodes, np.int64)
    qh, qt = 0, 0
    reached[source] = True
    queue[qt] = source
    qt += 1
    while qh < qt:
        v = queue[qh]
        qh += 1
        for pos in range(adj_start[v], adj_start[v + 1]):
            e = adj_edges[pos]
            w = eto[e]
            if ecap[e] > tol and not reached[w]:
                reached[w] = True
                queue[qt] = w
                qt += 1
    return reached


def max_deficiency(pairs_left: np.ndarray, pairs_right: np.ndarray,
                   n_left: int, n_right: int,
                   w_left: float, w_right: float) -> float:
    """max over S of w_left*|S| - w_right*|N(S)| for the given adjacency.

    ``pairs_left[i]`` is adjacent to ``pairs_right[i]`` (0-based within
    each side).  The value is recomputed from the optimal set sizes, so
    it is an exact float expression of the form i*w_left - j*w_right.
    """
    if n_left == 0:
        return 0.0
    if n_right == 0 or pairs_left.size == 0:
        return n_left * w_left

    n_nodes = n_left + n_right + 2
    source = 0
    sink = n_nodes - 1
    big = n_left * w_left + 1.0
    tol = 1e-11 * min(w_left, w_right)

    u = np.concatenate(
        (np.full(n_left, source, dtype=np.int64),
         pairs_left.astype(np.int64) + 1,
         np.arange(n_right, dtype=np.int64) + 1 + n_left)
    )
    v = np.concatenate(
        (np.arange(n_left, dtype=np.int64) + 1,
         pairs_right.astype(np.int64) + 1 + n_left,
         np.full(n_right, sink, dtype=np.int64))
    )
    cap = np.concatenate(
        (np.full(n_left, w_left),
         np.full(pairs_left.size, big),
         np.full(n_right, w_right))
    )

    n_edges = u.size
    src = np.empty(2 * n_edges, dtype=np.int64)
    dst = np.empty(2 * n_edges, dtype=np.int64)
    ecap = np.empty(2 * n_edges)
    src[0::2] = u
    src[1::2] = v
    dst[0::2] = v
    dst[1::2] = u
    ecap[0::2] = cap
    ecap[1::2] = 0.0

    order = np.argsort(src, kind="stable").astype(np.int64)
    adj_start = np.searchsorted(src[order], np.arange(n_nodes + 1)).astype(np.int64)

    _dinic(adj_start, order, dst, ecap, source, sink, tol)
    reached = _residual_reachable(adj_start, order, dst, ecap, source, tol)
    n_s = int(np.count_nonzero(reached[1:1 + n_left]))
    n_ns = int(np.count_nonzero(reached[1 + n_left:1 + n_left + n_right]))
    return n_s * w_left - n_ns * w_right
