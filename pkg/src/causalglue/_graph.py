"""Dense graph primitives shared by the space, ladder and gluing modules.

All graphs are given as an ``n x n`` boolean edge matrix plus an optional
weight matrix of the same shape.  Self loops are allowed.
"""

from __future__ import annotations

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

NEG_INF = -np.inf


def transitive_closure(edges: np.ndarray, reflexive: bool = True) -> np.ndarray:
    """Reachability matrix by repeated squaring."""
    n = edges.shape[0]
    reach = np.asarray(edges, dtype=bool).copy()
    if reflexive:
        reach |= np.eye(n, dtype=bool)
    if n == 0:
        return reach
    # counts stay below 2**24, so float32 matmul is exact as a boolean test
    while True:
        r = reach.astype(np.float32)
        nxt = reach | ((r @ r) > 0)
        if np.array_equal(nxt, reach):
            return reach
        reach = nxt


def is_transitive(rel: np.ndarray) -> bool:
    r = rel.astype(np.float32)
    return not bool(((r @ r) > 0)[~rel].any())


def strong_components(edges: np.ndarray) -> tuple[int, np.ndarray]:
    n = edges.shape[0]
    if n == 0:
        return 0, np.zeros(0, dtype=int)
    ncomp, labels = connected_components(
        csr_matrix(np.asarray(edges, dtype=bool)), directed=True, connection="strong"
    )
    return ncomp, labels


def condensation_order(reach: np.ndarray, labels: np.ndarray, ncomp: int) -> np.ndarray:
    """Topological order of the condensation DAG.

    In a DAG every strict ancestor of ``v`` has strictly fewer ancestors than
    ``v``, so sorting components by ancestor count is a valid order.  Ties are
    broken by component label to keep the order deterministic.
    """
    creach = np.zeros((ncomp, ncomp), dtype=bool)
    ii, jj = np.nonzero(reach)
    creach[labels[ii], labels[jj]] = True
    ancestors = creach.sum(axis=0)
    return np.lexsort((np.arange(ncomp), ancestors))


class LongestWalks:
    """All-pairs supremum of walk weights on a graph with nonnegative weights.

    ``value[i, j]`` is ``-inf`` when ``j`` is unreachable from ``i``, ``inf``
    when some walk from ``i`` to ``j`` passes through a strongly connected
    component containing a positive edge, and otherwise the longest path
    weight on the condensation (zero-weight cycles are contracted).
    """

    def __init__(self, edges: np.ndarray, weights: np.ndarray):
        edges = np.asarray(edges, dtype=bool)
        weights = np.asarray(weights, dtype=float)
        if edges.shape != weights.shape or edges.ndim != 2 or edges.shape[0] != edges.shape[1]:
            raise ValueError("edges and weights must be matching square matrices")
        w = np.where(edges, weights, NEG_INF)
        if np.any(w[edges] < 0) or np.any(np.isnan(w[edges])):
            raise ValueError("negative or NaN edge weight")
        n = edges.shape[0]
        self.n = n
        self.reach = transitive_closure(edges, reflexive=True)
        ncomp, labels = strong_components(edges)
        self.ncomp = ncomp
        self.labels = labels

        same = labels[:, None] == labels[None, :]
        pumping_node = (edges & same & (w > 0)).any(axis=1)
        pump_comp = np.zeros(ncomp, dtype=bool)
        pump_comp[labels[pumping_node]] = True
        in_pump = pump_comp[labels]

        cw = np.full((ncomp, ncomp), NEG_INF)
        ii, jj = np.nonzero(edges & ~same)
        np.maximum.at(cw, (labels[ii], labels[jj]), w[ii, jj])
        self._cw = cw
        self.order = condensation_order(self.reach, labels, ncomp)

        lc = np.full((ncomp, ncomp), NEG_INF)
        np.fill_diagonal(lc, 0.0)
        with np.errstate(invalid="ignore"):
            for v in self.order:
                preds = np.nonzero(cw[:, v] > NEG_INF)[0]
                if preds.size == 0:
                    continue
                cand = lc[:, preds] + cw[preds, v][None, :]
                cand[np.isnan(cand)] = NEG_INF
                lc[:, v] = np.maximum(lc[:, v], cand.max(axis=1))
        value = lc[np.ix_(labels, labels)]
        if in_pump.any():
            r = self.reach.astype(np.float32)
            hits = (r[:, in_pump] @ r[in_pump, :]) > 0
            value[hits] = np.inf
        value[~self.reach] = NEG_INF
        self.value = value
        self.in_pump = in_pump

    def best_path(self) -> tuple[float, list[int]]:
        """Heaviest path overall (any start, any end) on an acyclic graph.

        Only meaningful when no node is pumping; returns ``(inf, [])`` otherwise.
        """
        if self.in_pump.any():
            return float("inf"), []
        if self.n == 0:
            return 0.0, []
        best = np.zeros(self.ncomp)
        parent = np.full(self.ncomp, -1)
        for v in self.order:
            preds = np.nonzero(self._cw[:, v] > NEG_INF)[0]
            if preds.size == 0:
                continue
            cand = best[preds] + self._cw[preds, v]
            k = int(np.argmax(cand))
            if cand[k] > best[v]:
                best[v] = cand[k]
                parent[v] = preds[k]
        end = int(np.argmax(best))
        comps = [end]
        while parent[comps[-1]] >= 0:
            comps.append(int(parent[comps[-1]]))
        comps.reverse()
        rep = {}
        for node, lab in enumerate(self.labels):
            rep.setdefault(int(lab), node)
        return float(best[end]), [rep[c] for c in comps]


def all_pairs_shortest(weights: np.ndarray) -> np.ndarray:
    """Floyd-Warshall on a dense matrix; ``inf`` marks a missing edge.

    Zero entries are genuine zero-weight edges (unlike scipy's dense input).
    """
    dist = np.array(weights, dtype=float, copy=True)
    n = dist.shape[0]
    np.fill_diagonal(dist, np.minimum(np.diag(dist), 0.0))
    for k in range(n):
        np.minimum(dist, dist[:, k : k + 1] + dist[k : k + 1, :], out=dist)
    return dist
