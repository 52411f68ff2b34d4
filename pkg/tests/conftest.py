import itertools
import math

import numpy as np


def brute_longest(n, edges, max_len=None):
    """Supremum of walk weights by explicit enumeration of simple paths, with
    ``inf`` whenever a walk can visit a cycle carrying a positive edge."""
    adj = {i: [] for i in range(n)}
    for i, j, w in edges:
        adj[i].append((j, w))
    reach = np.eye(n, dtype=bool)
    best = np.full((n, n), -math.inf)
    np.fill_diagonal(best, 0.0)

    def dfs(start, node, total, seen):
        for nxt, w in adj[node]:
            reach[start, nxt] = True
            if nxt in seen:
                continue
            best[start, nxt] = max(best[start, nxt], total + w)
            dfs(start, nxt, total + w, seen | {nxt})

    for s in range(n):
        dfs(s, s, 0.0, {s})
    # positive edge on a cycle: both endpoints reach each other
    pump = np.zeros(n, dtype=bool)
    for i, j, w in edges:
        if w > 0 and reach[j, i]:
            pump[i] = pump[j] = True
    for a, b in itertools.product(range(n), repeat=2):
        if reach[a, b] and any(reach[a, k] and reach[k, b] for k in np.nonzero(pump)[0]):
            best[a, b] = math.inf
    return reach, best


def random_edges(rng, n, p=0.35, null_prob=0.2, cyclic=False):
    out = []
    for i in range(n):
        for j in range(n):
            if i == j or (not cyclic and i > j):
                continue
            if rng.random() < p:
                w = 0.0 if rng.random() < null_prob else float(rng.uniform(0.1, 1.0))
                out.append((i, j, w))
    return out
