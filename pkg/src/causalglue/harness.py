"""Seeded random instances and suite runners for gluing preservation properties.

Trial ``i`` of a suite uses the seed ``base_seed ^ i``.  When an instance does
not satisfy a suite's hypotheses another one is drawn from the same trial
seed and the attempt number, up to a retry cap.  Every recorded
counterexample carries its generator parameters and the serialized instance,
so it can be replayed either way.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from ._graph import all_pairs_shortest, strong_components
from .amalgamation import (
    IdentificationMap,
    decomposition_check,
    glue,
    recover_subsets,
    relation_reformulation_check,
    simplified_tau_matrix,
    validate_identification,
)
from .io import instance_to_dict, space_to_dict
from .ladder import (
    antisymmetry_witness,
    check_distinguishing_reflective,
    check_strong_causality,
    extrinsic_nti_bound,
    isotone_violations,
    k_closure,
    levin_isotone,
    minimal_neighborhoods,
    shielded_successor_check,
    time_observing_check,
)
from .space import TOL, FiniteCausalSpace, subspace, tau_completion

BREAKERS = ("none", "scale_tau", "drop_ntli", "flagpole_like")


@dataclass(frozen=True)
class GenParams:
    n: int = 12
    edge_prob: float = 0.3
    weight_range: tuple[float, float] = (0.1, 1.0)
    a_size: int = 3
    seed: int = 0
    null_prob: float = 0.2
    n2: int | None = None
    hypothesis_breaker: str = "none"

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if not 0 <= self.edge_prob <= 1:
            raise ValueError("edge_prob must lie in [0, 1]")
        if not 0 <= self.a_size <= self.n:
            raise ValueError("a_size must lie in [0, n]")
        if self.n2 is not None and self.a_size > self.n2:
            raise ValueError("a_size exceeds the size of the second space")
        if self.hypothesis_breaker not in BREAKERS:
            raise ValueError(f"unknown hypothesis_breaker {self.hypothesis_breaker!r}")


# -- generators -------------------------------------------------------------


def _weight(rng, p: GenParams, allow_null: bool = True) -> float:
    if allow_null and rng.random() < p.null_prob:
        return 0.0
    return float(rng.uniform(*p.weight_range))


def _dag_edges(nodes, rng, p: GenParams, allow_null: bool = True):
    order = list(rng.permutation(np.asarray(nodes)))
    edges = []
    for a in range(len(order)):
        for b in range(a + 1, len(order)):
            if rng.random() < p.edge_prob:
                edges.append((int(order[a]), int(order[b]), _weight(rng, p, allow_null)))
    return edges


def random_metric(n: int, rng, fixed=(), extra_prob: float = 0.3) -> np.ndarray:
    """Shortest-path metric of a random connected weighted graph.

    ``fixed`` lists ``(i, j, w)`` edges that are always present.
    """
    W = np.full((n, n), np.inf)
    order = rng.permutation(n)
    for a, b in zip(order[:-1], order[1:]):
        W[a, b] = W[b, a] = rng.uniform(0.1, 1.0)
    extra = np.triu(rng.random((n, n)) < extra_prob, 1)
    w = rng.uniform(0.1, 1.0, size=(n, n))
    W = np.where(extra, np.minimum(W, w), W)
    W = np.minimum(W, W.T)
    for i, j, v in fixed:
        W[i, j] = W[j, i] = min(W[i, j], v)
    return all_pairs_shortest(W)


def random_space(params: GenParams) -> FiniteCausalSpace:
    """Random DAG with random edge weights, completed to a time separation,
    and an independent random metric."""
    rng = np.random.default_rng(params.seed)
    return _random_space(params, rng)


def _random_space(params: GenParams, rng) -> FiniteCausalSpace:
    edges = _dag_edges(range(params.n), rng, params)
    comp = tau_completion(params.n, edges)
    return comp.with_metric(random_metric(params.n, rng))


def random_space_with_cycle(params: GenParams) -> tuple[FiniteCausalSpace, tuple[int, int] | None]:
    """Like :func:`random_space` plus one zero-weight back edge closing a causal
    cycle; returns the space and the closing pair (``None`` if the DAG had no
    causal pair to close)."""
    rng = np.random.default_rng(params.seed)
    edges = _dag_edges(range(params.n), rng, params)
    comp = tau_completion(params.n, edges)
    pairs = np.argwhere(comp.leq & ~np.eye(params.n, dtype=bool))
    closing = None
    if pairs.size:
        u, v = pairs[rng.integers(len(pairs))]
        closing = (int(u), int(v))
        comp = tau_completion(params.n, edges + [(int(v), int(u), 0.0)])
    return comp.with_metric(random_metric(params.n, rng)), closing


def _repair_ntli(s: FiniteCausalSpace, A: set[int]) -> set[int]:
    """Grow ``A`` until every member with a nonempty timelike cone has a
    timelike neighbor inside ``A`` (nearest one in ``d`` is added)."""
    A = set(A)
    changed = True
    while changed:
        changed = False
        for a in sorted(A):
            for rel in (s.ll[a], s.ll[:, a]):
                if rel.any() and not any(rel[b] for b in A):
                    cand = np.nonzero(rel)[0]
                    A.add(int(cand[np.argmin(s.d[a, cand])]))
                    changed = True
    return A


def _second_space(s1, A, rng, p: GenParams, n2: int, twin: int | None = None):
    """Copy of the structure of ``s1`` on ``A`` plus fresh points.

    Fresh points are split into an upper block (reached from copies whose
    timelike future is nonempty) and a lower block (reaching copies whose
    timelike past is nonempty).  Nothing leads back into the copies, so the
    copied time separation is unchanged.
    """
    A = sorted(A)
    k = len(A)
    n2 = max(n2, k + (twin is not None))
    perm = rng.permutation(n2)
    copy = {a: int(perm[m]) for m, a in enumerate(A)}
    rest = [int(v) for v in perm[k:]]
    if twin is not None:
        twin_node, rest = rest[0], rest[1:]
    n_up = int(rng.integers(0, len(rest) + 1))
    upper, lower = rest[:n_up], rest[n_up:]

    edges = [(copy[a], copy[b], float(s1.tau[a, b])) for a in A for b in A if a != b and s1.leq[a, b]]
    for a in A:
        if s1.ll[a].any():
            edges += [(copy[a], u, _weight(rng, p, False)) for u in upper if rng.random() < p.edge_prob]
        if s1.ll[:, a].any():
            edges += [(w, copy[a], _weight(rng, p, False)) for w in lower if rng.random() < p.edge_prob]
    edges += _dag_edges(upper, rng, p) if upper else []
    edges += _dag_edges(lower, rng, p) if lower else []
    edges += [(w, u, _weight(rng, p)) for w in lower for u in upper if rng.random() < p.edge_prob]
    if twin is not None:
        edges += [(twin_node, copy[a], float(s1.tau[twin, a])) for a in A if s1.leq[twin, a]]

    fixed = [(copy[a], copy[b], float(s1.d[a, b])) for a in A for b in A if a < b]
    d2 = random_metric(n2, rng, fixed)
    comp = tau_completion(n2, edges)
    s2 = comp.with_metric(d2)
    pairs = tuple((a, copy[a]) for a in A)
    L = 1.0
    if k > 1:
        ia = np.array(A)
        ib = np.array([copy[a] for a in A])
        d1a, d2a = s1.d[np.ix_(ia, ia)], d2[np.ix_(ib, ib)]
        off = ~np.eye(k, dtype=bool)
        L = float(max(1.0, (d1a[off] / d2a[off]).max(), (d2a[off] / d1a[off]).max()))
    return s2, IdentificationMap(pairs, L)


def random_gluing_instance(params: GenParams):
    """``(s1, s2, f)`` with ``f`` preserving tau, the causal relation and
    timelike-cone nonemptiness, unless a hypothesis breaker is requested."""
    rng = np.random.default_rng(params.seed)
    s1 = _random_space(params, rng)
    n = params.n
    n2 = params.n2 or n
    brk = params.hypothesis_breaker

    if brk == "flagpole_like":
        # a twin of x in the second space, with the whole timelike future of x glued
        has_fut = np.nonzero(s1.ll.any(axis=1))[0]
        if has_fut.size:
            x = int(has_fut[rng.integers(has_fut.size)])
            A = {int(v) for v in np.nonzero(s1.ll[x])[0]}
            others = [v for v in range(n) if v != x and v not in A]
            extra = rng.permutation(others)[: max(0, params.a_size - len(A))] if others else []
            A |= {int(v) for v in extra}
            return (s1, *_second_space(s1, A, rng, params, n2, twin=x))

    A = {int(v) for v in rng.choice(n, size=min(params.a_size, n), replace=False)} if params.a_size else set()
    if not A:
        A = {int(rng.integers(n))}
    if brk == "drop_ntli":
        has_fut = [a for a in sorted(A) if s1.ll[a].any()]
        if not has_fut:
            cand = np.nonzero(s1.ll.any(axis=1))[0]
            if cand.size:
                has_fut = [int(cand[0])]
                A.add(has_fut[0])
        if has_fut:
            A -= {int(v) for v in np.nonzero(s1.ll[has_fut[0]])[0]}
    else:
        A = _repair_ntli(s1, A)
    s2, f = _second_space(s1, A, rng, params, n2)
    if brk == "scale_tau":
        s2 = FiniteCausalSpace(d=s2.d, leq=s2.leq, ll=s2.ll, tau=2 * s2.tau)
    return s1, s2, f


# -- suites -----------------------------------------------------------------


@dataclass
class Outcome:
    status: str  # rejected | pass | fail
    witness: object = None
    stats: dict = field(default_factory=dict)


def _covered(s: FiniteCausalSpace) -> bool:
    return bool((s.ll.any(axis=0) | s.ll.any(axis=1)).all())


def _valid(s1, s2, f, breaker: str) -> bool:
    return breaker != "none" or validate_identification(s1, s2, f).ok


def _suite_chronology(s1, s2, f, breaker):
    if not _valid(s1, s2, f, breaker) or np.diag(s1.ll).any() or np.diag(s2.ll).any():
        return Outcome("rejected")
    g = glue(s1, s2, f, unsafe=True)
    bad = np.nonzero(np.diag(g.llq))[0]
    return Outcome("fail", [int(bad[0])]) if bad.size else Outcome("pass")


def _suite_causality(s1, s2, f, breaker):
    if not _valid(s1, s2, f, breaker) or antisymmetry_witness(s1.leq) or antisymmetry_witness(s2.leq):
        return Outcome("rejected")
    g = glue(s1, s2, f, unsafe=True)
    w = antisymmetry_witness(g.leqq)
    return Outcome("fail", list(w)) if w else Outcome("pass")


def _suite_enti(s1, s2, f, breaker):
    c1, c2 = extrinsic_nti_bound(s1), extrinsic_nti_bound(s2)
    if not _valid(s1, s2, f, breaker) or not (c1.finite and c2.finite):
        return Outcome("rejected")
    g = glue(s1, s2, f, unsafe=True)
    cg = extrinsic_nti_bound(g.as_space())
    limit = c1.bound + c2.bound
    stats = {"ratio": cg.bound / limit if limit > 0 else 0.0}
    if not cg.bound <= limit + TOL * max(1.0, limit):
        return Outcome("fail", {"bound": cg.bound, "C1": c1.bound, "C2": c2.bound, "sequence": list(cg.achieving_sequence)}, stats)
    return Outcome("pass", None, stats)


def _suite_strong_causality(s1, s2, f, breaker):
    if not _valid(s1, s2, f, breaker):
        return Outcome("rejected")
    r1 = check_strong_causality(s1, np.inf)
    r2 = check_strong_causality(s2, np.inf)
    if not (r1.passed and r2.passed):
        return Outcome("rejected")
    eps = max(r1.achieved_eps(), r2.achieved_eps())
    g = glue(s1, s2, f, unsafe=True)
    G = g.as_space()
    rg = check_strong_causality(G, eps)
    S = minimal_neighborhoods(G)
    stats = {"eps": eps, "achieved": rg.achieved_eps()}
    covered = G.ll.any(axis=0) | G.ll.any(axis=1)
    if not covered.all():
        return Outcome("fail", {"uncovered": [int(c) for c in np.nonzero(~covered)[0]]}, stats)
    n1 = s1.n
    in_space = [np.zeros(g.n, dtype=bool), np.zeros(g.n, dtype=bool)]
    for c, members in enumerate(g.classes):
        for u in members:
            in_space[0 if u < n1 else 1][c] = True
    for z in range(g.n):
        for k in (0, 1):
            if not in_space[k][z]:
                continue
            far = S[z] & in_space[k] & (g.dq[z] > eps + TOL)
            if far.any():
                return Outcome("fail", {"class": z, "space": k + 1, "far": [int(q) for q in np.nonzero(far)[0]]}, stats)
    return Outcome("pass", None, stats)


def _suite_distinguishing(s1, s2, f, breaker):
    d1, d2 = check_distinguishing_reflective(s1), check_distinguishing_reflective(s2)
    if not (d1.distinguishing and d2.distinguishing) or not _valid(s1, s2, f, breaker):
        return Outcome("rejected")
    if breaker == "none":
        ok = (
            check_strong_causality(s1, np.inf).passed
            and check_strong_causality(s2, np.inf).passed
            and shielded_successor_check(s1, f.a1).passed
            and shielded_successor_check(s2, f.a2).passed
        )
        if not ok:
            return Outcome("rejected")
    g = glue(s1, s2, f, unsafe=True)
    dg = check_distinguishing_reflective(g.as_space())
    if dg.distinguishing:
        return Outcome("pass")
    return Outcome("fail", {"future": [list(p) for p in dg.future_witnesses], "past": [list(p) for p in dg.past_witnesses]})


def _suite_global_hyperbolicity(s1, s2, f, breaker):
    c1, c2 = extrinsic_nti_bound(s1), extrinsic_nti_bound(s2)
    if not _valid(s1, s2, f, breaker) or not (c1.finite and c2.finite):
        return Outcome("rejected")
    if not (time_observing_check(s1, f.a1).passed and time_observing_check(s2, f.a2).passed):
        return Outcome("rejected")
    g = glue(s1, s2, f, unsafe=True)
    cg = extrinsic_nti_bound(g.as_space())
    w = antisymmetry_witness(g.leqq)
    if cg.finite and w is None:
        return Outcome("pass")
    return Outcome("fail", {"bound": cg.bound, "cycle": w})


def _suite_tau_simplified(s1, s2, f, breaker):
    if not _valid(s1, s2, f, breaker):
        return Outcome("rejected")
    g = glue(s1, s2, f, unsafe=True)
    S = simplified_tau_matrix(s1, s2, f)
    inf_bad = np.isinf(S) != np.isinf(g.tauq)
    fin = ~np.isinf(S) & ~np.isinf(g.tauq)
    delta = float(np.abs(S[fin] - g.tauq[fin]).max()) if fin.any() else 0.0
    stats = {"max_delta": delta}
    if inf_bad.any() or delta > 1e-9:
        bad = np.argwhere(inf_bad | (fin & (np.abs(np.where(fin, S - g.tauq, 0)) > 1e-9)))
        return Outcome("fail", [int(v) for v in bad[0]], stats)
    return Outcome("pass", None, stats)


def _suite_relation_reformulation(s1, s2, f, breaker):
    if not _valid(s1, s2, f, breaker):
        return Outcome("rejected")
    g = glue(s1, s2, f, unsafe=True)
    r = relation_reformulation_check(s1, s2, f, g)
    stats = {"strict_form_mismatches": len(r.strict_form_mismatches)}
    return Outcome("pass", None, stats) if r.passed else Outcome("fail", [list(m) for m in r.mismatches[:5]], stats)


def _suite_decomposition(s1, s2, f, breaker):
    if not _valid(s1, s2, f, breaker):
        return Outcome("rejected")
    g = glue(s1, s2, f, unsafe=True)
    strict = 0
    for c in range(g.n):
        for sign in ("future", "past"):
            for kind in ("timelike", "causal"):
                r = decomposition_check(s1, s2, f, g, c, sign, kind)
                strict += r.strict_rhs != r.lhs
                if not r.passed:
                    return Outcome("fail", {"class": c, "sign": sign, "kind": kind}, {"strict_form_mismatches": strict})
    return Outcome("pass", None, {"strict_form_mismatches": int(strict)})


def _suite_recover_subsets(s1, s2, f, breaker, rng=None):
    if not _valid(s1, s2, f, breaker):
        return Outcome("rejected")
    rng = rng or np.random.default_rng(0)
    y1 = {i for i in range(s1.n) if rng.random() < 0.5}
    fwd = dict(f.pairs)
    a2 = set(fwd.values())
    y2 = {fwd[a] for a in y1 if a in fwd} | {j for j in range(s2.n) if j not in a2 and rng.random() < 0.5}
    r = recover_subsets(s1, s2, f, y1, y2)
    if r.passed:
        return Outcome("pass")
    return Outcome("fail", {"y1": sorted(y1), "y2": sorted(y2)})


def _suite_monotonicity(s1, s2, f, breaker):
    if not _valid(s1, s2, f, breaker):
        return Outcome("rejected")
    g = glue(s1, s2, f, unsafe=True)
    for k, s in ((1, s1), (2, s2)):
        cl = np.array([g.class_of(k, i) for i in range(s.n)])
        ix = np.ix_(cl, cl)
        tq, dq = g.tauq[ix], g.dq[ix]
        with np.errstate(invalid="ignore"):
            bad = (
                (tq < s.tau - TOL)
                | (dq > s.d + TOL)
                | (s.leq & ~g.leqq[ix])
                | (s.ll & ~g.llq[ix])
            )
        if bad.any():
            i, j = np.argwhere(bad)[0]
            return Outcome("fail", {"space": k, "pair": [int(i), int(j)]})
    return Outcome("pass")


def _suite_reflectivity(s1, s2, f, breaker):
    if not _valid(s1, s2, f, breaker):
        return Outcome("rejected")
    if not (check_distinguishing_reflective(s1).reflective and check_distinguishing_reflective(s2).reflective):
        return Outcome("rejected")
    dg = check_distinguishing_reflective(glue(s1, s2, f, unsafe=True).as_space())
    return Outcome("pass") if dg.reflective else Outcome("fail", [list(p) for p in dg.reflective_witnesses[:5]])


def _suite_causal_simplicity(s1, s2, f, breaker):
    # closed cones are automatic on finite spaces, so this is causality again
    return _suite_causality(s1, s2, f, breaker)


def _levin_check(space: FiniteCausalSpace):
    T = levin_isotone(space)
    bad = isotone_violations(space, T)
    if bad:
        return Outcome("fail", [list(bad[0])])
    K = k_closure(space)
    _, labels = strong_components(K)
    same = labels[:, None] == labels[None, :]
    eq = T[:, None] == T[None, :]
    if not np.array_equal(same, eq):
        i, j = np.argwhere(same != eq)[0]
        return Outcome("fail", [int(i), int(j)])
    return Outcome("pass", None, {"cycle": bool((~np.eye(space.n, dtype=bool) & same).any())})


@dataclass(frozen=True)
class SuiteDef:
    check: Callable
    kind: str = "gluing"  # gluing | space
    n_max: int = 20
    edge_prob: tuple[float, float] = (0.15, 0.5)
    null_prob: float = 0.2
    a_max: int = 6
    retry_cap: int = 50
    experimental: bool = False


SUITES: dict[str, SuiteDef] = {
    "chronology": SuiteDef(_suite_chronology),
    "causality": SuiteDef(_suite_causality),
    "enti": SuiteDef(_suite_enti),
    "strong_causality": SuiteDef(_suite_strong_causality),
    # all four hypotheses hold together rarely under the default draw;
    # small dense instances with one or two glued points pass most often
    "distinguishing": SuiteDef(
        _suite_distinguishing, n_max=9, edge_prob=(0.5, 0.95), null_prob=0.0, a_max=2, retry_cap=400
    ),
    "global_hyperbolicity": SuiteDef(_suite_global_hyperbolicity),
    "tau_simplified_equiv": SuiteDef(_suite_tau_simplified, n_max=30),
    "relation_reformulation": SuiteDef(_suite_relation_reformulation),
    "decomposition": SuiteDef(_suite_decomposition),
    "recover_subsets": SuiteDef(_suite_recover_subsets),
    "monotonicity": SuiteDef(_suite_monotonicity),
    "levin_constraints": SuiteDef(_levin_check, kind="space"),
    "reflectivity": SuiteDef(_suite_reflectivity, experimental=True),
    "causal_simplicity": SuiteDef(_suite_causal_simplicity, experimental=True),
}


def suite_names(experimental: bool = False) -> list[str]:
    return [k for k, v in SUITES.items() if experimental or not v.experimental]


def draw_params(suite: str, trial_seed: int, attempt: int, breaker: str = "none") -> GenParams:
    """Generator parameters for one attempt of one trial."""
    sd = SUITES[suite]
    rng = np.random.default_rng([trial_seed & (2**64 - 1), attempt])
    n = int(rng.integers(3, sd.n_max + 1))
    n2 = int(rng.integers(3, sd.n_max + 1))
    a_size = int(rng.integers(1, min(n, n2, sd.a_max) + 1))
    return GenParams(
        n=n,
        n2=n2,
        edge_prob=float(rng.uniform(*sd.edge_prob)),
        null_prob=sd.null_prob,
        a_size=a_size,
        seed=int(rng.integers(2**63)),
        hypothesis_breaker=breaker,
    )


def check_instance(suite: str, s1, s2, f, breaker: str = "none", seed: int = 0) -> Outcome:
    """Run one suite's hypothesis filter and conclusion on a given instance."""
    sd = SUITES[suite]
    if suite == "recover_subsets":
        return sd.check(s1, s2, f, breaker, np.random.default_rng(seed))
    return sd.check(s1, s2, f, breaker)


def _run_attempt(suite: str, params: GenParams) -> tuple[Outcome, tuple]:
    sd = SUITES[suite]
    if sd.kind == "space":
        if params.seed % 2:
            space, _ = random_space_with_cycle(params)
        else:
            space = random_space(params)
        return sd.check(space), (space,)
    s1, s2, f = random_gluing_instance(params)
    return check_instance(suite, s1, s2, f, params.hypothesis_breaker, params.seed), (s1, s2, f)


@dataclass
class SuiteReport:
    suite: str
    trials: int
    base_seed: int
    breaker: str
    accepted: int = 0
    attempts: int = 0
    counterexamples: list = field(default_factory=list)
    elapsed: float = 0.0
    stats: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.counterexamples

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.attempts if self.attempts else 0.0

    def to_dict(self, timing: bool = True) -> dict:
        out = {
            "suite": self.suite,
            "trials": self.trials,
            "base_seed": self.base_seed,
            "hypothesis_breaker": self.breaker,
            "accepted": self.accepted,
            "attempts": self.attempts,
            "acceptance_rate": self.acceptance_rate,
            "counterexamples": self.counterexamples,
            "stats": self.stats,
            "generator": "random DAG with uniform weights (some zero) and random graph metric",
        }
        if timing:
            out["elapsed"] = self.elapsed
        return out


def _trial(suite: str, base_seed: int, i: int, breaker: str, retry_cap: int):
    seed = base_seed ^ i
    for attempt in range(retry_cap):
        params = draw_params(suite, seed, attempt, breaker)
        out, inst = _run_attempt(suite, params)
        if out.status != "rejected":
            return i, seed, attempt + 1, params, out, inst
    return i, seed, retry_cap, None, Outcome("rejected"), None


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("CAUSAL_GLUE_THREADS", "1")))
    except ValueError:
        return 1


def run_suite(
    suite_name: str,
    trials: int,
    base_seed: int = 0,
    hypothesis_breaker: str = "none",
    retry_cap: int | None = None,
    shrink: bool = True,
    max_records: int = 20,
) -> SuiteReport:
    if suite_name not in SUITES:
        raise KeyError(f"unknown suite {suite_name!r}; known: {', '.join(SUITES)}")
    if retry_cap is None:
        retry_cap = SUITES[suite_name].retry_cap
    t0 = time.perf_counter()
    rep = SuiteReport(suite_name, trials, base_seed, hypothesis_breaker)
    job = lambda i: _trial(suite_name, base_seed, i, hypothesis_breaker, retry_cap)  # noqa: E731
    threads = _threads()
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            results = list(ex.map(job, range(trials)))
    else:
        results = [job(i) for i in range(trials)]

    collected: dict[str, list] = {}
    for i, seed, used, params, out, inst in results:
        rep.attempts += used
        if out.status == "rejected":
            continue
        rep.accepted += 1
        for k, v in out.stats.items():
            collected.setdefault(k, []).append(v)
        if out.status == "fail":
            if len(rep.counterexamples) >= max_records:
                rep.counterexamples.append({"trial": i, "seed": seed})
                continue
            rec = {
                "trial": i,
                "seed": seed,
                "attempt": used - 1,
                "params": _params_dict(params),
                "witness": _plain(out.witness),
                "instance": _serialize(inst),
            }
            if shrink and SUITES[suite_name].kind == "gluing":
                small = shrink_instance(suite_name, *inst, hypothesis_breaker, params.seed)
                rec["shrunk"] = instance_to_dict(*small)
            rep.counterexamples.append(rec)
    rep.stats = _summarize(collected)
    rep.elapsed = time.perf_counter() - t0
    return rep


def _params_dict(p: GenParams) -> dict:
    d = asdict(p)
    d["weight_range"] = list(p.weight_range)
    return d


def params_from_dict(d: dict) -> GenParams:
    d = dict(d)
    d["weight_range"] = tuple(d["weight_range"])
    return GenParams(**d)


def _serialize(inst) -> dict:
    if len(inst) == 1:
        return {"space": space_to_dict(inst[0])}
    return instance_to_dict(*inst)


def _plain(v):
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if np.isfinite(v) else ("inf" if v > 0 else "-inf")
    return v


def _summarize(collected: dict[str, list]) -> dict:
    out = {}
    for k, vals in sorted(collected.items()):
        arr = np.array(vals, dtype=float)
        out[k] = {"max": _plain(arr.max()), "mean": _plain(arr.mean()), "count_nonzero": int((arr != 0).sum())}
    return out


def replay(suite: str, record: dict) -> tuple[Outcome, bool]:
    """Regenerate a recorded counterexample from its parameters.

    Returns the outcome and whether the regenerated instance is identical to
    the serialized one.
    """
    params = params_from_dict(record["params"])
    out, inst = _run_attempt(suite, params)
    return out, _serialize(inst) == record["instance"]


def shrink_instance(suite: str, s1, s2, f, breaker: str = "none", seed: int = 0, budget: int = 200):
    """Greedy point removal that keeps the instance failing."""

    def fails(a, b, g):
        return check_instance(suite, a, b, g, breaker, seed).status == "fail"

    cur = (s1, s2, f)
    progress = True
    while progress and budget > 0:
        progress = False
        for which in (1, 2):
            n = cur[which - 1].n
            for v in range(n - 1, -1, -1):
                if budget <= 0:
                    break
                budget -= 1
                cand = _drop_point(*cur, which, v)
                if cand is not None and fails(*cand):
                    cur = cand
                    progress = True
                    break
    return cur


def _drop_point(s1, s2, f, which: int, v: int):
    pairs = list(f.pairs)
    if which == 1:
        partner = [b for a, b in pairs if a == v]
        drop1, drop2 = {v}, set(partner)
    else:
        partner = [a for a, b in pairs if b == v]
        drop1, drop2 = set(partner), {v}
    keep1 = [i for i in range(s1.n) if i not in drop1]
    keep2 = [j for j in range(s2.n) if j not in drop2]
    if not keep1 or not keep2:
        return None
    new1 = {old: k for k, old in enumerate(keep1)}
    new2 = {old: k for k, old in enumerate(keep2)}
    np_pairs = tuple((new1[a], new2[b]) for a, b in pairs if a in new1 and b in new2)
    if not np_pairs:
        return None
    t1 = _strip(subspace(s1, keep1))
    t2 = _strip(subspace(s2, keep2))
    return t1, t2, IdentificationMap(np_pairs, f.lipschitz_bound)


def _strip(s: FiniteCausalSpace) -> FiniteCausalSpace:
    return FiniteCausalSpace(d=s.d, leq=s.leq, ll=s.ll, tau=s.tau, coords=s.coords)

