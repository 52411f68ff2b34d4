"""Causality conditions on finite spaces.

Topological conditions are read at an explicit metric scale ``eps``: a
"neighborhood" of ``p`` is the closed ball of radius ``eps`` around it.  With
``eps = 0`` the literal discrete-topology reading is recovered.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from ._graph import LongestWalks, condensation_order, strong_components, transitive_closure
from .space import TOL, FiniteCausalSpace

RUNGS = (
    "chronological",
    "causal",
    "non_totally_imprisoning",
    "strongly_causal",
    "K_causal",
    "causally_continuous",
    "causally_simple",
    "globally_hyperbolic",
)


@dataclass(frozen=True)
class CheckParams:
    eps: float = 0.0
    max_witnesses: int = 20

    def __post_init__(self):
        if not self.eps >= 0:
            raise ValueError("eps must be nonnegative")


@dataclass(frozen=True)
class Rung:
    name: str
    status: str  # pass | fail | trivialized
    witness: tuple[int, ...] | None = None
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "rung": self.name,
            "status": self.status,
            "witness": None if self.witness is None else list(self.witness),
            "note": self.note,
        }


@dataclass(frozen=True)
class LadderReport:
    rungs: tuple[Rung, ...]

    def __getitem__(self, name: str) -> Rung:
        for r in self.rungs:
            if r.name == name:
                return r
        raise KeyError(name)

    def passed(self, name: str) -> bool:
        r = self[name]
        return r.status == "pass" or (r.status == "trivialized" and r.witness is None)

    @property
    def ok(self) -> bool:
        return all(self.passed(r.name) for r in self.rungs)

    def to_dict(self) -> dict:
        return {"ok": self.ok, "rungs": [r.to_dict() for r in self.rungs]}


def _mat(a: np.ndarray) -> np.ndarray:
    return a.astype(np.float32)


def _not_subset(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``out[i, j]`` is true when row ``a[i]`` is not contained in row ``b[j]``."""
    return (_mat(a) @ _mat(~b).T) > 0


def _subset_mask(space: FiniteCausalSpace, subset) -> np.ndarray:
    mask = np.zeros(space.n, dtype=bool)
    if subset is None:
        mask[:] = True
    else:
        idx = np.fromiter((int(i) for i in subset), dtype=int)
        if idx.size and (idx.min() < 0 or idx.max() >= space.n):
            raise IndexError("subset index out of range")
        mask[idx] = True
    return mask


# -- non-total imprisonment -------------------------------------------------


@dataclass(frozen=True)
class NtiReport:
    bound: float
    achieving_sequence: tuple[int, ...]

    @property
    def finite(self) -> bool:
        return bool(np.isfinite(self.bound))


def extrinsic_nti_bound(space: FiniteCausalSpace, subset: Iterable[int] | None = None) -> NtiReport:
    """Supremum of summed ``d``-steps over causal sequences inside ``subset``."""
    idx = np.nonzero(_subset_mask(space, subset))[0]
    if idx.size == 0:
        return NtiReport(0.0, ())
    ix = np.ix_(idx, idx)
    edges = space.leq[ix] & ~np.eye(idx.size, dtype=bool)
    walks = LongestWalks(edges, np.where(edges, space.d[ix], 0.0))
    bound, path = walks.best_path()
    return NtiReport(bound, tuple(int(idx[k]) for k in path))


# -- strong causality -------------------------------------------------------


@dataclass(frozen=True)
class StrongCausalityReport:
    passed: bool
    eps: float
    failures: tuple[tuple[int, frozenset[int]], ...]
    radius: np.ndarray = field(repr=False)

    def achieved_eps(self) -> float:
        """Smallest scale at which every point passes (``inf`` if none)."""
        return float(self.radius.max()) if self.radius.size else 0.0


def minimal_neighborhoods(space: FiniteCausalSpace) -> np.ndarray:
    """``S[p, q]``: ``q`` lies in every timelike cone that contains ``p``.

    This is the intersection of ``I+(x)`` over ``x << p`` with ``I-(y)`` over
    ``p << y``; when both families are nonempty it is the intersection of all
    timelike diamonds containing ``p``.
    """
    ll = space.ll
    in_futures = ~((_mat(ll).T @ _mat(~ll)) > 0)
    in_pasts = ~((_mat(ll) @ _mat(~ll).T) > 0)
    return in_futures & in_pasts


def check_strong_causality(space: FiniteCausalSpace, eps: float, max_witnesses: int = 20) -> StrongCausalityReport:
    """Each point must lie in some timelike cone and its minimal neighborhood
    must fit inside the ``eps``-ball."""
    S = minimal_neighborhoods(space)
    covered = space.ll.any(axis=0) | space.ll.any(axis=1)
    with np.errstate(invalid="ignore"):
        reach = np.where(S, space.d, 0.0).max(axis=1) if space.n else np.zeros(0)
    radius = np.where(covered, reach, np.inf)
    bad = np.nonzero(~covered | (radius > eps + TOL))[0]
    failures = tuple(
        (int(p), frozenset(int(q) for q in np.nonzero(S[p] & (space.d > eps + TOL))[0]))
        for p in bad[:max_witnesses]
    )
    return StrongCausalityReport(bad.size == 0, float(eps), failures, radius)


# -- distinction and reflectivity -------------------------------------------


@dataclass(frozen=True)
class DistinctionReport:
    future_distinguishing: bool
    past_distinguishing: bool
    reflective: bool
    future_witnesses: tuple[tuple[int, int], ...] = ()
    past_witnesses: tuple[tuple[int, int], ...] = ()
    reflective_witnesses: tuple[tuple[int, int], ...] = ()

    @property
    def distinguishing(self) -> bool:
        return self.future_distinguishing and self.past_distinguishing


def _equal_rows(rows: np.ndarray, limit: int) -> list[tuple[int, int]]:
    """Pairs of distinct indices with identical nonempty rows."""
    nonempty = rows.any(axis=1)
    idx = np.nonzero(nonempty)[0]
    if idx.size < 2:
        return []
    _, inv = np.unique(rows[idx], axis=0, return_inverse=True)
    inv = inv.ravel()
    out = []
    for g in np.unique(inv):
        members = idx[inv == g]
        for k in range(1, members.size):
            out.append((int(members[0]), int(members[k])))
            if len(out) >= limit:
                return out
    return out


def check_distinguishing_reflective(space: FiniteCausalSpace, max_witnesses: int = 20) -> DistinctionReport:
    """Distinction per sign and reflectivity.

    Two points fail future distinction when they are distinct and share the
    same nonempty timelike future; pasts likewise.  Points whose relevant cone
    is empty are not compared, since every finite space has several maximal
    (and minimal) points.  Reflectivity implications whose hypothesis cone is
    empty are skipped for the same reason.
    """
    ll = space.ll
    fut_w = _equal_rows(ll, max_witnesses)
    past_w = _equal_rows(ll.T, max_witnesses)

    fut_sub = ~_not_subset(ll, ll)  # I+(x) ⊆ I+(y)
    past_sub = ~_not_subset(ll.T, ll.T)  # I-(x) ⊆ I-(y)
    has_fut = ll.any(axis=1)
    has_past = ll.any(axis=0)
    bad = (fut_sub & has_fut[:, None] & ~past_sub.T) | (past_sub & has_past[:, None] & ~fut_sub.T)
    refl_w = [(int(a), int(b)) for a, b in np.argwhere(bad)[:max_witnesses]]
    return DistinctionReport(
        future_distinguishing=not fut_w,
        past_distinguishing=not past_w,
        reflective=not refl_w,
        future_witnesses=tuple(fut_w),
        past_witnesses=tuple(past_w),
        reflective_witnesses=tuple(refl_w),
    )


# -- K-causality and isotone functions --------------------------------------


def k_closure(space: FiniteCausalSpace) -> np.ndarray:
    """Smallest transitive relation containing ``leq``.

    Closedness is automatic for relations on a finite metric space, so only
    the transitive hull is taken.
    """
    return transitive_closure(space.leq, reflexive=True)


def antisymmetry_witness(rel: np.ndarray) -> tuple[int, int] | None:
    both = rel & rel.T & ~np.eye(rel.shape[0], dtype=bool)
    hit = np.argwhere(both)
    return (int(hit[0, 0]), int(hit[0, 1])) if hit.size else None


def levin_isotone(space: FiniteCausalSpace) -> np.ndarray:
    """A function constant on K-cycles and strictly increasing along K.

    Values are the topological ranks of the strongly connected components of
    the K-relation.
    """
    K = k_closure(space)
    ncomp, labels = strong_components(K)
    order = condensation_order(K, labels, ncomp)
    rank = np.empty(ncomp)
    rank[order] = np.arange(ncomp, dtype=float)
    return rank[labels]


def isotone_violations(space: FiniteCausalSpace, T: np.ndarray) -> list[tuple[int, int]]:
    """Pairs breaking ``x K y => T(x) <= T(y)`` with equality exactly on cycles."""
    K = k_closure(space)
    T = np.asarray(T, dtype=float)
    le = T[:, None] <= T[None, :]
    eq = T[:, None] == T[None, :]
    bad = K & (~le | (eq != K.T))
    return [(int(a), int(b)) for a, b in np.argwhere(bad)]


# -- subset conditions ------------------------------------------------------


@dataclass(frozen=True)
class SubsetReport:
    passed: bool
    failures: tuple = ()
    sufficient: bool | None = None


def ntli_check(space: FiniteCausalSpace, subset: Iterable[int], eps: float) -> SubsetReport:
    """Every subset point with a nonempty timelike future (past) has a
    timelike successor (predecessor) inside the subset within ``eps``."""
    A = _subset_mask(space, subset)
    near = (space.d <= eps + TOL) & A[None, :]
    failures = []
    for a in np.nonzero(A)[0]:
        if space.ll[a].any() and not (space.ll[a] & near[a]).any():
            failures.append((int(a), "future"))
        if space.ll[:, a].any() and not (space.ll[:, a] & near[a]).any():
            failures.append((int(a), "past"))
    return SubsetReport(not failures, tuple(failures))


def time_observing_check(space: FiniteCausalSpace, subset: Iterable[int]) -> SubsetReport:
    """Future and past observation of ``subset``.

    Future: every ``x`` has ``a`` in the subset with ``J+(x) ∩ A ⊆ J+(a) ∩ A``;
    past dually.  ``sufficient`` records whether every point lies causally
    between two subset points.
    """
    A = _subset_mask(space, subset)
    ia = np.nonzero(A)[0]
    leq = space.leq
    if ia.size == 0:
        return SubsetReport(False, tuple((int(x), "future") for x in range(space.n)), False)
    fut_rows = leq[:, ia]  # J+(x) ∩ A
    fut_ok = (~_not_subset(fut_rows, leq[np.ix_(ia, ia)])).any(axis=1)
    past_rows = leq[ia, :].T  # J-(x) ∩ A
    past_ok = (~_not_subset(past_rows, leq[np.ix_(ia, ia)].T)).any(axis=1)
    failures = [(int(x), "future") for x in np.nonzero(~fut_ok)[0]]
    failures += [(int(x), "past") for x in np.nonzero(~past_ok)[0]]
    sufficient = bool((leq[ia, :].any(axis=0) & leq[:, ia].any(axis=1)).all())
    return SubsetReport(not failures, tuple(sorted(failures)), sufficient)


# -- the ladder -------------------------------------------------------------


def ladder_report(space: FiniteCausalSpace, params: CheckParams = CheckParams()) -> LadderReport:
    rungs = []

    diag = np.nonzero(np.diag(space.ll))[0]
    chrono = diag.size == 0
    rungs.append(Rung("chronological", "pass" if chrono else "fail", None if chrono else (int(diag[0]),)))

    w = antisymmetry_witness(space.leq)
    causal = w is None
    rungs.append(Rung("causal", "pass" if causal else "fail", w))

    nti = extrinsic_nti_bound(space)
    if nti.finite:
        rungs.append(Rung("non_totally_imprisoning", "pass", None, f"C = {nti.bound:.12g}"))
    else:
        rungs.append(Rung("non_totally_imprisoning", "fail", w or (), "causal cycle of positive length"))

    sc = check_strong_causality(space, params.eps, params.max_witnesses)
    rungs.append(
        Rung(
            "strongly_causal",
            "pass" if sc.passed else "fail",
            None if sc.passed else tuple(p for p, _ in sc.failures),
            f"eps = {params.eps:.12g}",
        )
    )

    kw = antisymmetry_witness(k_closure(space))
    rungs.append(Rung("K_causal", "pass" if kw is None else "fail", kw, "closure step is automatic on finite spaces"))

    dr = check_distinguishing_reflective(space, params.max_witnesses)
    cc = dr.distinguishing and dr.reflective
    wit = None
    note = ""
    if not cc:
        pairs = dr.future_witnesses or dr.past_witnesses or dr.reflective_witnesses
        wit = pairs[0]
        note = "not distinguishing" if not dr.distinguishing else "not reflective"
    rungs.append(Rung("causally_continuous", "pass" if cc else "fail", wit, note))

    rungs.append(
        Rung(
            "causally_simple",
            "trivialized",
            None if causal else w,
            "causal cones are closed on a finite space; value of the causal rung",
        )
    )
    rungs.append(
        Rung(
            "globally_hyperbolic",
            "trivialized",
            None if nti.finite else (w or ()),
            "causal diamonds are compact on a finite space; value of non-total imprisonment",
        )
    )
    return LadderReport(tuple(rungs))


def shielded_successor_check(space: FiniteCausalSpace, subset: Iterable[int]) -> SubsetReport:
    """Points off ``subset`` have timelike neighbors that the subset does not see.

    For ``x`` outside the subset with ``I+(x)`` nonempty there must be
    ``q >> x`` such that no subset point ``a`` has ``a << q`` or
    ``x << a <= q``; dually for pasts.  This is the finite stand-in for a
    small timelike diamond around ``x`` that misses the subset.
    """
    A = _subset_mask(space, subset)
    ll, leq = space.ll, space.leq
    seen_fut = ll[A].any(axis=0)  # some a << q
    via_fut = _not_subset(ll[:, A], ~leq[A].T)  # x << a <= q for some a
    seen_past = ll[:, A].any(axis=1)  # some q << a
    via_past = _not_subset(leq[:, A], ~ll[A].T)  # q <= a << x, indexed [q, x]
    failures = []
    for x in np.nonzero(~A)[0]:
        fut = ll[x]
        if fut.any() and not (fut & ~seen_fut & ~via_fut[x]).any():
            failures.append((int(x), "future"))
        past = ll[:, x]
        if past.any() and not (past & ~seen_past & ~via_past[:, x]).any():
            failures.append((int(x), "past"))
    return SubsetReport(not failures, tuple(failures))
