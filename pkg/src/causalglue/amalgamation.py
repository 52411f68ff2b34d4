"""Disjoint unions and gluing of two finite spaces along identified subsets.

Nodes of the disjoint union are numbered ``0..n1-1`` for the first space and
``n1..n1+n2-1`` for the second.  Classes of the quotient are numbered in order
of their first node, so the numbering depends only on ``(n1, n2, f)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Literal

import numpy as np

from ._graph import LongestWalks, all_pairs_shortest
from .ladder import ntli_check
from .space import TOL, FiniteCausalSpace, ValidationReport, Violation

Sign = Literal["future", "past"]
Kind = Literal["timelike", "causal"]


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class IdentificationMap:
    pairs: tuple[tuple[int, int], ...]
    lipschitz_bound: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple((int(a), int(b)) for a, b in self.pairs))

    @property
    def a1(self) -> np.ndarray:
        return np.array([a for a, _ in self.pairs], dtype=int)

    @property
    def a2(self) -> np.ndarray:
        return np.array([b for _, b in self.pairs], dtype=int)

    @classmethod
    def identity(cls, n: int) -> IdentificationMap:
        return cls(tuple((i, i) for i in range(n)))


def disjoint_union(s1: FiniteCausalSpace, s2: FiniteCausalSpace) -> FiniteCausalSpace:
    n1, n2 = s1.n, s2.n

    def block(m1, m2, fill, dtype):
        out = np.full((n1 + n2, n1 + n2), fill, dtype=dtype)
        out[:n1, :n1] = m1
        out[n1:, n1:] = m2
        return out

    coords = None
    if s1.coords is not None and s2.coords is not None:
        coords = np.vstack([s1.coords, s2.coords])
    return FiniteCausalSpace(
        d=block(s1.d, s2.d, np.inf, float),
        leq=block(s1.leq, s2.leq, False, bool),
        ll=block(s1.ll, s2.ll, False, bool),
        tau=block(s1.tau, s2.tau, 0.0, float),
        coords=coords,
    )


def validate_identification(
    s1: FiniteCausalSpace,
    s2: FiniteCausalSpace,
    f: IdentificationMap,
    eps: float = np.inf,
    max_witnesses: int = 20,
) -> ValidationReport:
    """Bijection, bi-Lipschitz, tau and causal preservation, compatibility of
    timelike-cone nonemptiness, and ``eps``-scale timelike non-isolation of
    both marked subsets."""
    out: list[Violation] = []

    def add(axiom, wits, values=lambda w: ()):
        for w in wits[:max_witnesses]:
            out.append(Violation(axiom, tuple(int(v) for v in w), tuple(float(v) for v in values(w))))

    a1, a2 = f.a1, f.a2
    if a1.size == 0:
        return ValidationReport((Violation("empty-identification", ()),))
    if a1.min() < 0 or a1.max() >= s1.n or a2.min() < 0 or a2.max() >= s2.n:
        return ValidationReport((Violation("index-range", ()),))
    dup1 = [v for v in np.unique(a1) if (a1 == v).sum() > 1]
    dup2 = [v for v in np.unique(a2) if (a2 == v).sum() > 1]
    if dup1 or dup2:
        add("bijection", [(v,) for v in dup1] + [(v,) for v in dup2])
        return ValidationReport(tuple(out))

    ix1, ix2 = np.ix_(a1, a1), np.ix_(a2, a2)
    d1, d2 = s1.d[ix1], s2.d[ix2]
    L = f.lipschitz_bound
    with np.errstate(invalid="ignore"):
        lip = (d2 > L * d1 * (1 + TOL) + TOL) | (d1 > L * d2 * (1 + TOL) + TOL)
    lip &= ~(np.isinf(d1) & np.isinf(d2))
    add("bi-lipschitz", [tuple(a1[list(w)]) for w in np.argwhere(lip)], lambda w: (s1.d[w[0], w[1]],))

    t1, t2 = s1.tau[ix1], s2.tau[ix2]
    both_inf = np.isinf(t1) & np.isinf(t2)
    with np.errstate(invalid="ignore"):
        tbad = ~both_inf & ~(np.abs(t1 - t2) <= TOL)
    add(
        "tau-preservation",
        [(a1[i], a1[j]) for i, j in np.argwhere(tbad)],
        lambda w: (s1.tau[w[0], w[1]],),
    )
    lbad = s1.leq[ix1] != s2.leq[ix2]
    add("leq-preservation", [(a1[i], a1[j]) for i, j in np.argwhere(lbad)])

    for sign, ax in (("future", 1), ("past", 0)):
        e1 = s1.ll.any(axis=ax)[a1]
        e2 = s2.ll.any(axis=ax)[a2]
        add(f"timelike-nonemptiness-{sign}", [(a1[k], a2[k]) for k in np.nonzero(e1 != e2)[0]])

    for k, (s, a) in enumerate(((s1, a1), (s2, a2)), start=1):
        rep = ntli_check(s, a, eps)
        add(f"ntli-space{k}", [(p,) for p, _ in rep.failures])
    return ValidationReport(tuple(out))


# -- the quotient -----------------------------------------------------------


def quotient_classes(n1: int, n2: int, f: IdentificationMap) -> tuple[list[tuple[int, ...]], np.ndarray]:
    """Classes as tuples of union-node indices, and the node-to-class map."""
    partner = {}
    for a, b in f.pairs:
        partner[a] = n1 + b
        partner[n1 + b] = a
    cls = np.full(n1 + n2, -1, dtype=int)
    classes = []
    for u in range(n1 + n2):
        if cls[u] >= 0:
            continue
        members = (u,) if u not in partner else tuple(sorted((u, partner[u])))
        for m in members:
            cls[m] = len(classes)
        classes.append(members)
    return classes, cls


def _identification_matrix(n1: int, n2: int, f: IdentificationMap) -> np.ndarray:
    m = np.zeros((n1 + n2, n1 + n2), dtype=bool)
    for a, b in f.pairs:
        m[a, n1 + b] = m[n1 + b, a] = True
    return m


@dataclass(frozen=True, eq=False)
class GluedSpace:
    s1: FiniteCausalSpace
    s2: FiniteCausalSpace
    f: IdentificationMap
    classes: tuple[tuple[int, ...], ...]
    node_class: np.ndarray
    dq: np.ndarray
    tauq: np.ndarray
    leqq: np.ndarray
    llq: np.ndarray
    degenerate: tuple[tuple[int, int], ...]

    @property
    def n(self) -> int:
        return len(self.classes)

    def class_of(self, space: int, index: int) -> int:
        """Class of point ``index`` of space ``space`` (1 or 2)."""
        if space == 1:
            return int(self.node_class[index])
        if space == 2:
            return int(self.node_class[self.s1.n + index])
        raise ValueError("space must be 1 or 2")

    def representatives(self, c: int) -> list[tuple[int, int]]:
        n1 = self.s1.n
        return [(1, u) if u < n1 else (2, u - n1) for u in self.classes[c]]

    def is_identified(self, c: int) -> bool:
        return len(self.classes[c]) == 2

    def coords(self) -> np.ndarray | None:
        if self.s1.coords is None or self.s2.coords is None:
            return None
        allc = np.vstack([self.s1.coords, self.s2.coords])
        return allc[[m[0] for m in self.classes]]

    def as_space(self) -> FiniteCausalSpace:
        return FiniteCausalSpace(d=self.dq, leq=self.leqq, ll=self.llq, tau=self.tauq, coords=self.coords())


def glue(
    s1: FiniteCausalSpace,
    s2: FiniteCausalSpace,
    f: IdentificationMap,
    unsafe: bool = False,
    eps: float = np.inf,
) -> GluedSpace:
    """Quotient of the disjoint union by ``a ~ f(a)``.

    ``tauq`` is the supremum of tau-sums over causal chains that may jump
    between identified points, ``dq`` the infimum of distance sums over such
    chains, ``leqq`` chain reachability and ``llq`` positivity of ``tauq``.
    """
    if not unsafe:
        rep = validate_identification(s1, s2, f, eps=eps)
        if not rep.ok:
            v = rep.violations[0]
            raise PreconditionError(f"identification invalid: {v.axiom} at {v.witness}")
    n1, n2 = s1.n, s2.n
    N = n1 + n2
    U = disjoint_union(s1, s2)
    ident = _identification_matrix(n1, n2, f)
    classes, cls = quotient_classes(n1, n2, f)
    reps = np.array([m[0] for m in classes], dtype=int)

    edges = (U.leq & ~np.eye(N, dtype=bool)) | ident
    weights = np.where(U.leq, U.tau, 0.0)
    walks = LongestWalks(edges, weights)
    ix = np.ix_(reps, reps)
    leqq = walks.reach[ix]
    tauq = np.where(leqq, np.maximum(walks.value[ix], 0.0), 0.0)

    dist = all_pairs_shortest(np.where(ident, 0.0, U.d))
    dq = np.full((len(classes), len(classes)), np.inf)
    for k in range(len(classes)):
        rows = dist[list(classes[k])].min(axis=0)
        dq[k] = [rows[list(m)].min() for m in classes]
    np.fill_diagonal(dq, 0.0)
    iu = np.argwhere(np.triu(dq <= 0, 1))
    return GluedSpace(
        s1=s1,
        s2=s2,
        f=f,
        classes=tuple(classes),
        node_class=cls,
        dq=dq,
        tauq=tauq,
        leqq=leqq,
        llq=tauq > 0,
        degenerate=tuple((int(a), int(b)) for a, b in iu),
    )


# -- the simplified formula -------------------------------------------------


def _class_reps(n1: int, classes, c: int) -> tuple[int | None, int | None]:
    r1 = r2 = None
    for u in classes[c]:
        if u < n1:
            r1 = u
        else:
            r2 = u - n1
    return r1, r2


def quotient_tau_simplified(s1: FiniteCausalSpace, s2: FiniteCausalSpace, f: IdentificationMap, c1: int, c2: int) -> float:
    """Quotient time separation of two classes from a single crossing.

    Classes sharing a space use that space's tau; otherwise the value is the
    largest ``tau(x, a) + tau(a, y)`` over identified ``a`` with
    ``x <= a <= y``, and 0 if there is none.
    """
    classes, _ = quotient_classes(s1.n, s2.n, f)
    if not (0 <= c1 < len(classes) and 0 <= c2 < len(classes)):
        raise IndexError("class index out of range")
    x1, x2 = _class_reps(s1.n, classes, c1)
    y1, y2 = _class_reps(s1.n, classes, c2)
    if x1 is not None and y1 is not None:
        return float(s1.tau[x1, y1])
    if x2 is not None and y2 is not None:
        return float(s2.tau[x2, y2])
    if x1 is not None:
        return _crossing_sup(s1, s2, f.a1, f.a2, x1, y2)
    return _crossing_sup(s2, s1, f.a2, f.a1, x2, y1)


def _crossing_sup(sa, sb, aa, ab, x, y) -> float:
    ok = sa.leq[x, aa] & sb.leq[ab, y]
    if not ok.any():
        return 0.0
    return float((sa.tau[x, aa] + sb.tau[ab, y])[ok].max())


def simplified_tau_matrix(s1: FiniteCausalSpace, s2: FiniteCausalSpace, f: IdentificationMap) -> np.ndarray:
    """:func:`quotient_tau_simplified` for every class pair at once."""
    n1, n2 = s1.n, s2.n
    classes, _ = quotient_classes(n1, n2, f)
    a1, a2 = f.a1, f.a2
    node = np.zeros((n1 + n2, n1 + n2))
    node[:n1, :n1] = s1.tau
    node[n1:, n1:] = s2.tau
    node[:n1, n1:] = _maxplus(s1.leq[:, a1], s1.tau[:, a1], s2.leq[a2, :], s2.tau[a2, :])
    node[n1:, :n1] = _maxplus(s2.leq[:, a2], s2.tau[:, a2], s1.leq[a1, :], s1.tau[a1, :])
    out = np.empty((len(classes), len(classes)))
    for i, mi in enumerate(classes):
        for j, mj in enumerate(classes):
            same = [(u, v) for u in mi for v in mj if (u < n1) == (v < n1)]
            u, v = same[0] if same else (mi[0], mj[0])
            out[i, j] = node[u, v]
    return out


def _maxplus(la, ta, lb, tb) -> np.ndarray:
    with np.errstate(invalid="ignore"):
        vals = np.where(la[:, :, None] & lb[None, :, :], ta[:, :, None] + tb[None, :, :], -np.inf)
    best = vals.max(axis=1) if vals.shape[1] else np.full((la.shape[0], lb.shape[1]), -np.inf)
    return np.where(np.isneginf(best), 0.0, best)


# -- structural checks ------------------------------------------------------


@dataclass(frozen=True)
class MismatchReport:
    passed: bool
    mismatches: tuple[tuple[str, int, int], ...] = ()
    strict_form_mismatches: tuple[tuple[int, int], ...] = ()


def _class_any(node_rel: np.ndarray, classes) -> np.ndarray:
    m = len(classes)
    out = np.zeros((m, m), dtype=bool)
    for i, mi in enumerate(classes):
        row = node_rel[list(mi)].any(axis=0)
        out[i] = [row[list(mj)].any() for mj in classes]
    return out


def _bool_prod(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return (a.astype(np.float32) @ b.astype(np.float32)) > 0


def single_crossing_relations(s1: FiniteCausalSpace, s2: FiniteCausalSpace, f: IdentificationMap):
    """Class relations allowing at most one jump between the spaces.

    Returns ``(leq, ll, ll_strict)`` where ``ll`` uses ``x << a <= y`` or
    ``x <= a << y`` at the jump and ``ll_strict`` requires ``x << a << y``.
    """
    n1, n2 = s1.n, s2.n
    U = disjoint_union(s1, s2)
    M = _identification_matrix(n1, n2, f) | np.eye(n1 + n2, dtype=bool)
    L, T = U.leq, U.ll
    leq = _bool_prod(_bool_prod(L, M), L)
    ll = _bool_prod(_bool_prod(T, M), L) | _bool_prod(_bool_prod(L, M), T)
    strict = T | _bool_prod(_bool_prod(T, M), T)
    classes, _ = quotient_classes(n1, n2, f)
    return _class_any(leq, classes), _class_any(ll, classes), _class_any(strict, classes)


def relation_reformulation_check(
    s1: FiniteCausalSpace, s2: FiniteCausalSpace, f: IdentificationMap, glued: GluedSpace
) -> MismatchReport:
    """Compare the glued relations with their single-crossing descriptions."""
    leq, ll, strict = single_crossing_relations(s1, s2, f)
    mism = [("leq", int(a), int(b)) for a, b in np.argwhere(leq != glued.leqq)]
    mism += [("ll", int(a), int(b)) for a, b in np.argwhere(ll != glued.llq)]
    smism = tuple((int(a), int(b)) for a, b in np.argwhere(strict != glued.llq))
    return MismatchReport(not mism, tuple(mism), smism)


@dataclass(frozen=True)
class DecompositionReport:
    passed: bool
    lhs: frozenset[int]
    rhs: frozenset[int]
    strict_rhs: frozenset[int]


def decomposition_check(
    s1: FiniteCausalSpace,
    s2: FiniteCausalSpace,
    f: IdentificationMap,
    glued: GluedSpace,
    c: int,
    sign: Sign = "future",
    kind: Kind = "timelike",
) -> DecompositionReport:
    """Cone of class ``c`` in the glued space against its decomposition into
    cones of the two components.

    For an identified class the right side is the union of both component
    cones.  For a class living in one space it adds, for every identified
    point reached from the class, that point's cone in the other space.  A
    timelike jump needs only one of its two steps to be timelike; the variant
    requiring both is returned as ``strict_rhs``.
    """
    n1 = s1.n
    spaces = (s1, s2)
    anchors = (f.a1, f.a2)

    def rel(s, k):
        r = s.ll if k == "timelike" else s.leq
        return r if sign == "future" else r.T

    def project(space_no, mask):
        off = 0 if space_no == 1 else n1
        return {int(glued.node_class[off + i]) for i in np.nonzero(mask)[0]}

    glued_rel = glued.llq if kind == "timelike" else glued.leqq
    row = glued_rel[c] if sign == "future" else glued_rel[:, c]
    lhs = frozenset(int(k) for k in np.nonzero(row)[0])

    reps = glued.representatives(c)
    rhs: set[int] = set()
    strict: set[int] = set()
    for sp, i in reps:
        part = project(sp, rel(spaces[sp - 1], kind)[i])
        rhs |= part
        strict |= part
    if len(reps) == 1:
        sp, x = reps[0]
        other = 3 - sp
        mine, theirs = anchors[sp - 1], anchors[other - 1]
        so = spaces[other - 1]
        causal_here = rel(spaces[sp - 1], "causal")[x, mine]
        timelike_here = rel(spaces[sp - 1], "timelike")[x, mine]
        for k in range(mine.size):
            b = theirs[k]
            if kind == "causal":
                if causal_here[k]:
                    rhs |= project(other, rel(so, "causal")[b])
                continue
            if timelike_here[k]:
                rhs |= project(other, rel(so, "causal")[b])
                strict |= project(other, rel(so, "timelike")[b])
            elif causal_here[k]:
                rhs |= project(other, rel(so, "timelike")[b])
    rhs_f = frozenset(rhs)
    return DecompositionReport(lhs == rhs_f, lhs, rhs_f, frozenset(strict))


@dataclass(frozen=True)
class RecoverReport:
    passed: bool
    preimage: frozenset[tuple[int, int]]
    expected: frozenset[tuple[int, int]]


def recover_subsets(
    s1: FiniteCausalSpace,
    s2: FiniteCausalSpace,
    f: IdentificationMap,
    y1: Iterable[int],
    y2: Iterable[int],
) -> RecoverReport:
    """Check that the quotient map's preimage of the image of ``Y1 ⊔ Y2`` is
    ``Y1 ⊔ Y2`` itself, given that both sets meet the glued set in matching
    points."""
    y1, y2 = {int(i) for i in y1}, {int(j) for j in y2}
    fwd = dict(f.pairs)
    back = {b: a for a, b in f.pairs}
    for a in sorted(y1):
        if a in fwd and fwd[a] not in y2:
            raise PreconditionError(f"point {a} of space 1 is identified with {fwd[a]}, which is not in Y2")
    for b in sorted(y2):
        if b in back and back[b] not in y1:
            raise PreconditionError(f"point {b} of space 2 is identified with {back[b]}, which is not in Y1")
    n1 = s1.n
    classes, cls = quotient_classes(n1, s2.n, f)
    image = {int(cls[i]) for i in y1} | {int(cls[n1 + j]) for j in y2}
    pre = set()
    for c in image:
        for u in classes[c]:
            pre.add((1, u) if u < n1 else (2, u - n1))
    expected = {(1, i) for i in y1} | {(2, j) for j in y2}
    return RecoverReport(pre == expected, frozenset(pre), frozenset(expected))
