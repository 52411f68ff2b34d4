"""Finite Lorentzian pre-length spaces.

A :class:`FiniteCausalSpace` stores a metric ``d``, the causal relation
``leq``, the chronological relation ``ll`` and the time separation ``tau`` as
dense ``n x n`` arrays.  ``inf`` is a legal value of ``d`` and ``tau``.
Time separation between causally unrelated points is stored as ``0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Literal, Sequence

import numpy as np

from ._graph import LongestWalks, transitive_closure

TOL = 1e-9

Sign = Literal["future", "past"]
Kind = Literal["timelike", "causal"]


class StructuralError(ValueError):
    """Malformed input: wrong shapes, negative or NaN entries, bad indices."""


def _frozen(a, dtype) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class FiniteCausalSpace:
    d: np.ndarray
    leq: np.ndarray
    ll: np.ndarray
    tau: np.ndarray
    coords: np.ndarray | None = None
    parent_index: np.ndarray | None = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "d", _frozen(self.d, float))
        object.__setattr__(self, "leq", _frozen(self.leq, bool))
        object.__setattr__(self, "ll", _frozen(self.ll, bool))
        object.__setattr__(self, "tau", _frozen(self.tau, float))
        if self.coords is not None:
            object.__setattr__(self, "coords", _frozen(self.coords, float))
        if self.parent_index is not None:
            object.__setattr__(self, "parent_index", _frozen(self.parent_index, int))
        n = self.d.shape[0] if self.d.ndim == 2 else -1
        for name in ("d", "leq", "ll", "tau"):
            if getattr(self, name).shape != (n, n):
                raise StructuralError(f"{name} must be an n x n matrix (n={n})")
        if self.coords is not None and self.coords.shape != (n, 2):
            raise StructuralError("coords must have shape (n, 2)")
        if self.parent_index is not None and self.parent_index.shape != (n,):
            raise StructuralError("parent_index must have length n")
        for name in ("d", "tau"):
            m = getattr(self, name)
            if np.isnan(m).any() or (m < 0).any():
                raise StructuralError(f"{name} entries must be nonnegative or inf")

    @property
    def n(self) -> int:
        return self.d.shape[0]

    def index_of(self, x: float, t: float, tol: float = 1e-9) -> int:
        """Index of the point with coordinates ``(x, t)``."""
        if self.coords is None:
            raise StructuralError("space has no coordinates")
        hit = np.nonzero(np.all(np.abs(self.coords - (x, t)) <= tol, axis=1))[0]
        if hit.size == 0:
            raise KeyError(f"no point at {(x, t)}")
        return int(hit[0])

    def same_as(self, other: FiniteCausalSpace, tol: float = TOL) -> bool:
        if self.n != other.n:
            return False
        return (
            np.array_equal(self.leq, other.leq)
            and np.array_equal(self.ll, other.ll)
            and _close(self.d, other.d, tol)
            and _close(self.tau, other.tau, tol)
        )


def _close(a: np.ndarray, b: np.ndarray, tol: float) -> bool:
    fa, fb = np.isinf(a), np.isinf(b)
    if not np.array_equal(fa, fb):
        return False
    return bool(np.all(np.abs(a[~fa] - b[~fb]) <= tol))


@dataclass(frozen=True)
class Violation:
    axiom: str
    witness: tuple[int, ...]
    values: tuple[float, ...] = ()


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def axioms(self) -> set[str]:
        return {v.axiom for v in self.violations}


def _witnesses(mask: np.ndarray, limit: int) -> list[tuple[int, ...]]:
    idx = np.argwhere(mask)
    return [tuple(int(i) for i in row) for row in idx[:limit]]


def validate_space(space: FiniteCausalSpace, max_witnesses: int = 20) -> ValidationReport:
    """Check every axiom of a finite Lorentzian pre-length space.

    Each violated axiom contributes up to ``max_witnesses`` concrete witnesses.
    Lower semi-continuity of ``tau`` is not checked: every function on a finite
    metric space is continuous.
    """
    n = space.n
    d, leq, ll, tau = space.d, space.leq, space.ll, space.tau
    out: list[Violation] = []

    def add(axiom, mask, values):
        for w in _witnesses(mask, max_witnesses):
            out.append(Violation(axiom, w, tuple(float(v) for v in values(w))))

    eye = np.eye(n, dtype=bool)
    add("metric-symmetry", (d != d.T) & ~(np.abs(d - d.T) <= TOL), lambda w: (d[w], d[w[::-1]]))
    add("metric-zero-diagonal", eye & (d > TOL), lambda w: (d[w],))
    add("metric-positivity", ~eye & (d <= 0), lambda w: (d[w],))
    for j in range(n):
        with np.errstate(invalid="ignore"):
            via = d[:, j : j + 1] + d[j : j + 1, :]
        bad = np.isfinite(via) & np.isfinite(d) & (d > via + TOL)
        for i, k in _witnesses(bad, max_witnesses):
            out.append(Violation("triangle", (i, j, k), (d[i, k], d[i, j], d[j, k])))

    add("leq-reflexive", eye & ~leq, lambda w: ())
    lf = leq.astype(np.float32)
    add("leq-transitive", ((lf @ lf) > 0) & ~leq, lambda w: ())
    llf = ll.astype(np.float32)
    add("ll-transitive", ((llf @ llf) > 0) & ~ll, lambda w: ())
    add("ll-in-leq", ll & ~leq, lambda w: ())

    for j in range(n):
        pre = leq[:, j]
        post = leq[j, :]
        if not pre.any() or not post.any():
            continue
        with np.errstate(invalid="ignore"):
            chain = tau[:, j : j + 1] + tau[j : j + 1, :]
        bad = pre[:, None] & post[None, :] & (tau < chain - TOL)
        for i, k in _witnesses(bad, max_witnesses):
            out.append(Violation("reverse-triangle", (i, j, k), (tau[i, k], tau[i, j], tau[j, k])))

    add("positivity-equivalence", (ll & (tau <= 0)) | (~ll & (tau > TOL)), lambda w: (tau[w],))
    add("tau-zero-off-leq", ~leq & (tau > TOL), lambda w: (tau[w],))

    push_up = ((lf @ llf) > 0) & ~ll
    push_down = ((llf @ lf) > 0) & ~ll
    add("push-up", push_up | push_down, lambda w: ())
    return ValidationReport(tuple(out))


def _check_index(space: FiniteCausalSpace, *idx: int) -> None:
    for i in idx:
        if not 0 <= int(i) < space.n:
            raise IndexError(f"point index {i} out of range for n={space.n}")


def cone_mask(space: FiniteCausalSpace, i: int, sign: Sign = "future", kind: Kind = "timelike") -> np.ndarray:
    _check_index(space, i)
    rel = space.ll if kind == "timelike" else space.leq
    if sign == "future":
        return rel[i, :].copy()
    if sign == "past":
        return rel[:, i].copy()
    raise ValueError(f"unknown sign {sign!r}")


def cone(space: FiniteCausalSpace, i: int, sign: Sign = "future", kind: Kind = "timelike") -> frozenset[int]:
    """I+/I-/J+/J- of point ``i`` as a set of indices."""
    return frozenset(int(k) for k in np.nonzero(cone_mask(space, i, sign, kind))[0])


def diamond_mask(space: FiniteCausalSpace, i: int, j: int, kind: Kind = "timelike") -> np.ndarray:
    return cone_mask(space, i, "future", kind) & cone_mask(space, j, "past", kind)


def diamond(space: FiniteCausalSpace, i: int, j: int, kind: Kind = "timelike") -> frozenset[int]:
    return frozenset(int(k) for k in np.nonzero(diamond_mask(space, i, j, kind))[0])


@dataclass(frozen=True, eq=False)
class CausalCompletion:
    """Relations and time separation generated by weighted edges."""

    leq: np.ndarray
    ll: np.ndarray
    tau: np.ndarray

    def with_metric(self, d: np.ndarray, coords=None) -> FiniteCausalSpace:
        return FiniteCausalSpace(d=d, leq=self.leq, ll=self.ll, tau=self.tau, coords=coords)


def tau_completion(n: int, generator_edges: Iterable[Sequence[float]]) -> CausalCompletion:
    """Maximal time separation compatible with a set of weighted causal edges.

    ``leq`` is the reflexive-transitive closure of the edges and ``tau(i, j)``
    the supremum of total weight over edge chains from ``i`` to ``j``; it is
    ``inf`` when such a chain can run around a cycle with a positive edge.
    """
    edges = np.zeros((n, n), dtype=bool)
    weights = np.zeros((n, n))
    for e in generator_edges:
        i, j, w = int(e[0]), int(e[1]), float(e[2])
        if not (0 <= i < n and 0 <= j < n):
            raise StructuralError(f"edge ({i}, {j}) out of range")
        if w < 0 or np.isnan(w):
            raise ValueError(f"negative weight on edge ({i}, {j})")
        if edges[i, j]:
            weights[i, j] = max(weights[i, j], w)
        else:
            edges[i, j] = True
            weights[i, j] = w
    walks = LongestWalks(edges, weights)
    leq = walks.reach
    tau = np.where(leq, np.maximum(walks.value, 0.0), 0.0)
    return CausalCompletion(leq=leq, ll=tau > 0, tau=tau)


def subspace(space: FiniteCausalSpace, subset: Iterable[int]) -> FiniteCausalSpace:
    """Restriction of all structure to ``subset``; indices are re-packed in
    increasing order and ``parent_index`` maps them back to ``space``."""
    idx = np.unique(np.fromiter((int(i) for i in subset), dtype=int))
    if idx.size == 0:
        raise ValueError("subset must be nonempty")
    _check_index(space, int(idx.min()), int(idx.max()))
    ix = np.ix_(idx, idx)
    return FiniteCausalSpace(
        d=space.d[ix],
        leq=space.leq[ix],
        ll=space.ll[ix],
        tau=space.tau[ix],
        coords=None if space.coords is None else space.coords[idx],
        parent_index=idx,
    )


@dataclass(frozen=True)
class UnionCheck:
    holds: bool
    witnesses: frozenset[int]
    interpolative_failures: tuple[tuple[int, int], ...]


def interpolative_failures(space: FiniteCausalSpace) -> list[tuple[int, int]]:
    """Pairs ``x << z`` with no ``y`` such that ``x << y << z``."""
    llf = space.ll.astype(np.float32)
    between = (llf @ llf) > 0
    return [(int(a), int(b)) for a, b in np.argwhere(space.ll & ~between)]


def future_union_check(
    space: FiniteCausalSpace, i: int, kind: Kind = "timelike", sign: Sign = "future"
) -> UnionCheck:
    """Compare a cone of ``i`` with the union of the cones of its members.

    ``witnesses`` are members of the cone not covered by the union.  For the
    causal kind the union always recovers the cone (reflexivity plus
    transitivity); for the timelike kind equality needs interpolation.
    """
    members = cone_mask(space, i, sign, kind)
    rel = space.ll if kind == "timelike" else space.leq
    if sign == "past":
        rel = rel.T
    covered = rel[members].any(axis=0) if members.any() else np.zeros(space.n, dtype=bool)
    missing = members & ~covered
    wit = frozenset(int(k) for k in np.nonzero(missing)[0])
    extra = covered & ~members
    return UnionCheck(
        holds=not missing.any() and not extra.any(),
        witnesses=wit,
        interpolative_failures=tuple(interpolative_failures(space)),
    )


def minkowski_structure(coords: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Euclidean metric and ambient 2D Minkowski relations for ``(x, t)`` points."""
    coords = np.asarray(coords, dtype=float)
    dx = coords[None, :, 0] - coords[:, None, 0]
    dt = coords[None, :, 1] - coords[:, None, 1]
    adx = np.abs(dx)
    leq = (dt >= 0) & (dt >= adx)
    ll = dt > adx
    tau = np.where(ll, np.sqrt(np.maximum(dt * dt - dx * dx, 0.0)), 0.0)
    d = np.hypot(dx, dt)
    return d, leq, ll, tau


def minkowski_space(coords) -> FiniteCausalSpace:
    coords = np.asarray(coords, dtype=float).reshape(-1, 2)
    d, leq, ll, tau = minkowski_structure(coords)
    return FiniteCausalSpace(d=d, leq=leq, ll=ll, tau=tau, coords=coords)


def closure_of(edges: np.ndarray) -> np.ndarray:
    return transitive_closure(edges, reflexive=True)
