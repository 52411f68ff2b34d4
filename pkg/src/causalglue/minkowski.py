"""Grid samplings of regions of the 2D Minkowski plane.

Coordinates are ``(x, t)``.  Regions are a union of closed (or open) base
shapes minus a list of removed shapes, which default to open.  All geometric
predicates run in exact rational arithmetic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from ._graph import LongestWalks
from .space import FiniteCausalSpace, minkowski_space, subspace

Point = tuple[Fraction, Fraction]


class RegionError(ValueError):
    pass


def _q(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, float):
        return Fraction(str(v))
    return Fraction(v)


def _pt(p) -> Point:
    if len(p) != 2:
        raise RegionError(f"expected a point [x, t], got {p!r}")
    return (_q(p[0]), _q(p[1]))


def _cross(o: Point, a: Point, b: Point) -> Fraction:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _on_segment(p: Point, a: Point, b: Point) -> bool:
    if _cross(a, b, p) != 0:
        return False
    return min(a[0], b[0]) <= p[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= p[1] <= max(a[1], b[1])


@dataclass(frozen=True)
class Polygon:
    vertices: tuple[Point, ...]
    open: bool = False

    def edges(self):
        v = self.vertices
        return [(v[k], v[(k + 1) % len(v)]) for k in range(len(v))]

    def contains(self, p: Point) -> bool:
        for a, b in self.edges():
            if _on_segment(p, a, b):
                return not self.open
        inside = False
        for a, b in self.edges():
            if (a[1] > p[1]) != (b[1] > p[1]):
                x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1])
                if x > p[0]:
                    inside = not inside
        return inside

    def bbox(self):
        xs = [v[0] for v in self.vertices]
        ts = [v[1] for v in self.vertices]
        return min(xs), max(xs), min(ts), max(ts)


@dataclass(frozen=True)
class Segment:
    a: Point
    b: Point
    open: bool = False

    def edges(self):
        return [(self.a, self.b)]

    def contains(self, p: Point) -> bool:
        if not _on_segment(p, self.a, self.b):
            return False
        return not (self.open and p in (self.a, self.b))

    def bbox(self):
        return (
            min(self.a[0], self.b[0]),
            max(self.a[0], self.b[0]),
            min(self.a[1], self.b[1]),
            max(self.a[1], self.b[1]),
        )


Shape = Polygon | Segment


@dataclass(frozen=True)
class RegionSpec:
    base: tuple[Shape, ...]
    removed: tuple[Shape, ...] = ()

    def contains(self, p) -> bool:
        p = _pt(p)
        return any(s.contains(p) for s in self.base) and not any(s.contains(p) for s in self.removed)

    def bbox(self):
        boxes = [s.bbox() for s in self.base]
        return (
            min(b[0] for b in boxes),
            max(b[1] for b in boxes),
            min(b[2] for b in boxes),
            max(b[3] for b in boxes),
        )

    def boundary_edges(self):
        return [e for s in self.base + self.removed for e in s.edges()]

    def contains_segment(self, p, q) -> bool:
        """Whether the closed straight segment from ``p`` to ``q`` lies in the region."""
        p, q = _pt(p), _pt(q)
        cuts = {Fraction(0), Fraction(1)}
        dx, dt = q[0] - p[0], q[1] - p[1]
        for a, b in self.boundary_edges():
            ex, et = b[0] - a[0], b[1] - a[1]
            den = dx * et - dt * ex
            if den != 0:
                s = ((a[0] - p[0]) * et - (a[1] - p[1]) * ex) / den
                u = ((a[0] - p[0]) * dt - (a[1] - p[1]) * dx) / den
                if 0 <= s <= 1 and 0 <= u <= 1:
                    cuts.add(s)
            elif _cross(p, q, a) == 0:
                # collinear: the overlap endpoints are the cut points
                norm = dx * dx + dt * dt
                if norm == 0:
                    continue
                for v in (a, b):
                    s = ((v[0] - p[0]) * dx + (v[1] - p[1]) * dt) / norm
                    if 0 <= s <= 1:
                        cuts.add(s)
        cs = sorted(cuts)
        probes = cs + [(s0 + s1) / 2 for s0, s1 in zip(cs, cs[1:])]
        return all(self.contains((p[0] + s * dx, p[1] + s * dt)) for s in probes)


@dataclass(frozen=True)
class SampleParams:
    h: float = 0.25
    include_boundary: bool = True
    jitter_seed: int | None = None

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("grid step h must be positive")


# -- parsing ----------------------------------------------------------------


def _shape(obj: dict, default_open: bool, allow_union: bool) -> list[Shape]:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise RegionError(f"shape must be an object with a 'kind': {obj!r}")
    kind = obj["kind"]
    is_open = bool(obj.get("open", default_open))
    if kind == "rectangle":
        (x0, x1), (t0, t1) = map(lambda r: sorted(map(_q, r)), (obj["x"], obj["t"]))
        if x0 == x1 or t0 == t1:
            raise RegionError("degenerate rectangle")
        return [Polygon(((x0, t0), (x1, t0), (x1, t1), (x0, t1)), is_open)]
    if kind == "polygon":
        verts = tuple(_pt(v) for v in obj["vertices"])
        if len(verts) < 3:
            raise RegionError("polygon needs at least three vertices")
        return [Polygon(verts, is_open)]
    if kind == "half_plane":
        # axis-aligned half-plane, clipped to a finite window for sampling
        axis, sense, value = obj["axis"], obj["sense"], _q(obj["value"])
        x0, x1, t0, t1 = map(_q, obj["window"])
        lo_hi = {"x": [x0, x1], "t": [t0, t1]}
        if axis not in lo_hi or sense not in ("<=", ">="):
            raise RegionError(f"bad half_plane axis/sense: {axis!r} {sense!r}")
        if sense == "<=":
            lo_hi[axis][1] = min(lo_hi[axis][1], value)
        else:
            lo_hi[axis][0] = max(lo_hi[axis][0], value)
        (x0, x1), (t0, t1) = lo_hi["x"], lo_hi["t"]
        if x0 >= x1 or t0 >= t1:
            raise RegionError("half_plane does not meet its window")
        return [Polygon(((x0, t0), (x1, t0), (x1, t1), (x0, t1)), is_open)]
    if kind == "cone_future":
        ax, at = _pt(obj["apex"])
        top = _q(obj["t_max"])
        if top <= at:
            raise RegionError("t_max must exceed the apex time")
        r = top - at
        return [Polygon(((ax, at), (ax + r, top), (ax - r, top)), is_open)]
    if kind == "segment":
        a, b = _pt(obj["from"]), _pt(obj["to"])
        if a == b:
            raise RegionError("degenerate segment")
        return [Segment(a, b, is_open)]
    if kind == "union" and allow_union:
        parts = [s for part in obj["parts"] for s in _shape(part, default_open, False)]
        if not parts:
            raise RegionError("empty union")
        return parts
    raise RegionError(f"unknown shape kind {kind!r}")


def region_from_dict(obj: dict) -> RegionSpec:
    if not isinstance(obj, dict) or "base" not in obj:
        raise RegionError("region needs a 'base'")
    base = _shape(obj["base"], default_open=False, allow_union=True)
    removed = [s for r in obj.get("removed", []) for s in _shape(r, default_open=True, allow_union=False)]
    region = RegionSpec(tuple(base), tuple(removed))
    x0, x1, t0, t1 = region.bbox()
    for s in removed:
        a0, a1, b0, b1 = s.bbox()
        if a1 < x0 or a0 > x1 or b1 < t0 or b0 > t1:
            raise RegionError("removed shape does not meet the base")
    return region


def parse_region(text: str) -> RegionSpec:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise RegionError(f"malformed region JSON: {exc}") from exc
    return region_from_dict(obj)


# -- sampling ---------------------------------------------------------------


def grid_points(region: RegionSpec, params: SampleParams) -> list[Point]:
    h = _q(params.h)
    x0, x1, t0, t1 = region.bbox()
    ox = oy = Fraction(0)
    if params.jitter_seed is not None:
        rng = np.random.default_rng(params.jitter_seed)
        ox, oy = (Fraction(float(v)).limit_denominator(1 << 20) * h for v in rng.random(2))
    kx = range(int(np.ceil((x0 - ox) / h)), int(np.floor((x1 - ox) / h)) + 1)
    kt = range(int(np.ceil((t0 - oy) / h)), int(np.floor((t1 - oy) / h)) + 1)
    strict = None
    if not params.include_boundary:
        strict = RegionSpec(tuple(_as_open(s) for s in region.base), region.removed)
    pts = []
    for j in kt:
        for i in kx:
            p = (ox + i * h, oy + j * h)
            if region.contains(p) and (strict is None or strict.contains(p)):
                pts.append(p)
    return pts


def _as_open(s: Shape) -> Shape:
    return Polygon(s.vertices, True) if isinstance(s, Polygon) else s


def sample_region(region: RegionSpec, params: SampleParams = SampleParams()) -> FiniteCausalSpace:
    """Grid points of step ``h`` in the region with the ambient Minkowski structure."""
    pts = grid_points(region, params)
    if not pts:
        raise RegionError("no grid points fall inside the region")
    return minkowski_space([[float(x), float(t)] for x, t in pts])


def chain_intrinsic_tau(space: FiniteCausalSpace, region: RegionSpec) -> FiniteCausalSpace:
    """Replace ``tau`` by the supremum of ``tau``-sums over causal chains whose
    straight steps stay inside ``region``; relations are recomputed from it."""
    if space.coords is None:
        raise RegionError("chain_intrinsic_tau needs coordinates")
    pts = [(_q(float(x)), _q(float(t))) for x, t in space.coords]
    n = space.n
    edges = np.zeros((n, n), dtype=bool)
    for i, j in np.argwhere(space.leq & ~np.eye(n, dtype=bool)):
        edges[i, j] = region.contains_segment(pts[i], pts[j])
    walks = LongestWalks(edges, np.where(edges, space.tau, 0.0))
    tau = np.where(walks.reach, np.maximum(walks.value, 0.0), 0.0)
    return FiniteCausalSpace(d=space.d, leq=walks.reach, ll=tau > 0, tau=tau, coords=space.coords)


# -- fixtures ---------------------------------------------------------------


@dataclass
class Fixture:
    name: str
    h: float
    regions: tuple[RegionSpec, ...]
    spaces: tuple[FiniteCausalSpace, ...]
    identify: tuple[tuple[int, int], ...] | None = None
    marked: dict = field(default_factory=dict)
    expected: tuple[str, ...] = ()


FIXTURE_REGIONS = {
    "removed_rectangle": [
        {
            "base": {"kind": "rectangle", "x": [-1.5, 3.5], "t": [-1, 3]},
            "removed": [{"kind": "rectangle", "x": [0, 2], "t": [0, 1]}],
        }
    ],
    "null_slit_future": [
        {
            "base": {"kind": "cone_future", "apex": [0, 0], "t_max": 3},
            "removed": [{"kind": "segment", "from": [1, 1], "to": [2, 2]}],
        }
    ],
    "slit_diamond": [
        {
            "base": {
                "kind": "polygon",
                "vertices": [[5, 0], [6.5, 1.5], [5, 3], [7, 3], [8.5, 1.5], [7, 0]],
                "open": True,
            }
        }
    ],
    "flagpole_pair": [
        {
            "base": {
                "kind": "union",
                "parts": [
                    {"kind": "segment", "from": [0, 0], "to": [0, 3]},
                    {"kind": "rectangle", "x": [sx, sx + 1], "t": [1, 1.5]},
                ],
            }
        }
        for sx in (-1, 0)
    ],
    "half_plane_pair": [
        {"base": {"kind": "rectangle", "x": [-1.5, 0], "t": [-0.5, 3.5]}},
        {"base": {"kind": "rectangle", "x": [0, 1.5], "t": [-0.5, 3.5]}},
    ],
}

FIXTURE_MARKS = {
    "removed_rectangle": {"x": (1, 0), "witness": (0.5, 1)},
    "null_slit_future": {"x": (1, 1), "y": (2, 2)},
    "slit_diamond": {"p": (6.25, 0.5), "q": (6.25, 2.5)},
    "flagpole_pair": {"x": (-0.5, 1.5), "y": (0.5, 1.5), "pole": (0, 2)},
    "half_plane_pair": {"x": (-1, 0), "y": (1, 3)},
}

FIXTURE_EXPECTED = {
    "removed_rectangle": (
        "timelike future of x is not the union of the futures of its members; witness is missing",
        "causal futures equal the union of the futures of their members at every point",
        "no point lies chronologically between x and witness",
    ),
    "null_slit_future": ("x <= y", "not x << y", "tau(x, y) == 0"),
    "slit_diamond": ("intrinsic tau(p, q) < tau(p, q) - 0.1",),
    "flagpole_pair": (
        "each component is distinguishing",
        "the glued space is not future distinguishing; witness classes of x and y",
    ),
    "half_plane_pair": ("glued tau(x, y) is within 0.05 of sqrt(5)",),
}


def fixture_names() -> list[str]:
    return sorted(FIXTURE_REGIONS)


def fixture(name: str, h: float = 0.25) -> Fixture:
    if name not in FIXTURE_REGIONS:
        raise KeyError(f"unknown fixture {name!r}; known: {', '.join(fixture_names())}")
    regions = tuple(region_from_dict(r) for r in FIXTURE_REGIONS[name])
    params = SampleParams(h=h)
    spaces = tuple(sample_region(r, params) for r in regions)
    identify = None
    if len(spaces) == 2:
        identify = tuple(_axis_pairs(spaces[0], spaces[1]))
    return Fixture(
        name=name,
        h=h,
        regions=regions,
        spaces=spaces,
        identify=identify,
        marked=dict(FIXTURE_MARKS[name]),
        expected=FIXTURE_EXPECTED[name],
    )


def _axis_pairs(s1: FiniteCausalSpace, s2: FiniteCausalSpace):
    """Points with ``x = 0`` in both spaces, matched by time coordinate."""
    t2 = {float(t): j for j, (x, t) in enumerate(s2.coords) if x == 0}
    return [(i, t2[float(t)]) for i, (x, t) in enumerate(s1.coords) if x == 0 and float(t) in t2]


def restrict_to_region(space: FiniteCausalSpace, region: RegionSpec) -> FiniteCausalSpace:
    """Subspace of the sampled points lying in ``region``."""
    keep = [i for i, (x, t) in enumerate(space.coords) if region.contains((float(x), float(t)))]
    return subspace(space, keep)


def point_index(space: FiniteCausalSpace, p: Sequence[float]) -> int:
    return space.index_of(float(p[0]), float(p[1]))


@dataclass(frozen=True)
class Assertion:
    name: str
    status: str  # pass | fail | skipped
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.status != "fail"


def evaluate_fixture(fx: Fixture, with_glue: bool = True) -> list[Assertion]:
    """Check a fixture's expected assertions; glued ones are skipped unless
    ``with_glue`` is set."""
    from .amalgamation import IdentificationMap, glue
    from .ladder import check_distinguishing_reflective
    from .space import diamond, future_union_check

    def verdict(name, cond, detail=""):
        return Assertion(name, "pass" if cond else "fail", detail)

    out: list[Assertion] = []
    m = fx.marked
    exp = fx.expected
    if fx.name == "removed_rectangle":
        s = fx.spaces[0]
        x, w = point_index(s, m["x"]), point_index(s, m["witness"])
        r = future_union_check(s, x, "timelike")
        out.append(verdict(exp[0], not r.holds and w in r.witnesses, f"{len(r.witnesses)} uncovered points"))
        bad = [i for i in range(s.n) if not future_union_check(s, i, "causal").holds]
        out.append(verdict(exp[1], not bad, f"{len(bad)} failing points"))
        out.append(verdict(exp[2], not diamond(s, x, w), ""))
    elif fx.name == "null_slit_future":
        s = fx.spaces[0]
        x, y = point_index(s, m["x"]), point_index(s, m["y"])
        out += [
            verdict(exp[0], bool(s.leq[x, y])),
            verdict(exp[1], not s.ll[x, y]),
            verdict(exp[2], s.tau[x, y] == 0, f"tau = {s.tau[x, y]:.12g}"),
        ]
    elif fx.name == "slit_diamond":
        s = fx.spaces[0]
        p, q = point_index(s, m["p"]), point_index(s, m["q"])
        hat = chain_intrinsic_tau(s, fx.regions[0])
        out.append(verdict(exp[0], hat.tau[p, q] < s.tau[p, q] - 0.1, f"{hat.tau[p, q]:.6f} vs {s.tau[p, q]:.6f}"))
    elif fx.name == "flagpole_pair":
        reps = [check_distinguishing_reflective(s) for s in fx.spaces]
        detail = "; ".join(
            f"space {k + 1}: equal futures {_coord_pairs(fx.spaces[k], r.future_witnesses[:1])}, "
            f"equal pasts {_coord_pairs(fx.spaces[k], r.past_witnesses[:1])}"
            for k, r in enumerate(reps)
        )
        out.append(verdict(exp[0], all(r.distinguishing for r in reps), detail))
        if with_glue:
            s1, s2 = fx.spaces
            g = glue(s1, s2, IdentificationMap(fx.identify), unsafe=True)
            cx = g.class_of(1, point_index(s1, m["x"]))
            cy = g.class_of(2, point_index(s2, m["y"]))
            dr = check_distinguishing_reflective(g.as_space(), max_witnesses=10**6)
            hit = {cx, cy} <= _group(dr.future_witnesses, cx)
            out.append(verdict(exp[1], not dr.future_distinguishing and hit, f"classes {cx}, {cy}"))
        else:
            out.append(Assertion(exp[1], "skipped", "needs --glue"))
    elif fx.name == "half_plane_pair":
        if with_glue:
            s1, s2 = fx.spaces
            g = glue(s1, s2, IdentificationMap(fx.identify), eps=2 * fx.h)
            val = g.tauq[g.class_of(1, point_index(s1, m["x"])), g.class_of(2, point_index(s2, m["y"]))]
            out.append(verdict(exp[0], abs(val - 5**0.5) <= 0.05, f"tau = {val:.9f}"))
        else:
            out.append(Assertion(exp[0], "skipped", "needs --glue"))
    return out


def _group(pairs, c) -> set[int]:
    """All indices sharing a witness group with ``c``."""
    lead = {a for a, b in pairs if c in (a, b)}
    return lead | {b for a, b in pairs if a in lead}


def _coord_pairs(space, pairs) -> list:
    return [[tuple(float(v) for v in space.coords[i]) for i in p] for p in pairs]
