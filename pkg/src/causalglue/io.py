"""JSON formats for spaces, gluing instances and reports.

Infinite values are written as the string ``"inf"``.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .amalgamation import GluedSpace, IdentificationMap
from .space import FiniteCausalSpace, StructuralError, closure_of, minkowski_structure


class InvalidInput(ValueError):
    """A file or document that does not follow the expected format."""


def _num(v) -> float:
    if isinstance(v, str):
        if v.lower() in ("inf", "+inf", "infinity"):
            return math.inf
        raise InvalidInput(f"unexpected string value {v!r}")
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise InvalidInput(f"expected a number, got {v!r}")
    return float(v)


def encode(v: float):
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


def _pairs(obj, n: int, what: str) -> list[tuple[int, int]]:
    out = []
    for p in obj:
        if len(p) != 2:
            raise InvalidInput(f"{what}: expected [i, j], got {p!r}")
        i, j = int(p[0]), int(p[1])
        if not (0 <= i < n and 0 <= j < n):
            raise InvalidInput(f"{what}: index out of range in {p!r}")
        out.append((i, j))
    return out


def space_from_dict(obj: dict[str, Any]) -> FiniteCausalSpace:
    try:
        return _space_from_dict(obj)
    except (KeyError, TypeError, StructuralError) as exc:
        raise InvalidInput(f"malformed space: {exc}") from exc


def _space_from_dict(obj: dict[str, Any]) -> FiniteCausalSpace:
    n = int(obj["n"])
    if n < 1:
        raise InvalidInput("n must be positive")
    coords = None
    if obj.get("coords") is not None:
        coords = np.array([[_num(a), _num(b)] for a, b in obj["coords"]], dtype=float)
        if coords.shape != (n, 2):
            raise InvalidInput("coords must list n points")
    mink = None
    if coords is not None:
        mink = minkowski_structure(coords)

    d_spec = obj.get("d", "euclidean_from_coords")
    if d_spec == "euclidean_from_coords":
        if mink is None:
            raise InvalidInput("d from coords requested but no coords given")
        d = mink[0]
    else:
        d = np.array([[_num(v) for v in row] for row in d_spec], dtype=float)

    leq_spec = obj.get("leq", [])
    if leq_spec == "minkowski_from_coords":
        if mink is None:
            raise InvalidInput("leq from coords requested but no coords given")
        leq = mink[1]
    else:
        gen = np.zeros((n, n), dtype=bool)
        for i, j in _pairs(leq_spec, n, "leq"):
            gen[i, j] = True
        leq = closure_of(gen)

    tau_spec = obj.get("tau", [])
    if tau_spec == "minkowski_from_coords":
        if mink is None:
            raise InvalidInput("tau from coords requested but no coords given")
        tau = mink[3]
    else:
        tau = np.zeros((n, n))
        for t in tau_spec:
            i, j = _pairs([t[:2]], n, "tau")[0]
            tau[i, j] = _num(t[2])

    ll_spec = obj.get("ll", "from_tau")
    if ll_spec == "from_tau":
        ll = tau > 0
    else:
        ll = np.zeros((n, n), dtype=bool)
        for i, j in _pairs(ll_spec, n, "ll"):
            ll[i, j] = True
    return FiniteCausalSpace(d=d, leq=leq, ll=ll, tau=tau, coords=coords)


def space_to_dict(space: FiniteCausalSpace) -> dict[str, Any]:
    out: dict[str, Any] = {"n": space.n}
    if space.coords is not None:
        out["coords"] = [[encode(x), encode(t)] for x, t in space.coords]
    out["d"] = [[encode(v) for v in row] for row in space.d]
    out["leq"] = [[int(i), int(j)] for i, j in np.argwhere(space.leq)]
    out["ll"] = [[int(i), int(j)] for i, j in np.argwhere(space.ll)]
    out["tau"] = [[int(i), int(j), encode(space.tau[i, j])] for i, j in np.argwhere(space.tau != 0)]
    return out


def glued_to_dict(glued: GluedSpace) -> dict[str, Any]:
    out = space_to_dict(glued.as_space())
    out["classes"] = [[list(r) for r in glued.representatives(c)] for c in range(glued.n)]
    out["degenerate"] = [list(p) for p in glued.degenerate]
    return out


def _load_json(source) -> Any:
    if isinstance(source, (dict, list)):
        return source
    try:
        return json.loads(Path(source).read_text())
    except OSError as exc:
        raise InvalidInput(f"cannot read {source}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"malformed JSON in {source}: {exc}") from exc


def load_space(source) -> FiniteCausalSpace:
    return space_from_dict(_load_json(source))


def instance_from_dict(obj: dict[str, Any], base: Path | None = None):
    """``(s1, s2, f)`` from a gluing-instance document."""

    def sub(v):
        if isinstance(v, str):
            p = Path(v)
            if base is not None and not p.is_absolute():
                p = base / p
            return load_space(p)
        return space_from_dict(v)

    try:
        s1, s2 = sub(obj["space1"]), sub(obj["space2"])
        pairs = _pairs(obj["identify"], max(s1.n, s2.n), "identify")
        f = IdentificationMap(tuple(pairs), _num(obj.get("lipschitz_bound", 1.0)))
    except KeyError as exc:
        raise InvalidInput(f"gluing instance lacks {exc}") from exc
    return s1, s2, f


def load_instance(source):
    obj = _load_json(source)
    base = None if isinstance(source, dict) else Path(source).parent
    return instance_from_dict(obj, base)


def instance_to_dict(s1: FiniteCausalSpace, s2: FiniteCausalSpace, f: IdentificationMap) -> dict[str, Any]:
    return {
        "space1": space_to_dict(s1),
        "space2": space_to_dict(s2),
        "identify": [list(p) for p in f.pairs],
        "lipschitz_bound": encode(f.lipschitz_bound),
    }


def dumps(obj) -> str:
    """Deterministic JSON text."""
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False)
