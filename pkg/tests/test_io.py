import json
import math

import numpy as np
import pytest

from causalglue import io
from causalglue.amalgamation import IdentificationMap
from causalglue.space import minkowski_space, validate_space


def test_minkowski_document():
    s = io.space_from_dict(
        {"n": 2, "coords": [[0, 0], [0, 2]], "leq": "minkowski_from_coords", "tau": "minkowski_from_coords"}
    )
    assert s.tau[0, 1] == 2.0 and s.ll[0, 1] and validate_space(s).ok


def test_explicit_document_with_inf():
    s = io.space_from_dict({"n": 2, "d": [[0, "inf"], ["inf", 0]], "leq": [[0, 1]], "tau": [[0, 1, 1.5]]})
    assert math.isinf(s.d[0, 1])
    assert s.leq[0, 1] and s.leq[0, 0] and not s.leq[1, 0]
    assert s.ll[0, 1]


def test_round_trip():
    s = minkowski_space([(0, 0), (0.5, 1), (-1, 2)])
    back = io.space_from_dict(json.loads(io.dumps(io.space_to_dict(s))))
    assert back.same_as(s)


def test_instance_round_trip(tmp_path):
    s = minkowski_space([(0, 0), (0, 1)])
    f = IdentificationMap(((1, 0),), math.inf)
    doc = io.instance_to_dict(s, s, f)
    assert doc["lipschitz_bound"] == "inf"
    (tmp_path / "i.json").write_text(io.dumps(doc))
    s1, s2, g = io.load_instance(tmp_path / "i.json")
    assert g == f and s1.same_as(s)


def test_instance_with_relative_space_paths(tmp_path):
    (tmp_path / "a.json").write_text(io.dumps(io.space_to_dict(minkowski_space([(0, 0)]))))
    (tmp_path / "inst.json").write_text(json.dumps({"space1": "a.json", "space2": "a.json", "identify": [[0, 0]]}))
    s1, s2, f = io.load_instance(tmp_path / "inst.json")
    assert s1.n == s2.n == 1 and f.pairs == ((0, 0),)


@pytest.mark.parametrize(
    "doc",
    [
        {"n": 0},
        {"n": 2, "leq": [[0, 5]]},
        {"n": 2, "d": "euclidean_from_coords"},
        {"n": 1, "d": [["nan?"]]},
        {"n": 2, "d": [[0, 1]]},
    ],
)
def test_malformed_documents(doc):
    with pytest.raises(io.InvalidInput):
        io.space_from_dict(doc)


def test_unreadable_file(tmp_path):
    with pytest.raises(io.InvalidInput):
        io.load_space(tmp_path / "missing.json")
    (tmp_path / "bad.json").write_text("{")
    with pytest.raises(io.InvalidInput):
        io.load_space(tmp_path / "bad.json")


def test_dumps_is_deterministic():
    a = io.dumps({"b": 1, "a": [io.encode(np.inf)]})
    assert a == io.dumps({"a": ["inf"], "b": 1})
