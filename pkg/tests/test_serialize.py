import pytest

from equisplit.complexes import Subcomplex, build_regular_tree_ball
from equisplit.errors import ConfigError
from equisplit.fields import Field, QQ
from equisplit.groups import LevelFamily, LinearRep, build_level_system, tree_automorphism_group
from equisplit.idempotents import systems_from_level_idempotents
from equisplit.linalg import Matrix
from equisplit.serialize import (
    canonical_json,
    complex_from_dict,
    complex_hash,
    complex_to_dict,
    content_hash,
    group_from_spec,
    matrix_from_dict,
    matrix_to_dict,
    subcomplex_from_dict,
    subcomplex_to_dict,
    system_from_dict,
    system_to_dict,
)


def test_matrix_round_trip_rationals():
    m = Matrix(QQ, [[QQ.ratio(1, 3), QQ.ratio(-2, 7)], [QQ.from_int(4), QQ.zero()]])
    data = matrix_to_dict(m)
    assert data["entries"] == ["1/3", "-2/7", "4", "0"]
    assert matrix_from_dict(data) == m
    # byte-exact: serializing twice gives identical text
    assert canonical_json(data) == canonical_json(matrix_to_dict(matrix_from_dict(data)))


def test_matrix_round_trip_prime_field():
    f5 = Field.prime(5)
    m = Matrix.from_int_rows(f5, [[3, 4], [0, 2]])
    data = matrix_to_dict(m)
    assert matrix_from_dict(data) == m


def test_matrix_dict_validation():
    with pytest.raises(ValueError):
        matrix_from_dict({"kind": "nope"})
    data = matrix_to_dict(Matrix.identity(QQ, 2))
    data["entries"] = data["entries"][:-1]
    with pytest.raises(ValueError):
        matrix_from_dict(data)


def test_complex_round_trip():
    ball = build_regular_tree_ball(2, 2)
    data = complex_to_dict(ball)
    back = complex_from_dict(data)
    assert back.dims == ball.dims
    assert back.vertex_sets == ball.vertex_sets
    assert complex_hash(back) == complex_hash(ball)


def test_complex_hash_distinguishes():
    assert complex_hash(build_regular_tree_ball(2, 1)) != complex_hash(
        build_regular_tree_ball(3, 1)
    )


def test_subcomplex_round_trip():
    ball = build_regular_tree_ball(2, 1)
    s = Subcomplex(ball, {0, 1, 4})
    data = subcomplex_to_dict(s)
    back = subcomplex_from_dict(data, ball)
    assert back.cells == s.cells
    other = build_regular_tree_ball(3, 1)
    with pytest.raises(ValueError):
        subcomplex_from_dict(data, other)


def test_system_round_trip():
    star = build_regular_tree_ball(2, 1)
    group, action = tree_automorphism_group(star)
    rep = LinearRep.regular(group, QQ)
    fam = LevelFamily.from_ball_stabilizers(action, [1])
    sys = systems_from_level_idempotents(
        star, QQ, 6, build_level_system(action, rep, fam), check_paths=False
    )[0]
    data = system_to_dict(sys)
    back = system_from_dict(data, star)
    assert back.vertex_idempotents == sys.vertex_idempotents
    assert back.field == sys.field and back.dim == sys.dim


def test_group_from_cycles_spec():
    group, perms = group_from_spec(
        {"kind": "cycles", "generators": ["(0 1)", "(1 2)"]}, 3
    )
    assert group.order == 6
    assert len(perms) == 6


def test_group_from_table_spec():
    table = [[0, 1], [1, 0]]
    group, perms = group_from_spec(
        {"kind": "table", "table": table, "perms": [[0, 1], [1, 0]]}, 2
    )
    assert group.order == 2
    with pytest.raises(ConfigError):
        group_from_spec({"kind": "table", "table": table, "perms": [[0, 1]]}, 2)


def test_group_spec_unknown_kind():
    with pytest.raises(ConfigError):
        group_from_spec({"kind": "magic"}, 3)


def test_content_hash_stability():
    h1 = content_hash({"b": 1, "a": [1, 2]})
    h2 = content_hash({"a": [1, 2], "b": 1})
    assert h1 == h2
    assert len(h1) == 16
