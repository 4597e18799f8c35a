import pytest

from equisplit.complexes import (
    Complex,
    Subcomplex,
    build_regular_tree_ball,
    convex_hull_tree,
    enumerate_convex_subcomplexes,
    is_convex,
)
from equisplit.errors import NotATree, SizeLimit


def vertex_count(q, r):
    return 1 + (q + 1) * ((q**r - 1) // (q - 1))


@pytest.mark.parametrize("q", [2, 3])
@pytest.mark.parametrize("r", [0, 1, 2, 3, 4])
def test_tree_ball_counts(q, r):
    ball = build_regular_tree_ball(q, r)
    n = vertex_count(q, r)
    assert len(ball.vertices) == n
    assert ball.size - n == n - 1  # a tree: edges = vertices - 1
    assert ball.is_tree()


def test_smallest_balls():
    b0 = build_regular_tree_ball(2, 0)
    assert len(b0.vertices) == 1 and b0.size == 1
    b1 = build_regular_tree_ball(2, 1)
    assert len(b1.vertices) == 4 and b1.size == 7


def test_size_limit():
    with pytest.raises(SizeLimit):
        build_regular_tree_ball(3, 8, max_vertices=1000)


def test_bad_parameters():
    with pytest.raises(ValueError):
        build_regular_tree_ball(1, 2)
    with pytest.raises(ValueError):
        build_regular_tree_ball(2, -1)


def test_vertex_set_invariants():
    ball = build_regular_tree_ball(2, 2)
    for i in range(ball.size):
        if ball.dims[i] == 0:
            assert ball.vertex_sets[i] == frozenset({i})
        else:
            assert len(ball.vertex_sets[i]) == 2
            for f in ball.faces(i):
                assert ball.dims[f] < ball.dims[i]
                assert ball.vertex_sets[f] < ball.vertex_sets[i]


def test_facet_closure_validation():
    ball = build_regular_tree_ball(2, 1)
    edge = next(i for i in range(ball.size) if ball.dims[i] == 1)
    with pytest.raises(ValueError):
        Subcomplex(ball, {edge})  # missing endpoints
    a, b = sorted(ball.vertex_sets[edge])
    s = Subcomplex(ball, {edge, a, b})
    assert s.vertices == (a, b)


def test_tree_distances_and_paths():
    ball = build_regular_tree_ball(2, 2)
    # vertices 0 (center), 1..3 (depth 1), 4..9 (depth 2)
    assert ball.tree_distance(0, 1) == 1
    assert ball.tree_distance(4, 0) == 2
    assert ball.tree_diameter() == 4
    path = ball.tree_path(4, 0)
    assert path[0] == 4 and path[-1] == 0 and len(path) == 3


def test_convex_hull_examples():
    ball = build_regular_tree_ball(2, 2)
    single = convex_hull_tree(ball, [5])
    assert single.cells == {5}
    adjacent = convex_hull_tree(ball, [0, 1])
    assert adjacent.vertices == (0, 1) and len(adjacent.cells) == 3
    # two leaves under different depth-1 vertices: distance 4
    far = convex_hull_tree(ball, [4, 6])
    assert len(far.vertices) == 5 and len(far.cells) == 9


def test_convex_hull_distance_two():
    ball = build_regular_tree_ball(2, 1)
    hull = convex_hull_tree(ball, [1, 2])
    assert set(hull.vertices) == {0, 1, 2}
    assert len(hull.cells) == 5  # three vertices and two edges


def test_is_convex_cases():
    ball = build_regular_tree_ball(2, 1)
    assert is_convex(Subcomplex(ball, {1}))
    assert is_convex(Subcomplex(ball, set(range(ball.size))))  # full ball
    assert not is_convex(Subcomplex(ball, {1, 2}))  # geodesic gap at the center
    # both endpoints of an edge but not the edge itself: not convex
    assert not is_convex(Subcomplex(ball, {0, 1}))


def test_hull_idempotent_and_monotone():
    ball = build_regular_tree_ball(2, 2)
    hull = convex_hull_tree(ball, [4, 6])
    again = convex_hull_tree(ball, hull.vertices)
    assert again.cells == hull.cells
    bigger = convex_hull_tree(ball, list(hull.vertices) + [9])
    assert hull.cells <= bigger.cells


def test_enumerate_two_vertex_path():
    path = Complex([0, 0, 1], [{0}, {1}, {0, 1}])
    subs = enumerate_convex_subcomplexes(path)
    assert [sorted(s.cells) for s in subs] == [[0], [1], [0, 1, 2]]


def test_enumerate_single_vertex():
    point = Complex([0], [{0}])
    assert len(enumerate_convex_subcomplexes(point)) == 1


def test_enumerate_star_contains_extremes():
    ball = build_regular_tree_ball(2, 1)
    subs = enumerate_convex_subcomplexes(ball, 100)
    cell_sets = [s.cells for s in subs]
    assert len(subs) == 11
    for v in ball.vertices:
        assert frozenset({v}) in cell_sets
    assert frozenset(range(ball.size)) in cell_sets
    assert all(is_convex(s) for s in subs)


def test_enumerate_truncation_and_order():
    ball = build_regular_tree_ball(2, 2)
    full = enumerate_convex_subcomplexes(ball, 10_000)
    assert len(full) == 143
    head = enumerate_convex_subcomplexes(ball, 10)
    assert [s.cells for s in head] == [s.cells for s in full[:10]]


def test_not_a_tree():
    triangle = Complex(
        [0, 0, 0, 1, 1, 1],
        [{0}, {1}, {2}, {0, 1}, {1, 2}, {0, 2}],
    )
    with pytest.raises(NotATree):
        convex_hull_tree(triangle, [0, 1])
    with pytest.raises(NotATree):
        enumerate_convex_subcomplexes(triangle)


def test_complex_validation():
    with pytest.raises(ValueError):
        Complex([0, 0], [{0}, {0}])  # duplicate vertex set
    with pytest.raises(ValueError):
        Complex([0, 1], [{0}, {1}])  # dim-1 cell with one vertex
    with pytest.raises(ValueError):
        Complex([0], [{1}])  # vertex not its own vertex set
