import pytest

from equisplit.complexes import build_regular_tree_ball
from equisplit.fields import QQ
from equisplit.groups import LinearRep, tree_automorphism_group


@pytest.fixture(scope="session")
def star():
    """The (q=2, r=1) ball: a center with three leaves."""
    return build_regular_tree_ball(2, 1)


@pytest.fixture(scope="session")
def star_group(star):
    """Full automorphism group of the star (order 6) with its cell action."""
    return tree_automorphism_group(star)


@pytest.fixture(scope="session")
def star_regular(star_group):
    group, _ = star_group
    rep = LinearRep.regular(group, QQ)
    rep.verify()
    return rep


@pytest.fixture(scope="session")
def ball22():
    return build_regular_tree_ball(2, 2)


@pytest.fixture(scope="session")
def ball22_group(ball22):
    return tree_automorphism_group(ball22)
