import pytest
from hypothesis import given
from hypothesis import strategies as st

from padicprob.clopen import (Ball, ClopenSet, DepthSpace, parse_ball, refine)
from padicprob.errors import (DepthExceeded, DomainError, ScenarioParseError,
                              SpaceMismatch)


def leaf_set(A: ClopenSet, space: DepthSpace) -> frozenset:
    return frozenset(A.leaf_residues(space))


spaces = st.sampled_from([DepthSpace(2, 3), DepthSpace(3, 2), DepthSpace(5, 1)])


@st.composite
def space_and_sets(draw):
    space = draw(spaces)
    def one():
        picks = draw(st.lists(st.integers(0, space.leaf_count - 1), max_size=8))
        return ClopenSet(space.prime, [space.leaf_ball(x) for x in picks])
    return space, one(), one()


# -- balls -------------------------------------------------------------------


def test_ball_containment_and_dichotomy():
    big = Ball(2, 1, 1)
    small = Ball(2, 3, 5)  # 5 = 1 mod 2
    other = Ball(2, 2, 0)
    assert big.contains(small)
    assert big.intersect(small) == small
    assert big.intersect(other) is None


def test_ball_leaf_residues():
    assert list(Ball(2, 2, 3).leaf_residues(3)) == [3, 7]
    assert list(Ball(3, 0, 0).leaf_residues(1)) == [0, 1, 2]


def test_ball_translate():
    assert Ball(2, 2, 1).translate(3) == Ball(2, 2, 2)


def test_ball_validation():
    with pytest.raises(DomainError):
        Ball(2, 2, 4)
    with pytest.raises(DomainError):
        Ball(2, -1, 0)


def test_notation_roundtrip():
    b = Ball(3, 2, 7)
    assert b.notation() == "7+3^2"
    assert parse_ball("7+3^2") == b
    assert parse_ball(" 12+5^1 ") == Ball(5, 1, 2)  # residue reduced


def test_parse_ball_errors():
    with pytest.raises(ScenarioParseError):
        parse_ball("nonsense")
    with pytest.raises(ScenarioParseError):
        parse_ball("1+3^2", prime=2)


# -- canonical form ------------------------------------------------------------


def test_nested_balls_dropped():
    A = ClopenSet(2, [Ball(2, 1, 0), Ball(2, 3, 4)])  # 4 = 0 mod 2
    assert A.balls == (Ball(2, 1, 0),)


def test_complete_family_merges():
    A = ClopenSet(2, [Ball(2, 2, 1), Ball(2, 2, 3)])  # both children of 1+2^1
    assert A.balls == (Ball(2, 1, 1),)
    B = ClopenSet(3, [Ball(3, 1, r) for r in range(3)])
    assert B.balls == (Ball(3, 0, 0),)


def test_merge_cascades():
    space = DepthSpace(2, 2)
    A = ClopenSet(2, [space.leaf_ball(x) for x in range(4)])
    assert A == space.whole()


# -- set algebra against the leaf-set oracle -------------------------------------


@given(space_and_sets())
def test_ops_match_leaf_sets(data):
    space, A, B = data
    assert leaf_set(A.union(B), space) == leaf_set(A, space) | leaf_set(B, space)
    assert leaf_set(A.intersect(B), space) == leaf_set(A, space) & leaf_set(B, space)
    assert leaf_set(A.difference(B), space) == leaf_set(A, space) - leaf_set(B, space)
    assert (leaf_set(A.complement_in(space), space)
            == frozenset(space.leaves()) - leaf_set(A, space))


@given(space_and_sets())
def test_canonical_form_is_stable(data):
    space, A, B = data
    assert ClopenSet(space.prime, A.balls) == A
    assert A.union(A) == A
    assert A.difference(A).is_empty


@given(space_and_sets(), st.integers(-20, 20))
def test_translate_matches_leaf_shift(data, x):
    space, A, _ = data
    m = space.leaf_count
    expected = frozenset((l - x) % m for l in leaf_set(A, space))
    assert leaf_set(A.translate(x), space) == expected


def test_ball_subtraction_example():
    whole = ClopenSet.from_ball(Ball(2, 0, 0))
    A = whole.difference(ClopenSet.from_ball(Ball(2, 2, 1)))
    assert A.balls == (Ball(2, 1, 0), Ball(2, 2, 3))


# -- spaces, refinement, errors -------------------------------------------------


def test_refine():
    space = DepthSpace(2, 3)
    kids = refine(Ball(2, 1, 1), 3, space)
    assert set(kids) == {Ball(2, 3, r) for r in (1, 3, 5, 7)}
    with pytest.raises(DepthExceeded):
        refine(Ball(2, 1, 1), 4, space)
    with pytest.raises(SpaceMismatch):
        refine(Ball(3, 1, 1), 2, space)


def test_depth_guard():
    space = DepthSpace(2, 1)
    deep = ClopenSet.from_ball(Ball(2, 2, 0))
    with pytest.raises(DepthExceeded):
        list(deep.leaf_residues(space))


def test_prime_guard():
    with pytest.raises(SpaceMismatch):
        ClopenSet(2, [Ball(3, 1, 0)])
    with pytest.raises(SpaceMismatch):
        ClopenSet.from_ball(Ball(2, 0, 0)).union(ClopenSet.from_ball(Ball(3, 0, 0)))


def test_contains_leaf():
    space = DepthSpace(2, 3)
    A = ClopenSet.from_ball(Ball(2, 2, 1))
    assert A.contains_leaf(5, space)
    assert not A.contains_leaf(2, space)


def test_space_validation():
    with pytest.raises(DomainError):
        DepthSpace(4, 2)
    with pytest.raises(DomainError):
        DepthSpace(2, 0)
