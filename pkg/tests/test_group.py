import functools
import random

import pytest
from hypothesis import given, settings, strategies as st

from bshadow import (
    GroupContext,
    Segment,
    ball,
    distinguished_structure,
    enumerate_geodesics,
    normal_form,
    word_metric,
)
from bshadow.errors import BudgetExceeded, InvalidInput, OutOfCertifiedBall
from bshadow.group import format_word, knuth_bendix, segment_from_word
from bshadow.io import load_group

import oracles

words2 = st.text(alphabet="aAbB", max_size=14)
words4 = st.text(alphabet="aAbBcCdD", max_size=8)


def fmt(g):
    return format_word(g)


# -- normal forms ------------------------------------------------------------------


def test_free_reduction_examples(f2):
    assert normal_form("abB", f2) == normal_form("a", f2)
    assert normal_form("", f2) == ()
    assert normal_form("a b b^-1", f2) == ("a",)


def test_commutator_trivial_in_z2(z2):
    assert normal_form("abAB", z2) == ()
    assert normal_form("a b a⁻¹ b⁻¹", z2) == ()


@given(words2)
def test_free_normal_form_matches_oracle(w):
    f2 = GroupContext.free(2)
    assert fmt(normal_form(w, f2)) == oracles.free_reduce(w)


@given(words2)
@settings(max_examples=200)
def test_z2_normal_form_is_a_lattice_geodesic(w):
    z2 = _z2()
    g = normal_form(w, z2)
    assert oracles.lattice_point(fmt(g)) == oracles.lattice_point(w)
    assert len(g) == oracles.lattice_distance("", w)


@functools.cache
def _group(name):
    return load_group(f"builtin:{name}.json")


def _z2():
    return _group("z2")


def test_z2_rewriting_is_complete(z2):
    assert z2._rewriter.complete


def test_genus2_word_problem_agrees_with_dehn(genus2):
    rng = random.Random(3)
    trivial = 0
    for _ in range(300):
        # half of the words are conjugated relators, which are trivial
        if rng.random() < 0.5:
            u = "".join(rng.choice("aAbBcCdD") for _ in range(rng.randint(0, 4)))
            r = oracles.GENUS2_RELATOR
            w = u + (r if rng.random() < 0.5 else oracles.inv_word(r)) + oracles.inv_word(u)
        else:
            w = "".join(rng.choice("aAbBcCdD") for _ in range(rng.randint(0, 12)))
        ours = genus2.mul(genus2.alphabet.parse(w)) == ()
        assert ours == oracles.dehn_trivial(w), w
        trivial += ours
    assert trivial > 100


@given(words4)
@settings(max_examples=150, deadline=None)
def test_genus2_normal_form_is_equal_element(w):
    g2 = _group("genus2")
    g = fmt(g2.element(w))
    assert oracles.dehn_trivial(oracles.inv_word(g) + w)
    assert len(g) <= len(oracles.free_reduce(w))


def test_out_of_certified_ball(z2):
    with pytest.raises(OutOfCertifiedBall):
        z2.element("a" * 21)
    with pytest.raises(OutOfCertifiedBall):
        z2.sphere(21)


def test_bad_group_files():
    with pytest.raises(InvalidInput):
        GroupContext.from_spec({"relators": []})
    with pytest.raises(InvalidInput):
        GroupContext.from_spec({"generators": ["a"], "mode": "ball"})
    with pytest.raises(InvalidInput):
        GroupContext.from_spec({"generators": ["a"], "relators": ["aa"], "mode": "free"})
    with pytest.raises(InvalidInput):
        GroupContext.from_spec({"generators": ["a"], "mode": "hyperbolic"})


def test_group_file_round_trip(genus2):
    again = GroupContext.from_spec(genus2.to_spec())
    assert again.to_spec() == genus2.to_spec()


def test_knuth_bendix_for_z2_gives_commutation_rules(z2):
    rws = knuth_bendix(z2.alphabet, z2.relators)
    assert rws.complete
    assert rws.reduce(tuple("baBA")) == ()
    assert rws.reduce(tuple("ba")) == tuple("ab")


# -- metric ------------------------------------------------------------------------


def test_metric_examples(f2):
    assert word_metric("ab", "aB", f2) == 2
    assert word_metric("a", "b", f2) == 2
    assert word_metric("ab", "ab", f2) == 0


@given(words2, words2)
def test_free_metric_matches_oracle(u, v):
    f2 = GroupContext.free(2)
    assert word_metric(u, v, f2) == oracles.free_distance(u, v)


@given(words2, words2)
@settings(max_examples=150)
def test_z2_metric_matches_lattice(u, v):
    assert word_metric(u, v, _z2()) == oracles.lattice_distance(u, v)


@given(words2, words2, words2)
@settings(max_examples=150)
def test_metric_axioms_z2(u, v, w):
    z2 = _z2()
    d = lambda x, y: word_metric(x, y, z2)  # noqa: E731
    assert d(u, v) == d(v, u)
    assert d(u, w) <= d(u, v) + d(v, w)
    assert (d(u, v) == 0) == (normal_form(u, z2) == normal_form(v, z2))


def test_left_invariance_genus2(genus2):
    rng = random.Random(5)
    for _ in range(100):
        g, h, k = ("".join(rng.choice("aAbBcCdD") for _ in range(rng.randint(0, 5))) for _ in range(3))
        assert word_metric(g, h, genus2) == word_metric(k + g, k + h, genus2)


# -- balls -------------------------------------------------------------------------


def test_ball_examples(f2):
    assert len(ball(0, f2)) == 1
    assert sorted(map(fmt, ball(1, f2))) == sorted(["", "a", "A", "b", "B"])
    assert len(ball(2, f2)) == 17


def test_free_sphere_sizes_match_tree_growth(f2):
    assert [len(f2.sphere(n)) for n in range(8)] == [oracles.free_sphere_size(2, n) for n in range(8)]


def test_free_ball_matches_bfs(f2):
    nbrs = lambda w: [oracles.free_reduce(w + s) for s in "aAbB"]  # noqa: E731
    dist = oracles.bfs_distances("", nbrs, 5)
    assert sorted(dist) == sorted(fmt(g) for g in f2.ball(5))


def test_z2_spheres_are_lattice_spheres(z2):
    for r in range(8):
        pts = {oracles.lattice_point(fmt(g)) for g in z2.sphere(r)}
        assert len(pts) == len(z2.sphere(r)) == (1 if r == 0 else 4 * r)
        assert all(abs(x) + abs(y) == r for x, y in pts)


def test_genus2_spheres_match_dehn_bfs(genus2):
    assert [len(genus2.sphere(r)) for r in range(4)] == oracles.dehn_spheres(3)


# -- geodesics ---------------------------------------------------------------------


def test_tree_geodesic_is_unique(f2):
    geos = enumerate_geodesics("", "ab", f2)
    assert len(geos) == 1
    assert [fmt(v) for v in geos[0].values] == ["", "a", "ab"]


def test_trivial_geodesic(f2, z2):
    for ctx in (f2, z2):
        geos = enumerate_geodesics("ab", "ab", ctx)
        assert len(geos) == 1 and len(geos[0]) == 1


def test_z2_geodesic_counts_match_lattice_paths(z2):
    assert len(enumerate_geodesics("", "ab", z2)) == 2
    rng = random.Random(11)
    for _ in range(40):
        w = "".join(rng.choice("aAbB") for _ in range(rng.randint(0, 9)))
        geos = enumerate_geodesics("", w, z2, limit=10_000)
        assert len(geos) == oracles.lattice_geodesic_count(w)
        assert all(s.is_geodesic(z2) for s in geos)


def test_geodesic_cap_flags_truncation(z2):
    geos = enumerate_geodesics("", "aaaabbbb", z2, limit=5)
    assert geos.truncated and len(geos) == 5
    with pytest.raises(BudgetExceeded):
        enumerate_geodesics("", "aaaabbbb", z2, limit=5, strict=True)


def test_segment_indexing(f2):
    seg = segment_from_word(f2, "b", "aa", start_index=3)
    assert seg.end_index == 5
    assert fmt(seg(4)) == "ba"
    assert seg.is_path(f2) and seg.is_geodesic(f2)
    assert [fmt(v) for v in seg.restrict(4, 5).values] == ["ba", "baa"]
    assert not Segment(0, (f2.element("a"), f2.element("b"))).is_path(f2)


# -- distinguished geodesic structure ---------------------------------------------


def test_last_letter_examples(f2, z2):
    dgs = distinguished_structure(f2)
    assert dgs.last_letter("ab") == "B"
    assert dgs.last_letter("a") == "A"
    assert dgs.last_letter("") is None
    assert distinguished_structure(z2).last_letter("ba") == "B"


def test_distinguished_structure_axioms(f2, z2, genus2):
    assert distinguished_structure(f2).verify(5) == []
    assert distinguished_structure(z2).verify(6) == []
    assert distinguished_structure(genus2).verify(3) == []
