import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from bshadow import (
    GroupContext,
    HyperbolicityCertificate,
    QuasiGeodesicParams,
    Segment,
    certify_delta,
    certify_morse,
    check_closeness,
    divergence_constants,
    fellow_travel_upgrade,
    glue,
    is_quasi_geodesic,
    local_to_global,
    validate_fellow_travel,
)
from bshadow.errors import HypothesisViolated, InsufficientRadius, InvalidInput, NoValidWindow, PropositionViolated
from bshadow.geometry import (
    MorseConstant,
    classify_pair,
    divergence_profile,
    hausdorff_distance,
    triangle_thinness,
)
from bshadow.group import format_word, segment_from_word

import oracles


def seg(ctx, *words, start=0):
    return Segment(start, tuple(ctx.element(w) for w in words))


def random_geodesic(ctx, start, steps, rng):
    vals = [ctx.mul(start)]
    for _ in range(steps):
        base = ctx.mul(ctx.inv(vals[0]), vals[-1])
        opts = [s for s in ctx.symbols if len(ctx.reduce(base + (s,))) == len(base) + 1]
        vals.append(ctx.reduce(vals[-1] + (rng.choice(opts),)))
    return vals


def geodesic_between(ctx, a, b, rng):
    words, _ = ctx.geodesic_words(ctx.mul(ctx.inv(a), b), 50)
    vals = [a]
    for s in rng.choice(words):
        vals.append(ctx.reduce(vals[-1] + (s,)))
    return vals


# -- delta -------------------------------------------------------------------------


def test_free_group_is_a_tree(f2, f2_cert):
    assert f2_cert.delta == 0 and f2_cert.method == "tree" and f2_cert.stabilized
    scanned = certify_delta(f2, 4, method="exhaustive-thin-triangles")
    assert scanned.delta == 0 and scanned.triangles > 0
    assert triangle_thinness(f2, (), f2.element("a"), f2.element("b")) == 0


def test_z2_delta_grows_with_radius(z2):
    cert = certify_delta(z2, 6)
    assert cert.history == tuple((r, r) for r in range(7))
    assert cert.delta == 6 and not cert.stabilized


@pytest.mark.parametrize("radius", [1, 2, 3])
def test_z2_delta_matches_lattice_oracle(z2, radius):
    assert certify_delta(z2, radius).delta == oracles.lattice_delta(radius)


def test_genus2_delta_pinned(genus2_cert):
    assert genus2_cert.delta == 2
    assert genus2_cert.history == ((0, 0), (1, 0), (2, 2))


def test_delta_budget_marks_truncation(genus2):
    cert = certify_delta(genus2, 2, budget=50)
    assert cert.truncated and cert.triangles == 50 and cert.delta <= 2


def test_certificate_json_round_trip(z2):
    cert = certify_delta(z2, 3)
    assert HyperbolicityCertificate.from_json(cert.to_json()) == cert


def test_tree_method_needs_free_group(z2):
    with pytest.raises(InvalidInput):
        certify_delta(z2, 2, method="tree")


# -- quasi-geodesics ---------------------------------------------------------------


def test_quasi_geodesic_examples(f2):
    assert is_quasi_geodesic(seg(f2, "", "a", "ab", "abb"), QuasiGeodesicParams(1, 0), f2) == (True, None)
    back = seg(f2, "", "a", "")
    assert is_quasi_geodesic(back, QuasiGeodesicParams(1, 0), f2) == (False, (0, 2))
    assert is_quasi_geodesic(back, QuasiGeodesicParams(1, 2), f2) == (True, None)
    # a window of 1 never sees the backtrack
    assert is_quasi_geodesic(back, QuasiGeodesicParams(1, 0, 1), f2)[0]


def test_quasi_geodesic_indices_are_absolute(f2):
    back = seg(f2, "", "a", "", start=5)
    assert is_quasi_geodesic(back, QuasiGeodesicParams(1, 0), f2) == (False, (5, 7))


def test_params_validation():
    with pytest.raises(InvalidInput):
        QuasiGeodesicParams(0, 0)
    with pytest.raises(InvalidInput):
        QuasiGeodesicParams(2, 0)
    with pytest.raises(InvalidInput):
        QuasiGeodesicParams(1, -1)
    p = QuasiGeodesicParams(Fraction(1, 2), 3, 4)
    assert QuasiGeodesicParams.from_json(p.to_json()) == p


@given(st.text(alphabet="aAbB", max_size=10))
def test_reduced_paths_are_geodesics_in_the_tree(w):
    f2 = GroupContext.free(2)
    path = segment_from_word(f2, "", w)
    ok, _ = is_quasi_geodesic(path, QuasiGeodesicParams(1, 0), f2)
    assert ok == (oracles.free_reduce(w) == w)


def test_local_to_global_tree(f2, f2_cert):
    assert local_to_global(QuasiGeodesicParams(1, 0, 2), f2, 8, f2_cert) == QuasiGeodesicParams(1, 0)
    # a window covering the whole path changes nothing
    assert local_to_global(QuasiGeodesicParams(1, 1, 10), f2, 6, f2_cert) == QuasiGeodesicParams(1, 1)


def test_local_to_global_needs_a_long_window(genus2, genus2_cert):
    with pytest.raises(NoValidWindow):
        local_to_global(QuasiGeodesicParams(1, 4, 16), genus2, 3, genus2_cert)


def test_local_to_global_genus2_pinned(genus2, genus2_cert):
    out, report = local_to_global(QuasiGeodesicParams(1, 4, 17), genus2, 5, genus2_cert, with_report=True)
    assert out == QuasiGeodesicParams(1, 4)
    assert report["paths"] > 0


# -- Morse -------------------------------------------------------------------------


def test_morse_geodesic_params_give_zero(f2, genus2):
    assert certify_morse(QuasiGeodesicParams(1, 0), f2, 8).K == 0
    assert certify_morse(QuasiGeodesicParams(1, 0), genus2, 3).K == 0


@pytest.mark.parametrize("eps", [1, 2, 3])
def test_tree_morse_matches_oracle(f2, eps):
    m = certify_morse(QuasiGeodesicParams(1, eps), f2, 6)
    assert m.K == oracles.tree_morse(1, eps, 6)
    assert not m.truncated


def test_morse_genus2_pinned(genus2):
    m = certify_morse(QuasiGeodesicParams(1, 4), genus2, 4)
    assert (m.K, m.K_all, m.truncated) == (2, 2, False)


def test_hausdorff_examples(f2):
    p = seg(f2, "", "a")
    assert hausdorff_distance(p, p, f2) == 0
    # as vertex sets {1, a} and {1, b} are 1 apart; the pointwise gap d(a, b) is 2
    q = seg(f2, "", "b")
    set_oracle = max(
        max(min(oracles.free_distance(format_word(x), format_word(y)) for y in q.values) for x in p.values),
        max(min(oracles.free_distance(format_word(x), format_word(y)) for y in p.values) for x in q.values),
    )
    assert hausdorff_distance(p, q, f2) == set_oracle == 1
    assert max(f2.distance(x, y) for x, y in zip(p.values, q.values)) == 2
    assert hausdorff_distance(seg(f2, "", "a", "aa"), seg(f2, "", "a"), f2) == 1
    assert hausdorff_distance(seg(f2, "a"), seg(f2, "a"), f2) == 0


# -- closeness and fellow travel ---------------------------------------------------


def test_closeness_tree_rays(f2, f2_cert):
    c = seg(f2, "", "a", "ab", "abb", "abbb")
    c2 = seg(f2, "AB", "A", "", "a", "ab")  # D = 2, same ray after the split
    out = check_closeness(Segment(0, c.values), Segment(0, c2.values), f2, f2_cert)
    assert out["D"] == 2 and out["max_distance"] <= 2
    same = check_closeness(c, c, f2, f2_cert)
    assert same["max_distance"] == 0 == same["D"]


def test_closeness_rejects_violations(z2):
    # with a wrong delta = 0 the two lattice geodesics around a square break the bound
    wrong = HyperbolicityCertificate(0, 8)
    c = segment_from_word(z2, "", "aabb", 0)
    c2 = segment_from_word(z2, "", "bbaa", 0)
    with pytest.raises(PropositionViolated) as err:
        check_closeness(c, c2, z2, wrong)
    assert err.value.witness["t"] == 2


def test_closeness_genus2_random_pairs(genus2, genus2_cert):
    rng = random.Random(2)
    for _ in range(30):
        n = rng.randint(2, 6)
        c = random_geodesic(genus2, "", n, rng)
        start = genus2.mul(rng.choice(genus2.ball(1)))
        end = genus2.mul(c[-1], rng.choice(genus2.ball(1)))
        if genus2.distance(start, end) != n:
            continue
        c2 = geodesic_between(genus2, start, end, rng)
        out = check_closeness(Segment(0, tuple(c)), Segment(0, tuple(c2)), genus2, genus2_cert)
        assert out["max_distance"] <= out["bound"]


def test_fellow_travel_upgrade_formula(f2_cert, genus2_cert):
    assert fellow_travel_upgrade(5, 2, f2_cert) == 7
    assert fellow_travel_upgrade(4, 4, genus2_cert) == 4 + 3 * 2
    with pytest.raises(InvalidInput):
        fellow_travel_upgrade(4, 3, genus2_cert)


def test_fellow_travel_validated(f2, f2_cert, genus2, genus2_cert):
    tree = validate_fellow_travel(5, 2, f2_cert, f2)
    assert tree["l"] == 7 and tree["pairs"] > 0 and tree["violations"] == []
    g2 = validate_fellow_travel(4, 4, genus2_cert, genus2, samples=30, seed=1)
    assert g2["l"] == 10 and g2["pairs"] == 30 and g2["violations"] == []


# -- divergence --------------------------------------------------------------------


@pytest.mark.parametrize("C", [1, 2, 3])
def test_tree_divergence(f2, f2_cert, C):
    morse = MorseConstant(0, QuasiGeodesicParams(1, 0), 8)
    d = divergence_constants(1, C, QuasiGeodesicParams(1, 0), f2, 30, f2_cert, morse, samples=300, seed=C)
    assert d.delta1 == 1 and d.exceeding > 0 and not d.vacuous
    # once split, the distance to the other ray grows by one per step, from 2 at
    # the first exceedance to past delta1 + C = C + 1
    assert d.delta2 == C


def test_divergence_small_ball_cannot_certify_a_jump(f2, f2_cert):
    # exhaustive over 36 x 36 geodesic pairs: splits are seen, but no jump fits
    # inside the window where truncation cannot matter
    morse = MorseConstant(0, QuasiGeodesicParams(1, 0), 8)
    with pytest.raises(InsufficientRadius) as err:
        divergence_constants(0, 1, QuasiGeodesicParams(1, 0), f2, 3, f2_cert, morse)
    assert err.value.witness["t0"] <= err.value.witness["valid"]


def test_divergence_profile_of_split_tree_rays(f2):
    c = seg(f2, "", "a", "aa", "aaa", "aaaa")
    c2 = seg(f2, "", "b", "bb", "bbb", "bbbb")
    assert divergence_profile(c, c2, f2) == [0, 1, 2, 3, 4]
    assert divergence_profile(c, c, f2) == [0] * 5


def test_classify_pair_branches():
    assert classify_pair([0, 0, 0], 3, 1, 1, 3)["branch"] == "asymptotic"
    assert classify_pair([0, 2, 3, 4], 4, 1, 2, 3) == {"branch": "diverging", "t0": 2, "ok": True, "value": 4}
    assert classify_pair([0, 2, 2, 2], 4, 1, 2, 3)["ok"] is False
    assert classify_pair([0, 2, 3], 3, 1, 5, 3)["branch"] == "undetermined"


def test_divergence_genus2_is_vacuous_at_desk_scale(genus2, genus2_cert):
    params = QuasiGeodesicParams(1, 4)
    morse = MorseConstant(3, params, 6)
    d = divergence_constants(1, 37, params, genus2, 6, genus2_cert, morse, samples=200, seed=0)
    assert (d.delta1, d.delta2, d.vacuous, d.exceeding) == (15, 0, True, 0)


# -- gluing ------------------------------------------------------------------------


def test_glue_overlapping_geodesic(f2, f2_cert):
    c1 = segment_from_word(f2, "", "abababab", 0)
    c2 = segment_from_word(f2, "aba", "babab", 3)
    out = glue(c1, c2, 3, f2, f2_cert)
    assert out.is_geodesic(f2) and len(out) == 9


def test_glue_tree_rays_split_late(f2, f2_cert):
    n = 3
    c1 = segment_from_word(f2, "", "aaaaaaa", 0)
    c2 = segment_from_word(f2, "aaa", "aaab", 0)
    out = glue(c1, c2, n, f2, f2_cert)
    assert is_quasi_geodesic(out, QuasiGeodesicParams(1, 0, n), f2)[0]
    assert [format_word(v) for v in out.values][-2:] == ["aaaaaa", "aaaaaab"]


def test_glue_hypotheses(f2, f2_cert):
    c1 = segment_from_word(f2, "", "aaaaaaa", 0)
    with pytest.raises(HypothesisViolated) as err:
        glue(c1, segment_from_word(f2, "aaa", "bbbb", 0), 3, f2, f2_cert)
    assert any("d(c1(n+1)" in f for f in err.value.failed)
    with pytest.raises(HypothesisViolated):
        glue(c1, segment_from_word(f2, "aa", "aaaa", 0), 3, f2, f2_cert)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_glue_genus2_property(seed):
    g2 = _genus2()
    cert = HyperbolicityCertificate(2, 2)  # the value pinned above
    rng = random.Random(seed)
    n = 8 * cert.delta + 1
    c1 = random_geodesic(g2, "", 2 * n + 2, rng)
    c2 = geodesic_between(g2, c1[n], c1[2 * n], rng)
    for _ in range(rng.randint(0, 4)):
        base = g2.mul(g2.inv(c2[0]), c2[-1])
        opts = [s for s in g2.symbols if len(g2.reduce(base + (s,))) == len(base) + 1]
        c2.append(g2.reduce(c2[-1] + (rng.choice(opts),)))
    try:
        out = glue(Segment(0, tuple(c1)), Segment(0, tuple(c2)), n, g2, cert)
    except HypothesisViolated:
        return
    assert is_quasi_geodesic(out, QuasiGeodesicParams(1, 2 * cert.delta, n), g2)[0]


_CACHE = {}


def _genus2():
    if "g2" not in _CACHE:
        from bshadow.io import load_group
        _CACHE["g2"] = load_group("builtin:genus2.json")
    return _CACHE["g2"]
