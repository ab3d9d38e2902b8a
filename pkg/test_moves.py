"""
Tests for R1/R2 moves, lens grids, generalized bending and reduction
"""

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from doodlekit.moves import (
    IRREGULAR,
    REGULAR,
    BendingSite,
    Monogon,
    NotApplicableError,
    SiteError,
    StaleSiteError,
    apply_generalized_bending,
    apply_generalized_tightening,
    apply_r1,
    apply_r2_add,
    apply_r2_remove,
    apply_script_line,
    bending_lens,
    decompose_bendings,
    equivalent_doodles,
    find_bigons,
    find_generalized_biangles,
    find_monogons,
    reduce_minimal,
    reduce_with_script,
    replay_script,
    tighten_sequence,
)
from doodlekit.plane_map import canonical_code, closure, components, dumps, seifert_smooth, validate
from doodlekit.twinword import TwinWord, multiply, parse_word


def cl(text):
    return closure(parse_word(text))


def words():
    return st.integers(2, 4).flatmap(
        lambda n: st.lists(st.integers(1, n - 1), min_size=1, max_size=6).map(lambda ks: TwinWord(n, tuple(ks)))
    )


def kinked_words():
    """The last letter crosses an otherwise untouched last strand."""
    return st.integers(1, 4).flatmap(
        lambda n: st.lists(st.integers(1, max(1, n - 1)), max_size=6 if n > 1 else 0).map(
            lambda ks: multiply(TwinWord(n, tuple(ks)).embed(n + 1), TwinWord(n + 1, (n,)))
        )
    )


def test_figure_eight_has_one_monogon():
    d = cl("tw 2: s1")
    monogons = find_monogons(d)
    assert len(monogons) == 1
    reduced = apply_r1(d, monogons[0])
    assert reduced.crossing_count == 0
    assert reduced.free_circles == 1
    assert validate(reduced) == []


def test_stale_monogon_is_rejected():
    with pytest.raises(StaleSiteError):
        apply_r1(cl("tw 2: s1 s1"), Monogon(0, 0))


def test_bigons_of_double_letter():
    """Test the four bigon faces: lens and band are regular, the other two irregular"""
    bigons = find_bigons(cl("tw 2: s1 s1"))
    assert len(bigons) == 4
    assert sorted(b.kind for b in bigons) == [IRREGULAR, IRREGULAR, REGULAR, REGULAR]
    kinds = {b.darts: b.kind for b in bigons}
    assert kinds[(0, 4)] == IRREGULAR
    assert kinds[(1, 7)] == REGULAR


def test_r2_remove_frees_both_circles():
    d = cl("tw 2: s1 s1")
    reduced = apply_r2_remove(d, find_bigons(d)[0])
    assert reduced.crossing_count == 0
    assert reduced.free_circles == 2
    assert validate(reduced) == []


def test_bending_two_free_circles():
    target = canonical_code(cl("tw 2: s1 s1"))
    for second_outward in (True, False):
        bent = apply_r2_add(closure(TwinWord.identity(2)), BendingSite(None, None, second_outward=second_outward))
        assert bent.crossing_count == 2
        assert bent.free_circles == 0
        assert validate(bent) == []
        assert canonical_code(bent) == target


def test_bending_on_a_face_is_undone_by_reduction():
    d = cl("tw 2: s1")
    bent, lens = bending_lens(d, BendingSite((1,), (3,)))
    assert bent.crossing_count == 3
    assert validate(bent) == []
    assert set(lens.darts) in [set(b.darts) for b in find_bigons(bent)]
    assert equivalent_doodles(bent, d)


def test_bending_needs_cofacial_arcs():
    with pytest.raises(SiteError, match="co-facial"):
        apply_r2_add(cl("tw 2: s1"), BendingSite((0,), (2,)))
    with pytest.raises(SiteError):
        apply_r2_add(cl("tw 2: s1"), BendingSite(None, None))


def test_generalized_biangles_of_double_letter():
    """Test that the lens is reported once although two irregular faces span it"""
    d = cl("tw 2: s1 s1")
    found = find_generalized_biangles(d)
    assert [(g.lens, g.partner, g.k, g.l) for g in found] == [(0, 4, 1, 1)]
    tightened = apply_generalized_tightening(d, found[0])
    assert tightened.crossing_count == 0
    assert tightened.free_circles == 2
    grids, final = decompose_bendings(d)
    assert [(g.k, g.l) for g in grids] == [(1, 1)]
    assert final.crossing_count == 0
    assert decompose_bendings(closure(TwinWord.identity(3))) == ([], closure(TwinWord.identity(3)))


@pytest.mark.parametrize("text, shape, strands", [
    ("tw 3: s2 s1 s1 s2", [1, 2], 3),
    ("tw 4: s2 s1 s3 s2 s2 s1 s3 s2", [2, 2], 4),
])
def test_tightening_a_larger_lens_grid(text, shape, strands):
    """Test that a k x l grid with kl > 1 is found whole and tightened in one step"""
    d = cl(text)
    found = find_generalized_biangles(d)
    assert len({g.crossings for g in found}) == len(found)
    g = max(found, key=lambda g: g.k * g.l)
    assert sorted((g.k, g.l)) == shape
    assert len(g.crossings) == 2 * g.k * g.l == d.crossing_count
    tightened = apply_generalized_tightening(d, g)
    assert validate(tightened) == []
    assert tightened.crossing_count == 0
    assert tightened.free_circles == strands
    assert seifert_smooth(tightened).circle_count == seifert_smooth(d).circle_count


def test_generalized_tightening_rejects_non_annular():
    lens = cl("tw 2: s1 s1")
    d = lens.union(lens, host_dart=1, guest_dart=1)
    assert not seifert_smooth(d).concentric
    found = find_generalized_biangles(d)
    assert found
    with pytest.raises(NotApplicableError, match="annular"):
        apply_generalized_tightening(d, found[0])
    assert decompose_bendings(d) is None


@pytest.mark.parametrize("text", ["tw 2: s1", "tw 3: s1 s2", "tw 3: s1 s2 s1 s2", "tw 4: s1 s3 s2"])
def test_bending_one_seifert_circle_adds_two_circles(text):
    """Test that bending two arcs of one Seifert circle adds two circles"""
    d = cl(text)
    family = seifert_smooth(d)
    bent_pairs = 0
    for face in d.faces:
        for x in face:
            for y in face:
                if x == y or d.mate(x) == y or family.edge_circle[x] != family.edge_circle[y]:
                    continue
                bent = apply_r2_add(d, BendingSite((x,), (y,)))
                assert seifert_smooth(bent).circle_count == family.circle_count + 2
                bent_pairs += 1
    assert bent_pairs


@pytest.mark.parametrize("text", ["tw 2: s1 s1", "tw 3: s1 s2 s2 s1", "tw 4: s1 s3 s1 s2 s2"])
def test_removing_a_regular_bigon_keeps_seifert_circles(text):
    d = cl(text)
    before = seifert_smooth(d).circle_count
    regular = [b for b in find_bigons(d) if not b.irregular]
    assert regular
    for b in regular:
        assert seifert_smooth(apply_r2_remove(d, b)).circle_count == before


@given(kinked_words())
@settings(max_examples=100, deadline=None)
def test_r1_keeps_components(w):
    """Test that R1 removes one crossing and keeps the component count"""
    d = closure(w)
    monogons = find_monogons(d)
    assert monogons
    for m in monogons:
        reduced = apply_r1(d, m)
        assert validate(reduced) == []
        assert reduced.crossing_count == d.crossing_count - 1
        assert components(reduced) == components(d)


@given(words(), st.data())
@settings(max_examples=100, deadline=None)
def test_bending_then_removing_the_lens_restores_the_diagram(w, data):
    d = closure(w)
    faces = [face for face in d.faces if len(face) >= 2]
    assume(faces)
    face = data.draw(st.sampled_from(faces))
    x, y = data.draw(st.permutations(face))[:2]
    assume(d.mate(x) != y)
    bent, lens = bending_lens(d, BendingSite((x,), (y,)))
    assert bent.crossing_count == d.crossing_count + 2
    back = apply_r2_remove(bent, lens)
    assert validate(back) == []
    assert canonical_code(back) == canonical_code(d)


def test_generalized_bending_maximality():
    """Test that a free circle must be bent across every arc it can reach"""
    d = cl("tw 3: s1")
    with pytest.raises(NotApplicableError, match="maximal"):
        apply_generalized_bending(d, BendingSite(None, (0,)))
    bent = apply_generalized_bending(d, BendingSite(None, (0, 1)))
    assert bent.crossing_count == 5
    assert bent.free_circles == 0
    assert validate(bent) == []
    assert equivalent_doodles(bent, d)


def test_generalized_bending_rejects_non_annular():
    eight = cl("tw 2: s1")
    d = eight.union(eight, host_dart=1, guest_dart=1)
    with pytest.raises(NotApplicableError, match="annular"):
        apply_generalized_bending(d, BendingSite((1,), (3,)))


def test_generalized_bending_is_repeatable():
    d = cl("tw 5: s1 s2")
    assert d.free_circles == 2
    site = BendingSite(None, None, host=d.darts[0])
    assert apply_generalized_bending(d, site) == apply_generalized_bending(d, site)

    d = cl("tw 3: s1")
    site = BendingSite(None, (0, 1))
    once, twice = apply_generalized_bending(d, site), apply_generalized_bending(d, site)
    assert once == twice
    assert dumps(once) == dumps(twice)


@pytest.mark.parametrize("text", ["tw 2: s1 s1", "tw 3: s1 s2 s1", "tw 3: s1 s1 s2 s2", "tw 4: s1 s3 s2 s2 s1"])
def test_reduction_is_confluent(text):
    d = cl(text)
    codes = {canonical_code(reduce_minimal(d))}
    for seed in range(6):
        reduced = reduce_minimal(d, "seeded-random", seed)
        assert validate(reduced) == []
        codes.add(canonical_code(reduced))
    assert len(codes) == 1


def test_reduction_script_replays():
    d = cl("tw 3: s1 s1 s2 s2")
    reduced, script = reduce_with_script(d)
    assert script
    assert all(line.split()[0] in ("R1", "R2-") for line in script)
    assert replay_script(d, script) == reduced


def test_conjugate_closures_are_equivalent():
    assert equivalent_doodles(cl("tw 3: s1 s2 s1"), cl("tw 3: s2"))
    assert equivalent_doodles(cl("tw 2: s1"), closure(TwinWord.identity(1)))
    assert not equivalent_doodles(cl("tw 2: s1"), closure(TwinWord.identity(2)))


def test_tightening_removes_only_irregular_bigons():
    rng = np.random.default_rng(7)
    visited = tighten_sequence(cl("tw 2: s1 s1"), rng)
    assert len(visited) == 2
    assert visited[-1].crossing_count == 0


def test_script_errors():
    d = cl("tw 2: s1")
    with pytest.raises(SiteError):
        apply_script_line(d, "XX 1")
    with pytest.raises(SiteError):
        apply_script_line(d, "R1 one")
    with pytest.raises(StaleSiteError):
        apply_script_line(d, "R2- 0 1")
    assert apply_script_line(d, "R1 0").crossing_count == 0
