"""
Tests for diagrams: closures, validation, faces, Seifert circles, canonical codes and the file format
"""

import itertools
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from doodlekit.plane_map import (
    Diagram,
    DiagramError,
    canonical_code,
    closure,
    components,
    dumps,
    faces,
    loads,
    seifert_smooth,
    validate,
)
from doodlekit.twinword import TwinWord, parse_word, permutation


def brute_force_isomorphic(d1: Diagram, d2: Diagram) -> bool:
    """Search for a dart bijection preserving rotation, pairing and direction (connected diagrams)."""
    if (len(d1.darts), d1.free_circles) != (len(d2.darts), d2.free_circles):
        return False
    if not d1.darts:
        return True
    anchor = d1.darts[0]
    for image in d2.darts:
        mapping = {anchor: image}
        stack = [anchor]
        ok = True
        while stack and ok:
            x = stack.pop()
            for f1, f2 in ((d1.ccw, d2.ccw), (d1.mate, d2.mate)):
                y, z = f1(x), f2(mapping[x])
                if y in mapping:
                    ok = mapping[y] == z
                else:
                    mapping[y] = z
                    stack.append(y)
                if not ok:
                    break
        if not ok or len(set(mapping.values())) != len(mapping):
            continue
        if all(d1.is_outward(x) == d2.is_outward(mapping[x]) for x in mapping):
            return True
    return False


def test_closure_of_identity_is_free_circles():
    d = closure(TwinWord.identity(3))
    assert d.crossing_count == 0
    assert d.free_circles == 3
    assert components(d) == 3
    assert validate(d) == []


def test_closure_of_single_letter():
    """Test the figure-eight: one crossing, two loops and a middle face"""
    d = closure(parse_word("tw 2: s1"))
    assert d.crossings == ((0, 1, 2, 3),)
    assert d.edges == ((0, 3), (1, 2))
    assert d.outward == frozenset({2, 3})
    assert sorted(len(f) for f in faces(d)) == [1, 1, 2]
    assert components(d) == 1
    assert validate(d) == []
    assert d.region_count == 3


def test_closure_of_double_letter_faces():
    d = closure(parse_word("tw 2: s1 s1"))
    assert sorted(faces(d)) == [(0, 4), (1, 7), (2, 6), (3, 5)]
    assert components(d) == 2


@given(st.integers(1, 5).flatmap(
    lambda n: st.lists(st.integers(1, max(1, n - 1)), max_size=10 if n > 1 else 0).map(lambda ks: TwinWord(n, tuple(ks)))))
@settings(max_examples=80)
def test_closures_are_valid_and_count_components(w):
    d = closure(w)
    assert validate(d) == []
    assert components(d) == permutation(w).cycle_count()


@given(st.integers(1, 5).flatmap(
    lambda n: st.lists(st.integers(1, max(1, n - 1)), max_size=10 if n > 1 else 0).map(lambda ks: TwinWord(n, tuple(ks)))))
@settings(max_examples=80)
def test_closures_smooth_to_concentric_circles(w):
    family = seifert_smooth(closure(w))
    assert family.circle_count == w.strands
    assert family.concentric
    assert family.coherently_oriented


def test_degree_violations_are_reported_alone():
    d = Diagram.build([(0, 1, 2)], [(0, 1)], [0])
    assert validate(d) == ["crossing 0: degree 3"]


def test_orientation_violations():
    d = Diagram.build([(0, 1, 2, 3)], [(1, 2), (0, 3)], [1, 2, 3])
    problems = validate(d)
    assert "crossing 0: strand 1 not transverse" in problems
    assert "edge (1, 2): both darts out" in problems


def test_torus_map_fails_euler_check():
    """Test a one-crossing map whose only face makes it a torus"""
    d = Diagram.build([(0, 1, 2, 3)], [(0, 2), (1, 3)], [2, 3])
    assert len(d.faces) == 1
    assert validate(d) == ["Euler characteristic 0, expected 2"]


def test_union_of_two_figure_eights():
    """Test two pieces sharing a region: valid, but the Seifert circles are not nested"""
    eight = closure(parse_word("tw 2: s1"))
    d = eight.union(eight, host_dart=1, guest_dart=1)
    assert validate(d) == []
    assert len(d.pieces) == 2
    assert components(d) == 2
    family = seifert_smooth(d)
    assert family.circle_count == 4
    assert not family.concentric


def test_union_requires_anchor_darts():
    eight = closure(parse_word("tw 2: s1"))
    with pytest.raises(DiagramError):
        eight.union(eight)
    assert eight.union(closure(TwinWord.identity(2))).free_circles == 2


def test_canonical_code_ignores_free_circle_position():
    left = closure(parse_word("tw 3: s1"))
    right = closure(parse_word("tw 3: s2"))
    assert canonical_code(left) == canonical_code(right)
    assert canonical_code(left) != canonical_code(closure(parse_word("tw 2: s1")))


def test_canonical_code_agrees_with_brute_force_isomorphism():
    diagrams = [closure(TwinWord(3, letters)) for letters in itertools.product((1, 2), repeat=2)]
    diagrams += [closure(TwinWord(3, letters)) for letters in itertools.product((1, 2), repeat=3)]
    for d1, d2 in itertools.combinations(diagrams, 2):
        assert (canonical_code(d1) == canonical_code(d2)) == brute_force_isomorphic(d1, d2)


def test_cyclic_rotation_gives_same_code():
    assert canonical_code(closure(parse_word("tw 3: s1 s2"))) == canonical_code(closure(parse_word("tw 3: s2 s1")))


@given(st.data())
@settings(max_examples=40)
def test_canonical_code_is_relabeling_invariant(data):
    n = data.draw(st.integers(2, 4))
    letters = data.draw(st.lists(st.integers(1, n - 1), min_size=1, max_size=6))
    d = closure(TwinWord(n, tuple(letters)))
    new_names = data.draw(st.permutations(range(100, 100 + len(d.darts))))
    dart_map = dict(zip(d.darts, new_names))
    order = data.draw(st.permutations(range(d.crossing_count)))
    shifts = data.draw(st.lists(st.integers(0, 3), min_size=d.crossing_count, max_size=d.crossing_count))
    relabeled = d.relabel(dart_map, order, shifts)
    assert validate(relabeled) == []
    assert canonical_code(relabeled) == canonical_code(d)


def test_file_round_trip():
    for text in ("tw 3: s1 s2 s1", "tw 3:", "tw 4: s1 s3 s3"):
        d = closure(parse_word(text))
        assert loads(dumps(d)) == d


def test_file_key_order():
    doc = json.loads(dumps(closure(parse_word("tw 2: s1"))))
    assert list(doc) == ["crossings", "edges", "dart_directions", "free_circles", "regions"]
    assert doc["dart_directions"] == {"0": "in", "1": "in", "2": "out", "3": "out"}


def test_loads_rejects_bad_files():
    with pytest.raises(DiagramError):
        loads("{not json")
    with pytest.raises(DiagramError) as info:
        loads(json.dumps({"crossings": [[0, 1, 2, 3]], "edges": [[0, 3], [1, 2]],
                          "dart_directions": {"0": "in", "1": "in", "2": "out"}}))
    assert "dart 3: no direction" in info.value.violations
    with pytest.raises(DiagramError) as info:
        loads(json.dumps({"crossings": [[0, 1, 2, 3]], "edges": [[0, 2], [1, 3]],
                          "dart_directions": {"0": "in", "1": "in", "2": "out", "3": "out"}}))
    assert info.value.violations == ["Euler characteristic 0, expected 2"]
