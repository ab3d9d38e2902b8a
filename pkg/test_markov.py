"""
Tests for M-moves, inverse stabilization detection, M-path search and the Markov experiment
"""

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from doodlekit.markov import (
    MMove,
    MPath,
    MoveRangeError,
    apply_m1,
    apply_m2,
    apply_m3,
    apply_m4,
    apply_move,
    detect_inverse_m3_m4,
    m_search,
    markov_experiment,
    parse_move,
    parse_path,
    summary_text,
)
from doodlekit.moves import equivalent_doodles
from doodlekit.plane_map import canonical_code, closure
from doodlekit.twinword import StrandMismatchError, TwinWord, normal_form, parse_word


def stabilization_cases():
    return st.integers(1, 4).flatmap(
        lambda n: st.tuples(
            st.lists(st.integers(1, max(1, n - 1)), max_size=5 if n > 1 else 0).map(lambda ks: TwinWord(n, tuple(ks))),
            st.integers(1, n),
        )
    )


def test_m1_swaps_the_trivial_strand():
    assert apply_m1(parse_word("tw 3: s1")) == parse_word("tw 3: s2")
    assert apply_m1(parse_word("tw 3: s2"), forward=False) == parse_word("tw 3: s1")
    assert apply_m1(TwinWord.identity(2)) == TwinWord.identity(2)
    with pytest.raises(MoveRangeError):
        apply_m1(parse_word("tw 3: s2"))
    with pytest.raises(MoveRangeError):
        apply_m1(parse_word("tw 3: s1"), forward=False)


def test_m1_looks_through_cancelling_letters():
    assert apply_m1(parse_word("tw 3: s1 s2 s2")) == parse_word("tw 3: s2")


def test_m1_closures_differ_by_circle_shift():
    for text in ("tw 3: s1", "tw 4: s1 s2 s1", "tw 4: s2 s1"):
        w = parse_word(text)
        assert canonical_code(closure(w)) == canonical_code(closure(apply_m1(w)))


def test_m2_conjugates():
    beta = parse_word("tw 3: s2")
    assert apply_m2(beta, TwinWord.identity(3)) == beta
    assert normal_form(apply_m2(beta, beta)) == beta
    assert apply_m2(beta, parse_word("tw 3: s1")) == parse_word("tw 3: s1 s2 s1")
    with pytest.raises(StrandMismatchError):
        apply_m2(beta, parse_word("tw 2: s1"))


def test_m3_and_m4_formulas():
    assert apply_m3(TwinWord.identity(1), 1) == parse_word("tw 2: s1")
    assert apply_m3(parse_word("tw 2: s1"), 2) == parse_word("tw 3: s2 s1 s2 s1")
    assert apply_m4(TwinWord.identity(1), 1) == parse_word("tw 2: s1")
    assert apply_m4(parse_word("tw 2: s1"), 1) == parse_word("tw 3: s1 s2 s1 s2")
    for bad in (0, 3):
        with pytest.raises(MoveRangeError):
            apply_m3(parse_word("tw 2: s1"), bad)
        with pytest.raises(MoveRangeError):
            apply_m4(parse_word("tw 2: s1"), bad)


@given(stabilization_cases())
def test_stabilization_lengths(case):
    beta, i = case
    n = beta.strands
    assert len(apply_m3(beta, i)) == len(beta) + 2 * i - 1
    assert len(apply_m4(beta, i)) == len(beta) + 2 * (n - i) + 1
    assert apply_m3(beta, i).strands == n + 1


def test_detect_inverse_stabilizations():
    found = detect_inverse_m3_m4(parse_word("tw 3: s2 s1 s2 s1"))
    assert found == [(MMove("M3_inv", index=2), parse_word("tw 2: s1"))]
    assert detect_inverse_m3_m4(TwinWord.identity(1)) == []
    assert detect_inverse_m3_m4(TwinWord.identity(3)) == []


@given(stabilization_cases(), st.booleans())
@settings(max_examples=150)
def test_stabilizations_are_detected(case, use_m3):
    beta, i = case
    kind = "M3" if use_m3 else "M4"
    w = apply_m3(beta, i) if use_m3 else apply_m4(beta, i)
    recovered = [rest for move, rest in detect_inverse_m3_m4(w) if move == MMove(f"{kind}_inv", index=i)]
    assert len(recovered) == 1
    assert normal_form(recovered[0]) == normal_form(beta)
    assert normal_form(apply_move(w, MMove(f"{kind}_inv", index=i))) == normal_form(beta)


@given(stabilization_cases(), st.sampled_from(["M3", "M4"]))
@settings(max_examples=100, deadline=None)
def test_stabilizations_keep_the_closure(case, kind):
    beta, i = case
    w = apply_move(beta, MMove(kind, index=i))
    assert equivalent_doodles(closure(w), closure(beta))


def test_inverse_move_needs_the_pattern():
    with pytest.raises(MoveRangeError):
        apply_move(parse_word("tw 3: s1"), MMove("M3_inv", index=2))


def test_move_text():
    assert str(MMove("M2", conjugator=parse_word("tw 3: s1"))) == "M2 tw 3: s1"
    assert str(MMove("M4_inv", index=2)) == "M4_inv 2"
    assert parse_move("M2 tw 3: s1 s2") == MMove("M2", conjugator=parse_word("tw 3: s1 s2"))
    assert parse_move("M1_inv") == MMove("M1_inv")
    for bad in ("M5", "M3 x", "M1 2", "M2"):
        with pytest.raises(ValueError):
            parse_move(bad)


def test_search_finds_single_conjugation():
    beta = parse_word("tw 3: s2")
    target = apply_m2(beta, parse_word("tw 3: s1"))
    path = m_search(beta, target, max_strands=3, max_depth=4, generator_cap=1)
    assert path is not None
    assert len(path) == 1
    assert path.verify()


@given(st.integers(2, 4).flatmap(
    lambda n: st.lists(st.integers(1, n - 1), max_size=5).map(lambda ks: TwinWord(n, tuple(ks)))
))
@settings(max_examples=100, deadline=None)
def test_search_finds_any_single_conjugation(beta):
    target = apply_m2(beta, TwinWord(beta.strands, (1,)))
    path = m_search(beta, target, max_strands=beta.strands, max_depth=2, generator_cap=1)
    assert path is not None
    assert len(path) == (0 if normal_form(target) == normal_form(beta) else 1)
    assert path.verify()


def test_search_destabilizes():
    path = m_search(parse_word("tw 2: s1"), TwinWord.identity(1), max_strands=3, max_depth=2, generator_cap=2)
    assert path is not None
    assert len(path) <= 2
    assert path.verify()


def test_search_between_cyclic_rotations():
    path = m_search(parse_word("tw 3: s1 s2"), parse_word("tw 3: s2 s1"), max_strands=4, max_depth=6,
                    generator_cap=2)
    assert path is not None
    assert path.verify()
    assert parse_path(path.to_text().splitlines()) == path


def test_search_result_does_not_depend_on_workers():
    a, b = parse_word("tw 3: s1 s2 s1"), TwinWord.identity(2)
    serial = m_search(a, b, max_strands=4, max_depth=4, generator_cap=2)
    threaded = m_search(a, b, max_strands=4, max_depth=4, generator_cap=2, workers=3)
    assert serial == threaded


def test_search_reports_not_found():
    assert m_search(TwinWord.identity(1), TwinWord.identity(2), max_strands=2, max_depth=3, generator_cap=1) is None


def test_path_verification_catches_bad_paths():
    bad = MPath(parse_word("tw 2: s1"), (MMove("M1"),), parse_word("tw 2: s1"))
    assert not bad.verify()


def test_small_experiment_report():
    caps = {"depth": 4, "strands": 3, "conj_cap": 1, "letters": 8}
    report = markov_experiment(seed=3, n_max=2, len_max=2, m_seq_max=2, search_caps=caps, trials=8)
    assert report.forward.trials == 8
    assert report.forward.passes == 8
    assert report.reverse.pair_count == sum(b.connected_pairs + len(b.inconclusive_pairs)
                                            for b in report.reverse.buckets)
    members = sorted(m for b in report.reverse.buckets for m in b.members)
    assert members == ["tw 2:", "tw 2: s1"]
    doc = json.loads(report.model_dump_json())
    assert list(doc) == ["seed", "caps", "forward", "reverse"]
    assert "forward: 8/8" in summary_text(report)
