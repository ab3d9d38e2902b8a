"""
Tests for twin words: grammar, normal forms, products and strand permutations
"""

from collections import deque

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from doodlekit.twinword import (
    GeneratorRangeError,
    StrandMismatchError,
    StrandPermutation,
    TwinWord,
    WordSyntaxError,
    enumerate_words,
    equal,
    inverse,
    multiply,
    normal_form,
    parse_word,
    permutation,
    tensor,
)


def words(min_strands=2, max_strands=5, max_size=8):
    return st.integers(min_strands, max_strands).flatmap(
        lambda n: st.lists(st.integers(1, n - 1), max_size=max_size).map(lambda ks: TwinWord(n, tuple(ks)))
    )


def rewrite_closure_min(letters):
    """Least word reachable by cancelling s_i s_i and swapping distant neighbours."""
    start = tuple(letters)
    seen = {start}
    queue = deque([start])
    while queue:
        w = queue.popleft()
        for p in range(len(w) - 1):
            a, b = w[p], w[p + 1]
            if a == b:
                nxt = w[:p] + w[p + 2:]
            elif abs(a - b) > 1:
                nxt = w[:p] + (b, a) + w[p + 2:]
            else:
                continue
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return min(seen, key=lambda w: (len(w), w))


def test_parse_and_print():
    """Test the text grammar round trip"""
    w = parse_word("tw 4: s1 s3 s2")
    assert w == TwinWord(4, (1, 3, 2))
    assert str(w) == "tw 4: s1 s3 s2"
    assert parse_word(str(w)) == w
    assert str(parse_word("  tw 3:")) == "tw 3:"


def test_parse_errors_carry_position():
    """Test that syntax errors report where parsing stopped"""
    with pytest.raises(WordSyntaxError) as info:
        parse_word("tw 3: s1 x2")
    assert info.value.position == 9

    with pytest.raises(WordSyntaxError) as info:
        parse_word("braid 3: s1")
    assert info.value.position == 0


def test_generator_out_of_range():
    with pytest.raises(GeneratorRangeError) as info:
        parse_word("tw 3: s1 s3")
    assert info.value.letter == 3
    with pytest.raises(GeneratorRangeError):
        parse_word("tw 1: s1")


@pytest.mark.parametrize("text, expected", [
    ("tw 2: s1 s1", "tw 2:"),
    ("tw 4: s3 s1", "tw 4: s1 s3"),
    ("tw 4: s1 s3 s1", "tw 4: s3"),
    ("tw 3: s1 s2 s1", "tw 3: s1 s2 s1"),
    ("tw 5: s4 s1 s3", "tw 5: s1 s4 s3"),
    ("tw 4: s2 s1 s3 s2", "tw 4: s2 s1 s3 s2"),
])
def test_normal_form_examples(text, expected):
    assert str(normal_form(parse_word(text))) == expected


def test_equal_and_mismatch():
    assert equal(parse_word("tw 4: s1 s3"), parse_word("tw 4: s3 s1"))
    assert not equal(parse_word("tw 3: s1 s2"), parse_word("tw 3: s2 s1"))
    with pytest.raises(StrandMismatchError):
        equal(parse_word("tw 2: s1"), parse_word("tw 3: s1"))


def test_multiply_keeps_letters():
    a, b = parse_word("tw 3: s1"), parse_word("tw 3: s1 s2")
    assert multiply(a, b).letters == (1, 1, 2)
    with pytest.raises(StrandMismatchError):
        multiply(a, parse_word("tw 2: s1"))


def test_tensor_and_shift():
    a, b = parse_word("tw 2: s1"), parse_word("tw 3: s2 s1")
    assert tensor(a, b) == TwinWord(5, (1, 4, 3))
    assert a.shift(1) == TwinWord(3, (2,))
    assert a.embed(4) == TwinWord(4, (1,))


def test_permutation_examples():
    """Test strand tracking: images[k-1] is where the strand entering at k leaves"""
    assert permutation(parse_word("tw 3: s1")).images == (2, 1, 3)
    assert permutation(parse_word("tw 3: s1 s2")).images == (3, 1, 2)
    assert permutation(parse_word("tw 3: s1")).cycle_count() == 2
    assert permutation(TwinWord.identity(4)) == StrandPermutation.identity(4)


def test_enumerate_words_shortlex():
    listed = list(enumerate_words(3, 2))
    assert len(listed) == 7
    assert listed[0] == TwinWord(3)
    assert [w.letters for w in listed[1:3]] == [(1,), (2,)]
    assert list(enumerate_words(1, 3)) == [TwinWord(1)]


@given(words())
def test_normal_form_is_idempotent_and_reduced(w):
    nf = normal_form(w)
    assert normal_form(nf) == nf
    assert nf.is_reduced
    assert len(nf) <= len(w)


@given(words(max_size=7))
@settings(max_examples=150)
def test_normal_form_matches_rewrite_oracle(w):
    assert normal_form(w).letters == rewrite_closure_min(w.letters)


@given(words())
def test_product_with_inverse_is_identity(w):
    assert normal_form(multiply(w, inverse(w))) == TwinWord.identity(w.strands)


@given(words(max_size=4), words(max_size=4), words(max_size=4))
def test_tensor_is_associative(a, b, c):
    assert tensor(tensor(a, b), c) == tensor(a, tensor(b, c))


@given(st.integers(2, 5).flatmap(
    lambda n: st.tuples(*[st.lists(st.integers(1, n - 1), max_size=6).map(lambda ks: TwinWord(n, tuple(ks)))] * 2)))
def test_permutation_is_a_homomorphism(pair):
    a, b = pair
    assert permutation(multiply(a, b)) == permutation(a).compose(permutation(b))
    assert permutation(a) == permutation(normal_form(a))
