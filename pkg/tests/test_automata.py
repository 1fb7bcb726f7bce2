import re

import pytest

from app.core.errors import AutomatonError, EnumerationBudgetExceeded, RegexSyntaxError
from app.services.automata import (
    Fsa,
    Transducer,
    accepts,
    compile_text,
    enumerate_regular,
    image_of_sample,
    oracle_slice,
    transduce_pairs,
)
from app.services.oracles import bs12_oracle, free_oracle, trivial_oracle
from app.services.words import SymmetricAlphabet, Word, render_word, words_up_to

ABC = SymmetricAlphabet.from_generators(["a", "b", "c"])
AT = SymmetricAlphabet.from_generators(["a", "t"])
A = SymmetricAlphabet.from_generators(["a"])


@pytest.fixture
def two_loops():
    """Start q_a, b-loops through q_b and q_c: accepts b c* b and b a c* b."""
    return Fsa.from_text_edges(
        ABC,
        "q_a",
        ["q_f"],
        [
            ("q_a", "b", "q_b"),
            ("q_b", "c", "q_b"),
            ("q_b", "b", "q_f"),
            ("q_b", "ac", "q_c"),
            ("q_b", "a", "q_c"),
            ("q_c", "c", "q_c"),
            ("q_c", "b", "q_f"),
        ],
    )


def texts(words):
    return [render_word(w) for w in words]


def test_accepts_word_labelled_edges(two_loops):
    assert accepts(two_loops, ABC.word("bacccb"))
    assert accepts(two_loops, ABC.word("bb"))
    assert not accepts(two_loops, ABC.word(""))
    assert not accepts(two_loops, ABC.word("ba"))


def test_start_accepting_accepts_empty_word():
    m = Fsa.from_text_edges(A, 0, [0], [(0, "a", 0)])
    assert accepts(m, A.word(""))


def test_empty_label_cycle_rejected():
    with pytest.raises(AutomatonError):
        Fsa.from_text_edges(A, 0, [0], [(0, "", 1), (1, "", 0)])


def test_unknown_start_rejected():
    with pytest.raises(AutomatonError):
        Fsa(A, (0,), 1, frozenset(), ())


def test_document_round_trip(two_loops):
    again = Fsa.from_document(two_loops.to_document())
    for word in words_up_to(ABC, 4):
        assert accepts(again, Word(again.alphabet, word.letters)) == accepts(two_loops, word)


def test_enumerate_star():
    assert texts(enumerate_regular(compile_text(A, "a*"), 3)) == ["", "a", "aa", "aaa"]


def test_enumerate_empty_language():
    assert list(enumerate_regular(compile_text(A, "@empty"), 5)) == []


def test_enumerate_matches_brute_force_filter():
    m = compile_text(AT, "t*a(T)*(A)*")
    pattern = re.compile(r"t*a T*A*".replace(" ", ""))
    expected = [render_word(w) for w in words_up_to(AT, 5) if pattern.fullmatch(render_word(w))]
    assert texts(enumerate_regular(m, 5)) == expected
    assert {"a", "ta", "aT", "aA", "taT", "taA", "aTT", "aTA", "aAA", "tta"} <= set(expected)


def test_enumerate_is_length_lexicographic():
    got = list(enumerate_regular(compile_text(AT, "(a+t)*"), 3))
    keys = [(len(w), w.letters) for w in got]
    assert keys == sorted(keys)


def test_enumerate_budget():
    with pytest.raises(EnumerationBudgetExceeded):
        list(enumerate_regular(compile_text(AT, "(a+A+t+T)*"), 4, budget=10))


def test_compiled_regex_agrees_with_python_re():
    cases = ["ab*c", "(a+b)*c", "a(b+c)*a*", "((ab)*+c)*", "b c* b + b a c* b"]
    for text in cases:
        m = compile_text(ABC, text)
        py = re.compile(text.replace(" ", "").replace("+", "|"))
        for word in words_up_to(ABC, 4):
            assert accepts(m, word) == bool(py.fullmatch(render_word(word))), (text, render_word(word))


@pytest.mark.parametrize("text", ["(a", "a)", "*a", "ax"])
def test_bad_regex(text):
    with pytest.raises(RegexSyntaxError):
        compile_text(ABC, text)


def test_multichar_regex_tokens():
    h = SymmetricAlphabet.from_generators(["a_g", "a_h"])
    m = compile_text(h, "a_g* (a_g')*")
    assert accepts(m, h.word("a_g a_g a_g'"))
    assert not accepts(m, h.word("a_g' a_g"))


def test_oracle_slice_bs12():
    oracle = bs12_oracle()
    m = compile_text(oracle.alphabet, "t*a(T)*(A)*")
    assert texts(oracle_slice(oracle, m, 7)) == ["aA", "taTAA"]


def test_oracle_slice_trivial_and_free():
    triv = trivial_oracle()
    assert texts(oracle_slice(triv, compile_text(triv.alphabet, "a*"), 2)) == ["", "a", "aa"]
    free = free_oracle(1)
    assert texts(oracle_slice(free, compile_text(free.alphabet, "a*(A)*"), 4)) == ["", "aA", "aaAA"]


@pytest.fixture
def loop_transducer():
    first = SymmetricAlphabet.from_generators(["b"])
    second = SymmetricAlphabet.from_generators(["a"])
    return Transducer(first, second, (0,), 0, frozenset({0}), ((0, first.word("b"), second.word("aa"), 0),))


def test_transduce_pairs_unrolls_loop(loop_transducer):
    pairs = [(render_word(u), render_word(v)) for u, v in transduce_pairs(loop_transducer, 3, 4)]
    assert pairs == [("", ""), ("b", "aa"), ("bb", "aaaa")]


def test_empty_transducer_has_no_pairs(loop_transducer):
    empty = Transducer(loop_transducer.first, loop_transducer.second, (0,), 0, frozenset(), ())
    assert transduce_pairs(empty, 5, 5) == []


def test_image_of_sample(loop_transducer):
    first = loop_transducer.first
    image = image_of_sample(loop_transducer, [first.word("bb")], 10)
    assert texts(image) == ["aaaa"]
    assert image_of_sample(loop_transducer, [], 10) == set()


def test_transducer_document_round_trip(loop_transducer):
    again = Transducer.from_document(loop_transducer.to_document())
    assert [(render_word(u), render_word(v)) for u, v in transduce_pairs(again, 2, 4)] == [
        ("", ""), ("b", "aa"), ("bb", "aaaa"),
    ]
