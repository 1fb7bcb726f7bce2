import pytest

from app.core.errors import CosetActionError, TransductionCounterexample
from app.services.automata import Transducer, accepts, image_of_sample, transduce_pairs
from app.services.oracles import free_oracle, parse_group_spec, trivial_oracle
from app.services.schreier import (
    CosetAction,
    build_diagram,
    construct,
    corrupt_transducer,
    generator_hom,
    schreier_generators,
    spanning_tree,
    subgroup_oracle,
    tree_paths,
    verify_transduction,
)
from app.services.words import apply_hom, exponent_sum, render_word, words_up_to


@pytest.fixture
def z():
    return free_oracle(1)


@pytest.fixture
def f2():
    return free_oracle(2)


@pytest.fixture
def z_index2(data_dir, z):
    return CosetAction.load(data_dir / "z_index2.json", z.alphabet)


@pytest.fixture
def f2_index3(data_dir, f2):
    return CosetAction.load(data_dir / "f2_index3.json", f2.alphabet)


def named_edges(diagram_or_tree, alphabet):
    return [(s, alphabet.letters[a], t) for s, a, t in diagram_or_tree]


def test_diagram_of_index_two(z_index2, z):
    d = build_diagram(z_index2)
    assert d.degree == 2
    assert named_edges(d.edges, z.alphabet) == [(0, "a", 1), (1, "a", 0)]


def test_diagram_of_trivial_action(data_dir, f2):
    action = CosetAction.load(data_dir / "trivial_action.json", f2.alphabet)
    d = build_diagram(action)
    assert named_edges(d.edges, f2.alphabet) == [(0, "a", 0), (0, "b", 0)]
    assert spanning_tree(d) == ()


def test_diagram_of_index_three(f2_index3, f2):
    d = build_diagram(f2_index3)
    assert named_edges(d.edges, f2.alphabet) == [
        (0, "a", 1), (0, "b", 0), (1, "a", 2), (1, "b", 1), (2, "a", 0), (2, "b", 2),
    ]
    assert named_edges(spanning_tree(d), f2.alphabet) == [(0, "a", 1), (1, "a", 2)]


def test_action_inverse_letters(f2_index3, f2):
    assert f2_index3.run(f2.alphabet.word("aA")) == 0
    assert f2_index3.run(f2.alphabet.word("A")) == 2


def test_invalid_actions(data_dir, z):
    with pytest.raises(CosetActionError):
        CosetAction.from_mapping(2, {"a": [0, 0]}, z.alphabet)
    with pytest.raises(CosetActionError):
        CosetAction.from_mapping(2, {"b": [1, 0]}, z.alphabet)
    action = CosetAction.load(data_dir / "not_transitive.json", z.alphabet)
    with pytest.raises(CosetActionError):
        spanning_tree(build_diagram(action))


def test_generators_of_index_two(z_index2):
    d = build_diagram(z_index2)
    gens = schreier_generators(d, spanning_tree(d))
    assert [(g.name, render_word(g.word)) for g in gens] == [("b0", "aa")]


def test_generators_of_index_three(f2_index3):
    d = build_diagram(f2_index3)
    tree = spanning_tree(d)
    assert [render_word(p) for p in tree_paths(d, tree)] == ["", "a", "aa"]
    gens = schreier_generators(d, tree)
    assert [render_word(g.word) for g in gens] == ["b", "abA", "aaa", "aabAA"]


def test_generators_lie_in_subgroup(f2_index3):
    for g in construct(f2_index3).generators:
        assert f2_index3.run(g.word) == 0


def test_transducer_accepts_generator_pair(z_index2):
    built = construct(z_index2)
    pairs = {(render_word(u), render_word(v)) for u, v in transduce_pairs(built.transducer, 1, 2)}
    assert ("b0", "aa") in pairs
    assert ("", "aA") in pairs


def test_image_of_subgroup_identities_are_identities(z_index2, z):
    built = construct(z_index2)
    sub = subgroup_oracle(z, built.generators)
    sample = [w for w in words_up_to(sub.alphabet, 4) if sub.decide(w)]
    image = image_of_sample(built.transducer, sample, 8)
    assert image
    assert all(z.decide(v) for v in image)


@pytest.mark.parametrize("fixture", ["z_index2", "f2_index3"])
def test_verify_passes_at_bound_eight(fixture, request):
    action = request.getfixturevalue(fixture)
    oracle = free_oracle(len(action.alphabet.generators))
    built = construct(action)
    report = verify_transduction(built.transducer, subgroup_oracle(oracle, built.generators), oracle, 8)
    assert report.passed
    assert report.pairs_checked > 0
    assert report.identity_words_checked > 0


def test_verify_degree_one(data_dir, f2):
    action = CosetAction.load(data_dir / "trivial_action.json", f2.alphabet)
    built = construct(action)
    assert [render_word(g.word) for g in built.generators] == ["a", "b"]
    report = verify_transduction(built.transducer, subgroup_oracle(f2, built.generators), f2, 6)
    assert report.passed


def test_verify_with_heisenberg_supergroup():
    h = parse_group_spec("heisenberg")
    action = CosetAction.from_mapping(2, {"a_g": [1, 0], "a_h": [0, 1], "a_z": [0, 1]}, h.alphabet)
    built = construct(action)
    report = verify_transduction(built.transducer, subgroup_oracle(h, built.generators), h, 5)
    assert report.passed


def test_corrupted_transducer_fails_with_witness(z_index2, z):
    built = construct(z_index2)
    broken = corrupt_transducer(built.transducer)
    with pytest.raises(TransductionCounterexample) as excinfo:
        verify_transduction(broken, subgroup_oracle(z, built.generators), z, 8)
    assert (excinfo.value.first, excinfo.value.second) == ("b0'", "aa")


def test_construction_document(f2_index3):
    doc = construct(f2_index3).to_document()
    assert doc["tree"] == [[0, "a", 1], [1, "a", 2]]
    assert [g["name"] for g in doc["generators"]] == ["b0", "b1", "b2", "b3"]
    assert doc["transducer"]["first_alphabet"] == ["b0", "b1", "b2", "b3"]


@pytest.mark.parametrize("fixture", ["z_index2", "f2_index3"])
def test_diagram_automaton_accepts_the_subgroup(fixture, request):
    action = request.getfixturevalue(fixture)
    fsa = build_diagram(action).as_fsa()
    for w in words_up_to(action.alphabet, 6):
        assert accepts(fsa, w) == (action.run(w) == 0), render_word(w)


def test_diagram_automaton_on_index_two_is_even_exponent(z_index2, z):
    fsa = build_diagram(z_index2).as_fsa()
    for w in words_up_to(z.alphabet, 8):
        assert accepts(fsa, w) == (exponent_sum(w, "a") % 2 == 0)


@pytest.mark.parametrize("fixture", ["z_index2", "f2_index3"])
def test_diagram_automaton_accepts_generator_images(fixture, request):
    action = request.getfixturevalue(fixture)
    oracle = free_oracle(len(action.alphabet.generators))
    built = construct(action)
    fsa = build_diagram(action).as_fsa()
    sub = subgroup_oracle(oracle, built.generators)
    hom = generator_hom(built.generators, action.alphabet)
    for u in words_up_to(sub.alphabet, 3):
        image = apply_hom(hom, u)
        assert accepts(fsa, image)
        assert sub.decide(u) == oracle.decide(image)


def test_verify_with_several_first_coordinates_per_word():
    sub = trivial_oracle(1, ["b"])
    sup = free_oracle(1)
    b, B = sub.alphabet.word("b"), sub.alphabet.word("B")
    t = Transducer(
        sub.alphabet,
        sup.alphabet,
        (0, 1),
        0,
        frozenset({0}),
        (
            (0, b, sup.alphabet.word("a"), 1),
            (0, B, sup.alphabet.word("a"), 1),
            (1, b, sup.alphabet.word("A"), 0),
        ),
    )
    report = verify_transduction(t, sub, sup, 4)
    assert report.passed
    assert report.identity_words_checked == 3
