"""Schreier diagrams of coset actions and the transducer carrying a supergroup's
word problem onto the word problem of a finite-index subgroup.

Coset 0 is the subgroup. Cosets are acted on from the right, so the edge labelled
``a`` leaves coset ``c`` towards ``perms[a][c]``.
"""
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from app.core.errors import AlphabetError, CosetActionError, TransductionCounterexample
from app.services.automata import Fsa, Transducer, enumerate_regular, transduce_pairs
from app.services.oracles import GroupOracle, PullbackOracle, parse_group_spec, pullback_oracle
from app.services.reports import run_record
from app.services.words import (
    MonoidHom,
    SymmetricAlphabet,
    Word,
    apply_hom,
    concat,
    formal_inverse,
    render_word,
)

logger = logging.getLogger(__name__)

Edge = Tuple[int, int, int]


@dataclass(frozen=True)
class CosetAction:
    alphabet: SymmetricAlphabet
    degree: int
    perms: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        if self.degree < 1:
            raise CosetActionError("an action needs at least one coset")
        if len(self.perms) != len(self.alphabet.positive):
            raise CosetActionError("one permutation per generator is required")
        for name, perm in zip(self.alphabet.generators, self.perms):
            if sorted(perm) != list(range(self.degree)):
                raise CosetActionError(f"{name!r} does not act as a permutation of 0..{self.degree - 1}: {list(perm)}")

    @classmethod
    def from_mapping(
        cls,
        degree: int,
        perms: Mapping[str, Sequence[int]],
        alphabet: Optional[SymmetricAlphabet] = None,
    ) -> "CosetAction":
        if alphabet is None:
            alphabet = SymmetricAlphabet.from_generators(list(perms))
        missing = [g for g in alphabet.generators if g not in perms]
        extra = [g for g in perms if g not in alphabet.generators]
        if missing or extra:
            raise CosetActionError(
                f"permutations given for {sorted(perms)}, generators are {list(alphabet.generators)}"
            )
        return cls(alphabet, degree, tuple(tuple(perms[g]) for g in alphabet.generators))

    @classmethod
    def from_document(cls, doc: dict, alphabet: Optional[SymmetricAlphabet] = None) -> "CosetAction":
        from app.models.schemas import CosetActionDocument

        parsed = CosetActionDocument.model_validate(doc)
        return cls.from_mapping(parsed.degree, parsed.perms, alphabet)

    @classmethod
    def load(cls, path: Union[str, Path], alphabet: Optional[SymmetricAlphabet] = None) -> "CosetAction":
        return cls.from_document(json.loads(Path(path).read_text(encoding="utf-8")), alphabet)

    def act(self, coset: int, letter: int) -> int:
        positive = self.alphabet.positive
        if letter in positive:
            return self.perms[positive.index(letter)][coset]
        perm = self.perms[positive.index(self.alphabet.inverse[letter])]
        return perm.index(coset)

    def run(self, w: Word, coset: int = 0) -> int:
        for letter in w.letters:
            coset = self.act(coset, letter)
        return coset

    def to_document(self) -> dict:
        return {"degree": self.degree, "perms": {g: list(p) for g, p in zip(self.alphabet.generators, self.perms)}}


@dataclass(frozen=True)
class SchreierDiagram:
    action: CosetAction
    edges: Tuple[Edge, ...]

    @property
    def alphabet(self) -> SymmetricAlphabet:
        return self.action.alphabet

    @property
    def degree(self) -> int:
        return self.action.degree

    def as_fsa(self) -> Fsa:
        """The diagram read as an automaton over all of Δ; reverse traversal reads inverse letters."""
        inv = self.alphabet.inverse
        edges = []
        for s, a, t in self.edges:
            edges.append((s, Word(self.alphabet, (a,)), t))
            edges.append((t, Word(self.alphabet, (inv[a],)), s))
        return Fsa(self.alphabet, tuple(range(self.degree)), 0, frozenset({0}), tuple(edges))

    def to_document(self) -> dict:
        letters = self.alphabet.letters
        return {"vertices": list(range(self.degree)), "edges": [[s, letters[a], t] for s, a, t in self.edges]}


@dataclass(frozen=True)
class SchreierGenerator:
    edge: Edge
    word: Word
    name: str

    def to_document(self) -> dict:
        s, a, t = self.edge
        return {
            "name": self.name,
            "edge": [s, self.word.alphabet.letters[a], t],
            "word": render_word(self.word),
        }


def build_diagram(action: CosetAction) -> SchreierDiagram:
    edges = []
    for coset in range(action.degree):
        for slot, a in enumerate(action.alphabet.positive):
            edges.append((coset, a, action.perms[slot][coset]))
    return SchreierDiagram(action, tuple(edges))


def spanning_tree(d: SchreierDiagram) -> Tuple[Edge, ...]:
    """BFS tree on forward edges from coset 0, edges taken in letter order."""
    outgoing: Dict[int, List[Edge]] = {}
    for edge in d.edges:
        outgoing.setdefault(edge[0], []).append(edge)
    seen = {0}
    queue = [0]
    tree = []
    for coset in queue:
        for edge in sorted(outgoing.get(coset, ()), key=lambda e: (e[1], e[2])):
            if edge[2] not in seen:
                seen.add(edge[2])
                tree.append(edge)
                queue.append(edge[2])
    if len(seen) != d.degree:
        unreached = sorted(set(range(d.degree)) - seen)
        raise CosetActionError(f"action is not transitive; cosets {unreached} are not reached from 0")
    return tuple(tree)


def tree_paths(d: SchreierDiagram, tree: Sequence[Edge]) -> List[Word]:
    """Word along the tree from coset 0 to each coset."""
    paths: List[Optional[Word]] = [None] * d.degree
    paths[0] = Word(d.alphabet)
    for s, a, t in tree:
        paths[t] = concat(paths[s], Word(d.alphabet, (a,)))
    return paths


def schreier_generators(d: SchreierDiagram, tree: Sequence[Edge]) -> List[SchreierGenerator]:
    paths = tree_paths(d, tree)
    in_tree = set(tree)
    gens = []
    for edge in d.edges:
        if edge in in_tree:
            continue
        s, a, t = edge
        word = concat(concat(paths[s], Word(d.alphabet, (a,))), formal_inverse(paths[t]))
        gens.append(SchreierGenerator(edge, word, f"b{len(gens)}"))
    return gens


def generator_alphabet(gens: Sequence[SchreierGenerator]) -> SymmetricAlphabet:
    return SymmetricAlphabet.from_generators([g.name for g in gens], case_convention=False)


def generator_hom(gens: Sequence[SchreierGenerator], target: SymmetricAlphabet) -> MonoidHom:
    source = generator_alphabet(gens)
    return MonoidHom.from_generator_images(source, target, {g.name: g.word for g in gens})


def subgroup_oracle(super_oracle: GroupOracle, gens: Sequence[SchreierGenerator]) -> PullbackOracle:
    return pullback_oracle(super_oracle, generator_hom(gens, super_oracle.alphabet))


def build_transducer(d: SchreierDiagram, tree: Sequence[Edge], gens: Sequence[SchreierGenerator]) -> Transducer:
    first = generator_alphabet(gens) if gens else SymmetricAlphabet.from_generators(["b0"], case_convention=False)
    second = d.alphabet
    inv = second.inverse
    label = {g.edge: first.index(g.name) for g in gens}
    in_tree = set(tree)
    edges = []
    for edge in d.edges:
        s, a, t = edge
        if edge in in_tree:
            u, u_back = Word(first), Word(first)
        else:
            b = label[edge]
            u, u_back = Word(first, (b,)), Word(first, (first.inverse[b],))
        edges.append((s, u, Word(second, (a,)), t))
        edges.append((t, u_back, Word(second, (inv[a],)), s))
    return Transducer(first, second, tuple(range(d.degree)), 0, frozenset({0}), tuple(edges))


def corrupt_transducer(t: Transducer) -> Transducer:
    """Invert the first label of the first forward edge that carries a generator."""
    edges = list(t.edges)
    for pos in range(0, len(edges), 2):
        s, u, v, tgt = edges[pos]
        if u.letters:
            edges[pos] = (s, formal_inverse(u), v, tgt)
            return Transducer(t.first, t.second, t.states, t.start, t.accepting, tuple(edges))
    raise CosetActionError("no generator-labelled edge to corrupt")


@dataclass
class TransductionReport:
    bound: int
    pairs_checked: int = 0
    identity_words_checked: int = 0
    passed: bool = False
    witness: Optional[Tuple[str, str]] = None
    failed_check: Optional[str] = None

    def to_document(self) -> dict:
        return {
            "bound": self.bound,
            "pairs_checked": self.pairs_checked,
            "identity_words_checked": self.identity_words_checked,
            "passed": self.passed,
            "witness": list(self.witness) if self.witness else None,
            "failed_check": self.failed_check,
        }


def verify_transduction(
    t: Transducer,
    sub_oracle: GroupOracle,
    super_oracle: GroupOracle,
    bound: int,
    hom: Optional[MonoidHom] = None,
) -> TransductionReport:
    """Check the transducer against both oracles on every accepted pair within ``bound``.

    For each pair ``(u, v)``: ``u`` is trivial exactly when ``v`` is, and ``u`` read
    through the generator words equals ``v`` in the supergroup. Every trivial word
    of length at most ``bound`` must come out as a second coordinate paired with a
    trivial first coordinate. Raises ``TransductionCounterexample`` on the first failure.
    """
    if t.first != sub_oracle.alphabet or t.second != super_oracle.alphabet:
        raise AlphabetError("transducer alphabets do not match the oracles")
    if hom is None and isinstance(sub_oracle, PullbackOracle):
        hom = sub_oracle.hom
    report = TransductionReport(bound)
    pairs = transduce_pairs(t, bound, bound)
    firsts: Dict[Tuple[int, ...], Tuple[Word, bool]] = {}
    for u, v in pairs:
        report.pairs_checked += 1
        sub_trivial = sub_oracle.decide(u)
        if sub_trivial != super_oracle.decide(v):
            _fail(report, "identity", u, v)
        if hom is not None and not super_oracle.decide(concat(apply_hom(hom, u), formal_inverse(v))):
            _fail(report, "element", u, v)
        # keep a trivial first coordinate once one is seen
        prev = firsts.get(v.letters)
        if prev is None or (sub_trivial and not prev[1]):
            firsts[v.letters] = (u, sub_trivial)

    diagram = Fsa(
        t.second,
        t.states,
        t.start,
        t.accepting,
        tuple((s, v, tgt) for s, _, v, tgt in t.edges),
    )
    for v in enumerate_regular(diagram, bound):
        if not super_oracle.decide(v):
            continue
        report.identity_words_checked += 1
        u, u_trivial = firsts.get(v.letters, (Word(t.first), False))
        if not u_trivial:
            _fail(report, "surjectivity", u, v)
    report.passed = True
    logger.info(
        "transduction verified up to %d: %d pairs, %d identity words",
        bound, report.pairs_checked, report.identity_words_checked,
    )
    return report


def _fail(report: TransductionReport, check: str, u: Word, v: Word) -> None:
    report.failed_check = check
    report.witness = (render_word(u), render_word(v))
    raise TransductionCounterexample(
        f"{check} check failed on pair ({report.witness[0]!r}, {report.witness[1]!r})",
        report.witness[0],
        report.witness[1],
    )


@dataclass
class SchreierConstruction:
    diagram: SchreierDiagram
    tree: Tuple[Edge, ...]
    generators: List[SchreierGenerator]
    transducer: Transducer

    def to_document(self) -> dict:
        letters = self.diagram.alphabet.letters
        return {
            "diagram": self.diagram.to_document(),
            "tree": [[s, letters[a], t] for s, a, t in self.tree],
            "generators": [g.to_document() for g in self.generators],
            "transducer": self.transducer.to_document(),
        }


def construct(action: CosetAction) -> SchreierConstruction:
    diagram = build_diagram(action)
    tree = spanning_tree(diagram)
    gens = schreier_generators(diagram, tree)
    return SchreierConstruction(diagram, tree, gens, build_transducer(diagram, tree, gens))


def schreier_run(group: str, action_doc: dict, bound: int, corrupt: bool = False, timing: bool = False) -> dict:
    """Build the diagram, tree, generators and transducer, then verify; returns the run record."""
    super_oracle = parse_group_spec(group)
    action = CosetAction.from_document(action_doc, super_oracle.alphabet)
    with run_record("schreier", {"group": group, "bound": bound, "corrupt": corrupt}, timing=timing) as record:
        built = construct(action)
        transducer = corrupt_transducer(built.transducer) if corrupt else built.transducer
        sub_oracle = subgroup_oracle(super_oracle, built.generators)
        record["results"] = built.to_document()
        record["results"]["transducer"] = transducer.to_document()
        verdict = verify_transduction(transducer, sub_oracle, super_oracle, bound)
        record["results"]["verification"] = verdict.to_document()
    return record
