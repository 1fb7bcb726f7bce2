"""Finite automata with word-labelled edges, regular expressions and rational transducers."""
import logging
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import (
    TYPE_CHECKING,
    Dict,
    FrozenSet,
    Hashable,
    Iterable,
    Iterator,
    List,
    Optional,
    Sequence,
    Set,
    Tuple,
    Union,
)

from app.core.config import settings
from app.core.errors import AutomatonError, EnumerationBudgetExceeded, RegexSyntaxError, WordProblemError
from app.services.words import SymmetricAlphabet, Word, check_alphabet, parse_word, render_word

if TYPE_CHECKING:
    from app.services.oracles import GroupOracle

logger = logging.getLogger(__name__)

State = Hashable


def _reject_epsilon_cycles(states: Sequence[State], empty_edges: Iterable[Tuple[State, State]]) -> None:
    succ: Dict[State, List[State]] = {s: [] for s in states}
    for src, tgt in empty_edges:
        succ[src].append(tgt)
    colour: Dict[State, int] = {}
    for root in states:
        if root in colour:
            continue
        colour[root] = 1
        stack = [(root, iter(succ[root]))]
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                colour[node] = 2
                stack.pop()
            elif colour.get(nxt) == 1:
                raise AutomatonError(f"cycle of empty labels through state {nxt!r}")
            elif nxt not in colour:
                colour[nxt] = 1
                stack.append((nxt, iter(succ[nxt])))


class _LetterNfa:
    """Letter-level view of an automaton: multi-letter labels become chains of states."""

    def __init__(self, fsa: "Fsa"):
        self.size = len(fsa.alphabet)
        index = {s: i for i, s in enumerate(fsa.states)}
        count = len(index)
        delta: Dict[Tuple[int, int], Set[int]] = {}
        eps: Dict[int, Set[int]] = {}
        for src, label, tgt in fsa.edges:
            cur = index[src]
            if not label.letters:
                eps.setdefault(cur, set()).add(index[tgt])
                continue
            for pos, letter in enumerate(label.letters):
                if pos == len(label.letters) - 1:
                    nxt = index[tgt]
                else:
                    nxt = count
                    count += 1
                delta.setdefault((cur, letter), set()).add(nxt)
                cur = nxt
        self.delta = delta
        self.eps = eps
        self.count = count
        self.accepting = frozenset(index[s] for s in fsa.accepting)
        self.start_set = self.closure({index[fsa.start]})
        self._steps: Dict[Tuple[FrozenSet[int], int], FrozenSet[int]] = {}
        self.dist = self._distances()

    def closure(self, states: Iterable[int]) -> FrozenSet[int]:
        seen = set(states)
        todo = list(seen)
        while todo:
            s = todo.pop()
            for t in self.eps.get(s, ()):
                if t not in seen:
                    seen.add(t)
                    todo.append(t)
        return frozenset(seen)

    def step(self, states: FrozenSet[int], letter: int) -> FrozenSet[int]:
        key = (states, letter)
        hit = self._steps.get(key)
        if hit is None:
            moved = set()
            for s in states:
                moved.update(self.delta.get((s, letter), ()))
            hit = self.closure(moved) if moved else frozenset()
            self._steps[key] = hit
        return hit

    def _distances(self) -> List[float]:
        # 0-1 BFS on reversed edges: letters cost 1, empty labels cost 0
        rev: Dict[int, List[Tuple[int, int]]] = {}
        for (s, _), targets in self.delta.items():
            for t in targets:
                rev.setdefault(t, []).append((s, 1))
        for s, targets in self.eps.items():
            for t in targets:
                rev.setdefault(t, []).append((s, 0))
        dist = [float("inf")] * self.count
        queue = deque()
        for s in self.accepting:
            dist[s] = 0
            queue.append(s)
        while queue:
            t = queue.popleft()
            for s, w in rev.get(t, ()):
                if dist[t] + w < dist[s]:
                    dist[s] = dist[t] + w
                    if w:
                        queue.append(s)
                    else:
                        queue.appendleft(s)
        return dist

    def distance(self, states: FrozenSet[int]) -> float:
        return min((self.dist[s] for s in states), default=float("inf"))


@dataclass(frozen=True)
class Fsa:
    alphabet: SymmetricAlphabet
    states: Tuple[State, ...]
    start: State
    accepting: FrozenSet[State]
    edges: Tuple[Tuple[State, Word, State], ...] = ()

    def __post_init__(self):
        known = set(self.states)
        if len(known) != len(self.states):
            raise AutomatonError("duplicate state names")
        if self.start not in known:
            raise AutomatonError(f"start state {self.start!r} is not a state")
        if not set(self.accepting) <= known:
            raise AutomatonError("accepting states must be states")
        for src, label, tgt in self.edges:
            if src not in known or tgt not in known:
                raise AutomatonError(f"edge {src!r} -> {tgt!r} uses an unknown state")
            check_alphabet(label, self.alphabet)
        _reject_epsilon_cycles(self.states, ((s, t) for s, label, t in self.edges if not label.letters))

    @classmethod
    def from_text_edges(
        cls,
        alphabet: SymmetricAlphabet,
        start: State,
        accepting: Iterable[State],
        edges: Iterable[Tuple[State, str, State]],
        states: Optional[Iterable[State]] = None,
    ) -> "Fsa":
        parsed = tuple((s, parse_word(alphabet, label), t) for s, label, t in edges)
        if states is None:
            seen: Dict[State, None] = {start: None}
            for s, _, t in parsed:
                seen.setdefault(s)
                seen.setdefault(t)
            for s in accepting:
                seen.setdefault(s)
            states = seen
        return cls(alphabet, tuple(states), start, frozenset(accepting), parsed)

    @cached_property
    def letter_nfa(self) -> _LetterNfa:
        return _LetterNfa(self)

    def to_document(self) -> dict:
        return {
            "alphabet": list(self.alphabet.generators),
            "states": [str(s) for s in self.states],
            "start": str(self.start),
            "accepting": sorted(str(s) for s in self.accepting),
            "edges": [[str(s), render_word(label), str(t)] for s, label, t in self.edges],
        }

    @classmethod
    def from_document(cls, doc: dict) -> "Fsa":
        from app.models.schemas import AutomatonDocument

        parsed = AutomatonDocument.model_validate(doc)
        alphabet = SymmetricAlphabet.from_generators(parsed.alphabet)
        return cls.from_text_edges(
            alphabet,
            parsed.start,
            parsed.accepting,
            [tuple(e) for e in parsed.edges],
            states=parsed.states,
        )


def accepts(m: Fsa, w: Word) -> bool:
    check_alphabet(w, m.alphabet)
    nfa = m.letter_nfa
    current = nfa.start_set
    for letter in w.letters:
        current = nfa.step(current, letter)
        if not current:
            return False
    return bool(current & nfa.accepting)


def enumerate_regular(m: Fsa, max_len: int, budget: Optional[int] = None) -> Iterator[Word]:
    """Accepted words of length at most ``max_len`` in length-lexicographic order.

    Walks the subset construction level by level and prunes every prefix that
    cannot reach an accepting state within the remaining length, so the cost
    follows the number of accepted words rather than the size of the free monoid.
    """
    if max_len < 0:
        raise AutomatonError("max_len must be non-negative")
    budget = settings.MAX_ENUMERATION if budget is None else budget
    nfa = m.letter_nfa
    if nfa.distance(nfa.start_set) > max_len:
        return
    letters_range = range(nfa.size)
    level: List[Tuple[Tuple[int, ...], FrozenSet[int]]] = [((), nfa.start_set)]
    emitted = 0
    for length in range(max_len + 1):
        following = []
        remaining = max_len - length - 1
        for letters, current in level:
            if current & nfa.accepting:
                emitted += 1
                if emitted > budget:
                    raise EnumerationBudgetExceeded(
                        f"more than {budget} accepted words of length <= {max_len}"
                    )
                yield Word(m.alphabet, letters)
            if remaining < 0:
                continue
            for a in letters_range:
                nxt = nfa.step(current, a)
                if nxt and nfa.distance(nxt) <= remaining:
                    following.append((letters + (a,), nxt))
        level = following
        if not level:
            break


def oracle_slice(o: "GroupOracle", m: Fsa, max_len: int, budget: Optional[int] = None) -> List[Word]:
    """Words of ``WP ∩ L(m)`` up to ``max_len``."""
    check_alphabet(Word(m.alphabet), o.alphabet)
    found = [w for w in enumerate_regular(m, max_len, budget) if o.decide(w)]
    logger.debug("slice of %s up to length %d: %d words", o.name, max_len, len(found))
    return found


# ---------------------------------------------------------------------------
# Regular expressions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EmptySet:
    pass


@dataclass(frozen=True)
class Epsilon:
    pass


@dataclass(frozen=True)
class Letter:
    index: int


@dataclass(frozen=True)
class Concat:
    parts: Tuple["Node", ...]


@dataclass(frozen=True)
class Union_:
    parts: Tuple["Node", ...]


@dataclass(frozen=True)
class Star:
    inner: "Node"


Node = Union[EmptySet, Epsilon, Letter, Concat, Union_, Star]


@dataclass(frozen=True)
class RegExpr:
    alphabet: SymmetricAlphabet
    root: Node
    text: str = field(default="", compare=False)


_SPECIAL = "()*+"
_KEYWORDS = {"ε": Epsilon(), "@eps": Epsilon(), "∅": EmptySet(), "@empty": EmptySet()}


def _regex_tokens(alphabet: SymmetricAlphabet, text: str) -> List[Union[str, Node]]:
    tokens: List[Union[str, Node]] = []
    pos = 0
    while pos < len(text):
        ch = text[pos]
        if ch.isspace():
            pos += 1
            continue
        if ch in _SPECIAL:
            tokens.append(ch)
            pos += 1
            continue
        for keyword, node in _KEYWORDS.items():
            if text.startswith(keyword, pos):
                tokens.append(node)
                pos += len(keyword)
                break
        else:
            end = pos
            while end < len(text) and not text[end].isspace() and text[end] not in _SPECIAL:
                end += 1
            try:
                tokens.extend(Letter(i) for i in alphabet.tokenize(text[pos:end]))
            except WordProblemError as e:
                raise RegexSyntaxError(f"in regular expression {text!r}: {e}") from None
            pos = end
    return tokens


def parse_regex(alphabet: SymmetricAlphabet, text: str) -> RegExpr:
    """Letters as word tokens, postfix ``*``, infix ``+``, juxtaposition concatenates."""
    tokens = _regex_tokens(alphabet, text)
    pos = 0

    def peek():
        return tokens[pos] if pos < len(tokens) else None

    def union() -> Node:
        nonlocal pos
        parts = [concat()]
        while peek() == "+":
            pos += 1
            parts.append(concat())
        return parts[0] if len(parts) == 1 else Union_(tuple(parts))

    def concat() -> Node:
        parts = []
        while peek() is not None and peek() not in ("+", ")"):
            parts.append(starred())
        if not parts:
            return Epsilon()
        return parts[0] if len(parts) == 1 else Concat(tuple(parts))

    def starred() -> Node:
        nonlocal pos
        node = atom()
        while peek() == "*":
            pos += 1
            node = Star(node)
        return node

    def atom() -> Node:
        nonlocal pos
        tok = peek()
        if tok == "(":
            pos += 1
            node = union()
            if peek() != ")":
                raise RegexSyntaxError(f"missing ')' in {text!r}")
            pos += 1
            return node
        if tok == "*":
            raise RegexSyntaxError(f"'*' without operand in {text!r}")
        pos += 1
        return tok

    root = union()
    if pos != len(tokens):
        raise RegexSyntaxError(f"unexpected {tokens[pos]!r} in {text!r}")
    return RegExpr(alphabet, root, text)


def compile(r: RegExpr) -> Fsa:
    """Position (Glushkov) automaton of ``r``: one state per letter occurrence, no empty labels."""
    positions: List[int] = []
    follow: Dict[int, Set[int]] = {}
    n_letters = len(r.alphabet)

    def walk(node: Node) -> Tuple[bool, Set[int], Set[int]]:
        if isinstance(node, EmptySet):
            return False, set(), set()
        if isinstance(node, Epsilon):
            return True, set(), set()
        if isinstance(node, Letter):
            if not 0 <= node.index < n_letters:
                raise RegexSyntaxError(f"letter index {node.index} not in the alphabet")
            positions.append(node.index)
            p = len(positions)
            follow[p] = set()
            return False, {p}, {p}
        if isinstance(node, Concat):
            nullable, first, last = True, set(), set()
            for part in node.parts:
                n2, f2, l2 = walk(part)
                for p in last:
                    follow[p] |= f2
                if nullable:
                    first |= f2
                last = (last | l2) if n2 else l2
                nullable = nullable and n2
            return nullable, first, last
        if isinstance(node, Union_):
            nullable, first, last = False, set(), set()
            for part in node.parts:
                n2, f2, l2 = walk(part)
                nullable, first, last = nullable or n2, first | f2, last | l2
            return nullable, first, last
        if isinstance(node, Star):
            _, first, last = walk(node.inner)
            for p in last:
                follow[p] |= first
            return True, first, last
        raise RegexSyntaxError(f"unknown regular expression node {node!r}")

    nullable, first, last = walk(r.root)
    a = r.alphabet
    edges = [(0, Word(a, (positions[p - 1],)), p) for p in sorted(first)]
    for p in sorted(follow):
        edges.extend((p, Word(a, (positions[q - 1],)), q) for q in sorted(follow[p]))
    accepting = set(last) | ({0} if nullable else set())
    return Fsa(a, tuple(range(len(positions) + 1)), 0, frozenset(accepting), tuple(edges))


def compile_text(alphabet: SymmetricAlphabet, text: str) -> Fsa:
    return compile(parse_regex(alphabet, text))


# ---------------------------------------------------------------------------
# Transducers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Transducer:
    first: SymmetricAlphabet
    second: SymmetricAlphabet
    states: Tuple[State, ...]
    start: State
    accepting: FrozenSet[State]
    edges: Tuple[Tuple[State, Word, Word, State], ...] = ()

    def __post_init__(self):
        known = set(self.states)
        if self.start not in known or not set(self.accepting) <= known:
            raise AutomatonError("start and accepting states must be states")
        for src, u, v, tgt in self.edges:
            if src not in known or tgt not in known:
                raise AutomatonError(f"edge {src!r} -> {tgt!r} uses an unknown state")
            check_alphabet(u, self.first)
            check_alphabet(v, self.second)
        _reject_epsilon_cycles(
            self.states, ((s, t) for s, u, v, t in self.edges if not u.letters and not v.letters)
        )

    def to_document(self) -> dict:
        return {
            "first_alphabet": list(self.first.generators),
            "second_alphabet": list(self.second.generators),
            "states": [str(s) for s in self.states],
            "start": str(self.start),
            "accepting": sorted(str(s) for s in self.accepting),
            "edges": [[str(s), render_word(u), render_word(v), str(t)] for s, u, v, t in self.edges],
        }

    @classmethod
    def from_document(cls, doc: dict) -> "Transducer":
        from app.models.schemas import TransducerDocument

        parsed = TransducerDocument.model_validate(doc)
        first = SymmetricAlphabet.from_generators(parsed.first_alphabet)
        second = SymmetricAlphabet.from_generators(parsed.second_alphabet)
        edges = tuple(
            (s, parse_word(first, u), parse_word(second, v), t) for s, u, v, t in parsed.edges
        )
        return cls(first, second, tuple(parsed.states), parsed.start, frozenset(parsed.accepting), edges)


def _pair_key(pair: Tuple[Word, Word]):
    u, v = pair
    return (len(u), u.letters, len(v), v.letters)


def transduce_pairs(t: Transducer, max_first: int, max_second: int) -> List[Tuple[Word, Word]]:
    """Accepted label pairs within the bounds, each once, ordered by length then letters."""
    start = (t.start, (), ())
    seen = {start}
    queue = deque([start])
    out: Set[Tuple[Tuple[int, ...], Tuple[int, ...]]] = set()
    outgoing: Dict[State, List[Tuple[Word, Word, State]]] = {}
    for src, u, v, tgt in t.edges:
        outgoing.setdefault(src, []).append((u, v, tgt))
    while queue:
        state, u, v = queue.popleft()
        if state in t.accepting:
            out.add((u, v))
        for lu, lv, tgt in outgoing.get(state, ()):
            nu = u + lu.letters
            nv = v + lv.letters
            if len(nu) > max_first or len(nv) > max_second:
                continue
            config = (tgt, nu, nv)
            if config not in seen:
                seen.add(config)
                queue.append(config)
    pairs = [(Word(t.first, u), Word(t.second, v)) for u, v in out]
    return sorted(pairs, key=_pair_key)


def image_of_sample(t: Transducer, sample: Iterable[Word], max_second: int) -> Set[Word]:
    """Second coordinates of accepted pairs whose first coordinate is in ``sample``."""
    outgoing: Dict[State, List[Tuple[Tuple[int, ...], Tuple[int, ...], State]]] = {}
    for src, u, v, tgt in t.edges:
        outgoing.setdefault(src, []).append((u.letters, v.letters, tgt))
    image: Set[Word] = set()
    for w in sample:
        check_alphabet(w, t.first)
        target = w.letters
        start = (t.start, 0, ())
        seen = {start}
        stack = [start]
        while stack:
            state, pos, v = stack.pop()
            if pos == len(target) and state in t.accepting:
                image.add(Word(t.second, v))
            for lu, lv, tgt in outgoing.get(state, ()):
                if target[pos:pos + len(lu)] != lu:
                    continue
                nv = v + lv
                if len(nv) > max_second:
                    continue
                config = (tgt, pos + len(lu), nv)
                if config not in seen:
                    seen.add(config)
                    stack.append(config)
    return image
