"""Exact word-problem deciders and the combinators that build new ones from old.

Every oracle owns a symmetric alphabet and answers one question: does this word
evaluate to the identity? Products glue oracles over disjoint alphabets and
pullbacks re-read an oracle through a letter-to-word homomorphism.
"""
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from sympy import Matrix

from app.core.errors import AlphabetError, GroupSpecError, WordProblemError
from app.services.graphs import SimpleGraph, load_graph
from app.services.words import MonoidHom, SymmetricAlphabet, Word, apply_hom, check_alphabet, free_reduce, load_hom

logger = logging.getLogger(__name__)

DEFAULT_NAMES = "abcdefghijklmnopqrstuvwxyz"


class GroupOracle(ABC):
    """Decides membership in the word problem of one group over one alphabet."""

    name: str
    alphabet: SymmetricAlphabet

    @abstractmethod
    def _is_identity(self, letters: Tuple[int, ...]) -> bool:
        ...

    def decide(self, w: Word) -> bool:
        check_alphabet(w, self.alphabet)
        return self._is_identity(w.letters)

    def decide_text(self, text: str) -> bool:
        return self.decide(self.alphabet.word(text))

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name}>"


def _generator_names(rank: int, names: Optional[Sequence[str]]) -> List[str]:
    if names is None:
        if not 1 <= rank <= len(DEFAULT_NAMES):
            raise GroupSpecError(f"rank must be between 1 and {len(DEFAULT_NAMES)}, got {rank}")
        return list(DEFAULT_NAMES[:rank])
    names = list(names)
    if len(names) != rank:
        raise GroupSpecError(f"rank {rank} needs {rank} generator names, got {names}")
    return names


class FreeOracle(GroupOracle):
    def __init__(self, rank: int, names: Optional[Sequence[str]] = None):
        self.alphabet = SymmetricAlphabet.from_generators(_generator_names(rank, names))
        self.name = f"free:{rank}"

    def _is_identity(self, letters):
        inv = self.alphabet.inverse
        stack: List[int] = []
        for i in letters:
            if stack and stack[-1] == inv[i]:
                stack.pop()
            else:
                stack.append(i)
        return not stack


class AbelianOracle(GroupOracle):
    def __init__(self, rank: int, names: Optional[Sequence[str]] = None):
        self.alphabet = SymmetricAlphabet.from_generators(_generator_names(rank, names))
        self.name = f"zn:{rank}"
        self._sign = [1 if i in self.alphabet.positive else -1 for i in range(len(self.alphabet))]
        self._slot = [min(i, self.alphabet.inverse[i]) for i in range(len(self.alphabet))]

    def _is_identity(self, letters):
        sums = [0] * len(self.alphabet)
        for i in letters:
            sums[self._slot[i]] += self._sign[i]
        return not any(sums)


class TrivialOracle(GroupOracle):
    def __init__(self, rank: int = 1, names: Optional[Sequence[str]] = None):
        self.alphabet = SymmetricAlphabet.from_generators(_generator_names(rank, names))
        self.name = f"trivial:{rank}"

    def _is_identity(self, letters):
        return True


def free_oracle(rank: int, names: Optional[Sequence[str]] = None) -> GroupOracle:
    return FreeOracle(rank, names)


def abelian_oracle(rank: int, names: Optional[Sequence[str]] = None) -> GroupOracle:
    return AbelianOracle(rank, names)


def trivial_oracle(rank: int = 1, names: Optional[Sequence[str]] = None) -> GroupOracle:
    return TrivialOracle(rank, names)


# ---------------------------------------------------------------------------
# Heisenberg group
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HeisenbergElement:
    """Upper unitriangular integer matrix with entries ``a`` (1,2), ``b`` (2,3), ``c`` (1,3)."""

    a: int = 0
    b: int = 0
    c: int = 0

    def __mul__(self, other: "HeisenbergElement") -> "HeisenbergElement":
        return HeisenbergElement(self.a + other.a, self.b + other.b, self.c + other.c + self.a * other.b)

    def inverse(self) -> "HeisenbergElement":
        return HeisenbergElement(-self.a, -self.b, self.a * self.b - self.c)

    def is_identity(self) -> bool:
        return self.a == 0 and self.b == 0 and self.c == 0


HEISENBERG_GENERATORS = ("a_g", "a_h", "a_z")
HEISENBERG_IMAGES = {
    "a_g": HeisenbergElement(1, 0, 0),
    "a_h": HeisenbergElement(0, 1, 0),
    "a_z": HeisenbergElement(0, 0, -1),
}


def heisenberg_evaluate(w: Word, images: Optional[Mapping[str, HeisenbergElement]] = None) -> HeisenbergElement:
    """Product of the images of the letters of ``w``; inverse letters get inverse images."""
    images = HEISENBERG_IMAGES if images is None else images
    alphabet = w.alphabet
    table: List[Optional[HeisenbergElement]] = [None] * len(alphabet)
    for name, element in images.items():
        i = alphabet.index(name)
        table[i] = element
        table[alphabet.inverse[i]] = element.inverse()
    out = HeisenbergElement()
    for i in w.letters:
        if table[i] is None:
            raise AlphabetError(f"no Heisenberg image for letter {alphabet.letters[i]!r}")
        out = out * table[i]
    return out


class HeisenbergOracle(GroupOracle):
    name = "heisenberg"

    def __init__(self):
        self.alphabet = SymmetricAlphabet.from_generators(HEISENBERG_GENERATORS)
        # per letter: (da, db, dc); right multiplication adds a*db to c
        steps = [(0, 0, 0)] * len(self.alphabet)
        for name, e in HEISENBERG_IMAGES.items():
            i = self.alphabet.index(name)
            inv = e.inverse()
            steps[i] = (e.a, e.b, e.c)
            steps[self.alphabet.inverse[i]] = (inv.a, inv.b, inv.c)
        self._steps = steps

    def _is_identity(self, letters):
        a = b = c = 0
        steps = self._steps
        for i in letters:
            da, db, dc = steps[i]
            c += dc + a * db
            a += da
            b += db
        return a == 0 and b == 0 and c == 0


def heisenberg_oracle() -> GroupOracle:
    return HeisenbergOracle()


# ---------------------------------------------------------------------------
# BS(1,2)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DyadicAffineMap:
    """``x -> 2**scale * x + translation`` with a dyadic rational translation."""

    scale: int = 0
    translation: Fraction = Fraction(0)

    def __post_init__(self):
        den = self.translation.denominator
        if den & (den - 1):
            raise WordProblemError(f"translation {self.translation} is not dyadic")

    @property
    def numerator(self) -> int:
        return self.translation.numerator

    @property
    def exponent(self) -> int:
        """``translation == numerator * 2**exponent``."""
        return -(self.translation.denominator.bit_length() - 1)

    def __call__(self, x: Fraction) -> Fraction:
        return Fraction(2) ** self.scale * x + self.translation

    def compose(self, inner: "DyadicAffineMap") -> "DyadicAffineMap":
        """``self`` after ``inner``."""
        return DyadicAffineMap(self.scale + inner.scale, Fraction(2) ** self.scale * inner.translation + self.translation)

    def is_identity(self) -> bool:
        return self.scale == 0 and self.translation == 0


BS12_IMAGES = {
    "a": DyadicAffineMap(0, Fraction(1)),
    "t": DyadicAffineMap(1, Fraction(0)),
}


class Bs12Oracle(GroupOracle):
    name = "bs12"

    def __init__(self):
        self.alphabet = SymmetricAlphabet.from_generators(["a", "t"])
        ix = self.alphabet.index
        self._a, self._A, self._t, self._T = ix("a"), ix("A"), ix("t"), ix("T")

    def evaluate(self, w: Word) -> DyadicAffineMap:
        check_alphabet(w, self.alphabet)
        k, shift = self._run(w.letters)
        return DyadicAffineMap(k, shift)

    def _run(self, letters) -> Tuple[int, Fraction]:
        # the map of a product gh is f_g after f_h, so letters act on the right
        k = 0
        shift = Fraction(0)
        for i in letters:
            if i == self._a:
                shift += Fraction(2) ** k
            elif i == self._A:
                shift -= Fraction(2) ** k
            elif i == self._t:
                k += 1
            else:
                k -= 1
        return k, shift

    def _is_identity(self, letters):
        k, shift = self._run(letters)
        return k == 0 and shift == 0


def bs12_oracle() -> GroupOracle:
    return Bs12Oracle()


# ---------------------------------------------------------------------------
# Right-angled Artin groups
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RaagPresentation:
    graph: SimpleGraph

    @property
    def alphabet(self) -> SymmetricAlphabet:
        return SymmetricAlphabet.from_generators(self.graph.vertices)

    def vertex_of_letter(self) -> Dict[str, str]:
        alphabet = self.alphabet
        out = {}
        for i in alphabet.positive:
            out[alphabet.letters[i]] = alphabet.letters[i]
            out[alphabet.letters[alphabet.inverse[i]]] = alphabet.letters[i]
        return out


class RaagOracle(GroupOracle):
    """Left-to-right cancellation against the trace-monoid normal form.

    Keeps the current word reduced; a new letter cancels the last occurrence of its
    inverse when every letter after that occurrence commutes with it.
    """

    def __init__(self, presentation: RaagPresentation):
        self.presentation = presentation
        self.alphabet = presentation.alphabet
        g = presentation.graph
        alphabet = self.alphabet
        self._vertex = [0] * len(alphabet)
        for v, i in enumerate(alphabet.positive):
            self._vertex[i] = v
            self._vertex[alphabet.inverse[i]] = v
        self._adjacency = g.adjacency
        self.name = f"raag:{','.join(g.vertices)}"

    def normal_form(self, letters: Sequence[int]) -> List[int]:
        inv = self.alphabet.inverse
        vertex = self._vertex
        adj = self._adjacency
        out: List[int] = []
        for x in letters:
            vx = vertex[x]
            target = inv[x]
            cancelled = False
            for pos in range(len(out) - 1, -1, -1):
                y = out[pos]
                if y == target:
                    del out[pos]
                    cancelled = True
                    break
                vy = vertex[y]
                if vy == vx or not adj[vx] >> vy & 1:
                    break
            if not cancelled:
                out.append(x)
        return out

    def _is_identity(self, letters):
        return not self.normal_form(letters)


def raag_oracle(p: RaagPresentation) -> GroupOracle:
    return RaagOracle(p)


# ---------------------------------------------------------------------------
# Torus bundles
# ---------------------------------------------------------------------------

Matrix2 = Tuple[Tuple[int, int], Tuple[int, int]]

ANOSOV_CAT_MAP: Matrix2 = ((2, 1), (1, 1))


def _as_sympy(m: Matrix2) -> Matrix:
    return Matrix([list(m[0]), list(m[1])])


def _as_tuple(m: Matrix) -> Matrix2:
    return ((int(m[0, 0]), int(m[0, 1])), (int(m[1, 0]), int(m[1, 1])))


@lru_cache(maxsize=None)
def monodromy_power(monodromy: Matrix2, n: int) -> Matrix2:
    """Exact ``A**n`` for any integer ``n``."""
    return _as_tuple(_as_sympy(monodromy) ** n)


@dataclass(frozen=True)
class TorusBundleElement:
    v: Tuple[int, int] = (0, 0)
    k: int = 0

    def multiply(self, other: "TorusBundleElement", monodromy: Matrix2) -> "TorusBundleElement":
        m = monodromy_power(monodromy, self.k)
        w = other.v
        return TorusBundleElement(
            (self.v[0] + m[0][0] * w[0] + m[0][1] * w[1], self.v[1] + m[1][0] * w[0] + m[1][1] * w[1]),
            self.k + other.k,
        )

    def is_identity(self) -> bool:
        return self.v == (0, 0) and self.k == 0


class TorusBundleOracle(GroupOracle):
    """Z² semidirect Z with ``t`` acting on the fiber by the monodromy matrix."""

    def __init__(self, monodromy: Matrix2 = ANOSOV_CAT_MAP):
        det = _as_sympy(monodromy).det()
        if det not in (1, -1):
            raise GroupSpecError(f"monodromy {monodromy} has determinant {det}; need ±1")
        self.monodromy = monodromy
        self.alphabet = SymmetricAlphabet.from_generators(["x", "y", "t"])
        images = {
            "x": TorusBundleElement((1, 0)), "X": TorusBundleElement((-1, 0)),
            "y": TorusBundleElement((0, 1)), "Y": TorusBundleElement((0, -1)),
            "t": TorusBundleElement(k=1), "T": TorusBundleElement(k=-1),
        }
        self._images = [images[name] for name in self.alphabet.letters]
        flat = [c for row in monodromy for c in row]
        self.name = "torusbundle:" + ",".join(str(c) for c in flat)

    def evaluate(self, w: Word) -> TorusBundleElement:
        check_alphabet(w, self.alphabet)
        element = TorusBundleElement()
        for i in w.letters:
            element = element.multiply(self._images[i], self.monodromy)
        return element

    def _is_identity(self, letters):
        return self.evaluate(Word(self.alphabet, tuple(letters))).is_identity()


def torus_bundle_oracle(monodromy: Matrix2 = ANOSOV_CAT_MAP) -> GroupOracle:
    return TorusBundleOracle(monodromy)


# ---------------------------------------------------------------------------
# Combinators
# ---------------------------------------------------------------------------

class ProductOracle(GroupOracle):
    def __init__(self, first: GroupOracle, second: GroupOracle):
        self.first = first
        self.second = second
        self.alphabet = first.alphabet.union(second.alphabet)
        self._split = len(first.alphabet)
        self.name = f"product({first.name},{second.name})"

    def _is_identity(self, letters):
        split = self._split
        left = tuple(i for i in letters if i < split)
        right = tuple(i - split for i in letters if i >= split)
        return self.first._is_identity(left) and self.second._is_identity(right)


def product_oracle(o1: GroupOracle, o2: GroupOracle) -> GroupOracle:
    return ProductOracle(o1, o2)


class PullbackOracle(GroupOracle):
    def __init__(self, base: GroupOracle, hom: MonoidHom):
        if hom.target != base.alphabet:
            raise AlphabetError(
                f"homomorphism lands in {list(hom.target.letters)}, oracle reads {list(base.alphabet.letters)}"
            )
        self.base = base
        self.hom = hom
        self.alphabet = hom.source
        self.name = f"pullback({base.name})"

    def _is_identity(self, letters):
        return self.base.decide(apply_hom(self.hom, Word(self.alphabet, tuple(letters))))


def pullback_oracle(o: GroupOracle, h: MonoidHom) -> GroupOracle:
    return PullbackOracle(o, h)


# ---------------------------------------------------------------------------
# Spec strings
# ---------------------------------------------------------------------------

def _split_top_level(text: str) -> List[int]:
    """Positions of commas not nested in parentheses."""
    depth = 0
    out = []
    for pos, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise GroupSpecError(f"unbalanced parentheses in {text!r}")
        elif ch == "," and depth == 0:
            out.append(pos)
    if depth:
        raise GroupSpecError(f"unbalanced parentheses in {text!r}")
    return out


def _ranked(family: str, rest: str):
    parts = rest.split(":", 1)
    try:
        rank = int(parts[0])
    except ValueError:
        raise GroupSpecError(f"{family} needs an integer rank, got {parts[0]!r}") from None
    names = parts[1].split(",") if len(parts) == 2 else None
    return rank, names


def parse_group_spec(text: str, base_dir: Optional[Path] = None) -> GroupOracle:
    """Build an oracle from ``free:k | zn:k | trivial:k | heisenberg | bs12 | raag:<file> |
    torusbundle:a,b,c,d | product(<spec>,<spec>) | pullback(<spec>,<hom-file>)``.

    ``free``, ``zn`` and ``trivial`` accept explicit generator names: ``free:2:p,q``.
    """
    text = text.strip()
    base_dir = Path(".") if base_dir is None else Path(base_dir)
    if text.startswith("product(") and text.endswith(")"):
        inner = text[len("product("):-1]
        errors = []
        for pos in _split_top_level(inner):
            try:
                return product_oracle(
                    parse_group_spec(inner[:pos], base_dir), parse_group_spec(inner[pos + 1:], base_dir)
                )
            except (GroupSpecError, AlphabetError) as e:
                errors.append(str(e))
        raise GroupSpecError(f"cannot read product {text!r}: {'; '.join(errors) or 'expected two factors'}")
    if text.startswith("pullback(") and text.endswith(")"):
        inner = text[len("pullback("):-1]
        commas = _split_top_level(inner)
        if not commas:
            raise GroupSpecError(f"pullback needs a group and a homomorphism file: {text!r}")
        base = parse_group_spec(inner[:commas[-1]], base_dir)
        hom_path = base_dir / inner[commas[-1] + 1:].strip()
        return pullback_oracle(base, load_hom(hom_path, base.alphabet))
    family, _, rest = text.partition(":")
    if family == "free":
        return free_oracle(*_ranked(family, rest))
    if family == "zn":
        return abelian_oracle(*_ranked(family, rest))
    if family == "trivial":
        return trivial_oracle(*_ranked(family, rest)) if rest else trivial_oracle()
    if family == "heisenberg" and not rest:
        return heisenberg_oracle()
    if family == "bs12" and not rest:
        return bs12_oracle()
    if family == "raag" and rest:
        return raag_oracle(RaagPresentation(load_graph(base_dir / rest)))
    if family == "torusbundle" and rest:
        try:
            a, b, c, d = (int(x) for x in rest.split(","))
        except ValueError:
            raise GroupSpecError(f"torusbundle needs four integers a,b,c,d, got {rest!r}") from None
        return torus_bundle_oracle(((a, b), (c, d)))
    raise GroupSpecError(f"unknown group spec {text!r}")
