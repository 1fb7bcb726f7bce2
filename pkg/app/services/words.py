"""Symmetric alphabets, words over them, free reduction and monoid homomorphisms.

Text syntax: in alphabets whose letters are single characters, words are written
letter by letter with the case convention (``a`` and its inverse ``A``). Longer letter
names are written as whitespace separated tokens, an inverse carrying a trailing
apostrophe (``a_g a_h a_g'``). The apostrophe form is accepted for every letter.
"""
from dataclasses import dataclass
from functools import cached_property
from itertools import product
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from app.core.errors import AlphabetError, WordSyntaxError


def inverse_name(name: str, case_convention: bool) -> str:
    if case_convention:
        return name.upper()
    return f"{name}'"


@dataclass(frozen=True)
class SymmetricAlphabet:
    letters: Tuple[str, ...]
    inverse: Tuple[int, ...]

    def __post_init__(self):
        if len(self.letters) != len(self.inverse):
            raise AlphabetError("letters and inverse must have the same length")
        if len(set(self.letters)) != len(self.letters):
            raise AlphabetError(f"duplicate letter names in {list(self.letters)}")
        for i, j in enumerate(self.inverse):
            if not 0 <= j < len(self.letters):
                raise AlphabetError(f"inverse index {j} out of range")
            if j == i or self.inverse[j] != i:
                raise AlphabetError("inverse must be a fixed-point-free involution")

    @classmethod
    def from_generators(cls, names: Sequence[str], case_convention: Optional[bool] = None) -> "SymmetricAlphabet":
        """Alphabet ``g0, g0^-1, g1, g1^-1, ...`` for the given generator names."""
        names = list(names)
        if not names:
            raise AlphabetError("an alphabet needs at least one generator")
        if case_convention is None:
            case_convention = all(len(n) == 1 and n.islower() for n in names)
        letters: List[str] = []
        inverse: List[int] = []
        for name in names:
            if not name or any(ch.isspace() for ch in name) or name.endswith("'"):
                raise AlphabetError(f"invalid generator name {name!r}")
            i = len(letters)
            letters.extend([name, inverse_name(name, case_convention)])
            inverse.extend([i + 1, i])
        return cls(tuple(letters), tuple(inverse))

    @classmethod
    def from_json(cls, path: Union[str, Path]) -> "SymmetricAlphabet":
        """Alphabet file: ``{"letters": [generators]}``."""
        from app.models.schemas import AlphabetDocument

        doc = AlphabetDocument.model_validate_json(Path(path).read_text(encoding="utf-8"))
        return cls.from_generators(doc.letters)

    def __len__(self) -> int:
        return len(self.letters)

    @cached_property
    def positive(self) -> Tuple[int, ...]:
        """First letter of each inverse pair, in alphabet order."""
        return tuple(i for i, j in enumerate(self.inverse) if i < j)

    @property
    def generators(self) -> Tuple[str, ...]:
        return tuple(self.letters[i] for i in self.positive)

    @cached_property
    def single_char(self) -> bool:
        return all(len(name) == 1 for name in self.letters)

    @cached_property
    def _tokens(self) -> Dict[str, int]:
        table = {}
        for i, name in enumerate(self.letters):
            table.setdefault(f"{name}'", self.inverse[i])
        for i, name in enumerate(self.letters):
            table[name] = i
        return table

    @cached_property
    def _longest_token(self) -> int:
        return max(len(t) for t in self._tokens)

    def index(self, name: str) -> int:
        try:
            return self._tokens[name]
        except KeyError:
            raise AlphabetError(f"unknown letter {name!r}; alphabet is {list(self.letters)}") from None

    def tokenize(self, chunk: str) -> List[int]:
        """Greedy longest-match split of a chunk without whitespace."""
        out = []
        pos = 0
        while pos < len(chunk):
            for size in range(min(self._longest_token, len(chunk) - pos), 0, -1):
                idx = self._tokens.get(chunk[pos:pos + size])
                if idx is not None:
                    out.append(idx)
                    pos += size
                    break
            else:
                raise WordSyntaxError(f"cannot read a letter at {chunk[pos:]!r}")
        return out

    def union(self, other: "SymmetricAlphabet") -> "SymmetricAlphabet":
        clash = set(self.letters) & set(other.letters)
        if clash:
            raise AlphabetError(f"alphabets overlap on {sorted(clash)}")
        shift = len(self.letters)
        return SymmetricAlphabet(
            self.letters + other.letters,
            self.inverse + tuple(j + shift for j in other.inverse),
        )

    def word(self, text: str = "") -> "Word":
        return parse_word(self, text)


@dataclass(frozen=True)
class Word:
    alphabet: SymmetricAlphabet
    letters: Tuple[int, ...] = ()

    def __post_init__(self):
        n = len(self.alphabet.letters)
        for i in self.letters:
            if not 0 <= i < n:
                raise AlphabetError(f"letter index {i} not in alphabet of size {n}")

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __add__(self, other: "Word") -> "Word":
        return concat(self, other)

    def __pow__(self, n: int) -> "Word":
        if n < 0:
            return formal_inverse(self) ** (-n)
        return Word(self.alphabet, self.letters * n)

    def __str__(self) -> str:
        return render_word(self)

    def names(self) -> List[str]:
        return [self.alphabet.letters[i] for i in self.letters]


def _same_alphabet(u: SymmetricAlphabet, v: SymmetricAlphabet) -> bool:
    return u is v or u == v


def check_alphabet(word: Word, alphabet: SymmetricAlphabet) -> None:
    if not _same_alphabet(word.alphabet, alphabet):
        raise AlphabetError(
            f"word over {list(word.alphabet.letters)} used where {list(alphabet.letters)} is expected"
        )


def parse_word(alphabet: SymmetricAlphabet, text: str) -> Word:
    letters: List[int] = []
    for chunk in text.split():
        letters.extend(alphabet.tokenize(chunk))
    return Word(alphabet, tuple(letters))


def render_word(word: Word) -> str:
    sep = "" if word.alphabet.single_char else " "
    return sep.join(word.names())


def concat(u: Word, v: Word) -> Word:
    check_alphabet(v, u.alphabet)
    return Word(u.alphabet, u.letters + v.letters)


def formal_inverse(w: Word) -> Word:
    inv = w.alphabet.inverse
    return Word(w.alphabet, tuple(inv[i] for i in reversed(w.letters)))


def free_reduce(w: Word) -> Word:
    inv = w.alphabet.inverse
    stack: List[int] = []
    for i in w.letters:
        if stack and stack[-1] == inv[i]:
            stack.pop()
        else:
            stack.append(i)
    return Word(w.alphabet, tuple(stack))


def is_freely_reduced(w: Word) -> bool:
    inv = w.alphabet.inverse
    return all(inv[a] != b for a, b in zip(w.letters, w.letters[1:]))


def letter_counts(w: Word) -> Tuple[int, ...]:
    counts = [0] * len(w.alphabet)
    for i in w.letters:
        counts[i] += 1
    return tuple(counts)


def exponent_sum(w: Word, generator: str) -> int:
    g = w.alphabet.index(generator)
    g_inv = w.alphabet.inverse[g]
    return sum(1 if i == g else -1 if i == g_inv else 0 for i in w.letters)


def power(alphabet: SymmetricAlphabet, name: str, n: int) -> Word:
    """``name`` repeated ``n`` times; negative ``n`` gives the inverse letter."""
    i = alphabet.index(name)
    if n < 0:
        i, n = alphabet.inverse[i], -n
    return Word(alphabet, (i,) * n)


@dataclass(frozen=True)
class MonoidHom:
    source: SymmetricAlphabet
    target: SymmetricAlphabet
    images: Tuple[Word, ...]

    def __post_init__(self):
        if len(self.images) != len(self.source):
            raise AlphabetError("a homomorphism needs one image per source letter")
        for i, image in enumerate(self.images):
            check_alphabet(image, self.target)
            if formal_inverse(image) != self.images[self.source.inverse[i]]:
                raise AlphabetError(
                    f"image of {self.source.letters[self.source.inverse[i]]!r} is not the inverse "
                    f"of the image of {self.source.letters[i]!r}"
                )

    @classmethod
    def from_generator_images(
        cls,
        source: SymmetricAlphabet,
        target: SymmetricAlphabet,
        images: Mapping[str, Union[str, Word]],
    ) -> "MonoidHom":
        """Build from images of the positive letters; inverse letters follow."""
        table: List[Optional[Word]] = [None] * len(source)
        for name, image in images.items():
            if isinstance(image, str):
                image = parse_word(target, image)
            i = source.index(name)
            table[i] = image
            table[source.inverse[i]] = formal_inverse(image)
        missing = [source.letters[i] for i, w in enumerate(table) if w is None]
        if missing:
            raise AlphabetError(f"no image given for {missing}")
        return cls(source, target, tuple(table))

    @classmethod
    def identity(cls, alphabet: SymmetricAlphabet) -> "MonoidHom":
        return cls(alphabet, alphabet, tuple(Word(alphabet, (i,)) for i in range(len(alphabet))))

    def __call__(self, w: Word) -> Word:
        return apply_hom(self, w)


def apply_hom(h: MonoidHom, w: Word) -> Word:
    check_alphabet(w, h.source)
    out: List[int] = []
    for i in w.letters:
        out.extend(h.images[i].letters)
    return Word(h.target, tuple(out))


def load_hom(path: Union[str, Path], target: SymmetricAlphabet) -> MonoidHom:
    """Homomorphism file: ``{"source": [generators], "images": {generator: word}}``."""
    from app.models.schemas import HomDocument

    doc = HomDocument.model_validate_json(Path(path).read_text(encoding="utf-8"))
    source = SymmetricAlphabet.from_generators(doc.source)
    return MonoidHom.from_generator_images(source, target, doc.images)


def words_up_to(alphabet: SymmetricAlphabet, max_len: int) -> Iterable[Word]:
    """All words of length at most ``max_len`` in length-lexicographic order."""
    n = len(alphabet)
    for length in range(max_len + 1):
        for letters in product(range(n), repeat=length):
            yield Word(alphabet, letters)
