"""Parikh vectors, projections, semilinear sets, bounded fitting and growth certificates."""
import logging
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from math import comb, gcd
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple, Union

from app.core.config import settings
from app.core.errors import DimensionError, FitBudgetExceeded, WordSyntaxError
from app.services.automata import compile_text, oracle_slice
from app.services.oracles import parse_group_spec
from app.services.words import SymmetricAlphabet, Word, letter_counts

logger = logging.getLogger(__name__)

Point = Tuple[int, ...]


@dataclass(frozen=True)
class ParikhVector:
    alphabet: SymmetricAlphabet
    counts: Tuple[int, ...]

    def __add__(self, other: "ParikhVector") -> "ParikhVector":
        if other.alphabet != self.alphabet:
            raise DimensionError("Parikh vectors over different alphabets")
        return ParikhVector(self.alphabet, tuple(a + b for a, b in zip(self.counts, other.counts)))

    def as_dict(self) -> Dict[str, int]:
        return dict(zip(self.alphabet.letters, self.counts))


def parikh(w: Word) -> ParikhVector:
    return ParikhVector(w.alphabet, letter_counts(w))


@dataclass(frozen=True)
class Projection:
    """Selected coordinates; each column sums the counts of one group of letters."""

    alphabet: SymmetricAlphabet
    columns: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        if not self.columns or any(not col for col in self.columns):
            raise DimensionError("a projection needs at least one nonempty coordinate")

    @classmethod
    def parse(cls, alphabet: SymmetricAlphabet, selectors: Union[str, Sequence[str]]) -> "Projection":
        """``"t,A"`` or ``["t", "A"]``; a ``+`` inside a selector sums letters (``"x+y+X+Y"``)."""
        if isinstance(selectors, str):
            selectors = [s for s in selectors.split(",")]
        columns = []
        for sel in selectors:
            names = [n.strip() for n in sel.split("+")]
            if not all(names):
                raise DimensionError(f"empty letter in selector {sel!r}")
            columns.append(tuple(alphabet.index(n) for n in names))
        return cls(alphabet, tuple(columns))

    @classmethod
    def identity(cls, alphabet: SymmetricAlphabet) -> "Projection":
        return cls(alphabet, tuple((i,) for i in range(len(alphabet))))

    @property
    def names(self) -> List[str]:
        return ["+".join(self.alphabet.letters[i] for i in col) for col in self.columns]

    @property
    def dimension(self) -> int:
        return len(self.columns)

    def apply(self, v: ParikhVector) -> Point:
        if v.alphabet != self.alphabet:
            raise DimensionError("projection and Parikh vector use different alphabets")
        return tuple(sum(v.counts[i] for i in col) for col in self.columns)


def project(vs: Iterable[ParikhVector], p: Projection) -> List[Point]:
    seen: Dict[Point, None] = {}
    for v in vs:
        seen.setdefault(p.apply(v))
    return list(seen)


def project_words(words: Iterable[Word], p: Projection) -> List[Point]:
    return project((parikh(w) for w in words), p)


# ---------------------------------------------------------------------------
# Semilinear sets
# ---------------------------------------------------------------------------

def _check_natural(vec: Sequence[int], what: str) -> None:
    if any(x < 0 for x in vec):
        raise DimensionError(f"{what} {tuple(vec)} has a negative entry")


@dataclass(frozen=True)
class LinearSet:
    base: Point
    generators: Tuple[Point, ...] = ()

    def __post_init__(self):
        _check_natural(self.base, "base")
        for g in self.generators:
            if len(g) != len(self.base):
                raise DimensionError("generators must have the dimension of the base")
            _check_natural(g, "generator")

    @property
    def dimension(self) -> int:
        return len(self.base)

    def contains(self, v: Sequence[int]) -> bool:
        if len(v) != self.dimension:
            raise DimensionError(f"point {tuple(v)} has dimension {len(v)}, set has {self.dimension}")
        residual = [x - b for x, b in zip(v, self.base)]
        if any(r < 0 for r in residual):
            return False
        gens = [g for g in self.generators if any(g)]
        return _combination_exists(residual, gens)

    def to_document(self) -> dict:
        return {"base": list(self.base), "generators": [list(g) for g in self.generators]}


def _combination_exists(residual: List[int], gens: List[Point]) -> bool:
    if not any(residual):
        return True
    if not gens:
        return False
    # a positive coordinate that no remaining generator touches can never be cleared
    for j, r in enumerate(residual):
        if r and all(g[j] == 0 for g in gens):
            return False
    g, rest = gens[0], gens[1:]
    ceiling = min(r // x for r, x in zip(residual, g) if x)
    for c in range(ceiling, -1, -1):
        if _combination_exists([r - c * x for r, x in zip(residual, g)], rest):
            return True
    return False


@dataclass(frozen=True)
class SemilinearSet:
    components: Tuple[LinearSet, ...] = ()
    dimension: Optional[int] = None

    def __post_init__(self):
        dims = {c.dimension for c in self.components}
        if self.dimension is not None:
            dims.add(self.dimension)
        if len(dims) > 1:
            raise DimensionError(f"components of mixed dimension {sorted(dims)}")

    def to_document(self) -> dict:
        return {"components": [c.to_document() for c in self.components]}


def semilinear_member(s: SemilinearSet, v: Sequence[int]) -> bool:
    if s.dimension is not None and len(v) != s.dimension:
        raise DimensionError(f"point {tuple(v)} has dimension {len(v)}, set has {s.dimension}")
    return any(c.contains(v) for c in s.components)


def _candidate_count(dimension: int, max_generators: int, coord_bound: int) -> int:
    vectors = (coord_bound + 1) ** dimension - 1
    return (coord_bound + 1) ** dimension * sum(comb(vectors, k) for k in range(max_generators + 1))


def fit_semilinear(
    points_in: Iterable[Sequence[int]],
    points_out: Iterable[Sequence[int]],
    max_components: int,
    max_generators: int,
    coord_bound: int,
    cap: Optional[int] = None,
) -> Optional[SemilinearSet]:
    """Search for a semilinear set containing ``points_in`` and avoiding ``points_out``.

    Complete within the bounds: every linear set whose base and generator entries
    are at most ``coord_bound`` is considered, in a fixed canonical order, and the
    cover search is exhaustive. Returns ``None`` when no such set exists.
    """
    inside = sorted({tuple(p) for p in points_in})
    outside = sorted({tuple(p) for p in points_out})
    if set(inside) & set(outside):
        raise DimensionError(f"points_in and points_out overlap on {sorted(set(inside) & set(outside))[:5]}")
    dims = {len(p) for p in inside + outside}
    if len(dims) > 1:
        raise DimensionError(f"points of mixed dimension {sorted(dims)}")
    if not inside:
        return SemilinearSet((), dims.pop() if dims else None)
    dimension = dims.pop()
    cap = settings.FIT_SEARCH_CAP if cap is None else cap
    total = _candidate_count(dimension, max_generators, coord_bound)
    if total > cap:
        raise FitBudgetExceeded(f"{total} candidate linear sets exceed the search cap {cap}")

    vectors = [v for v in product(range(coord_bound + 1), repeat=dimension) if any(v)]
    best_for_mask: Dict[int, LinearSet] = {}
    for base in product(range(coord_bound + 1), repeat=dimension):
        for k in range(max_generators + 1):
            for gens in combinations(vectors, k):
                candidate = LinearSet(base, gens)
                if any(candidate.contains(p) for p in outside):
                    continue
                mask = 0
                for bit, p in enumerate(inside):
                    if candidate.contains(p):
                        mask |= 1 << bit
                if mask:
                    best_for_mask.setdefault(mask, candidate)
    logger.debug("fit: %d admissible coverage classes out of %d candidates", len(best_for_mask), total)

    masks = list(best_for_mask)
    full = (1 << len(inside)) - 1

    def cover(covered: int, left: int) -> Optional[List[int]]:
        if covered == full:
            return []
        if left == 0:
            return None
        missing = ~covered & full
        first = missing & -missing
        for mask in masks:
            if mask & first:
                rest = cover(covered | mask, left - 1)
                if rest is not None:
                    return [mask] + rest
        return None

    chosen = cover(0, max_components)
    if chosen is None:
        return None
    return SemilinearSet(tuple(best_for_mask[m] for m in chosen), dimension)


# ---------------------------------------------------------------------------
# Growth certificates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VerticalGap:
    """Points sharing a first coordinate ``m`` have second coordinates at least ``m`` apart."""

    def holds(self, points: Sequence[Point]) -> bool:
        columns: Dict[int, List[int]] = {}
        for m, y in points:
            columns.setdefault(m, []).append(y)
        for m, ys in columns.items():
            ys.sort()
            if any(b - a < m for a, b in zip(ys, ys[1:])):
                return False
        return True

    def to_document(self) -> dict:
        return {"kind": "vertical-gap"}


@dataclass(frozen=True)
class ExponentialLowerBound:
    base: Fraction

    def holds(self, points: Sequence[Point]) -> bool:
        p, q = self.base.numerator, self.base.denominator
        return all(y * q ** n >= p ** n for n, y in points)

    def to_document(self) -> dict:
        return {"kind": "exp", "base": str(self.base)}


@dataclass(frozen=True)
class QuadraticLowerBound:
    coeff: Fraction

    def holds(self, points: Sequence[Point]) -> bool:
        return all(y >= self.coeff * n * n for n, y in points)

    def to_document(self) -> dict:
        return {"kind": "quad", "coeff": str(self.coeff)}


GrowthCertificate = Union[VerticalGap, ExponentialLowerBound, QuadraticLowerBound]


def parse_certificate(text: str) -> GrowthCertificate:
    """``vertical-gap``, ``exp:BASE`` or ``quad:COEFF`` (decimals and fractions allowed)."""
    kind, _, value = text.strip().partition(":")
    try:
        if kind == "vertical-gap" and not value:
            return VerticalGap()
        if kind == "exp" and value:
            return ExponentialLowerBound(Fraction(value))
        if kind == "quad" and value:
            return QuadraticLowerBound(Fraction(value))
    except (ValueError, ZeroDivisionError):
        pass
    raise WordSyntaxError(f"unknown certificate {text!r}; expected vertical-gap, exp:BASE or quad:COEFF")


def _check_plane(points: Iterable[Sequence[int]]) -> List[Point]:
    out = [tuple(p) for p in points]
    for p in out:
        if len(p) != 2:
            raise DimensionError(f"certificates read points in the plane, got {p}")
    return out


def check_certificate(points: Iterable[Sequence[int]], c: GrowthCertificate) -> bool:
    return c.holds(_check_plane(points))


def max_collinear(points: Iterable[Sequence[int]]) -> int:
    pts = sorted(set(_check_plane(points)))
    if len(pts) <= 2:
        return len(pts)
    best = 2
    for i, (x0, y0) in enumerate(pts):
        directions: Dict[Tuple[int, int], int] = {}
        for x1, y1 in pts[i + 1:]:
            dx, dy = x1 - x0, y1 - y0
            g = gcd(dx, dy)
            key = (dx // g, dy // g)
            directions[key] = directions.get(key, 0) + 1
        if directions:
            best = max(best, 1 + max(directions.values()))
    return best


def box_complement(points: Iterable[Sequence[int]], upper: Sequence[int]) -> Set[Point]:
    """Points of ``[0, upper]`` (coordinatewise) that are not in ``points``."""
    taken = {tuple(p) for p in points}
    return {p for p in product(*(range(u + 1) for u in upper)) if p not in taken}


# ---------------------------------------------------------------------------
# Pipelines shared by the CLI and the API
# ---------------------------------------------------------------------------

def slice_points(
    group: str, regex: str, max_len: int, selectors: Sequence[str], budget: Optional[int] = None
) -> Tuple[List[str], List[Point], int]:
    """Projected Parikh points of the identity words of a regular slice, plus the word count."""
    oracle = parse_group_spec(group)
    fsa = compile_text(oracle.alphabet, regex)
    projection = Projection.parse(oracle.alphabet, list(selectors))
    words = oracle_slice(oracle, fsa, max_len, budget)
    return projection.names, sorted(project_words(words, projection)), len(words)


def fit_report(
    points_in: Sequence[Point],
    points_out: Sequence[Point],
    components: int,
    generators: int,
    bound: int,
    certificate: Optional[str] = None,
) -> dict:
    found = fit_semilinear(points_in, points_out, components, generators, bound)
    doc = {
        "found": found is not None,
        "components": [] if found is None else found.to_document()["components"],
        "certificate": None,
        "max_collinear": None,
    }
    if certificate:
        cert = parse_certificate(certificate)
        doc["certificate"] = {**cert.to_document(), "passed": check_certificate(points_in, cert)}
    if points_in and all(len(p) == 2 for p in points_in):
        doc["max_collinear"] = max_collinear(points_in)
    return doc
