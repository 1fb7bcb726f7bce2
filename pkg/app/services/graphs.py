"""Simple graphs, joins and complements, induced P4/C4 detection, cographs and class G.

Adjacency is kept as one bitmask per vertex so that exhaustive sweeps over all
labelled graphs on seven vertices stay cheap; networkx is the interchange type.
"""
import json
import logging
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import networkx as nx

from app.core.errors import GraphError

logger = logging.getLogger(__name__)

P4 = "P4"
C4 = "C4"


def _bits(mask: int) -> List[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


@dataclass(frozen=True)
class SimpleGraph:
    vertices: Tuple[str, ...]
    adjacency: Tuple[int, ...]

    def __post_init__(self):
        if len(set(self.vertices)) != len(self.vertices):
            raise GraphError("duplicate vertex names")
        if len(self.adjacency) != len(self.vertices):
            raise GraphError("one adjacency mask per vertex is required")
        for i, mask in enumerate(self.adjacency):
            if mask >> i & 1:
                raise GraphError(f"loop at vertex {self.vertices[i]!r}")
            if mask >> len(self.vertices):
                raise GraphError("adjacency refers to a missing vertex")
            for j in _bits(mask):
                if not self.adjacency[j] >> i & 1:
                    raise GraphError("adjacency must be symmetric")

    @classmethod
    def from_edges(cls, vertices: Sequence[str], edges: Iterable[Sequence[str]]) -> "SimpleGraph":
        vertices = tuple(vertices)
        index = {v: i for i, v in enumerate(vertices)}
        adj = [0] * len(vertices)
        for edge in edges:
            if len(edge) != 2:
                raise GraphError(f"an edge joins exactly two vertices, got {list(edge)}")
            u, v = edge
            if u not in index or v not in index:
                raise GraphError(f"edge {u!r}-{v!r} uses an unknown vertex")
            if u == v:
                raise GraphError(f"loop at vertex {u!r}")
            adj[index[u]] |= 1 << index[v]
            adj[index[v]] |= 1 << index[u]
        return cls(vertices, tuple(adj))

    @classmethod
    def from_networkx(cls, g: nx.Graph) -> "SimpleGraph":
        return cls.from_edges([str(v) for v in g.nodes], ((str(u), str(v)) for u, v in g.edges))

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(self.vertices)
        g.add_edges_from(self.edges)
        return g

    def __len__(self) -> int:
        return len(self.vertices)

    @property
    def edges(self) -> List[Tuple[str, str]]:
        return [
            (self.vertices[i], self.vertices[j])
            for i in range(len(self.vertices))
            for j in _bits(self.adjacency[i])
            if i < j
        ]

    def index(self, vertex: str) -> int:
        try:
            return self.vertices.index(vertex)
        except ValueError:
            raise GraphError(f"unknown vertex {vertex!r}") from None

    @property
    def full_mask(self) -> int:
        return (1 << len(self.vertices)) - 1

    def induced(self, mask: int) -> "SimpleGraph":
        keep = _bits(mask)
        pos = {old: new for new, old in enumerate(keep)}
        adj = []
        for old in keep:
            adj.append(sum(1 << pos[j] for j in _bits(self.adjacency[old] & mask)))
        return SimpleGraph(tuple(self.vertices[i] for i in keep), tuple(adj))

    def induced_on(self, vertices: Iterable[str]) -> "SimpleGraph":
        return self.induced(sum(1 << self.index(v) for v in vertices))

    def to_document(self) -> dict:
        return {"vertices": list(self.vertices), "edges": [list(e) for e in self.edges]}


def path_graph(names: Sequence[str]) -> SimpleGraph:
    return SimpleGraph.from_edges(names, zip(names, names[1:]))


def cycle_graph(names: Sequence[str]) -> SimpleGraph:
    return SimpleGraph.from_edges(names, zip(names, list(names[1:]) + [names[0]]))


def complete_graph(names: Sequence[str]) -> SimpleGraph:
    return SimpleGraph.from_edges(names, combinations(names, 2))


def empty_graph(names: Sequence[str]) -> SimpleGraph:
    return SimpleGraph.from_edges(names, ())


def disjoint_union(g: SimpleGraph, h: SimpleGraph) -> SimpleGraph:
    return SimpleGraph.from_edges(g.vertices + h.vertices, g.edges + h.edges)


def join(g: SimpleGraph, h: SimpleGraph) -> SimpleGraph:
    cross = [(u, v) for u in g.vertices for v in h.vertices]
    return SimpleGraph.from_edges(g.vertices + h.vertices, g.edges + h.edges + cross)


def complement(g: SimpleGraph) -> SimpleGraph:
    full = g.full_mask
    return SimpleGraph(
        g.vertices, tuple(full ^ mask ^ (1 << i) for i, mask in enumerate(g.adjacency))
    )


def _component_masks(adjacency: Sequence[int], mask: int) -> List[int]:
    comps = []
    rest = mask
    while rest:
        seed = rest & -rest
        comp = seed
        frontier = seed
        while frontier:
            grown = 0
            for i in _bits(frontier):
                grown |= adjacency[i]
            grown &= mask & ~comp
            comp |= grown
            frontier = grown
        comps.append(comp)
        rest &= ~comp
    return comps


def join_decompose(g: SimpleGraph) -> Optional[Tuple[SimpleGraph, SimpleGraph]]:
    """``(J, K)`` with ``g = J * K`` when the complement is disconnected, else ``None``."""
    co_components = list(nx.connected_components(nx.complement(g.to_networkx())))
    if len(co_components) < 2:
        return None
    first = min(co_components, key=lambda comp: min(g.index(v) for v in comp))
    rest = [v for v in g.vertices if v not in first]
    return g.induced_on(first), g.induced_on(rest)


def maximal_join_splitting(g: SimpleGraph) -> List[SimpleGraph]:
    """Factors ``A0 * A1 * ... * An`` of the finest join decomposition of ``g``."""
    co = complement(g)
    return [g.induced(m) for m in _component_masks(co.adjacency, co.full_mask)]


# ---------------------------------------------------------------------------
# Induced subgraphs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ForbiddenWitness:
    kind: str
    vertices: Tuple[str, str, str, str]

    def to_document(self) -> dict:
        return {"kind": self.kind, "vertices": list(self.vertices)}


def _order_path(adjacency: Sequence[int], quad: Tuple[int, ...], mask: int) -> Tuple[int, ...]:
    ends = [v for v in quad if bin(adjacency[v] & mask).count("1") == 1]
    order = [min(ends)]
    while len(order) < 4:
        nxt = [v for v in _bits(adjacency[order[-1]] & mask) if v not in order]
        order.append(min(nxt))
    return tuple(order)


def _order_cycle(adjacency: Sequence[int], quad: Tuple[int, ...], mask: int) -> Tuple[int, ...]:
    order = [min(quad)]
    while len(order) < 4:
        nxt = [v for v in _bits(adjacency[order[-1]] & mask) if v not in order]
        order.append(min(nxt))
    return tuple(order)


def _find_quad(adjacency: Sequence[int], within: int, pattern: str) -> Optional[Tuple[int, ...]]:
    for quad in combinations(_bits(within), 4):
        mask = (1 << quad[0]) | (1 << quad[1]) | (1 << quad[2]) | (1 << quad[3])
        degrees = sorted(bin(adjacency[v] & mask).count("1") for v in quad)
        if pattern == P4 and degrees == [1, 1, 2, 2]:
            return _order_path(adjacency, quad, mask)
        if pattern == C4 and degrees == [2, 2, 2, 2]:
            return _order_cycle(adjacency, quad, mask)
    return None


def find_induced(g: SimpleGraph, pattern: str, within: Optional[int] = None) -> Optional[ForbiddenWitness]:
    """First induced copy of ``pattern`` over 4-subsets in lexicographic order."""
    if pattern not in (P4, C4):
        raise GraphError(f"unknown pattern {pattern!r}; expected P4 or C4")
    quad = _find_quad(g.adjacency, g.full_mask if within is None else within, pattern)
    if quad is None:
        return None
    return ForbiddenWitness(pattern, tuple(g.vertices[i] for i in quad))


def find_induced_p3(g: SimpleGraph) -> Optional[Tuple[str, str, str]]:
    """Induced path on three vertices ``(end, centre, end)``."""
    for triple in combinations(range(len(g)), 3):
        mask = sum(1 << v for v in triple)
        degrees = {v: bin(g.adjacency[v] & mask).count("1") for v in triple}
        if sorted(degrees.values()) == [1, 1, 2]:
            centre = next(v for v, d in degrees.items() if d == 2)
            ends = [v for v in triple if v != centre]
            return g.vertices[ends[0]], g.vertices[centre], g.vertices[ends[1]]
    return None


def is_cograph(g: SimpleGraph) -> bool:
    return find_induced(g, P4) is None


def is_disjoint_union_of_cliques(g: SimpleGraph) -> bool:
    for comp in _component_masks(g.adjacency, g.full_mask):
        for i in _bits(comp):
            if (g.adjacency[i] | (1 << i)) & comp != comp:
                return False
    return True


# ---------------------------------------------------------------------------
# Class G
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Leaf:
    vertex: str

    def to_document(self) -> dict:
        return {"kind": "leaf", "vertex": self.vertex}


@dataclass(frozen=True)
class DisjointUnion:
    parts: Tuple["CertificateNode", ...]

    def to_document(self) -> dict:
        return {"kind": "union", "parts": [p.to_document() for p in self.parts]}


@dataclass(frozen=True)
class Cone:
    apex: str
    base: "CertificateNode"

    def to_document(self) -> dict:
        return {"kind": "cone", "apex": self.apex, "base": self.base.to_document()}


CertificateNode = Union[Leaf, DisjointUnion, Cone]


@dataclass(frozen=True)
class ClassGCertificate:
    root: CertificateNode

    def to_document(self) -> dict:
        return self.root.to_document()


class _NotInClassG(Exception):
    def __init__(self, mask: int):
        self.mask = mask


def _build(g: SimpleGraph, mask: int) -> CertificateNode:
    adj = g.adjacency
    bits = _bits(mask)
    if len(bits) == 1:
        return Leaf(g.vertices[bits[0]])
    comps = _component_masks(adj, mask)
    if len(comps) > 1:
        return DisjointUnion(tuple(_build(g, c) for c in comps))
    for v in bits:
        if (adj[v] | (1 << v)) & mask == mask:
            return Cone(g.vertices[v], _build(g, mask & ~(1 << v)))
    raise _NotInClassG(mask)


def class_g_membership(g: SimpleGraph) -> Union[ClassGCertificate, ForbiddenWitness]:
    if not g.vertices:
        raise GraphError("class G is built from a point; the empty graph is not a member")
    try:
        return ClassGCertificate(_build(g, g.full_mask))
    except _NotInClassG as stuck:
        for pattern in (P4, C4):
            witness = find_induced(g, pattern, within=stuck.mask)
            if witness is not None:
                return witness
        raise GraphError(
            f"connected piece {g.induced(stuck.mask).vertices} has no universal vertex "
            "and no induced P4 or C4"
        )


def replay(certificate: Union[ClassGCertificate, CertificateNode]) -> SimpleGraph:
    node = certificate.root if isinstance(certificate, ClassGCertificate) else certificate
    if isinstance(node, Leaf):
        return SimpleGraph((node.vertex,), (0,))
    if isinstance(node, DisjointUnion):
        out = replay(node.parts[0])
        for part in node.parts[1:]:
            out = disjoint_union(out, replay(part))
        return out
    return join(replay(node.base), SimpleGraph((node.apex,), (0,)))


def same_graph(g: SimpleGraph, h: SimpleGraph) -> bool:
    """Equal vertex sets and edge sets, ignoring vertex order."""
    return set(g.vertices) == set(h.vertices) and {frozenset(e) for e in g.edges} == {
        frozenset(e) for e in h.edges
    }


@dataclass(frozen=True)
class RaagClassification:
    verdict: str
    certificate: Optional[ClassGCertificate] = None
    witness: Optional[ForbiddenWitness] = None
    theorem: Optional[str] = None
    disjoint_union_of_cliques: bool = False
    f2_times_z: Optional[Tuple[str, str, str]] = None

    def to_document(self) -> dict:
        doc: Dict[str, object] = {"verdict": self.verdict}
        if self.certificate is not None:
            doc["certificate"] = self.certificate.to_document()
            doc["disjoint_union_of_cliques"] = self.disjoint_union_of_cliques
            if self.disjoint_union_of_cliques:
                doc["note"] = (
                    "A(Γ) is a free product of free abelian groups; no obstruction is known "
                    "and such groups are expected to have MCF word problem"
                )
            else:
                doc["f2_times_z"] = list(self.f2_times_z)
                doc["note"] = (
                    "no obstruction from class G; the induced path on three vertices gives a "
                    "subgroup F2×Z, whose word problem is conjectured but not known to be non-MCF"
                )
        else:
            doc["witness"] = self.witness.to_document()
            doc["theorem"] = self.theorem
            doc["note"] = (
                "the induced subgraph spans a finitely generated subgroup whose word problem is "
                "not MCF; word problems in a cone pass to finitely generated subgroups, so A(Γ) "
                "is not MCF either"
            )
        return doc


THEOREM_FOR = {P4: "A(P4)-not-MCF", C4: "F2xF2-not-MCF"}


def classify_raag(g: SimpleGraph) -> RaagClassification:
    result = class_g_membership(g)
    if isinstance(result, ForbiddenWitness):
        logger.info("graph %s: induced %s at %s", list(g.vertices), result.kind, result.vertices)
        return RaagClassification("NotMCF", witness=result, theorem=THEOREM_FOR[result.kind])
    cliques = is_disjoint_union_of_cliques(g)
    return RaagClassification(
        "InClassG",
        certificate=result,
        disjoint_union_of_cliques=cliques,
        f2_times_z=None if cliques else find_induced_p3(g),
    )


# ---------------------------------------------------------------------------
# Files
# ---------------------------------------------------------------------------

def load_graph(path: Union[str, Path]) -> SimpleGraph:
    """JSON ``{vertices, edges}`` or a plain edge list (one ``u v`` per line, lone names allowed)."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".json":
        return parse_graph_document(json.loads(text))
    return parse_edge_list(text)


def save_graph(g: SimpleGraph, path: Union[str, Path]) -> Path:
    """Write ``g`` in the format picked by the suffix; isolated vertices get a line of their own."""
    from app.services.reports import atomic_write_text, write_json

    path = Path(path)
    if path.suffix.lower() == ".json":
        return write_json(path, g.to_document())
    lines = list(nx.generate_edgelist(g.to_networkx(), data=False))
    lines += [v for i, v in enumerate(g.vertices) if not g.adjacency[i]]
    return atomic_write_text(path, "".join(line + "\n" for line in lines))


def parse_graph_document(doc: dict) -> SimpleGraph:
    from app.models.schemas import GraphDocument

    parsed = GraphDocument.model_validate(doc)
    return SimpleGraph.from_edges(parsed.vertices, parsed.edges)


def parse_edge_list(text: str) -> SimpleGraph:
    g = nx.Graph()
    pairs = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if len(tokens) == 1:
            g.add_node(tokens[0])
        elif len(tokens) == 2:
            g.add_nodes_from(tokens)
            pairs.append(line)
        else:
            raise GraphError(f"cannot read edge-list line {line!r}")
    g.add_edges_from(nx.parse_edgelist(pairs, nodetype=str, data=False).edges)
    return SimpleGraph.from_networkx(g)


def graph_report(g: SimpleGraph, mode: str) -> dict:
    """Report for one analysis mode: ``classify``, ``cograph`` or ``certificate``."""
    if mode == "classify":
        return classify_raag(g).to_document()
    if mode == "cograph":
        witness = find_induced(g, P4)
        split = join_decompose(g)
        return {
            "cograph": witness is None,
            "witness": None if witness is None else witness.to_document(),
            "join": None if split is None else [list(split[0].vertices), list(split[1].vertices)],
        }
    result = class_g_membership(g)
    if isinstance(result, ForbiddenWitness):
        return {"in_class_g": False, "witness": result.to_document()}
    return {
        "in_class_g": True,
        "certificate": result.to_document(),
        "replay_matches": same_graph(replay(result), g),
        "join_factors": [list(f.vertices) for f in maximal_join_splitting(g)],
    }
