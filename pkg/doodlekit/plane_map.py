"""
Doodle diagrams on the 2-sphere as oriented 4-valent combinatorial maps.

A crossing is a 4-tuple of darts in counterclockwise order. Slots 0 and 2
belong to one strand, slots 1 and 3 to the other. Every dart is paired with
exactly one other dart by an edge, and is either inward or outward with
respect to its crossing. The face to the right of a dart is traced by
`face_next(d) = ccw(mate(d))`.

A diagram may consist of several connected pieces. Every dart records the
complement region its face belongs to; faces of different pieces that share a
region lie in the same component of the complement. Crossing-free circles are
kept only as a count.
"""

import logging
from collections import Counter, deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

import networkx as nx
from networkx.utils import UnionFind
from pydantic import ValidationError

from doodlekit.schemas import DiagramFile
from doodlekit.twinword import TwinWord

logger = logging.getLogger(__name__)

Rotation = Tuple[int, ...]

# Tokens of the flattened canonical code. Labels and counts are non-negative.
_OPEN_PIECE, _CLOSE_PIECE = -1, -2
_OPEN_REGION, _CLOSE_REGION = -3, -4
_PARENT_FACE = -5
_FREE = -6


class DiagramError(ValueError):
    """Raised when a diagram cannot be decoded or breaks its invariants."""

    def __init__(self, message: str, violations: Sequence[str] = ()):
        detail = "; ".join(violations)
        super().__init__(f"{message}: {detail}" if detail else message)
        self.violations = list(violations)


@dataclass(frozen=True)
class Diagram:
    """Immutable doodle diagram. Build instances with `Diagram.build`."""

    crossings: Tuple[Rotation, ...] = ()
    edges: Tuple[Tuple[int, int], ...] = ()
    outward: frozenset = frozenset()
    free_circles: int = 0
    regions: Tuple[Tuple[int, int], ...] = ()
    markers: Tuple[str, ...] = ()

    @classmethod
    def build(
        cls,
        crossings: Iterable[Sequence[int]],
        edges: Iterable[Tuple[int, int]],
        outward: Iterable[int],
        free_circles: int = 0,
        regions: Optional[Mapping[int, object]] = None,
        markers: Sequence[str] = (),
    ) -> "Diagram":
        """
        Normalize raw map data into a Diagram.

        Args:
            crossings: Rotations, one per crossing, darts in counterclockwise order
            edges: Dart pairs
            outward: Darts directed away from their crossing
            free_circles: Number of crossing-free circles
            regions: Region label per dart (any hashable labels); derived from
                the faces when omitted and the map is well formed
            markers: Optional boundary markers carried through files

        Returns:
            Diagram with sorted edges and region ids numbered by first dart
        """
        raw = cls(
            crossings=tuple(tuple(int(x) for x in rot) for rot in crossings),
            edges=tuple(sorted(tuple(sorted((int(a), int(b)))) for a, b in edges)),
            outward=frozenset(int(x) for x in outward),
            free_circles=int(free_circles),
            markers=tuple(markers),
        )
        if regions is None:
            if not raw.is_well_formed:
                return raw
            regions = {dart: raw.face_index[dart] for dart in raw.darts}
        return raw._with_regions(regions)

    def _with_regions(self, regions: Mapping[int, object]) -> "Diagram":
        numbering: Dict[object, int] = {}
        normalized = []
        for dart in self.darts:
            if dart not in regions:
                continue
            label = numbering.setdefault(regions[dart], len(numbering))
            normalized.append((dart, label))
        return Diagram(self.crossings, self.edges, self.outward, self.free_circles,
                       tuple(normalized), self.markers)

    # ---- dart navigation ----------------------------------------------------

    @cached_property
    def darts(self) -> List[int]:
        return sorted(d for rot in self.crossings for d in rot)

    @cached_property
    def _slots(self) -> Dict[int, Tuple[int, int]]:
        return {d: (c, s) for c, rot in enumerate(self.crossings) for s, d in enumerate(rot)}

    @cached_property
    def _mates(self) -> Dict[int, int]:
        mates = {}
        for a, b in self.edges:
            mates[a] = b
            mates[b] = a
        return mates

    @cached_property
    def _region_map(self) -> Dict[int, int]:
        return dict(self.regions)

    def crossing_of(self, d: int) -> int:
        return self._slots[d][0]

    def slot_of(self, d: int) -> int:
        return self._slots[d][1]

    def mate(self, d: int) -> int:
        return self._mates[d]

    def rotate(self, d: int, steps: int) -> int:
        c, s = self._slots[d]
        rot = self.crossings[c]
        return rot[(s + steps) % len(rot)]

    def ccw(self, d: int) -> int:
        return self.rotate(d, 1)

    def cw(self, d: int) -> int:
        return self.rotate(d, -1)

    def across(self, d: int) -> int:
        """Continuation of d's strand on the other side of its crossing."""
        return self.rotate(d, 2)

    def is_outward(self, d: int) -> bool:
        return d in self.outward

    def face_next(self, d: int) -> int:
        return self.ccw(self.mate(d))

    def region_of(self, d: int) -> int:
        return self._region_map[d]

    @property
    def crossing_count(self) -> int:
        return len(self.crossings)

    @property
    def region_count(self) -> int:
        return len(set(self._region_map.values()))

    @cached_property
    def is_well_formed(self) -> bool:
        """4-regular, every dart paired once and transversally oriented."""
        return not _structural_violations(self)

    # ---- faces and pieces ---------------------------------------------------

    @cached_property
    def faces(self) -> List[Tuple[int, ...]]:
        seen: Set[int] = set()
        result = []
        for start in self.darts:
            if start in seen:
                continue
            walk = []
            d = start
            while d not in seen:
                seen.add(d)
                walk.append(d)
                d = self.face_next(d)
            result.append(tuple(walk))
        return result

    @cached_property
    def face_index(self) -> Dict[int, int]:
        return {d: k for k, walk in enumerate(self.faces) for d in walk}

    def face_of(self, d: int) -> Tuple[int, ...]:
        return self.faces[self.face_index[d]]

    @cached_property
    def pieces(self) -> List[Tuple[int, ...]]:
        """Connected pieces as sorted tuples of crossing ids."""
        graph = nx.Graph()
        graph.add_nodes_from(range(len(self.crossings)))
        for a, b in self.edges:
            graph.add_edge(self.crossing_of(a), self.crossing_of(b))
        return sorted(tuple(sorted(part)) for part in nx.connected_components(graph))

    @cached_property
    def piece_index(self) -> Dict[int, int]:
        """Crossing id -> piece index."""
        return {c: k for k, part in enumerate(self.pieces) for c in part}

    def piece_of_dart(self, d: int) -> int:
        return self.piece_index[self.crossing_of(d)]

    def piece_faces(self, piece: int) -> List[int]:
        return [k for k, walk in enumerate(self.faces) if self.piece_of_dart(walk[0]) == piece]

    @cached_property
    def region_faces(self) -> Dict[int, List[int]]:
        """Region id -> indices of the faces it contains."""
        members: Dict[int, List[int]] = {}
        for k, walk in enumerate(self.faces):
            members.setdefault(self.region_of(walk[0]), []).append(k)
        return members

    def is_empty_face(self, d: int) -> bool:
        """True when the region of d's face holds no other face."""
        return len(self.region_faces[self.region_of(d)]) == 1

    # ---- strands ------------------------------------------------------------

    @cached_property
    def strand_walks(self) -> List[Tuple[int, ...]]:
        """Immersed circles, each as the cyclic sequence of its outward darts."""
        seen: Set[int] = set()
        walks = []
        for start in self.darts:
            if start in seen or not self.is_outward(start):
                continue
            walk = []
            d = start
            while d not in seen:
                seen.add(d)
                walk.append(d)
                d = self.across(self.mate(d))
            walks.append(tuple(walk))
        return walks

    # ---- construction helpers -----------------------------------------------

    def relabel(
        self,
        dart_map: Mapping[int, int],
        order: Optional[Sequence[int]] = None,
        shifts: Optional[Sequence[int]] = None,
    ) -> "Diagram":
        """
        Rename darts, reorder crossings and restart rotations.

        Args:
            dart_map: Injective map old dart -> new dart
            order: Old crossing ids in their new order
            shifts: Per old crossing, how many slots to rotate its tuple

        Returns:
            An isomorphic diagram
        """
        order = list(order) if order is not None else list(range(len(self.crossings)))
        shifts = list(shifts) if shifts is not None else [0] * len(self.crossings)
        crossings = []
        for c in order:
            rot = self.crossings[c]
            k = shifts[c] % len(rot)
            crossings.append(tuple(dart_map[d] for d in rot[k:] + rot[:k]))
        return Diagram.build(
            crossings,
            ((dart_map[a], dart_map[b]) for a, b in self.edges),
            (dart_map[d] for d in self.outward),
            self.free_circles,
            {dart_map[d]: r for d, r in self.regions},
            self.markers,
        )

    def union(self, other: "Diagram", host_dart: Optional[int] = None,
              guest_dart: Optional[int] = None) -> "Diagram":
        """
        Place `other` beside this diagram.

        The face of `other` to the right of `guest_dart` joins the region of the
        face of this diagram to the right of `host_dart`. Either dart may be
        omitted when the corresponding diagram has no crossings.
        """
        if not other.crossings:
            return Diagram(self.crossings, self.edges, self.outward,
                           self.free_circles + other.free_circles, self.regions, self.markers)
        if not self.crossings:
            return Diagram(other.crossings, other.edges, other.outward,
                           self.free_circles + other.free_circles, other.regions, other.markers)
        if host_dart is None or guest_dart is None:
            raise DiagramError("placing a diagram beside another needs a host and a guest dart")

        offset = max(self.darts) + 1
        crossings = list(self.crossings) + [tuple(d + offset for d in rot) for rot in other.crossings]
        edges = list(self.edges) + [(a + offset, b + offset) for a, b in other.edges]
        outward = set(self.outward) | {d + offset for d in other.outward}

        host_region = ("host", self.region_of(host_dart))
        guest_region = other.region_of(guest_dart)
        regions: Dict[int, object] = {d: ("host", r) for d, r in self.regions}
        for d, r in other.regions:
            regions[d + offset] = host_region if r == guest_region else ("guest", r)
        return Diagram.build(crossings, edges, outward, self.free_circles + other.free_circles,
                             regions, self.markers)


@dataclass(frozen=True)
class SeifertFamily:
    """Result of smoothing every crossing along the orientation."""

    circle_count: int
    concentric: bool
    coherently_oriented: bool
    edge_circle: Mapping[int, int] = field(default_factory=dict, compare=False)


@dataclass(frozen=True, order=True)
class CanonicalCode:
    value: bytes

    def hex(self) -> str:
        return self.value.hex()

    def __str__(self) -> str:
        return self.value.decode("ascii")


def closure(w: TwinWord) -> Diagram:
    """
    Close a twin diagram: join top and bottom endpoints of every strand.

    Letter t (0-based) becomes crossing t with darts 4t..4t+3 in slots
    NE, NW, SW, SE. Strands run downward, so NE and NW are inward.
    """
    n, letters = w.strands, w.letters
    crossings = []
    edges = []
    pending: Dict[int, int] = {}
    first_in: Dict[int, int] = {}
    for t, i in enumerate(letters):
        ne, nw, sw, se = 4 * t, 4 * t + 1, 4 * t + 2, 4 * t + 3
        crossings.append((ne, nw, sw, se))
        for position, inward in ((i, nw), (i + 1, ne)):
            if position in pending:
                edges.append((pending[position], inward))
            else:
                first_in[position] = inward
        pending[i], pending[i + 1] = sw, se
    for position, last_out in pending.items():
        edges.append((last_out, first_in[position]))

    outward = [4 * t + s for t in range(len(letters)) for s in (2, 3)]
    free = n - len(pending)
    regions = _closure_regions(n, letters, set(pending))
    logger.debug("closure of %s: %d crossings, %d free circles", w, len(letters), free)
    return Diagram.build(crossings, edges, outward, free, regions)


def _closure_regions(n: int, letters: Sequence[int], touched: Set[int]) -> Dict[int, object]:
    # Gap g lies between positions g and g+1; gap 0 is outside every return arc.
    # Level t sits just above letter t; levels wrap through the return arcs.
    levels = len(letters)
    if not levels:
        return {}
    gaps = UnionFind()
    for t in range(levels):
        for g in range(n + 1):
            gaps.union((g, t), (g, t))
            if letters[t] != g:
                gaps.union((g, t), (g, (t + 1) % levels))
    for position in range(1, n + 1):
        if position not in touched:
            for t in range(levels):
                gaps.union((position - 1, t), (position, t))

    regions = {}
    for t, i in enumerate(letters):
        below = (t + 1) % levels
        regions[4 * t] = gaps[(i + 1, t)]
        regions[4 * t + 1] = gaps[(i, t)]
        regions[4 * t + 2] = gaps[(i - 1, below)]
        regions[4 * t + 3] = gaps[(i, below)]
    return regions


def components(d: Diagram) -> int:
    return len(d.strand_walks) + d.free_circles


def faces(d: Diagram) -> List[Tuple[int, ...]]:
    return list(d.faces)


def _structural_violations(d: Diagram) -> List[str]:
    violations = [f"crossing {c}: degree {len(rot)}" for c, rot in enumerate(d.crossings) if len(rot) != 4]
    if violations:
        return violations

    owner: Dict[int, int] = {}
    for c, rot in enumerate(d.crossings):
        for dart in rot:
            if dart in owner:
                violations.append(f"dart {dart}: appears at crossings {owner[dart]} and {c}")
            owner[dart] = c

    uses = Counter()
    for a, b in d.edges:
        if a == b:
            violations.append(f"edge ({a}, {b}): dart paired with itself")
        for x in (a, b):
            if x not in owner:
                violations.append(f"edge ({a}, {b}): unknown dart {x}")
            uses[x] += 1
    for dart in sorted(owner):
        if uses[dart] == 0:
            violations.append(f"dart {dart}: unpaired")
        elif uses[dart] > 1:
            violations.append(f"dart {dart}: paired {uses[dart]} times")

    for c, rot in enumerate(d.crossings):
        for s in (0, 1):
            if (rot[s] in d.outward) == (rot[s + 2] in d.outward):
                violations.append(f"crossing {c}: strand {s} not transverse")
    for a, b in d.edges:
        if (a in d.outward) == (b in d.outward):
            sense = "out" if a in d.outward else "in"
            violations.append(f"edge ({a}, {b}): both darts {sense}")
    if d.free_circles < 0:
        violations.append(f"free circles: negative count {d.free_circles}")
    return violations


def validate(d: Diagram) -> List[str]:
    """
    Check every diagram invariant.

    Returns:
        Violation messages; empty when the diagram is valid
    """
    violations = _structural_violations(d)
    if violations:
        return violations

    several = len(d.pieces) > 1
    for p, part in enumerate(d.pieces):
        vertices = len(part)
        edges = 2 * vertices
        face_count = len(d.piece_faces(p))
        chi = vertices - edges + face_count
        if chi != 2:
            prefix = f"piece {p}: " if several else ""
            violations.append(f"{prefix}Euler characteristic {chi}, expected 2")

    violations.extend(_region_violations(d))
    return violations


def _region_violations(d: Diagram) -> List[str]:
    if not d.crossings:
        return []
    missing = [dart for dart in d.darts if dart not in d._region_map]
    if missing:
        return [f"dart {dart}: no region" for dart in missing]

    violations = []
    for walk in d.faces:
        labels = {d.region_of(x) for x in walk}
        if len(labels) > 1:
            violations.append(f"face of dart {walk[0]}: darts in regions {sorted(labels)}")
    if violations:
        return violations

    incidence = nx.Graph()
    for k, walk in enumerate(d.faces):
        piece, region = d.piece_of_dart(walk[0]), d.region_of(walk[0])
        if incidence.has_edge(("piece", piece), ("region", region)):
            violations.append(f"region {region}: two faces of piece {piece}")
        incidence.add_edge(("piece", piece), ("region", region))
    if not violations and not nx.is_tree(incidence):
        violations.append("regions: piece/region incidence is not a tree")
    return violations


def smooth_next(d: Diagram, inward: int) -> int:
    """The outward dart an inward dart connects to after oriented smoothing."""
    cw = d.cw(inward)
    return cw if d.is_outward(cw) else d.ccw(inward)


def seifert_circles(d: Diagram) -> List[Tuple[int, ...]]:
    """Seifert circles through crossings, each as its cyclic list of outward darts."""
    seen: Set[int] = set()
    circles = []
    for start in d.darts:
        if start in seen or not d.is_outward(start):
            continue
        circle = []
        o = start
        while o not in seen:
            seen.add(o)
            circle.append(o)
            o = smooth_next(d, d.mate(o))
        circles.append(tuple(circle))
    return circles


def seifert_smooth(d: Diagram) -> SeifertFamily:
    """
    Smooth every crossing along the orientation and describe the circles.

    The family is concentric when its circles and the regions between them
    form a path and the orientation is coherent; coherent means no region lies
    on the same side of two of its circles. Free circles carry no location and
    are always inserted coherently.
    """
    circles = seifert_circles(d)
    edge_circle: Dict[int, int] = {}
    for k, circle in enumerate(circles):
        for o in circle:
            edge_circle[o] = k
            edge_circle[d.mate(o)] = k

    merged = UnionFind()
    for r in set(d._region_map.values()):
        merged.union(r, r)
    for rot in d.crossings:
        ins = [x for x in rot if not d.is_outward(x)]
        outs = [x for x in rot if d.is_outward(x)]
        merged.union(d.region_of(_later_of_pair(d, ins)), d.region_of(_later_of_pair(d, outs)))

    graph = nx.Graph()
    sides: Dict[int, List[str]] = {}
    for k, circle in enumerate(circles):
        o = circle[0]
        right, left = merged[d.region_of(o)], merged[d.region_of(d.mate(o))]
        graph.add_edge(("region", right), ("circle", k))
        graph.add_edge(("region", left), ("circle", k))
        sides.setdefault(right, []).append("right")
        sides.setdefault(left, []).append("left")

    coherent = all(len(set(marks)) == len(marks) for marks in sides.values())
    path = all(graph.degree(node) <= 2 for node in graph.nodes if node[0] == "region")
    path = path and (graph.number_of_nodes() == 0 or nx.is_tree(graph))
    return SeifertFamily(
        circle_count=len(circles) + d.free_circles,
        concentric=path and coherent,
        coherently_oriented=coherent,
        edge_circle=edge_circle,
    )


def _later_of_pair(d: Diagram, pair: Sequence[int]) -> int:
    # Of two adjacent darts, the one counterclockwise after the other; its face holds their corner.
    first, second = pair
    return second if d.ccw(first) == second else first


def canonical_code(d: Diagram) -> CanonicalCode:
    """
    Code identifying d up to orientation-preserving homeomorphism and circle shift.

    Pieces and regions form a tree. Each piece is encoded by the least
    breadth-first labelling of its darts started inside the face through which
    it hangs from its parent region; the whole diagram takes the least code
    over all choices of root region.
    """
    members: Dict[int, List[Tuple[int, int]]] = {}
    for k, walk in enumerate(d.faces):
        members.setdefault(d.region_of(walk[0]), []).append((d.piece_of_dart(walk[0]), k))

    piece_codes: Dict[Tuple[int, int], Tuple[int, ...]] = {}

    def region_code(region: int, parent_piece: Optional[int]) -> Tuple[int, ...]:
        children = sorted(piece_code(p, face) for p, face in members[region] if p != parent_piece)
        flat = [_OPEN_REGION]
        for child in children:
            flat.extend(child)
        flat.append(_CLOSE_REGION)
        return tuple(flat)

    def piece_code(piece: int, parent_face: int) -> Tuple[int, ...]:
        key = (piece, parent_face)
        if key not in piece_codes:
            piece_codes[key] = min(_piece_code_from(d, start, piece, parent_face, region_code)
                                   for start in d.faces[parent_face])
        return piece_codes[key]

    tokens: Tuple[int, ...] = ()
    if members:
        tokens = min(region_code(r, None) for r in members)
    flat = tokens + (_FREE, d.free_circles)
    return CanonicalCode(",".join(str(x) for x in flat).encode("ascii"))


def _piece_code_from(d: Diagram, start: int, piece: int, parent_face: int, region_code) -> Tuple[int, ...]:
    labels = {start: 0}
    order = [start]
    queue = deque([start])
    while queue:
        x = queue.popleft()
        for y in (d.ccw(x), d.mate(x)):
            if y not in labels:
                labels[y] = len(labels)
                order.append(y)
                queue.append(y)

    flat = [_OPEN_PIECE, len(order)]
    for x in order:
        flat.extend((labels[d.ccw(x)], labels[d.mate(x)], 1 if d.is_outward(x) else 0))
    own_faces = {d.face_index[x] for x in order}
    for k in sorted(own_faces, key=lambda f: min(labels[x] for x in d.faces[f])):
        if k == parent_face:
            flat.append(_PARENT_FACE)
        else:
            flat.extend(region_code(d.region_of(d.faces[k][0]), piece))
    flat.append(_CLOSE_PIECE)
    return tuple(flat)


def dumps(d: Diagram) -> str:
    """Serialize to the diagram file format (stable ids, fixed key order)."""
    doc = DiagramFile(
        crossings=[list(rot) for rot in d.crossings],
        edges=list(d.edges),
        dart_directions={x: "out" if d.is_outward(x) else "in" for x in d.darts},
        free_circles=d.free_circles,
        regions=dict(d.regions) or None,
        markers=list(d.markers) or None,
    )
    return doc.model_dump_json(indent=2, exclude_none=True)


def loads(text: str) -> Diagram:
    """
    Parse and validate a diagram file.

    Raises:
        DiagramError: The JSON does not match the schema or the map breaks an invariant
    """
    try:
        doc = DiagramFile.model_validate_json(text)
    except ValidationError as e:
        raise DiagramError("invalid diagram file", [err["msg"] + " at " + ".".join(map(str, err["loc"]))
                                                    for err in e.errors()]) from e

    darts = {x for rot in doc.crossings for x in rot}
    missing = sorted(darts - set(doc.dart_directions))
    if missing:
        raise DiagramError("invalid diagram file", [f"dart {x}: no direction" for x in missing])

    d = Diagram.build(
        doc.crossings,
        doc.edges,
        [x for x, sense in doc.dart_directions.items() if sense == "out"],
        doc.free_circles,
        doc.regions,
        doc.markers or (),
    )
    violations = validate(d)
    if violations:
        raise DiagramError("invalid diagram", violations)
    return d
