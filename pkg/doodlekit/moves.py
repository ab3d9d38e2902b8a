"""
Moves on doodle diagrams: R1, R2 in both directions, generalized lens moves and
greedy reduction to the minimal diagram.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np
from networkx.utils import UnionFind

from doodlekit.plane_map import CanonicalCode, Diagram, canonical_code, seifert_smooth

logger = logging.getLogger(__name__)

REGULAR = "regular"
IRREGULAR = "irregular"
ORDER_POLICIES = ("deterministic", "seeded-random")

Bundle = Optional[Tuple[int, ...]]


class MoveError(ValueError):
    """Base class for move failures."""


class StaleSiteError(MoveError):
    """The site was found on another diagram and is no longer present."""


class SiteError(MoveError):
    """The site is malformed: not co-facial, not empty, or not a valid bundle."""


class NotApplicableError(MoveError):
    """Generalized bending preconditions do not hold."""


@dataclass(frozen=True)
class Monogon:
    crossing: int
    dart: int  # the loop face is the face to the right of this dart


@dataclass(frozen=True)
class Bigon:
    crossings: Tuple[int, int]
    darts: Tuple[int, int]  # the bigon face, one dart per bounding edge
    kind: str

    @property
    def irregular(self) -> bool:
        return self.kind == IRREGULAR


@dataclass(frozen=True)
class BendingSite:
    """
    Where to bend. Each side is a bundle of darts or None for a free circle.

    The first dart of each bundle has the common face on its right; every
    following dart lies on the face across the previous edge. For free circles
    the orientation is given by `first_outward` / `second_outward`.
    """

    first: Bundle
    second: Bundle
    host: Optional[int] = None
    first_outward: bool = True
    second_outward: bool = True

    def __str__(self) -> str:
        return f"{_bundle_text(self.first)} / {_bundle_text(self.second)}"


@dataclass(frozen=True)
class GeneralizedBiangle:
    """A k x l lens grid around an irregular bigon; `lens` names the innermost bigon."""

    lens: int
    partner: int
    k: int
    l: int
    crossings: Tuple[int, ...]


def _bundle_text(bundle: Bundle) -> str:
    return "free" if bundle is None else ",".join(str(x) for x in bundle)


# ---- working copy -----------------------------------------------------------


class _Surgery:
    """Mutable copy of a diagram used while a move rewires it."""

    def __init__(self, d: Diagram):
        self.old = d
        self.old_darts = set(d.darts)
        self.rotations: Dict[object, List[int]] = {c: list(rot) for c, rot in enumerate(d.crossings)}
        self.mates = dict(d._mates)
        self.outward = set(d.outward)
        self.free_circles = d.free_circles
        self.regions = UnionFind()
        for _, r in d.regions:
            self.regions.union(r, r)
        self.keepers: Set[int] = set()
        self.anchors: Dict[int, int] = {}
        self.next_dart = max(d.darts, default=-1) + 1
        self.new_crossings: List[object] = []

    def link(self, a: int, b: int):
        self.mates[a] = b
        self.mates[b] = a

    def join_sides(self, a: int, b: int):
        if a in self.old_darts and b in self.old_darts:
            self.regions.union(self.old.region_of(a), self.old.region_of(b))

    def add_crossing(self, key: object) -> List[int]:
        darts = list(range(self.next_dart, self.next_dart + 4))
        self.next_dart += 4
        self.rotations[key] = darts
        self.new_crossings.append(key)
        return darts

    def splice(self, removed: Iterable[int], chains: Sequence[Tuple[int, int, Sequence[Tuple[int, int]]]]):
        """
        Delete crossings and reconnect the strands that ran through them.

        Args:
            removed: Crossing ids to delete
            chains: (end, end, internal edges) per strand segment crossing the
                removed part; the two ends are the darts where the segment
                leaves the removed crossings
        """
        removed = list(removed)
        removed_darts = {x for c in removed for x in self.rotations[c]}
        partner: Dict[int, int] = {}
        via: Dict[int, Sequence[Tuple[int, int]]] = {}
        for end1, end2, internal in chains:
            partner[end1], partner[end2] = end2, end1
            via[end1] = via[end2] = internal

        visited: Set[int] = set()
        for end in partner:
            outside = self.mates[end]
            if end in visited or outside in removed_darts:
                continue
            current = end
            while True:
                visited.add(current)
                far = partner[current]
                visited.add(far)
                target = self.mates[far]
                if target not in removed_darts:
                    self.link(outside, target)
                    break
                current = target

        for end in partner:
            if end in visited:
                continue
            current = end
            while current not in visited:
                visited.add(current)
                far = partner[current]
                visited.add(far)
                for a, b in via[current]:
                    self.join_sides(a, b)
                self.join_sides(far, self.mates[far])
                current = self.mates[far]
            self.free_circles += 1

        for c in removed:
            del self.rotations[c]
        for x in removed_darts:
            self.mates.pop(x, None)
            self.outward.discard(x)

    def finish(self) -> Diagram:
        old = self.old
        order = [c for c in range(len(old.crossings)) if c in self.rotations] + self.new_crossings
        crossings = [tuple(self.rotations[c]) for c in order]
        edges = {tuple(sorted((a, b))) for a, b in self.mates.items()}
        raw = Diagram(tuple(crossings), tuple(sorted(edges)), frozenset(self.outward), self.free_circles)

        for p, part in enumerate(old.pieces):
            if any(c in self.rotations for c in part):
                continue
            labels = [old.region_of(old.faces[k][0]) for k in old.piece_faces(p)]
            for r in labels[1:]:
                self.regions.union(labels[0], r)

        survivors = []
        for walk in raw.faces:
            kept = [x for x in walk if x in self.old_darts]
            for x in kept[1:]:
                self.regions.union(old.region_of(kept[0]), old.region_of(x))
            survivors.append(kept)

        labels: Dict[int, object] = {}
        groups: Dict[Tuple[int, object], List[int]] = {}
        for k, walk in enumerate(raw.faces):
            anchored = [self.anchors[x] for x in walk if x in self.anchors]
            if survivors[k]:
                label = self.regions[old.region_of(survivors[k][0])]
            elif anchored:
                label = self.regions[anchored[0]]
            else:
                label = ("fresh", walk[0])
            labels[k] = label
            groups.setdefault((raw.piece_of_dart(walk[0]), label), []).append(k)

        for (_, label), members in groups.items():
            if len(members) < 2:
                continue
            keeper = next((k for k in members if self.keepers & set(raw.faces[k])), members[0])
            for k in members:
                if k != keeper:
                    labels[k] = ("fresh", raw.faces[k][0])

        regions = {x: labels[k] for k, walk in enumerate(raw.faces) for x in walk}
        return Diagram.build(crossings, sorted(edges), self.outward, self.free_circles, regions, old.markers)


# ---- R1 / R2 sites ----------------------------------------------------------


def find_monogons(d: Diagram) -> List[Monogon]:
    """One monogon per crossing that carries an empty loop face."""
    result = []
    for c, rot in enumerate(d.crossings):
        for x in rot:
            if d.face_next(x) == x and d.is_empty_face(x):
                result.append(Monogon(c, x))
                break
    return result


def classify_bigon(d: Diagram, a: int, b: int) -> str:
    # Both darts with (or both against) their edge orientation: the arcs run head to tail.
    return IRREGULAR if d.is_outward(a) == d.is_outward(b) else REGULAR


def find_bigons(d: Diagram) -> List[Bigon]:
    result = []
    for walk in d.faces:
        if len(walk) != 2:
            continue
        a, b = walk
        c1, c2 = d.crossing_of(a), d.crossing_of(b)
        if c1 == c2 or not d.is_empty_face(a):
            continue
        result.append(Bigon((c1, c2), (a, b), classify_bigon(d, a, b)))
    return result


def _check_monogon(d: Diagram, m: Monogon):
    x = m.dart
    if x not in d._slots or d.crossing_of(x) != m.crossing or d.face_next(x) != x:
        raise StaleSiteError(f"no monogon at crossing {m.crossing} through dart {x}")
    if not d.is_empty_face(x):
        raise SiteError(f"loop face of dart {x} is not empty")


def _check_bigon(d: Diagram, b: Bigon):
    a, c = b.darts
    if a not in d._slots or c not in d._slots or d.face_of(a) != (a, c) and d.face_of(a) != (c, a):
        raise StaleSiteError(f"no bigon through darts {a}, {c}")
    if (d.crossing_of(a), d.crossing_of(c)) != b.crossings:
        raise StaleSiteError(f"bigon through darts {a}, {c} no longer joins crossings {b.crossings}")
    if not d.is_empty_face(a):
        raise SiteError(f"bigon through darts {a}, {c} is not empty")


def apply_r1(d: Diagram, m: Monogon) -> Diagram:
    """Remove a kink: one crossing less, same components."""
    _check_monogon(d, m)
    x = m.dart
    y = d.mate(x)
    surgery = _Surgery(d)
    surgery.splice([m.crossing], [(d.across(x), d.across(y), [(x, y)])])
    logger.debug("R1 at crossing %d", m.crossing)
    return surgery.finish()


def apply_r2_remove(d: Diagram, b: Bigon) -> Diagram:
    """Remove the two crossings of an empty bigon."""
    _check_bigon(d, b)
    chains = []
    for x in b.darts:
        y = d.mate(x)
        chains.append((d.across(x), d.across(y), [(x, y)]))
    surgery = _Surgery(d)
    surgery.splice(sorted(set(b.crossings)), chains)
    logger.debug("R2- at crossings %s (%s)", b.crossings, b.kind)
    return surgery.finish()


# ---- bending ----------------------------------------------------------------


def _check_bundle(d: Diagram, bundle: Bundle, face: Optional[int]) -> None:
    if bundle is None:
        return
    if not bundle:
        raise SiteError("empty bundle")
    for x in bundle:
        if x not in d._slots:
            raise StaleSiteError(f"dart {x} is not in the diagram")
    if face is not None and d.face_index[bundle[0]] != face:
        raise SiteError("segments not co-facial")
    for prev, nxt in zip(bundle, bundle[1:]):
        if d.face_index[nxt] != d.face_index[d.mate(prev)]:
            raise SiteError(f"dart {nxt} does not lie on the face across the edge of dart {prev}")
    senses = {d.is_outward(x) for x in bundle}
    if len(senses) > 1:
        raise SiteError("bundle arcs are not coherently oriented")


def _check_site(d: Diagram, site: BendingSite):
    first, second = site.first, site.second
    needed = (first is None) + (second is None)
    if d.free_circles < needed:
        raise SiteError(f"site needs {needed} free circles, diagram has {d.free_circles}")
    face = None
    if first is not None and second is not None:
        for x in (first[0], second[0]):
            if x not in d._slots:
                raise StaleSiteError(f"dart {x} is not in the diagram")
        face = d.face_index[first[0]]
        if d.face_index[second[0]] != face:
            raise SiteError("segments not co-facial")
    _check_bundle(d, first, face)
    _check_bundle(d, second, face)
    edges = [frozenset((x, d.mate(x))) for bundle in (first, second) if bundle for x in bundle]
    if len(set(edges)) != len(edges):
        raise SiteError("bundles share an edge")
    if first is None and second is None and d.crossings and site.host is None:
        raise SiteError("bending two free circles needs a host dart")
    if site.host is not None and site.host not in d._slots:
        raise StaleSiteError(f"host dart {site.host} is not in the diagram")


def _bend(d: Diagram, site: BendingSite) -> Tuple[Diagram, int]:
    """
    Push the second bundle across the first and return the diagram and its lens dart.

    Grid crossing X[p][q] (Y[p][q]) is where arc q of the second bundle meets
    arc p of the first on the near (far) side. Every grid crossing has slots
    (first-east, second-up, first-west, second-down).
    """
    _check_site(d, site)
    first, second = site.first, site.second
    k = 1 if first is None else len(first)
    l = 1 if second is None else len(second)
    first_sense = site.first_outward if first is None else d.is_outward(first[0])
    second_sense = site.second_outward if second is None else d.is_outward(second[0])

    surgery = _Surgery(d)
    X = [[surgery.add_crossing(("x", p, q)) for q in range(l)] for p in range(k)]
    Y = [[surgery.add_crossing(("y", p, q)) for q in range(l)] for p in range(k)]
    east, up, west, down = 0, 1, 2, 3

    for p in range(k):
        if first is None:
            surgery.link(X[p][0][west], Y[p][0][east])
        else:
            alpha = first[p]
            far_end = d.mate(alpha)
            surgery.link(alpha, Y[p][0][east])
            surgery.link(X[p][0][west], far_end)
            surgery.keepers.add(d.face_next(alpha))
        for q in range(l - 1):
            surgery.link(Y[p][q][west], Y[p][q + 1][east])
            surgery.link(X[p][q + 1][west], X[p][q][east])
        surgery.link(Y[p][l - 1][west], X[p][l - 1][east])
        for q in range(l):
            for grid in (X, Y):
                surgery.outward.add(grid[p][q][west] if first_sense else grid[p][q][east])

    for q in range(l):
        if second is None:
            surgery.link(X[0][q][up], Y[0][q][up])
        else:
            beta = second[q]
            far_end = d.mate(beta)
            surgery.link(beta, X[0][q][up])
            surgery.link(Y[0][q][up], far_end)
            if q + 1 < l:
                surgery.keepers.add(d.face_next(second[q + 1]))
        for p in range(k - 1):
            surgery.link(X[p][q][down], X[p + 1][q][up])
            surgery.link(Y[p + 1][q][up], Y[p][q][down])
        surgery.link(X[k - 1][q][down], Y[k - 1][q][down])
        for p in range(k):
            surgery.outward.add(X[p][q][down] if second_sense else X[p][q][up])
            surgery.outward.add(Y[p][q][up] if second_sense else Y[p][q][down])

    surgery.free_circles -= (first is None) + (second is None)
    if first is None and second is None and site.host is not None:
        surgery.anchors[X[0][0][west]] = d.region_of(site.host)

    lens = X[k - 1][l - 1][east]
    logger.debug("bend %s: %d x %d lens at dart %d", site, k, l, lens)
    return surgery.finish(), lens


def apply_r2_add(d: Diagram, site: BendingSite) -> Diagram:
    """
    Bending: push the second arc across the first, adding two crossings.

    Raises:
        SiteError: The arcs are not on a common face, or the site is malformed
    """
    if site.first is not None and len(site.first) != 1 or site.second is not None and len(site.second) != 1:
        raise SiteError("R2 bending takes one arc on each side")
    return _bend(d, site)[0]


def bending_lens(d: Diagram, site: BendingSite) -> Tuple[Diagram, Bigon]:
    """Like `apply_r2_add` but also returns the created bigon."""
    bent, lens = _bend(d, site)
    partner = bent.face_next(lens)
    return bent, Bigon((bent.crossing_of(lens), bent.crossing_of(partner)), (lens, partner),
                       classify_bigon(bent, lens, partner))


# ---- generalized lens patterns ----------------------------------------------


def _grid(d: Diagram, a: int, b: int, k: int, l: int) -> Optional[Tuple[list, list]]:
    """
    Walk a k x l lens grid outward from the bigon (a, b).

    Each grid entry is (b_out, a_out): the darts leaving the grid crossing away
    from the lens along the second and first family. Returns None unless the
    darts form a clean grid of empty cells with parallel, coherent families.
    """
    # Near side: a_out = ccw(b_out); far side: a_out = cw(b_out).
    def step_b(entry, near):
        b_out = d.across(d.mate(entry[0]))
        return b_out, d.ccw(b_out) if near else d.cw(b_out)

    def step_a(entry, near):
        a_out = d.across(d.mate(entry[1]))
        return (d.cw(a_out) if near else d.ccw(a_out)), a_out

    sides = []
    for near, origin in ((True, (d.ccw(a), d.across(a))), (False, (d.across(b), d.cw(d.across(b))))):
        grid = [[None] * l for _ in range(k)]
        grid[0][0] = origin
        for i in range(1, k):
            grid[i][0] = step_b(grid[i - 1][0], near)
        for j in range(1, l):
            for i in range(k):
                grid[i][j] = step_a(grid[i][j - 1], near)
                if i and step_b(grid[i - 1][j], near) != grid[i][j]:
                    return None
        sides.append(grid)
    near_grid, far_grid = sides

    crossings = {d.crossing_of(entry[0]) for grid in sides for row in grid for entry in row}
    if len(crossings) != 2 * k * l:
        return None
    for i in range(k):
        if d.mate(d.across(near_grid[i][0][1])) != d.across(far_grid[i][0][1]):
            return None
    for j in range(l):
        if d.mate(d.across(near_grid[0][j][0])) != d.across(far_grid[0][j][0]):
            return None
    if len({d.is_outward(near_grid[i][0][1]) for i in range(k)}) > 1:
        return None
    if len({d.is_outward(near_grid[0][j][0]) for j in range(l)}) > 1:
        return None

    cells = []
    for i in range(k - 1):
        cells.append(near_grid[i][0][0])
        for j in range(l - 1):
            cells.append(near_grid[i][j][1])
            cells.append(far_grid[i][j][0])
    for j in range(l - 1):
        cells.append(d.across(near_grid[0][j][0]))
    for x in cells:
        if len(d.face_of(x)) != 4 or not d.is_empty_face(x):
            return None
    return near_grid, far_grid


def _maximal_grid(d: Diagram, a: int, b: int) -> Tuple[int, int]:
    k, l = 1, 1
    grew = True
    while grew:
        grew = False
        if 2 * (k + 1) * l <= d.crossing_count and _grid(d, a, b, k + 1, l):
            k += 1
            grew = True
        if 2 * k * (l + 1) <= d.crossing_count and _grid(d, a, b, k, l + 1):
            l += 1
            grew = True
    return k, l


def find_generalized_biangles(d: Diagram) -> List[GeneralizedBiangle]:
    """Maximal lens grids, one per set of grid crossings."""
    result = []
    seen = set()
    for bigon in find_bigons(d):
        if not bigon.irregular:
            continue
        a, b = bigon.darts
        if _grid(d, a, b, 1, 1) is None:
            continue
        k, l = _maximal_grid(d, a, b)
        near_grid, far_grid = _grid(d, a, b, k, l)
        crossings = tuple(sorted({d.crossing_of(entry[0]) for grid in (near_grid, far_grid)
                                  for row in grid for entry in row}))
        if crossings in seen:
            continue
        seen.add(crossings)
        result.append(GeneralizedBiangle(a, b, k, l, crossings))
    return result


def _strand_edges(d: Diagram, start: int, count: int) -> List[Tuple[int, int]]:
    edges = []
    x = start
    for _ in range(count):
        edges.append((x, d.mate(x)))
        x = d.across(d.mate(x))
    return edges


def apply_generalized_tightening(d: Diagram, g: GeneralizedBiangle) -> Diagram:
    """
    Remove all 2kl crossings of a lens grid.

    Raises:
        NotApplicableError: d is not annular
        StaleSiteError: The grid is no longer present in d
    """
    if not seifert_smooth(d).concentric:
        raise NotApplicableError("diagram is not annular")
    if g.lens not in d._slots or g.partner not in d._slots:
        raise StaleSiteError(f"no lens through dart {g.lens}")
    found = _grid(d, g.lens, g.partner, g.k, g.l)
    if found is None or d.face_of(g.lens) not in ((g.lens, g.partner), (g.partner, g.lens)):
        raise StaleSiteError(f"lens grid {g.k}x{g.l} at dart {g.lens} is no longer present")
    near_grid, far_grid = found
    k, l = g.k, g.l

    chains = []
    for i in range(k):
        start, end = near_grid[i][l - 1][1], far_grid[i][l - 1][1]
        chains.append((start, end, _strand_edges(d, d.across(start), 2 * l - 1)))
    for j in range(l):
        start, end = near_grid[k - 1][j][0], far_grid[k - 1][j][0]
        chains.append((start, end, _strand_edges(d, d.across(start), 2 * k - 1)))

    surgery = _Surgery(d)
    surgery.splice(g.crossings, chains)
    logger.debug("generalized tightening %dx%d at dart %d", k, l, g.lens)
    return surgery.finish()


def apply_generalized_bending(d: Diagram, site: BendingSite) -> Diagram:
    """
    Bend a bundle of arcs across another, creating a k x l lens grid.

    Raises:
        NotApplicableError: d is not annular, two arcs share a Seifert circle,
            or one of the bundles could be extended
        SiteError: The bundles are malformed
    """
    family = seifert_smooth(d)
    if not family.concentric:
        raise NotApplicableError("diagram is not annular")
    _check_site(d, site)

    circles = []
    for bundle in (site.first, site.second):
        circles.append(set() if bundle is None else {family.edge_circle[x] for x in bundle})
    if circles[0] & circles[1]:
        raise NotApplicableError("bending arcs of the same Seifert circle")

    used = circles[0] | circles[1]
    for bundle in (site.first, site.second):
        if bundle is None:
            continue
        beyond = d.face_of(d.mate(bundle[-1]))
        spare = {family.edge_circle[x] for x in beyond} - used
        if spare:
            raise NotApplicableError(f"bending is not maximal: arcs of Seifert circle {min(spare)} are also reachable")
    return _bend(d, site)[0]


# ---- reduction --------------------------------------------------------------


def reduce_with_script(d: Diagram, order_policy: str = "deterministic",
                       seed: Optional[int] = None) -> Tuple[Diagram, List[str]]:
    """
    Apply crossing-reducing moves until none is left.

    Args:
        d: Diagram to reduce
        order_policy: "deterministic" takes the first site, "seeded-random" a random one
        seed: Seed for the random policy

    Returns:
        The minimal diagram and the replayable move script
    """
    if order_policy not in ORDER_POLICIES:
        raise ValueError(f"unknown order policy {order_policy!r}")
    rng = np.random.default_rng(seed) if order_policy == "seeded-random" else None

    def pick(sites):
        return sites[int(rng.integers(len(sites)))] if rng is not None else sites[0]

    script = []
    while True:
        monogons = find_monogons(d)
        if monogons:
            m = pick(monogons)
            script.append(f"R1 {m.crossing}")
            d = apply_r1(d, m)
            continue
        bigons = find_bigons(d)
        if bigons:
            b = pick(bigons)
            script.append(f"R2- {b.crossings[0]} {b.crossings[1]} {b.darts[0]}")
            d = apply_r2_remove(d, b)
            continue
        return d, script


def reduce_minimal(d: Diagram, order_policy: str = "deterministic", seed: Optional[int] = None) -> Diagram:
    return reduce_with_script(d, order_policy, seed)[0]


def equivalent_doodles(d1: Diagram, d2: Diagram) -> bool:
    return canonical_code(reduce_minimal(d1)) == canonical_code(reduce_minimal(d2))


def tighten_sequence(d: Diagram, rng: np.random.Generator) -> List[Diagram]:
    """Remove random irregular bigons until none is left; returns every diagram visited."""
    visited = [d]
    while True:
        irregular = [b for b in find_bigons(d) if b.irregular]
        if not irregular:
            return visited
        d = apply_r2_remove(d, irregular[int(rng.integers(len(irregular)))])
        visited.append(d)


def decompose_bendings(d: Diagram, limit: int = 2,
                       goal: Optional[CanonicalCode] = None) -> Optional[Tuple[List[GeneralizedBiangle], Diagram]]:
    """
    Undo generalized bendings by tightening lens grids, each from an annular diagram.

    Searches for at most `limit` tightenings after which no lens grid is left
    and, when `goal` is given, the diagram has that canonical code.

    Returns:
        The grids in the order they were tightened and the final diagram, or
        None when no such sequence exists
    """
    found = find_generalized_biangles(d)
    if not found:
        return ([], d) if goal is None or canonical_code(d) == goal else None
    if limit == 0 or not seifert_smooth(d).concentric:
        return None
    for g in found:
        rest = decompose_bendings(apply_generalized_tightening(d, g), limit - 1, goal)
        if rest is not None:
            return [g] + rest[0], rest[1]
    return None


# ---- move scripts -----------------------------------------------------------


def _parse_bundle(text: str) -> Bundle:
    if text == "free":
        return None
    return tuple(int(x) for x in text.split(","))


def apply_script_line(d: Diagram, line: str) -> Diagram:
    """
    Apply one move script line.

    Lines: `R1 <crossing>`, `R2- <c1> <c2> [<dart>]`, `R2+ <dart|free> <dart|free>`,
    `GT <dart>`, `GB <darts|free> / <darts|free>`.
    """
    parts = line.split()
    if not parts:
        return d
    kind, args = parts[0], parts[1:]
    try:
        if kind == "R1":
            c = int(args[0])
            site = next((m for m in find_monogons(d) if m.crossing == c), None)
            if site is None:
                raise StaleSiteError(f"no monogon at crossing {c}")
            return apply_r1(d, site)
        if kind == "R2-":
            c1, c2 = int(args[0]), int(args[1])
            dart = int(args[2]) if len(args) > 2 else None
            for b in find_bigons(d):
                if set(b.crossings) == {c1, c2} and (dart is None or dart in b.darts):
                    return apply_r2_remove(d, b)
            raise StaleSiteError(f"no bigon between crossings {c1} and {c2}")
        if kind == "R2+":
            return apply_r2_add(d, BendingSite(_parse_bundle(args[0]), _parse_bundle(args[1])))
        if kind == "GT":
            lens = int(args[0])
            for g in find_generalized_biangles(d):
                if lens in (g.lens, g.partner):
                    return apply_generalized_tightening(d, g)
            raise StaleSiteError(f"no generalized biangle at dart {lens}")
        if kind == "GB":
            first, slash, second = args
            if slash != "/":
                raise SiteError(f"malformed bundle spec {' '.join(args)!r}")
            return apply_generalized_bending(d, BendingSite(_parse_bundle(first), _parse_bundle(second)))
    except (IndexError, ValueError) as e:
        if isinstance(e, MoveError):
            raise
        raise SiteError(f"malformed move line {line!r}: {e}") from e
    raise SiteError(f"unknown move {kind!r}")


def replay_script(d: Diagram, lines: Iterable[str]) -> Diagram:
    for line in lines:
        d = apply_script_line(d, line)
    return d
