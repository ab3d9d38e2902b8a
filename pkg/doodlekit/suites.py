"""
Property suites run by `selftest`.

Every suite draws its cases from a seeded generator and returns a SuiteResult
listing the violations it found. Each diagram a suite builds is also checked
with `validate`.
"""

import logging
import time
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from doodlekit import markov
from doodlekit.moves import (
    BendingSite,
    MoveError,
    apply_generalized_bending,
    apply_generalized_tightening,
    decompose_bendings,
    find_bigons,
    find_generalized_biangles,
    reduce_minimal,
    tighten_sequence,
)
from doodlekit.plane_map import Diagram, canonical_code, closure, dumps, seifert_smooth, validate
from doodlekit.schemas import SuiteResult
from doodlekit.twinword import TwinWord, commute, enumerate_words, equal, normal_form, random_word

logger = logging.getLogger(__name__)

Suite = Callable[[np.random.Generator, float, int], Tuple[int, List[str]]]


def _scaled(base: int, scale: float) -> int:
    return max(1, int(round(base * scale)))


def _check_structure(d: Diagram, label: str, violations: List[str]):
    for problem in validate(d):
        violations.append(f"{label}: {problem}")


# ---- corpora ----------------------------------------------------------------


def insert_bendings(rng: np.random.Generator, w: TwinWord, count: int) -> TwinWord:
    """Insert `count` pairs s_i s_i at random levels; each pair is a bending of the closure."""
    letters = list(w.letters)
    if w.strands < 2:
        return w
    for _ in range(count):
        level = int(rng.integers(0, len(letters) + 1))
        i = int(rng.integers(1, w.strands))
        letters[level:level] = [i, i]
    return TwinWord(w.strands, tuple(letters))


def annular_corpus(rng: np.random.Generator, count: int, n_max: int = 5, len_max: int = 10,
                   max_bendings: int = 3) -> List[Tuple[TwinWord, Diagram]]:
    """Closures of random twins, each with up to `max_bendings` recorded bendings."""
    corpus = []
    for _ in range(count):
        n = int(rng.integers(2, n_max + 1))
        w = random_word(rng, n, len_max)
        w = insert_bendings(rng, w, int(rng.integers(0, max_bendings + 1)))
        corpus.append((w, closure(w)))
    return corpus


def rewrite_oracle(letters: Sequence[int]) -> Tuple[int, ...]:
    """Shortlex-least word reachable by deleting s_i s_i and swapping commuting neighbors."""
    start = tuple(letters)
    seen = {start}
    queue = deque([start])
    while queue:
        word = queue.popleft()
        for p in range(len(word) - 1):
            a, b = word[p], word[p + 1]
            if a == b:
                nxt = word[:p] + word[p + 2:]
            elif commute(a, b):
                nxt = word[:p] + (b, a) + word[p + 2:]
            else:
                continue
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return min(seen, key=lambda w: (len(w), w))


# ---- suites -----------------------------------------------------------------


def word_problem(rng: np.random.Generator, scale: float, workers: int) -> Tuple[int, List[str]]:
    max_length = 6 if scale >= 1 else 4
    words = list(enumerate_words(4, max_length))
    violations = []
    for w in words:
        expected = rewrite_oracle(w.letters)
        if normal_form(w).letters != expected:
            violations.append(f"{w}: normal form {normal_form(w)}, oracle {TwinWord(4, expected)}")
    keys = [rewrite_oracle(w.letters) for w in words]
    for _ in range(_scaled(2000, scale)):
        p, q = (int(x) for x in rng.integers(0, len(words), size=2))
        if equal(words[p], words[q]) != (keys[p] == keys[q]):
            violations.append(f"equal({words[p]}, {words[q]}) disagrees with the rewrite oracle")
    return len(words), violations


def seifert_circles_of_closures(rng: np.random.Generator, scale: float, workers: int) -> Tuple[int, List[str]]:
    cases = _scaled(500, scale)
    violations = []
    for _ in range(cases):
        n = int(rng.integers(1, 6))
        w = random_word(rng, n, 10)
        d = closure(w)
        _check_structure(d, str(w), violations)
        family = seifert_smooth(d)
        if family.circle_count != n or not family.concentric or not family.coherently_oriented:
            violations.append(f"{w}: {family.circle_count} circles, concentric={family.concentric}, "
                              f"coherent={family.coherently_oriented}")
    return cases, violations


def irregular_bigon_bound(rng: np.random.Generator, scale: float, workers: int) -> Tuple[int, List[str]]:
    corpus = annular_corpus(rng, _scaled(1000, scale))
    violations = []
    for w, d in corpus:
        _check_structure(d, str(w), violations)
        irregular = sum(1 for b in find_bigons(d) if b.irregular)
        if irregular > 2:
            violations.append(f"{w}: {irregular} irregular bigons")
    return len(corpus), violations


def _confluence_case(d: Diagram, seeds: Sequence[int]) -> List[str]:
    violations = []
    codes = set()
    for seed in seeds:
        reduced = reduce_minimal(d, "seeded-random", int(seed))
        _check_structure(reduced, f"seed {seed}", violations)
        codes.add(canonical_code(reduced))
    if len(codes) > 1:
        violations.append(f"{len(codes)} different minimal diagrams")
    return violations


def confluence(rng: np.random.Generator, scale: float, workers: int) -> Tuple[int, List[str]]:
    cases = _scaled(100, scale)
    words = [random_word(rng, int(rng.integers(2, 6)), 10) for _ in range(cases)]
    seeds = rng.integers(0, 2 ** 31, size=(cases, 10))
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        results = list(pool.map(lambda k: _confluence_case(closure(words[k]), seeds[k]), range(cases)))
    violations = [f"{w}: {problem}" for w, found in zip(words, results) for problem in found]
    return cases, violations


def no_new_regular_bigons(rng: np.random.Generator, scale: float, workers: int) -> Tuple[int, List[str]]:
    target = _scaled(100, scale)
    violations = []
    cases = 0
    for w, d in annular_corpus(rng, 20 * target):
        if cases == target:
            break
        if any(not b.irregular for b in find_bigons(d)):
            continue
        cases += 1
        for step, visited in enumerate(tighten_sequence(d, rng)):
            _check_structure(visited, f"{w} step {step}", violations)
            if any(not b.irregular for b in find_bigons(visited)):
                violations.append(f"{w}: regular bigon after {step} tightenings")
                break
    return cases, violations


def seifert_conservation(rng: np.random.Generator, scale: float, workers: int) -> Tuple[int, List[str]]:
    target = _scaled(200, scale)
    violations = []
    applications = 0
    for w, d in annular_corpus(rng, 10 * target):
        while applications < target and seifert_smooth(d).concentric:
            found = find_generalized_biangles(d)
            if not found:
                break
            g = found[int(rng.integers(len(found)))]
            before = seifert_smooth(d).circle_count
            d = apply_generalized_tightening(d, g)
            applications += 1
            _check_structure(d, f"{w} after {g.k}x{g.l} tightening", violations)
            after = seifert_smooth(d).circle_count
            if before != after:
                violations.append(f"{w}: {g.k}x{g.l} tightening changed Seifert circles {before} -> {after}")
        if applications == target:
            break
    return applications, violations


# ---- recorded generalized bendings ------------------------------------------


def _bundles(d: Diagram, start: int, max_length: int = 2) -> List[Tuple[int, ...]]:
    """Bundles starting at `start`; each further dart lies on the face across the previous edge."""
    sense = d.is_outward(start)
    found = []
    stack = [(start,)]
    while stack:
        bundle = stack.pop()
        found.append(bundle)
        if len(bundle) == max_length:
            continue
        across = d.mate(bundle[-1])
        for y in d.face_of(across):
            if y != across and y not in bundle and d.is_outward(y) == sense:
                stack.append(bundle + (y,))
    return found


def bending_sites(d: Diagram, rng: np.random.Generator) -> List[BendingSite]:
    """Candidate generalized bending sites of d in random order; most are rejected when applied."""
    sites = []
    if d.free_circles >= 2:
        host = d.darts[int(rng.integers(len(d.darts)))] if d.crossings else None
        sites += [BendingSite(None, None, host=host, second_outward=o) for o in (True, False)]
    bundles = {x: _bundles(d, x) for x in d.darts}
    if d.free_circles >= 1:
        sites += [BendingSite(None, b, first_outward=o) for x in d.darts for b in bundles[x] for o in (True, False)]
    for face in d.faces:
        for x in face:
            for y in face:
                if x != y:
                    sites += [BendingSite(bx, by) for bx in bundles[x] for by in bundles[y]]
    return [sites[k] for k in rng.permutation(len(sites))]


@dataclass
class BentCase:
    """A minimal annular diagram, the generalized bendings applied to it and the result."""

    minimal: Diagram
    sites: List[BendingSite]
    bent: Diagram


def _minimal_annular(rng: np.random.Generator) -> Optional[Diagram]:
    if rng.random() < 0.5:
        return closure(TwinWord.identity(int(rng.integers(2, 5))))
    n = int(rng.integers(2, 5))
    w = random_word(rng, n, 8)
    d = reduce_minimal(closure(w.embed(n + 2)))
    return d if seifert_smooth(d).concentric else None


def record_bendings(rng: np.random.Generator, d: Diagram, count: int, attempts: int = 60,
                    on_accept: Optional[Callable[[Diagram, BendingSite, Diagram], None]] = None) -> BentCase:
    """
    Apply up to `count` generalized bendings to d, keeping only annular results.

    `on_accept` sees every site the bending accepted, kept or not.
    """
    sites = []
    bent = d
    for _ in range(count):
        for site in bending_sites(bent, rng)[:attempts]:
            try:
                result = apply_generalized_bending(bent, site)
            except MoveError:
                continue
            if on_accept is not None:
                on_accept(bent, site, result)
            if seifert_smooth(result).concentric:
                sites.append(site)
                bent = result
                break
    return BentCase(d, sites, bent)


def _elementary_count(site: BendingSite) -> int:
    return (1 if site.first is None else len(site.first)) * (1 if site.second is None else len(site.second))


def _map_site(site: BendingSite, dart_map: Dict[int, int]) -> BendingSite:
    def move(bundle):
        return None if bundle is None else tuple(dart_map.get(x, x) for x in bundle)

    host = None if site.host is None else dart_map.get(site.host, site.host)
    return BendingSite(move(site.first), move(site.second), host, site.first_outward, site.second_outward)


def rebend_relabeled(rng: np.random.Generator, case: BentCase) -> Diagram:
    """Replay the recorded bendings on a randomly relabeled copy of the minimal diagram."""
    d = case.minimal
    darts = list(d.darts)
    dart_map = dict(zip(darts, (darts[k] for k in rng.permutation(len(darts)))))
    order = [int(c) for c in rng.permutation(len(d.crossings))]
    shifts = [int(s) for s in rng.integers(0, 4, size=len(d.crossings))]
    copy = d.relabel(dart_map, order, shifts)
    for site in case.sites:
        copy = apply_generalized_bending(copy, _map_site(site, dart_map))
    return copy


def generalized_bendings(rng: np.random.Generator, scale: float, workers: int) -> Tuple[int, List[str]]:
    target = _scaled(100, scale)
    violations = []
    decomposed = repeated = rebent = 0

    def check_repeat(d: Diagram, site: BendingSite, once: Diagram):
        nonlocal repeated
        if site.first is None and site.second is None:
            return
        repeated += 1
        twice = apply_generalized_bending(d, site)
        if once != twice or dumps(once) != dumps(twice):
            violations.append(f"bending {site} differs between two applications")

    for _ in range(50 * target):
        if decomposed >= target and repeated >= target:
            break
        minimal = _minimal_annular(rng)
        if minimal is None:
            continue
        case = record_bendings(rng, minimal, int(rng.integers(1, 3)), on_accept=check_repeat)
        if not case.sites:
            continue
        label = " then ".join(str(site) for site in case.sites)
        _check_structure(case.bent, label, violations)
        decomposed += 1

        goal = canonical_code(minimal)
        found = decompose_bendings(case.bent, 2, goal)
        if found is None:
            violations.append(f"{label}: no decomposition into at most two generalized tightenings")
        else:
            grids, _ = found
            recorded = sum(_elementary_count(site) for site in case.sites)
            if sum(g.k * g.l for g in grids) != recorded:
                violations.append(f"{label}: {recorded} recorded bendings, tightened grids "
                                  f"{', '.join(f'{g.k}x{g.l}' for g in grids)}")
        if canonical_code(reduce_minimal(case.bent)) != goal:
            violations.append(f"{label}: bent diagram reduces to another minimal diagram")

        rebent += 1
        if canonical_code(rebend_relabeled(rng, case)) != canonical_code(case.bent):
            violations.append(f"{label}: rebending a relabeled minimal diagram gives another code")

    logger.info("bending: %d decompositions, %d repeated bendings, %d rebent diagrams",
                decomposed, repeated, rebent)
    return decomposed + repeated + rebent, violations


def markov_forward(rng: np.random.Generator, scale: float, workers: int) -> Tuple[int, List[str]]:
    report = markov.forward_check(rng, _scaled(500, scale), n_max=3, len_max=4, m_seq_max=5, conj_cap=2)
    return report.trials, [f"closures differ: {f}" for f in report.failures]


def markov_reverse(rng: np.random.Generator, scale: float, workers: int) -> Tuple[int, List[str]]:
    len_max = 4 if scale >= 1 else 3
    caps = {"depth": 8, "strands": 4, "conj_cap": 2, "letters": 12}
    report = markov.reverse_check(3, len_max, caps, workers)
    violations = []
    if report.pair_count and report.connected_count < 0.95 * report.pair_count:
        violations.append(f"only {report.connected_count}/{report.pair_count} pairs connected")
    return report.pair_count, violations


SUITES: Dict[str, Suite] = {
    "word-problem": word_problem,
    "seifert": seifert_circles_of_closures,
    "irregular-bigons": irregular_bigon_bound,
    "confluence": confluence,
    "tightening": no_new_regular_bigons,
    "seifert-conservation": seifert_conservation,
    "bending": generalized_bendings,
    "markov-forward": markov_forward,
    "markov-reverse": markov_reverse,
}


def run_suite(name: str, seed: int, scale: float = 1.0, workers: int = 1) -> SuiteResult:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    rng = np.random.default_rng(seed)
    started = time.perf_counter()
    cases, violations = SUITES[name](rng, scale, workers)
    seconds = time.perf_counter() - started
    logger.info("suite %s: %d cases, %d violations in %.1fs", name, cases, len(violations), seconds)
    return SuiteResult(name=name, cases=cases, violations=violations, seconds=round(seconds, 3))
