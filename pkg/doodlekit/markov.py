"""
M-moves on twins, bounded M-equivalence search and the Markov verification harness.

Two twins have equivalent closures exactly when they are related by a finite
sequence of M-moves:

  M1  β ⊗ I  <->  I ⊗ β
  M2  β  ->  α β α⁻¹
  M3  β  ->  (I ⊗ β) s1 ... s(i-1) s(i) s(i-1) ... s1          (in TW_(n+1))
  M4  β  ->  (β ⊗ I) s(n) ... s(i+1) s(i) s(i+1) ... s(n)      (in TW_(n+1))

The search is bounded, so a missing path is reported as inconclusive and never
as a counterexample.
"""

import itertools
import logging
import re
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from doodlekit.moves import equivalent_doodles, reduce_minimal
from doodlekit.plane_map import canonical_code, closure
from doodlekit.schemas import BucketReport, ExperimentReport, ForwardReport, ReverseReport
from doodlekit.twinword import (
    StrandMismatchError,
    TwinWord,
    enumerate_words,
    inverse,
    multiply,
    normal_form,
    parse_word,
    random_word,
)

logger = logging.getLogger(__name__)

KINDS = ("M1", "M1_inv", "M2", "M2_inv", "M3", "M3_inv", "M4", "M4_inv")
_INVERSE_KIND = {"M1": "M1_inv", "M1_inv": "M1", "M2": "M2_inv", "M2_inv": "M2",
                 "M3": "M3_inv", "M3_inv": "M3", "M4": "M4_inv", "M4_inv": "M4"}
_MOVE_LINE = re.compile(r"\s*(M[1-4](?:_inv)?)\b\s*(.*)$")

State = Tuple[int, Tuple[int, ...]]


class MoveRangeError(ValueError):
    """Raised when an M-move index is out of range or the word lacks the required shape."""


@dataclass(frozen=True)
class MMove:
    kind: str
    conjugator: Optional[TwinWord] = None
    index: Optional[int] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise MoveRangeError(f"unknown move kind {self.kind!r}")
        if self.kind.startswith("M2") and self.conjugator is None:
            raise MoveRangeError(f"{self.kind} needs a conjugator")
        if self.kind[:2] in ("M3", "M4") and self.index is None:
            raise MoveRangeError(f"{self.kind} needs an index")

    def __str__(self) -> str:
        if self.conjugator is not None:
            return f"{self.kind} {self.conjugator}"
        if self.index is not None:
            return f"{self.kind} {self.index}"
        return self.kind

    def inverse(self) -> "MMove":
        return MMove(_INVERSE_KIND[self.kind], self.conjugator, self.index)


def parse_move(line: str) -> MMove:
    """Parse one MPath line: `M1`, `M1_inv`, `M2 tw n: ...`, `M3 i`, `M4_inv i`."""
    match = _MOVE_LINE.match(line)
    if match is None:
        raise MoveRangeError(f"malformed move line {line!r}")
    kind, rest = match.group(1), match.group(2).strip()
    if kind.startswith("M2"):
        return MMove(kind, conjugator=parse_word(rest))
    if kind.startswith("M1"):
        if rest:
            raise MoveRangeError(f"{kind} takes no argument, got {rest!r}")
        return MMove(kind)
    if not rest.isdigit():
        raise MoveRangeError(f"{kind} needs an integer index, got {rest!r}")
    return MMove(kind, index=int(rest))


@dataclass(frozen=True)
class MPath:
    start: TwinWord
    moves: Tuple[MMove, ...]
    end: TwinWord

    def __len__(self) -> int:
        return len(self.moves)

    def replay(self) -> TwinWord:
        """Apply every move from `start`; raises if some step does not apply."""
        w = self.start
        for move in self.moves:
            w = apply_move(w, move)
        return w

    def verify(self) -> bool:
        try:
            reached = self.replay()
        except (MoveRangeError, StrandMismatchError):
            return False
        return reached.strands == self.end.strands and normal_form(reached) == normal_form(self.end)

    def to_text(self) -> str:
        lines = [f"start {self.start}"]
        lines.extend(str(m) for m in self.moves)
        lines.append(f"end {self.end}")
        return "\n".join(lines)


# ---- moves ------------------------------------------------------------------


def apply_m1(w: TwinWord, forward: bool = True) -> TwinWord:
    """
    Swap the trivial strand across the word.

    Forward reads w as β ⊗ I and returns I ⊗ β; backward reads w as I ⊗ β and
    returns β ⊗ I. Both sides have the same strand count.
    """
    n = w.strands
    blocked = n - 1 if forward else 1
    if blocked in w.letters:
        w = normal_form(w)
    if forward:
        if n < 2 or blocked in w.letters:
            raise MoveRangeError(f"M1 needs a trivial last strand in {w}")
        return TwinWord(n, tuple(k + 1 for k in w.letters))
    if n < 2 or blocked in w.letters:
        raise MoveRangeError(f"M1_inv needs a trivial first strand in {w}")
    return TwinWord(n, tuple(k - 1 for k in w.letters))


def apply_m2(beta: TwinWord, alpha: TwinWord) -> TwinWord:
    return multiply(multiply(alpha, beta), inverse(alpha))


def _m3_tail(i: int) -> Tuple[int, ...]:
    return tuple(range(1, i)) + (i,) + tuple(range(i - 1, 0, -1))


def _m4_tail(n: int, i: int) -> Tuple[int, ...]:
    return tuple(range(n, i, -1)) + (i,) + tuple(range(i + 1, n + 1))


def _check_index(beta: TwinWord, i: int, kind: str):
    if not 1 <= i <= beta.strands:
        raise MoveRangeError(f"{kind} index {i} out of range 1..{beta.strands} for {beta}")


def apply_m3(beta: TwinWord, i: int) -> TwinWord:
    _check_index(beta, i, "M3")
    n = beta.strands
    return multiply(beta.shift(1), TwinWord(n + 1, _m3_tail(i)))


def apply_m4(beta: TwinWord, i: int) -> TwinWord:
    _check_index(beta, i, "M4")
    n = beta.strands
    return multiply(beta.embed(n + 1), TwinWord(n + 1, _m4_tail(n, i)))


def detect_inverse_m3_m4(w: TwinWord) -> List[Tuple[MMove, TwinWord]]:
    """
    Every inverse stabilization that applies to w, with the word it recovers.

    w matches M3 at index i when w times the M3 palindrome has a normal form
    free of s1; M4 likewise with s(n) for the last generator.
    """
    m = w.strands
    n = m - 1
    found = []
    if n < 1:
        return found
    for i in range(1, n + 1):
        rest = normal_form(TwinWord(m, w.letters + _m3_tail(i)))
        if 1 not in rest.letters:
            found.append((MMove("M3_inv", index=i), TwinWord(n, tuple(k - 1 for k in rest.letters))))
    for i in range(1, n + 1):
        rest = normal_form(TwinWord(m, w.letters + _m4_tail(n, i)))
        if n not in rest.letters:
            found.append((MMove("M4_inv", index=i), TwinWord(n, rest.letters)))
    return found


def apply_move(w: TwinWord, move: MMove) -> TwinWord:
    kind = move.kind
    if kind == "M1":
        return apply_m1(w, forward=True)
    if kind == "M1_inv":
        return apply_m1(w, forward=False)
    if kind == "M2":
        return apply_m2(w, move.conjugator)
    if kind == "M2_inv":
        return apply_m2(w, inverse(move.conjugator))
    if kind == "M3":
        return apply_m3(w, move.index)
    if kind == "M4":
        return apply_m4(w, move.index)
    for candidate, recovered in detect_inverse_m3_m4(w):
        if candidate == move:
            return recovered
    raise MoveRangeError(f"{move} does not apply to {w}")


# ---- search -----------------------------------------------------------------


def conjugators(strands: int, cap: int) -> List[TwinWord]:
    """Distinct non-trivial normal forms of at most `cap` letters, generators first."""
    seen = set()
    result = []
    for w in enumerate_words(strands, cap):
        nf = normal_form(w)
        if nf.letters and nf.letters not in seen:
            seen.add(nf.letters)
            result.append(nf)
    result.sort(key=lambda c: (len(c), c.letters))
    return result


def _neighbors(state: State, max_strands: int, conj: Dict[int, List[TwinWord]],
               max_letters: Optional[int]) -> List[Tuple[MMove, State]]:
    strands, letters = state
    w = TwinWord(strands, letters)
    candidates: List[Tuple[MMove, TwinWord]] = []
    for forward, kind in ((True, "M1"), (False, "M1_inv")):
        try:
            candidates.append((MMove(kind), apply_m1(w, forward)))
        except MoveRangeError:
            pass
    for alpha in conj.get(strands, ()):
        candidates.append((MMove("M2", conjugator=alpha), apply_m2(w, alpha)))
    if strands + 1 <= max_strands:
        for i in range(1, strands + 1):
            candidates.append((MMove("M3", index=i), apply_m3(w, i)))
            candidates.append((MMove("M4", index=i), apply_m4(w, i)))
    candidates.extend(detect_inverse_m3_m4(w))

    result = []
    for move, reached in candidates:
        nf = normal_form(reached)
        if max_letters is not None and len(nf) > max_letters:
            continue
        result.append((move, (nf.strands, nf.letters)))
    return result


def _path_to(parents: Dict[State, Optional[Tuple[State, MMove]]], state: State) -> List[MMove]:
    moves = []
    while parents[state] is not None:
        state, move = parents[state]
        moves.append(move)
    moves.reverse()
    return moves


def m_search(a: TwinWord, b: TwinWord, max_strands: int, max_depth: int, generator_cap: int,
             workers: int = 1, max_letters: Optional[int] = None) -> Optional[MPath]:
    """
    Bounded search for a sequence of M-moves from a to b.

    Both ends are expanded level by level; the smaller frontier is expanded
    next. States are (strand count, normal form). Frontiers are expanded in
    sorted order and neighbors merged in generation order, so the result does
    not depend on `workers`.

    Args:
        a: Start twin
        b: Target twin
        max_strands: Largest strand count a state may have
        max_depth: Largest number of moves in the returned path
        generator_cap: Largest conjugator length for M2, in normal form
        workers: Threads used to expand a frontier
        max_letters: Optional cap on the normal-form length of visited states

    Returns:
        An MPath, or None when no path exists within the bounds
    """
    if min(max_strands, generator_cap) < 1 or max_depth < 0:
        raise ValueError("search caps must be positive")
    start = (a.strands, normal_form(a).letters)
    goal = (b.strands, normal_form(b).letters)
    if max(start[0], goal[0]) > max_strands:
        return None
    conj = {n: conjugators(n, generator_cap) for n in range(1, max_strands + 1)}

    sides = [
        {"parents": {start: None}, "frontier": [start], "depth": 0},
        {"parents": {goal: None}, "frontier": [goal], "depth": 0},
    ]

    def meet() -> Optional[State]:
        common = sides[0]["parents"].keys() & sides[1]["parents"].keys()
        return min(common) if common else None

    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        met = meet()
        while met is None and sides[0]["depth"] + sides[1]["depth"] < max_depth:
            open_sides = [k for k in (0, 1) if sides[k]["frontier"]]
            if not open_sides:
                break
            k = min(open_sides, key=lambda s: (len(sides[s]["frontier"]), s))
            side = sides[k]
            expand = lambda s: _neighbors(s, max_strands, conj, max_letters)  # noqa: E731
            expanded = list(pool.map(expand, side["frontier"])) if pool else [expand(s) for s in side["frontier"]]
            parents = side["parents"]
            frontier = []
            for state, reached in zip(side["frontier"], expanded):
                for move, nxt in reached:
                    if nxt not in parents:
                        parents[nxt] = (state, move)
                        frontier.append(nxt)
            side["frontier"] = sorted(frontier)
            side["depth"] += 1
            logger.debug("m_search side %d depth %d: %d new states", k, side["depth"], len(frontier))
            met = meet()
    finally:
        if pool is not None:
            pool.shutdown()

    if met is None:
        return None
    forward = _path_to(sides[0]["parents"], met)
    backward = [m.inverse() for m in reversed(_path_to(sides[1]["parents"], met))]
    return MPath(a, tuple(forward + backward), b)


# ---- experiment -------------------------------------------------------------


def random_move(rng: np.random.Generator, w: TwinWord, max_strands: int, conj_cap: int) -> MMove:
    """A random move that applies to w; stabilizations only below `max_strands`."""
    options: List[MMove] = []
    for forward, kind in ((True, "M1"), (False, "M1_inv")):
        try:
            apply_m1(w, forward)
            options.append(MMove(kind))
        except MoveRangeError:
            pass
    if w.strands >= 2:
        alpha = random_word(rng, w.strands, conj_cap, min_length=1)
        options.append(MMove("M2", conjugator=alpha))
        options.append(MMove("M2_inv", conjugator=alpha))
    if w.strands < max_strands:
        i = int(rng.integers(1, w.strands + 1))
        options.append(MMove("M3", index=i))
        options.append(MMove("M4", index=i))
    options.extend(move for move, _ in detect_inverse_m3_m4(w))
    return options[int(rng.integers(len(options)))]


def forward_check(rng: np.random.Generator, trials: int, n_max: int, len_max: int,
                   m_seq_max: int, conj_cap: int) -> ForwardReport:
    passes = 0
    failures = []
    for _ in range(trials):
        n = int(rng.integers(1, n_max + 1))
        beta = random_word(rng, n, len_max)
        w = beta
        moves = []
        for _ in range(int(rng.integers(1, m_seq_max + 1))):
            move = random_move(rng, w, n_max + 2, conj_cap)
            w = apply_move(w, move)
            moves.append(move)
        if equivalent_doodles(closure(beta), closure(w)):
            passes += 1
        else:
            failures.append(f"{beta} | {', '.join(str(m) for m in moves)}")
    return ForwardReport(trials=trials, passes=passes, failures=failures)


def closure_code(w: TwinWord) -> str:
    return canonical_code(reduce_minimal(closure(w))).hex()


def _bucket_report(code: str, members: Sequence[TwinWord], caps: Dict[str, int]) -> BucketReport:
    connected = 0
    inconclusive = []
    for a, b in itertools.combinations(members, 2):
        path = m_search(a, b, caps["strands"], caps["depth"], caps["conj_cap"],
                        max_letters=caps.get("letters"))
        if path is not None and path.verify():
            connected += 1
        else:
            inconclusive.append((str(a), str(b)))
    return BucketReport(code=code, members=[str(m) for m in members],
                        connected_pairs=connected, inconclusive_pairs=inconclusive)


def twins_up_to(n_max: int, len_max: int) -> List[TwinWord]:
    """Distinct elements of TW_2 .. TW_n_max with a word of at most len_max letters."""
    seen = set()
    result = []
    for n in range(2, n_max + 1):
        for w in enumerate_words(n, len_max):
            nf = normal_form(w)
            if (n, nf.letters) not in seen:
                seen.add((n, nf.letters))
                result.append(nf)
    return result


def reverse_check(n_max: int, len_max: int, caps: Dict[str, int], workers: int) -> ReverseReport:
    buckets: Dict[str, List[TwinWord]] = defaultdict(list)
    for w in twins_up_to(n_max, len_max):
        buckets[closure_code(w)].append(w)
    codes = sorted(buckets)
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        reports = list(pool.map(lambda c: _bucket_report(c, buckets[c], caps), codes))
    return ReverseReport(buckets=reports)


def markov_experiment(seed: int, n_max: int, len_max: int, m_seq_max: int,
                      search_caps: Dict[str, int], trials: int = 500, workers: int = 1) -> ExperimentReport:
    """
    Forward and reverse Markov checks at desk scale.

    Args:
        seed: Seed for the forward sampling
        n_max: Largest strand count of sampled and enumerated twins
        len_max: Largest word length of sampled and enumerated twins
        m_seq_max: Longest random M-sequence in the forward check
        search_caps: `depth`, `strands`, `conj_cap` and optionally `letters` for m_search
        trials: Number of forward samples
        workers: Threads for the reverse check, one bucket per task

    Returns:
        ExperimentReport with the forward pass count and per-bucket search results
    """
    for key in ("depth", "strands", "conj_cap"):
        if search_caps.get(key, 0) < 1:
            raise ValueError(f"search cap {key!r} must be positive")
    if min(n_max, len_max, m_seq_max, trials) < 1:
        raise ValueError("experiment caps must be positive")
    rng = np.random.default_rng(seed)
    forward = forward_check(rng, trials, n_max, len_max, m_seq_max, search_caps["conj_cap"])
    logger.info("forward check: %d/%d", forward.passes, forward.trials)
    reverse = reverse_check(n_max, len_max, search_caps, workers)
    logger.info("reverse check: %d/%d pairs connected", reverse.connected_count, reverse.pair_count)
    caps = dict(search_caps, n_max=n_max, len_max=len_max, m_seq_max=m_seq_max)
    return ExperimentReport(seed=seed, caps=caps, forward=forward, reverse=reverse)


def summary_text(report: ExperimentReport) -> str:
    forward, reverse = report.forward, report.reverse
    lines = [
        f"seed {report.seed}",
        f"forward: {forward.passes}/{forward.trials} closures equivalent",
        f"reverse: {reverse.connected_count}/{reverse.pair_count} pairs connected "
        f"in {len(reverse.buckets)} buckets",
    ]
    for failure in forward.failures:
        lines.append(f"  forward failure: {failure}")
    for bucket in reverse.buckets:
        for a, b in bucket.inconclusive_pairs:
            lines.append(f"  inconclusive (bounded search): {a}  ~  {b}")
    return "\n".join(lines)


def parse_path(lines: Iterable[str]) -> MPath:
    """Inverse of `MPath.to_text`."""
    rows = [line.strip() for line in lines if line.strip()]
    if len(rows) < 2 or not rows[0].startswith("start ") or not rows[-1].startswith("end "):
        raise MoveRangeError("an M-path needs 'start' and 'end' lines")
    start = parse_word(rows[0][len("start "):])
    end = parse_word(rows[-1][len("end "):])
    return MPath(start, tuple(parse_move(r) for r in rows[1:-1]), end)
