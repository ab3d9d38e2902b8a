"""
Command-line front-end for doodlekit.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

sys.path.append(str(Path(__file__).parent.parent))
from config import Config
from doodlekit import markov, suites
from doodlekit.markov import MMove, m_search, markov_experiment, parse_move, summary_text
from doodlekit.moves import ORDER_POLICIES, find_bigons, find_monogons, reduce_with_script
from doodlekit.plane_map import Diagram, DiagramError, canonical_code, closure, dumps, loads, seifert_smooth
from doodlekit.render import render
from doodlekit.twinword import equal, normal_form, parse_word

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    """Raises instead of exiting so `run` keeps control of the exit status."""

    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


class _UsageError(Exception):
    pass


def _read_diagram(path: str) -> Diagram:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise _UsageError(f"{path}: {e.strerror or e}") from e
    try:
        return loads(text)
    except DiagramError as e:
        raise DiagramError(f"{path}: {e}") from e


def _write(path: Optional[str], text: str):
    if path is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
        return
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as e:
        raise _UsageError(f"{path}: {e.strerror or e}") from e
    print(f"✓ wrote {path}")


# ---- subcommands ------------------------------------------------------------


def cmd_normalize(args) -> int:
    print(normal_form(parse_word(args.word)))
    return EXIT_OK


def cmd_equal(args) -> int:
    same = equal(parse_word(args.first), parse_word(args.second))
    print("equal" if same else "not equal")
    return EXIT_OK if same else EXIT_NEGATIVE


def cmd_closure(args) -> int:
    _write(args.output, dumps(closure(parse_word(args.word))))
    return EXIT_OK


def cmd_reduce(args) -> int:
    d = _read_diagram(args.diagram)
    reduced, script = reduce_with_script(d, args.policy, args.seed)
    if args.script:
        _write(args.script, "\n".join(script))
    else:
        for line in script:
            print(f"# {line}")
    _write(args.output, dumps(reduced))
    return EXIT_OK


def cmd_canon(args) -> int:
    print(canonical_code(_read_diagram(args.diagram)).hex())
    return EXIT_OK


def cmd_seifert(args) -> int:
    family = seifert_smooth(_read_diagram(args.diagram))
    print(f"circles {family.circle_count}")
    print(f"concentric {str(family.concentric).lower()}")
    print(f"coherently_oriented {str(family.coherently_oriented).lower()}")
    return EXIT_OK


def cmd_bigons(args) -> int:
    d = _read_diagram(args.diagram)
    for m in find_monogons(d):
        print(f"monogon crossing {m.crossing} dart {m.dart}")
    for b in find_bigons(d):
        print(f"bigon crossings {b.crossings[0]} {b.crossings[1]} darts {b.darts[0]} {b.darts[1]} {b.kind}")
    return EXIT_OK


def cmd_mmove(args) -> int:
    line = args.kind
    if args.conjugator is not None:
        line += f" {args.conjugator}"
    if args.index is not None:
        line += f" {args.index}"
    move: MMove = parse_move(line)
    print(markov.apply_move(parse_word(args.word), move))
    return EXIT_OK


def cmd_msearch(args) -> int:
    path = m_search(parse_word(args.first), parse_word(args.second), args.strands, args.depth,
                    args.conj_cap, workers=args.workers, max_letters=args.letters)
    if path is None:
        print("not found (inconclusive within the search bounds)")
        return EXIT_NEGATIVE
    print(path.to_text())
    return EXIT_OK


def cmd_experiment(args) -> int:
    caps = {"depth": args.depth, "strands": args.strands, "conj_cap": args.conj_cap, "letters": args.letters}
    report = markov_experiment(args.seed, args.nmax, args.lenmax, args.mseq, caps,
                               trials=args.trials, workers=args.workers)
    print(summary_text(report))
    if args.json:
        _write(args.json, report.model_dump_json(indent=2))
    return EXIT_OK if report.forward.passes == report.forward.trials else EXIT_NEGATIVE


def cmd_render(args) -> int:
    source = args.source
    if Path(source).is_file():
        target = _read_diagram(source)
    else:
        target = parse_word(source)
    _write(args.output, render(target, args.size))
    return EXIT_OK


def cmd_selftest(args) -> int:
    names = [args.suite] if args.suite else list(suites.SUITES)
    if args.suite and args.suite not in suites.SUITES:
        raise _UsageError(f"unknown suite {args.suite!r}; choose from {', '.join(suites.SUITES)}")
    print(f"doodlekit selftest {json.dumps(Config.get_info())}")
    failed = 0
    for name in names:
        result = suites.run_suite(name, args.seed, args.scale, args.workers)
        mark = "✓" if result.passed else "✗"
        print(f"{mark} {name}: {result.cases} cases, {len(result.violations)} violations ({result.seconds:.1f}s)")
        for violation in result.violations[:10]:
            print(f"    {violation}")
        failed += not result.passed
    return EXIT_OK if failed == 0 else EXIT_NEGATIVE


# ---- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="doodlekit", description="Twin groups and doodle diagrams")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("normalize", help="print the normal form of a word")
    p.add_argument("word")
    p.set_defaults(handler=cmd_normalize)

    p = sub.add_parser("equal", help="decide equality of two words (exit 1 when different)")
    p.add_argument("first")
    p.add_argument("second")
    p.set_defaults(handler=cmd_equal)

    p = sub.add_parser("closure", help="write the closure diagram of a word")
    p.add_argument("word")
    p.add_argument("-o", "--output")
    p.set_defaults(handler=cmd_closure)

    p = sub.add_parser("reduce", help="reduce a diagram to its minimal diagram")
    p.add_argument("diagram")
    p.add_argument("--policy", choices=ORDER_POLICIES, default="deterministic")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--script", help="write the applied move script here")
    p.add_argument("-o", "--output")
    p.set_defaults(handler=cmd_reduce)

    for name, handler, text in (("canon", cmd_canon, "print the canonical code"),
                                ("seifert", cmd_seifert, "smooth crossings and describe the circles"),
                                ("bigons", cmd_bigons, "list monogon and bigon sites")):
        p = sub.add_parser(name, help=text)
        p.add_argument("diagram")
        p.set_defaults(handler=handler)

    p = sub.add_parser("mmove", help="apply one M-move to a word")
    p.add_argument("kind", choices=markov.KINDS)
    p.add_argument("word")
    p.add_argument("--conjugator", help="word for M2 / M2_inv")
    p.add_argument("--index", type=int, help="index for M3 / M4 and their inverses")
    p.set_defaults(handler=cmd_mmove)

    p = sub.add_parser("msearch", help="search for an M-path between two words")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--depth", type=int, default=Config.SEARCH_DEPTH)
    p.add_argument("--strands", type=int, default=Config.SEARCH_STRANDS)
    p.add_argument("--conj-cap", dest="conj_cap", type=int, default=Config.CONJ_CAP)
    p.add_argument("--letters", type=int, default=Config.SEARCH_LETTERS, help="skip states with longer normal forms")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(handler=cmd_msearch)

    p = sub.add_parser("experiment", help="forward and reverse Markov checks")
    p.add_argument("--seed", type=int, default=Config.SEED)
    p.add_argument("--nmax", type=int, default=Config.NMAX)
    p.add_argument("--lenmax", type=int, default=Config.LENMAX)
    p.add_argument("--mseq", type=int, default=Config.MSEQ_MAX)
    p.add_argument("--trials", type=int, default=Config.FORWARD_TRIALS)
    p.add_argument("--depth", type=int, default=Config.SEARCH_DEPTH)
    p.add_argument("--strands", type=int, default=Config.SEARCH_STRANDS)
    p.add_argument("--conj-cap", dest="conj_cap", type=int, default=Config.CONJ_CAP)
    p.add_argument("--letters", type=int, default=Config.SEARCH_LETTERS)
    p.add_argument("--workers", type=int, default=Config.WORKERS)
    p.add_argument("--json", help="write the JSON report here")
    p.set_defaults(handler=cmd_experiment)

    p = sub.add_parser("render", help="draw a diagram file or the closure of a word as SVG")
    p.add_argument("source")
    p.add_argument("-o", "--output")
    p.add_argument("--size", type=int, default=Config.SVG_SIZE)
    p.set_defaults(handler=cmd_render)

    p = sub.add_parser("selftest", help="run the property suites")
    p.add_argument("--suite")
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=Config.SEED)
    p.add_argument("--workers", type=int, default=Config.WORKERS)
    p.set_defaults(handler=cmd_selftest)
    return parser


def run(argv: Optional[List[str]] = None) -> int:
    """Parse argv, run one subcommand and return its exit status."""
    logging.basicConfig(level=getattr(logging, Config.LOG_LEVEL, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        return args.handler(args)
    except _UsageError as e:
        print(f"✗ {e}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as e:
        # word, diagram and move errors
        print(f"✗ {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_USAGE


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
