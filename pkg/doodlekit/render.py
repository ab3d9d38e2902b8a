"""
SVG drawings of twin closures and doodle diagrams.

Closures are drawn on concentric circles, one per strand position, with each
letter occupying an angular sector. Other diagrams get a schematic drawing with
crossings on a circle and edges as curves. Output depends only on the input.
"""

import logging
from typing import List, Sequence, Union

import numpy as np

from doodlekit.plane_map import Diagram
from doodlekit.twinword import TwinWord, permutation

logger = logging.getLogger(__name__)

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2")
_SAMPLES = 13


def _header(size: int) -> List[str]:
    return [
        f"<svg xmlns='http://www.w3.org/2000/svg' width='{size}' height='{size}' viewBox='0 0 {size} {size}'>",
        "<defs>",
        "<marker id='arrow' viewBox='0 0 10 10' refX='9' refY='5' markerWidth='6' markerHeight='6' orient='auto'>",
        "<path d='M 0 0 L 10 5 L 0 10 z' fill='context-stroke'/>",
        "</marker>",
        "</defs>",
        f"<rect width='{size}' height='{size}' fill='white'/>",
    ]


def _polyline(points: np.ndarray) -> str:
    head, *rest = points
    return f"M {head[0]:.2f} {head[1]:.2f} " + " ".join(f"L {x:.2f} {y:.2f}" for x, y in rest)


def _polar(center: float, radius: np.ndarray, angle: np.ndarray) -> np.ndarray:
    # angle 0 at the top, growing clockwise
    return np.column_stack((center + radius * np.sin(angle), center - radius * np.cos(angle)))


def render_word(w: TwinWord, size: int = 480) -> str:
    """Closure of w: strand positions on concentric circles, letters as sectors."""
    n, letters = w.strands, w.letters
    center = size / 2
    outer, inner = 0.44 * size, 0.12 * size
    radii = np.linspace(outer, inner, n) if n > 1 else np.array([(outer + inner) / 2])
    cycle_of = {}
    for k, cycle in enumerate(permutation(w).cycles()):
        for strand in cycle:
            cycle_of[strand] = k
    touched = {p for i in letters for p in (i, i + 1)}

    lines = _header(size)
    for p in range(1, n + 1):
        if p not in touched:
            color = PALETTE[cycle_of[p] % len(PALETTE)]
            lines.append(f"<circle class='strand' cx='{center:.2f}' cy='{center:.2f}' r='{radii[p - 1]:.2f}' "
                         f"fill='none' stroke='{color}' stroke-width='2'/>")

    bounds = np.linspace(0.0, 2 * np.pi, len(letters) + 1)
    at = list(range(1, n + 1))  # at[position - 1] = strand there
    for t, i in enumerate(letters):
        sweep = np.linspace(bounds[t], bounds[t + 1], _SAMPLES)
        ease = np.linspace(0.0, 1.0, _SAMPLES)
        for p in range(1, n + 1):
            if p not in touched:
                continue
            target = {i: i + 1, i + 1: i}.get(p, p)
            radius = radii[p - 1] + (radii[target - 1] - radii[p - 1]) * ease
            points = _polar(center, radius, sweep)
            color = PALETTE[cycle_of[at[p - 1]] % len(PALETTE)]
            half = _SAMPLES // 2 + 1
            lines.append(f"<path class='arc' d='{_polyline(points[:half])}' fill='none' stroke='{color}' "
                         f"stroke-width='2' marker-end='url(#arrow)'/>")
            lines.append(f"<path class='arc' d='{_polyline(points[half - 1:])}' fill='none' stroke='{color}' "
                         f"stroke-width='2'/>")
        mid = (bounds[t] + bounds[t + 1]) / 2
        x, y = _polar(center, np.array([(radii[i - 1] + radii[i]) / 2]), np.array([mid]))[0]
        lines.append(f"<circle class='crossing' cx='{x:.2f}' cy='{y:.2f}' r='3' fill='black'/>")
        at[i - 1], at[i] = at[i], at[i - 1]

    lines.append(f"<text x='8' y='{size - 8}' font-size='12' font-family='monospace'>{w}</text>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def render_diagram(d: Diagram, size: int = 480) -> str:
    """Schematic drawing: crossings evenly spaced on a circle, edges curved toward their head."""
    center = size / 2
    k = d.crossing_count
    angles = np.linspace(0.0, 2 * np.pi, k, endpoint=False)
    spots = _polar(center, np.full(k, 0.32 * size), angles) if k else np.zeros((0, 2))

    lines = _header(size)
    multiplicity = {}
    for a, b in d.edges:
        tail, head = (a, b) if d.is_outward(a) else (b, a)
        ct, ch = d.crossing_of(tail), d.crossing_of(head)
        key = (min(ct, ch), max(ct, ch))
        rank = multiplicity.get(key, 0)
        multiplicity[key] = rank + 1
        color = PALETTE[d.piece_of_dart(tail) % len(PALETTE)]
        p, q = spots[ct], spots[ch]
        if ct == ch:
            out_t = angles[ct] + d.slot_of(tail) * np.pi / 2
            out_h = angles[ch] + d.slot_of(head) * np.pi / 2
            reach = 0.12 * size
            c1 = p + reach * np.array([np.sin(out_t), -np.cos(out_t)])
            c2 = q + reach * np.array([np.sin(out_h), -np.cos(out_h)])
            path = f"M {p[0]:.2f} {p[1]:.2f} C {c1[0]:.2f} {c1[1]:.2f} {c2[0]:.2f} {c2[1]:.2f} {q[0]:.2f} {q[1]:.2f}"
        else:
            direction = q - p
            normal = np.array([-direction[1], direction[0]]) / max(np.linalg.norm(direction), 1e-9)
            bow = ((rank + 1) // 2) * 0.08 * size * (1 if rank % 2 else -1)
            ctrl = (p + q) / 2 + bow * normal
            path = f"M {p[0]:.2f} {p[1]:.2f} Q {ctrl[0]:.2f} {ctrl[1]:.2f} {q[0]:.2f} {q[1]:.2f}"
        lines.append(f"<path class='edge' d='{path}' fill='none' stroke='{color}' stroke-width='2' "
                     f"marker-end='url(#arrow)'/>")

    for c, (x, y) in enumerate(spots):
        lines.append(f"<circle class='crossing' cx='{x:.2f}' cy='{y:.2f}' r='4' fill='black'/>")
        lines.append(f"<text x='{x + 6:.2f}' y='{y - 6:.2f}' font-size='11' font-family='monospace'>{c}</text>")

    for j in range(d.free_circles):
        radius = 0.03 * size + 4 * j
        lines.append(f"<circle class='strand' cx='{0.08 * size:.2f}' cy='{0.08 * size:.2f}' r='{radius:.2f}' "
                     f"fill='none' stroke='#555555' stroke-width='1.5'/>")
    lines.append(f"<text x='8' y='{size - 8}' font-size='12' font-family='monospace'>"
                 f"{k} crossings, {d.free_circles} free circles</text>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def _abstract(summary: Sequence[str], size: int) -> str:
    lines = _header(size)
    for row, text in enumerate(summary):
        lines.append(f"<text x='8' y='{20 + 14 * row}' font-size='11' font-family='monospace'>{text}</text>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def render(source: Union[TwinWord, Diagram], size: int = 480) -> str:
    """SVG text for a word (drawn as its closure) or a diagram; never raises on layout problems."""
    try:
        if isinstance(source, TwinWord):
            return render_word(source, size)
        return render_diagram(source, size)
    except (ArithmeticError, IndexError, KeyError, ValueError) as e:
        logger.warning("layout failed, drawing abstract graph: %s", e)
        if isinstance(source, TwinWord):
            return _abstract([str(source)], size)
        summary = [f"crossing {c}: {' '.join(str(x) for x in rot)}" for c, rot in enumerate(source.crossings)]
        summary += [f"edge {a} {b}" for a, b in source.edges]
        return _abstract(summary, size)
