"""Plain-text file formats (UTF-8, LF line endings, tab-separated).

Tree file
    ``n`` on the first line, then ``n - 1`` lines ``u<TAB>v<TAB>w``.
Measure file
    ``n`` lines, the mass of node ``i`` on line ``i + 1``.
Lambda file
    ``n`` lines ``lambda_d<TAB>lambda_c``; ``inf`` stands for an infinite cost.
Points file
    ``n<TAB>d`` on the first line, then ``n`` lines of ``d`` coordinates and a mass.
Coupling file
    Lines ``flow<TAB>x<TAB>y<TAB>m``, ``destroy<TAB>x<TAB>m`` and
    ``create<TAB>y<TAB>m``, closed by ``distance<TAB>v``.
Anchor file
    One node id per line.

Integers are read as Python ints so integer instances stay exact. Every
reader raises :class:`ParseError` carrying the 1-based offending line.
"""
from __future__ import annotations

import math
import re
from pathlib import Path

import numpy as np

from .errors import BadNodeId, CycleDetected, Disconnected, DuplicateEdge, InvalidTree, NegativeWeight, ParseError
from .gkr import Coupling
from .quadtree import PointCloud
from .tree import CostParams, Tree, validate_tree

_INT = re.compile(r"[+-]?\d+\Z")
_INF = {"inf", "+inf", "infinity", "+infinity"}


def format_number(x) -> str:
    """Exact decimal for ints, 17 significant digits for floats, ``inf`` for infinity."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def parse_number(token: str, path, line: int, *, allow_inf: bool = False, mode: str | None = None):
    tok = token.strip()
    if allow_inf and tok.lower() in _INF:
        return math.inf
    if _INT.match(tok):
        v = int(tok)
        return float(v) if mode == "float" else v
    if mode == "int":
        raise ParseError(path, line, f"expected an integer, got {tok!r}")
    try:
        v = float(tok)
    except ValueError:
        raise ParseError(path, line, f"not a number: {tok!r}") from None
    if not math.isfinite(v):
        raise ParseError(path, line, f"not a finite number: {tok!r}")
    return v


def _lines(path) -> list[str]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as e:
        raise ParseError(path, 0, f"not UTF-8: {e}") from None
    lines = text.split("\n")
    while lines and lines[-1].strip() == "":
        lines.pop()
    return [ln[:-1] if ln.endswith("\r") else ln for ln in lines]


def _fields(line: str, k: int, path, lineno: int) -> list[str]:
    parts = line.split("\t")
    if len(parts) != k:
        raise ParseError(path, lineno, f"expected {k} tab-separated fields, got {len(parts)}")
    return parts


def _write(path, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in rows:
            fh.write("\t".join(row) + "\n")


def _count(token: str, path, line: int, what: str) -> int:
    tok = token.strip()
    if not _INT.match(tok) or int(tok) < 0:
        raise ParseError(path, line, f"expected a non-negative {what}, got {tok!r}")
    return int(tok)


def read_tree(path, mode: str | None = None) -> Tree:
    lines = _lines(path)
    if not lines:
        raise ParseError(path, 1, "empty tree file")
    n = _count(lines[0], path, 1, "node count")
    if n < 1:
        raise ParseError(path, 1, "a tree needs at least one node")
    if len(lines) - 1 != n - 1:
        raise ParseError(path, min(len(lines), n) + 1, f"expected {n - 1} edge lines, got {len(lines) - 1}")
    edges = []
    for i, ln in enumerate(lines[1:], start=2):
        u, v, w = _fields(ln, 3, path, i)
        u = _count(u, path, i, "node id")
        v = _count(v, path, i, "node id")
        for node in (u, v):
            if node >= n:
                raise ParseError(path, i, f"node id {node} is out of range for n={n}")
        w = parse_number(w, path, i, mode=mode)
        if w < 0:
            raise ParseError(path, i, f"negative edge weight {w}")
        edges.append((u, v, w))
    try:
        return validate_tree(edges, n)
    except (CycleDetected, DuplicateEdge, NegativeWeight) as e:
        raise ParseError(path, edges.index(tuple(e.edge)) + 2, str(e)) from None
    except Disconnected as e:
        raise ParseError(path, 1, str(e)) from None
    except (BadNodeId, InvalidTree) as e:
        raise ParseError(path, 0, str(e)) from None


def write_tree(path, tree: Tree) -> None:
    rows = [[str(tree.n)]]
    rows += [[str(u), str(v), format_number(w)] for u, v, w in tree.edges]
    _write(path, rows)


def read_measure(path, n: int | None = None, mode: str | None = None) -> list:
    lines = _lines(path)
    if n is not None and len(lines) != n:
        raise ParseError(path, min(len(lines), n) + 1, f"expected {n} lines, got {len(lines)}")
    out = []
    for i, ln in enumerate(lines, start=1):
        v = parse_number(ln, path, i, mode=mode)
        if v < 0:
            raise ParseError(path, i, f"negative mass {v}")
        out.append(v)
    return out


def write_measure(path, mass) -> None:
    _write(path, [[format_number(x)] for x in list(mass)])


def read_lambda(path, n: int | None = None, mode: str | None = None) -> CostParams:
    lines = _lines(path)
    if n is not None and len(lines) != n:
        raise ParseError(path, min(len(lines), n) + 1, f"expected {n} lines, got {len(lines)}")
    ld, lc = [], []
    for i, ln in enumerate(lines, start=1):
        d, c = _fields(ln, 2, path, i)
        d = parse_number(d, path, i, allow_inf=True, mode=mode)
        c = parse_number(c, path, i, allow_inf=True, mode=mode)
        if d < 0 or c < 0:
            raise ParseError(path, i, "costs must be non-negative")
        ld.append(d)
        lc.append(c)
    return CostParams(ld, lc)


def write_lambda(path, costs: CostParams) -> None:
    _write(
        path,
        [[format_number(d), format_number(c)] for d, c in zip(costs.lambda_d.tolist(), costs.lambda_c.tolist())],
    )


def read_points(path) -> PointCloud:
    lines = _lines(path)
    if not lines:
        raise ParseError(path, 1, "empty points file")
    head = _fields(lines[0], 2, path, 1)
    n = _count(head[0], path, 1, "point count")
    d = _count(head[1], path, 1, "dimension")
    if d < 1:
        raise ParseError(path, 1, "dimension must be at least 1")
    if len(lines) - 1 != n:
        raise ParseError(path, min(len(lines), n + 1) + 1, f"expected {n} point lines, got {len(lines) - 1}")
    pts = np.zeros((n, d))
    masses = []
    for i, ln in enumerate(lines[1:], start=2):
        parts = _fields(ln, d + 1, path, i)
        pts[i - 2] = [parse_number(t, path, i, mode="float") for t in parts[:d]]
        m = parse_number(parts[d], path, i)
        if m < 0:
            raise ParseError(path, i, f"negative mass {m}")
        masses.append(m)
    if all(isinstance(m, int) for m in masses):
        mass_arr = np.asarray(masses, dtype=np.int64)
    else:
        mass_arr = np.asarray(masses, dtype=np.float64)
    return PointCloud(pts, mass_arr)


def write_points(path, cloud: PointCloud) -> None:
    rows = [[str(cloud.n), str(cloud.dimension)]]
    for p, m in zip(cloud.points.tolist(), cloud.masses.tolist()):
        rows.append([format(float(x), ".17g") for x in p] + [format_number(m)])
    _write(path, rows)


def read_coupling(path, mode: str | None = None) -> tuple[Coupling, object]:
    """Return the plan and the distance recorded on its last line."""
    lines = _lines(path)
    plan = Coupling([], [], [])
    distance = None
    for i, ln in enumerate(lines, start=1):
        if distance is not None:
            raise ParseError(path, i, "content after the distance line")
        kind = ln.split("\t", 1)[0]
        if kind == "flow":
            _, x, y, m = _fields(ln, 4, path, i)
            plan.flows.append((_count(x, path, i, "node id"), _count(y, path, i, "node id"), parse_number(m, path, i, mode=mode)))
        elif kind == "destroy":
            _, x, m = _fields(ln, 3, path, i)
            plan.destroyed.append((_count(x, path, i, "node id"), parse_number(m, path, i, mode=mode)))
        elif kind == "create":
            _, y, m = _fields(ln, 3, path, i)
            plan.created.append((_count(y, path, i, "node id"), parse_number(m, path, i, mode=mode)))
        elif kind == "distance":
            _, v = _fields(ln, 2, path, i)
            distance = parse_number(v, path, i, allow_inf=True, mode=mode)
        else:
            raise ParseError(path, i, f"unknown record {kind!r}")
    if distance is None:
        raise ParseError(path, len(lines) + 1, "missing distance line")
    return plan, distance


def format_coupling(plan: Coupling | None, distance) -> str:
    rows = []
    if plan is not None:
        rows += [["flow", str(x), str(y), format_number(m)] for x, y, m in plan.flows]
        rows += [["destroy", str(x), format_number(m)] for x, m in plan.destroyed]
        rows += [["create", str(y), format_number(m)] for y, m in plan.created]
    rows.append(["distance", format_number(distance)])
    return "".join("\t".join(r) + "\n" for r in rows)


def write_coupling(path, plan: Coupling | None, distance) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_coupling(plan, distance))


def read_anchors(path, n: int | None = None) -> list[int]:
    out = []
    for i, ln in enumerate(_lines(path), start=1):
        s = _count(ln, path, i, "node id")
        if n is not None and s >= n:
            raise ParseError(path, i, f"node id {s} is out of range for n={n}")
        out.append(s)
    return out
