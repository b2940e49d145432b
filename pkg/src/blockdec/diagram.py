"""Quivers and skew-symmetrizable diagrams.

A *diagram* is a finite directed graph without loops or 2-cycles whose edges
carry a weight in {1, 2, 4}.  The weight of an edge between nodes i and j is
|b_ij * b_ji| for the exchange matrix it encodes:

* weight 1 — a plain arrow, (b_ij, b_ji) = (1, -1);
* weight 4 — a double arrow (two merged parallel arrows), (2, -2);
* weight 2 — an s-diagram edge with an asymmetric split, (2, -1) or (1, -2),
  whichever a global skew-symmetrizer admits.

Two modes restrict the weight set: ``quiver`` allows {1, 4} (skew-symmetric
matrices), ``s`` additionally allows weight 2 (skew-symmetrizable matrices).

The module provides validated construction, exchange-matrix conversion both
ways, a deterministic canonical form (iterative refinement plus an
individualize-and-refine search, adequate for the desk-scale n <= ~20 this
package targets), automorphism enumeration for small diagrams, and the text
formats used by the CLI.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional, Sequence

QUIVER = "quiver"
S_DIAGRAM = "s"
MODES = (QUIVER, S_DIAGRAM)

ALLOWED_WEIGHTS = {QUIVER: frozenset({1, 4}), S_DIAGRAM: frozenset({1, 2, 4})}


class DiagramError(ValueError):
    """Base class for diagram construction/parsing failures."""


class LoopEdge(DiagramError):
    """An edge whose endpoints coincide."""


class TwoCycle(DiagramError):
    """Opposite-direction edges between one node pair."""


class BadWeight(DiagramError):
    """Edge weight outside the mode's allowed set, or an illegal merge."""


class ParseError(DiagramError):
    """Malformed diagram text; message carries line/column information."""


class NotSkewSymmetrizable(DiagramError):
    """No positive symmetrizer exists for the requested weight-2 layout."""


class Edge(NamedTuple):
    src: int
    dst: int
    weight: int


@dataclass(frozen=True)
class Diagram:
    """An immutable normalized diagram.

    ``edges`` is sorted by (src, dst); at most one edge per unordered node
    pair.  Construct through :func:`make_diagram` (or the parsers), which
    enforce all invariants.
    """

    node_count: int
    edges: tuple[Edge, ...]
    mode: str

    def edge_map(self) -> dict[tuple[int, int], int]:
        """Directed (src, dst) -> weight mapping."""
        return {(e.src, e.dst): e.weight for e in self.edges}

    def is_connected(self) -> bool:
        if self.node_count <= 1:
            return True
        adj: dict[int, set[int]] = {v: set() for v in range(self.node_count)}
        for e in self.edges:
            adj[e.src].add(e.dst)
            adj[e.dst].add(e.src)
        seen = {0}
        stack = [0]
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == self.node_count


def make_diagram(node_count: int, edges: Iterable[tuple[int, int, int]], mode: str = QUIVER) -> Diagram:
    """Validated constructor.

    Parallel same-direction unit arrows are merged pairwise into one weight-4
    edge; any other duplication is rejected.  Raises :class:`LoopEdge`,
    :class:`TwoCycle` or :class:`BadWeight` on rule violations.
    """
    if mode not in MODES:
        raise DiagramError(f"unknown mode {mode!r}")
    if node_count < 0:
        raise DiagramError("node_count must be >= 0")
    allowed = ALLOWED_WEIGHTS[mode]
    grouped: dict[tuple[int, int], list[int]] = {}
    for src, dst, weight in edges:
        if not (0 <= src < node_count and 0 <= dst < node_count):
            raise DiagramError(f"edge ({src},{dst}) endpoint outside 0..{node_count - 1}")
        if src == dst:
            raise LoopEdge(f"loop edge at node {src}")
        grouped.setdefault((src, dst), []).append(weight)

    merged: dict[tuple[int, int], int] = {}
    for (src, dst), weights in grouped.items():
        if len(weights) == 1:
            weight = weights[0]
        elif len(weights) == 2 and weights == [1, 1]:
            weight = 4  # two parallel unit arrows merge into a double arrow
        else:
            raise BadWeight(f"cannot normalize edges {sorted(weights)} on ({src},{dst})")
        if weight not in allowed:
            raise BadWeight(f"weight {weight} not allowed in {mode} mode on ({src},{dst})")
        merged[(src, dst)] = weight

    for src, dst in merged:
        if (dst, src) in merged:
            raise TwoCycle(f"opposite edges between {min(src, dst)} and {max(src, dst)}")

    out = tuple(Edge(s, d, w) for (s, d), w in sorted(merged.items()))
    return Diagram(node_count, out, mode)


def reverse_diagram(d: Diagram) -> Diagram:
    """The diagram with every arrow reversed."""
    return Diagram(d.node_count, tuple(sorted(Edge(e.dst, e.src, e.weight) for e in d.edges)), d.mode)


# ---------------------------------------------------------------------------
# Exchange matrices
# ---------------------------------------------------------------------------

def to_matrix(d: Diagram) -> tuple[tuple[int, ...], ...]:
    """Exchange matrix of a diagram.

    Weight-1 edges give (1, -1), weight-4 give (2, -2).  Weight-2 edges need
    an asymmetric split consistent with one global positive symmetrizer:
    across weight-1/4 edges the symmetrizer entries are equal, across a
    weight-2 edge they differ by a factor of 2.  We first try giving every
    weight-2 edge the (2, -1) split (head entry twice the tail's); if that is
    globally inconsistent we fall back, per connected component of the
    contracted weight-2 graph, to a two-coloring (which exists iff the
    component is bipartite — otherwise :class:`NotSkewSymmetrizable`).
    """
    n = d.node_count
    b = [[0] * n for _ in range(n)]
    for e in d.edges:
        if e.weight == 1:
            b[e.src][e.dst], b[e.dst][e.src] = 1, -1
        elif e.weight == 4:
            b[e.src][e.dst], b[e.dst][e.src] = 2, -2

    w2 = [e for e in d.edges if e.weight == 2]
    if not w2:
        return tuple(tuple(row) for row in b)

    # Contract weight-1/4 edges: symmetrizer equal across them.
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x: int, y: int) -> None:
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[max(rx, ry)] = min(rx, ry)

    for e in d.edges:
        if e.weight != 2:
            union(e.src, e.dst)

    pairs = [(find(e.src), find(e.dst), e) for e in w2]
    for cs, cd, e in pairs:
        if cs == cd:
            raise NotSkewSymmetrizable(
                f"weight-2 edge ({e.src},{e.dst}) closes a symmetrizer-equal cycle")

    exp = _solve_w2_exponents(pairs)
    for cs, cd, e in pairs:
        if exp[cd] == exp[cs] + 1:
            b[e.src][e.dst], b[e.dst][e.src] = 2, -1
        else:
            b[e.src][e.dst], b[e.dst][e.src] = 1, -2
    return tuple(tuple(row) for row in b)


def _solve_w2_exponents(pairs: Sequence[tuple[int, int, Edge]]) -> dict[int, int]:
    """Assign symmetrizer exponents (log2) to contracted classes.

    Every weight-2 edge must see an exponent difference of exactly +-1.
    Preferred solution: +1 along each edge direction (the (2,-1) split).
    Fallback: bipartite 0/1 coloring maximizing the number of (2,-1) splits.
    """
    adj: dict[int, list[tuple[int, int]]] = {}
    for cs, cd, _ in pairs:
        adj.setdefault(cs, []).append((cd, +1))
        adj.setdefault(cd, []).append((cs, -1))

    classes = sorted(adj)
    exp: dict[int, int] = {}
    consistent = True
    for root in classes:
        if root in exp:
            continue
        exp[root] = 0
        stack = [root]
        while stack and consistent:
            x = stack.pop()
            for y, delta in adj[x]:
                want = exp[x] + delta
                if y not in exp:
                    exp[y] = want
                    stack.append(y)
                elif exp[y] != want:
                    consistent = False
                    break
    if consistent:
        return exp

    # Bipartite fallback, per component.
    exp = {}
    for root in classes:
        if root in exp:
            continue
        color: dict[int, int] = {root: 0}
        order = [root]
        stack = [root]
        while stack:
            x = stack.pop()
            for y, _ in adj[x]:
                if y not in color:
                    color[y] = 1 - color[x]
                    order.append(y)
                    stack.append(y)
                elif color[y] == color[x]:
                    raise NotSkewSymmetrizable(
                        "odd cycle of weight-2 edges admits no symmetrizer")
        # Choose the coloring giving more (2,-1) splits; ties keep root at 0.
        plain = sum(1 for cs, cd, _ in pairs
                    if cs in color and color[cd] == color[cs] + 1)
        flipped = sum(1 for cs, cd, _ in pairs
                      if cs in color and (1 - color[cd]) == (1 - color[cs]) + 1)
        chosen = color if plain >= flipped else {x: 1 - c for x, c in color.items()}
        exp.update(chosen)
    return exp


def symmetrizer(d: Diagram) -> tuple[int, ...]:
    """A positive integer symmetrizer for ``to_matrix(d)`` (diag d_i)."""
    b = to_matrix(d)
    n = d.node_count
    exp = [0] * n
    seen = [False] * n
    for root in range(n):
        if seen[root]:
            continue
        seen[root] = True
        stack = [root]
        while stack:
            x = stack.pop()
            for y in range(n):
                if b[x][y] == 0 or seen[y]:
                    continue
                # d_x * b_xy = -d_y * b_yx  =>  d_y / d_x = -b_xy / b_yx
                ratio = {(1, -1): 0, (2, -2): 0, (2, -1): 1, (1, -2): -1}[(b[x][y], b[y][x])] \
                    if b[x][y] > 0 else \
                    {(1, -1): 0, (2, -2): 0, (2, -1): -1, (1, -2): 1}[(b[y][x], b[x][y])]
                exp[y] = exp[x] + ratio
                seen[y] = True
                stack.append(y)
    low = min(exp) if exp else 0
    return tuple(2 ** (e - low) for e in exp)


def from_matrix(rows: Sequence[Sequence[int]], mode: Optional[str] = None) -> Diagram:
    """Diagram of an exchange matrix (inverse of :func:`to_matrix`)."""
    n = len(rows)
    for i, row in enumerate(rows):
        if len(row) != n:
            raise ParseError(f"matrix row {i} has {len(row)} entries, expected {n}")
        if row[i] != 0:
            raise ParseError(f"nonzero diagonal entry at ({i},{i})")
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            bij, bji = rows[i][j], rows[j][i]
            if bij == 0 and bji == 0:
                continue
            if bij > 0 > bji:
                src, dst, p, q = i, j, bij, -bji
            elif bji > 0 > bij:
                src, dst, p, q = j, i, bji, -bij
            else:
                raise ParseError(f"entries ({i},{j}) = ({bij},{bji}) are not sign-opposite")
            weight = p * q
            if weight not in (1, 2, 4) or max(p, q) > 2:
                raise BadWeight(f"entries ({i},{j}) = ({bij},{bji}) encode no legal weight")
            edges.append((src, dst, weight))
    if mode is None:
        mode = S_DIAGRAM if any(w == 2 for _, _, w in edges) else QUIVER
    return make_diagram(n, edges, mode)


# ---------------------------------------------------------------------------
# Canonical form
# ---------------------------------------------------------------------------

def _neighbor_signature(n: int, emap: dict[tuple[int, int], int], colors: Sequence[int]):
    sigs = []
    for v in range(n):
        out = sorted((w, colors[u]) for (x, u), w in emap.items() if x == v)
        inc = sorted((w, colors[u]) for (u, x), w in emap.items() if x == v)
        sigs.append((colors[v], tuple(out), tuple(inc)))
    return sigs


def _refine(n: int, emap: dict[tuple[int, int], int], colors: list[int]) -> list[int]:
    while True:
        sigs = _neighbor_signature(n, emap, colors)
        ranking = {s: i for i, s in enumerate(sorted(set(sigs)))}
        new = [ranking[s] for s in sigs]
        if new == colors:
            return colors
        colors = new


def _cells(colors: Sequence[int], vertices: Sequence[int]) -> list[list[int]]:
    by: dict[int, list[int]] = {}
    for v in vertices:
        by.setdefault(colors[v], []).append(v)
    return [sorted(by[c]) for c in sorted(by)]


def _encode(n: int, emap: dict[tuple[int, int], int], order: Sequence[int]) -> tuple:
    pos = {v: i for i, v in enumerate(order)}
    return tuple(sorted((pos[s], pos[t], w) for (s, t), w in emap.items()))


def _swap_invariant(emap: dict[tuple[int, int], int], u: int, v: int) -> bool:
    """True if transposing u and v leaves the edge map unchanged."""
    def sw(x: int) -> int:
        return v if x == u else u if x == v else x
    return {(sw(s), sw(t)): w for (s, t), w in emap.items()} == emap


def _canonical_order(n: int, emap: dict[tuple[int, int], int]) -> list[int]:
    """Vertex order minimizing the edge encoding (non-isolated vertices)."""
    touched = sorted({v for e in emap for v in e})
    isolated = [v for v in range(n) if v not in set(touched)]
    if not touched:
        return isolated
    colors = [0] * n
    colors = _refine(n, emap, colors)

    best: dict[str, Optional[tuple]] = {"enc": None, "order": None}

    def rec(colors: list[int]) -> None:
        cells = _cells(colors, touched)
        target = next((c for c in cells if len(c) > 1), None)
        if target is None:
            order = [c[0] for c in cells]
            enc = _encode(len(order), emap, order)
            if best["enc"] is None or enc < best["enc"]:
                best["enc"], best["order"] = enc, tuple(order)
            return
        candidates = target
        # Cells of pairwise interchangeable vertices need only one branch.
        if all(_swap_invariant(emap, target[0], u) for u in target[1:]):
            candidates = target[:1]
        mark = max(colors) + 1
        for v in candidates:
            child = list(colors)
            child[v] = mark
            rec(_refine(n, emap, child))

    rec(colors)
    assert best["order"] is not None
    return list(best["order"]) + isolated


def canonical_form(d: Diagram) -> tuple[str, tuple[int, ...]]:
    """Canonical key and the old->new relabeling achieving it.

    Two diagrams have equal keys iff they are isomorphic as directed weighted
    graphs in the same mode.  Isolated nodes are placed after the canonical
    order of the edge-bearing part.
    """
    order = _canonical_order(d.node_count, d.edge_map())
    relabel = [0] * d.node_count
    for new, old in enumerate(order):
        relabel[old] = new
    emap = d.edge_map()
    enc = sorted((relabel[s], relabel[t], w) for (s, t), w in emap.items())
    key = f"{d.mode}|{d.node_count}|" + ";".join(f"{s}>{t}*{w}" for s, t, w in enc)
    return key, tuple(relabel)


def canonical_key(d: Diagram) -> str:
    return canonical_form(d)[0]


def relabel_diagram(d: Diagram, relabel: Sequence[int]) -> Diagram:
    edges = tuple(sorted(Edge(relabel[e.src], relabel[e.dst], e.weight) for e in d.edges))
    return Diagram(d.node_count, edges, d.mode)


def reversal_class_key(d: Diagram) -> str:
    """Canonical key up to global arrow reversal."""
    return min(canonical_key(d), canonical_key(reverse_diagram(d)))


def from_canonical_key(key: str) -> Diagram:
    """Rebuild a diagram from a canonical key (inverse of canonical_key)."""
    try:
        mode, count_text, edge_text = key.split("|")
        node_count = int(count_text)
        edges = []
        if edge_text:
            for part in edge_text.split(";"):
                src_text, rest = part.split(">")
                dst_text, weight_text = rest.split("*")
                edges.append((int(src_text), int(dst_text), int(weight_text)))
    except ValueError:
        raise ParseError(f"malformed diagram key {key!r}") from None
    return make_diagram(node_count, edges, mode=mode)


def automorphisms(d: Diagram) -> list[tuple[int, ...]]:
    """All node permutations preserving the diagram.

    Intended for desk-scale diagrams: isolated nodes share one refinement cell
    and contribute a full symmetric group, so the cell product grows with the
    factorial of the largest cell.
    """
    n = d.node_count
    emap = d.edge_map()
    if n <= 1:
        return [tuple(range(n))]
    colors = _refine(n, emap, [0] * n)
    cells = _cells(colors, list(range(n)))
    result = []
    for combo in itertools.product(*(itertools.permutations(c) for c in cells)):
        perm = [0] * n
        for cell, image in zip(cells, combo):
            for old, new in zip(cell, image):
                perm[old] = new
        if {(perm[s], perm[t]): w for (s, t), w in emap.items()} == emap:
            result.append(tuple(perm))
    return result


# ---------------------------------------------------------------------------
# Text formats
# ---------------------------------------------------------------------------

def parse_diagram(text: str, mode: Optional[str] = None) -> Diagram:
    """Parse edge-list or matrix form (auto-detected).

    Edge-list form: a ``nodes <n>`` line then ``edge <from> <to> <weight>``
    lines; an optional leading ``mode <quiver|s>`` line is accepted.  Matrix
    form: n whitespace-separated rows of n integers.  ``mode`` overrides any
    inferred/declared mode.
    """
    lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if stripped:
            lines.append((lineno, stripped))
    if not lines:
        raise ParseError("empty diagram text")

    first = lines[0][1].split()[0]
    if first in ("nodes", "mode"):
        return _parse_edge_list(lines, mode)
    return _parse_matrix(lines, mode)


def _parse_edge_list(lines: list[tuple[int, str]], mode: Optional[str]) -> Diagram:
    declared: Optional[str] = None
    node_count: Optional[int] = None
    edges: list[tuple[int, int, int]] = []
    for lineno, line in lines:
        parts = line.split()
        if parts[0] == "mode":
            if len(parts) != 2 or parts[1] not in MODES:
                raise ParseError(f"line {lineno}: bad mode line {line!r}")
            declared = parts[1]
        elif parts[0] == "nodes":
            if len(parts) != 2 or not parts[1].isdigit():
                raise ParseError(f"line {lineno}: bad nodes line {line!r}")
            node_count = int(parts[1])
        elif parts[0] == "edge":
            if node_count is None:
                raise ParseError(f"line {lineno}: edge before nodes line")
            if len(parts) != 4:
                raise ParseError(f"line {lineno}: expected 'edge <from> <to> <weight>'")
            try:
                src, dst, weight = (int(p) for p in parts[1:])
            except ValueError as exc:
                raise ParseError(f"line {lineno}: non-integer field in {line!r}") from exc
            edges.append((src, dst, weight))
        else:
            raise ParseError(f"line {lineno}: unknown directive {parts[0]!r}")
    if node_count is None:
        raise ParseError("missing nodes line")
    if mode is None:
        mode = declared if declared is not None else (
            S_DIAGRAM if any(w == 2 for _, _, w in edges) else QUIVER)
    return make_diagram(node_count, edges, mode)


def _parse_matrix(lines: list[tuple[int, str]], mode: Optional[str]) -> Diagram:
    rows = []
    for lineno, line in lines:
        try:
            rows.append([int(p) for p in line.split()])
        except ValueError as exc:
            raise ParseError(f"line {lineno}: non-integer matrix entry in {line!r}") from exc
    n = len(rows)
    for lineno_row, row in enumerate(rows):
        if len(row) != n:
            raise ParseError(
                f"matrix row {lineno_row + 1} has {len(row)} entries, expected {n}")
    return from_matrix(rows, mode)


def serialize_diagram(d: Diagram) -> str:
    """Edge-list serialization: nodes line, then edges sorted lexicographically."""
    out = [f"nodes {d.node_count}"]
    out.extend(f"edge {e.src} {e.dst} {e.weight}" for e in d.edges)
    return "\n".join(out) + "\n"
