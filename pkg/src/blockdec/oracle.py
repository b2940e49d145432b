"""Exhaustive plan enumeration: the brute-force oracle.

The oracle enumerates *every* gluable plan up to a block budget over abstract
nodes (numbered in first-use order), glues each one, and files the resulting
diagram under its canonical key together with the plan mapped into canonical
coordinates.  Looking a diagram up closes the stored plans under the
diagram's automorphisms, because one abstract plan can stand for several
concrete placements on a symmetric diagram.

The decomposition search in :mod:`blockdec.decompose` can then be audited
against ground truth that was produced without any of its pruning logic.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass
from random import Random

from .blocks import BLACK, WHITE, BlockData, load_block_data
from .diagram import (
    Diagram,
    automorphisms,
    canonical_form,
    from_canonical_key,
    relabel_diagram,
)
from .gluing import (
    BlockInstance,
    Plan,
    canonical_instance,
    glue,
    parse_plan_key,
    plan_key,
)


class OracleError(ValueError):
    """An oracle index file is malformed or mismatched."""


_HEADER = "blockdec-oracle-index v1"


def enumerate_plans(
    data: BlockData,
    mode: str,
    max_blocks: int,
    max_nodes: int,
):
    """Yield every gluable plan with at most ``max_blocks`` instances on at
    most ``max_nodes`` abstract nodes, each exactly once (by plan key).

    Nodes are numbered in first-use order.  Any occupancy-legal placement
    glues, so enumeration only tracks slot usage: a white slot may land on an
    open node or a fresh one, a black slot only on a fresh one.
    """
    tags = data.tags_for_mode(mode)
    templates = {tag: data.template(tag) for tag in tags}
    visited: set[str] = set()

    def placements(slots: list[list[str]]):
        """All single-instance extensions of the current slot state."""
        n = len(slots)
        open_nodes = [i for i, s in enumerate(slots) if s == [WHITE]]
        for tag in tags:
            template = templates[tag]
            assignments: list[tuple[int, ...]] = []

            def assign(pos: int, chosen: tuple[int, ...], fresh: int) -> None:
                if n + fresh > max_nodes:
                    return
                if pos == template.size:
                    assignments.append(chosen)
                    return
                color = template.colors[pos]
                if color == WHITE:
                    for node in open_nodes:
                        if node not in chosen:
                            assign(pos + 1, chosen + (node,), fresh)
                # A fresh node: always the next unused id (first-use order).
                if n + fresh < max_nodes:
                    assign(pos + 1, chosen + (n + fresh,), fresh + 1)

            assign(0, (), 0)
            for nodes in assignments:
                yield BlockInstance(tag, nodes)

    def slots_of(plan: tuple[BlockInstance, ...]) -> list[list[str]]:
        used: list[list[str]] = []
        for inst in plan:
            template = templates[inst.tag]
            for color, node in zip(template.colors, inst.nodes):
                while node >= len(used):
                    used.append([])
                used[node].append(color)
        return used

    def dfs(plan: tuple[BlockInstance, ...]):
        key = plan_key(data, Plan(mode, plan))
        if key in visited:
            return
        visited.add(key)
        if plan:
            yield Plan(mode, tuple(sorted(canonical_instance(data, i) for i in plan)))
        if len(plan) == max_blocks:
            return
        for inst in placements(slots_of(plan)):
            yield from dfs(plan + (inst,))

    yield from dfs(())


@dataclass(frozen=True)
class OracleIndex:
    """Canonical diagram key -> plan keys in canonical coordinates."""

    mode: str
    max_blocks: int
    max_nodes: int
    entries: dict[str, frozenset[str]]

    def closed_plans(
        self, diagram: Diagram, data: BlockData | None = None
    ) -> frozenset[str]:
        """All decomposition plan keys of ``diagram`` in its canonical
        coordinates, closed under the diagram's automorphisms."""
        key, relabel = canonical_form(diagram)
        stored = self.entries.get(key, frozenset())
        if not stored:
            return frozenset()
        canonical = relabel_diagram(diagram, relabel)
        auts = automorphisms(canonical)
        if data is None:
            data = load_block_data()
        closed = set()
        for pkey in stored:
            plan = parse_plan_key(pkey)
            for aut in auts:
                mapped = Plan(
                    plan.mode,
                    tuple(
                        BlockInstance(i.tag, tuple(aut[v] for v in i.nodes))
                        for i in plan.instances
                    ),
                )
                closed.add(plan_key(data, mapped))
        return frozenset(closed)

    def save(self, path: str | os.PathLike) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.dumps())

    def dumps(self) -> str:
        out = io.StringIO()
        out.write(
            f"# {_HEADER} mode={self.mode} "
            f"max_blocks={self.max_blocks} max_nodes={self.max_nodes}\n"
        )
        lines = sorted(
            f"{dkey} {pkey}" for dkey, pkeys in self.entries.items() for pkey in pkeys
        )
        out.write("\n".join(lines))
        if lines:
            out.write("\n")
        return out.getvalue()


def loads_index(text: str) -> OracleIndex:
    lines = text.splitlines()
    if not lines or not lines[0].startswith(f"# {_HEADER}"):
        raise OracleError("not an oracle index file")
    params = dict(
        part.split("=", 1) for part in lines[0].split() if "=" in part
    )
    try:
        mode = params["mode"]
        max_blocks = int(params["max_blocks"])
        max_nodes = int(params["max_nodes"])
    except (KeyError, ValueError):
        raise OracleError("oracle index header is missing parameters") from None
    entries: dict[str, set[str]] = {}
    for line in lines[1:]:
        line = line.strip()
        if not line:
            continue
        try:
            dkey, pkey = line.split(" ")
        except ValueError:
            raise OracleError(f"malformed index line {line!r}") from None
        entries.setdefault(dkey, set()).add(pkey)
    return OracleIndex(
        mode, max_blocks, max_nodes,
        {k: frozenset(v) for k, v in entries.items()},
    )


def load_index(path: str | os.PathLike) -> OracleIndex:
    with open(path, "r", encoding="utf-8") as fh:
        return loads_index(fh.read())


def build_index(
    max_blocks: int,
    mode: str,
    data: BlockData | None = None,
    max_nodes: int | None = None,
) -> OracleIndex:
    """Index every diagram gluable from at most ``max_blocks`` blocks.

    ``max_nodes`` bounds the abstract node supply (default: enough for fully
    disjoint placements, five nodes per block).
    """
    if data is None:
        data = load_block_data()
    if max_nodes is None:
        max_nodes = 5 * max_blocks
    entries: dict[str, set[str]] = {}
    for plan in enumerate_plans(data, mode, max_blocks, max_nodes):
        result = glue(data, plan)
        dkey, relabel = canonical_form(result.diagram)
        mapped = Plan(
            plan.mode,
            tuple(
                BlockInstance(i.tag, tuple(relabel[v] for v in i.nodes))
                for i in plan.instances
            ),
        )
        entries.setdefault(dkey, set()).add(plan_key(data, mapped))
    return OracleIndex(
        mode, max_blocks, max_nodes,
        {k: frozenset(v) for k, v in entries.items()},
    )


def sweep_nonunique(
    max_nodes: int,
    mode: str,
    data: BlockData | None = None,
) -> dict[str, int]:
    """Connected diagrams on at most ``max_nodes`` nodes with two or more
    inequivalent decompositions: canonical key -> decomposition count."""
    if data is None:
        data = load_block_data()
    index = build_index(max_blocks=max_nodes, mode=mode, data=data, max_nodes=max_nodes)
    result: dict[str, int] = {}
    for dkey in index.entries:
        diagram = from_canonical_key(dkey)
        if not diagram.is_connected():
            continue
        count = len(index.closed_plans(diagram))
        if count >= 2:
            result[dkey] = count
    return result


def random_plan(
    data: BlockData,
    mode: str,
    rng: Random,
    max_blocks: int = 5,
) -> Plan:
    """A uniformly haphazard (not uniform) gluable plan, for round-trip tests.

    Every draw is occupancy-legal by construction, hence glues successfully.
    """
    tags = data.tags_for_mode(mode)
    count = rng.randint(1, max_blocks)
    slots: list[list[str]] = []
    instances = []
    for _ in range(count):
        tag = rng.choice(tags)
        template = data.template(tag)
        chosen: list[int] = []
        for color in template.colors:
            options = []
            if color == WHITE:
                options = [
                    i for i, s in enumerate(slots) if s == [WHITE] and i not in chosen
                ]
            options.append(len(slots) + sum(1 for c in chosen if c >= len(slots)))
            node = rng.choice(options)
            chosen.append(node)
        while len(slots) < max(chosen) + 1:
            slots.append([])
        for color, node in zip(template.colors, chosen):
            slots[node].append(color)
        instances.append(BlockInstance(tag, tuple(chosen)))
    return Plan(mode, tuple(instances))
