"""Gluing block instances into a diagram.

A *plan* is a multiset of block instances over integer node ids plus a mode.
Gluing follows four rules:

* **Rule 1 (occupancy).**  Every node id from ``0`` to the largest used must be
  covered.  A node may be covered by at most two instances; a node covered
  through a black template slot may not be covered by any other instance.  A
  node covered once through a white slot stays *white* (open); any other legal
  coverage makes it *black* (closed).
* **Rule 2 (unit arrows).**  Weight-1 template edges between the same pair of
  nodes add up with signs: opposite arrows cancel.
* **Rule 3 (heavy arrows).**  Weight-2 and weight-4 template edges accumulate
  separately from unit arrows, also with signs.  Unit and heavy contributions
  may never survive together on one pair.
* **Rule 4 (merging).**  Per node pair, the surviving net must be one of:
  nothing; a single unit arrow (weight 1); two aligned unit arrows (weight 4);
  a net heavy contribution of 2 (weight 2) or 4 (weight 4).

Weight-2 edges only exist in s-mode; in quiver mode only the six weight-1
(elementary) blocks may be used, so rule 3 is vacuous there.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .blocks import BLACK, WHITE, BlockData
from .diagram import Diagram, make_diagram, MODES, QUIVER


class GluingError(ValueError):
    """A plan violates a gluing rule; ``rule`` says which."""

    rule = 0


class BadInstance(GluingError):
    rule = 0


class OverlapViolation(GluingError):
    rule = 1


class CoverageViolation(GluingError):
    rule = 1


class WeightClash(GluingError):
    rule = 3


class MixedWeightClash(GluingError):
    rule = 3


@dataclass(frozen=True, order=True)
class BlockInstance:
    """One block placed on diagram nodes; ``nodes[i]`` hosts template label i."""

    tag: str
    nodes: tuple[int, ...]


@dataclass(frozen=True)
class Plan:
    mode: str
    instances: tuple[BlockInstance, ...]


@dataclass(frozen=True)
class Violation:
    rule: int
    message: str


@dataclass(frozen=True)
class GlueResult:
    diagram: Diagram
    colors: tuple[str, ...]  # per node: "white" (open) or "black" (closed)


def instance_edges(data: BlockData, inst: BlockInstance) -> list[tuple[int, int, int]]:
    """The weighted arrows an instance contributes, on diagram nodes."""
    template = data.template(inst.tag)
    index = {label: i for i, label in enumerate(template.labels)}
    return [(inst.nodes[index[f]], inst.nodes[index[t]], w) for f, t, w in template.edges]


def canonical_instance(data: BlockData, inst: BlockInstance) -> BlockInstance:
    """Normalize the assignment modulo the template's automorphisms."""
    return BlockInstance(inst.tag, data.template(inst.tag).canonical_assignment(inst.nodes))


def canonical_plan(data: BlockData, plan: Plan) -> Plan:
    return Plan(plan.mode, tuple(sorted(canonical_instance(data, i) for i in plan.instances)))


def plan_key(data: BlockData, plan: Plan) -> str:
    """Canonical string identity of a plan (mode + canonical instance multiset)."""
    canon = canonical_plan(data, plan)
    body = ";".join(f"{i.tag}:{','.join(map(str, i.nodes))}" for i in canon.instances)
    return f"{canon.mode}|{body}"


def parse_plan_key(key: str) -> Plan:
    """Rebuild a plan from a plan key (inverse of plan_key)."""
    try:
        mode, body = key.split("|")
        instances = []
        if body:
            for part in body.split(";"):
                tag, nodes_text = part.split(":")
                instances.append(
                    BlockInstance(tag, tuple(int(t) for t in nodes_text.split(",")))
                )
    except ValueError:
        raise BadInstance(f"malformed plan key {key!r}") from None
    return Plan(mode, tuple(instances))


def _check_instances(data: BlockData, plan: Plan) -> list[Violation]:
    violations = []
    if plan.mode not in MODES:
        violations.append(Violation(0, f"unknown mode {plan.mode!r}"))
        return violations
    allowed = set(data.tags_for_mode(plan.mode))
    for inst in plan.instances:
        if inst.tag not in data.templates:
            violations.append(Violation(0, f"unknown block tag {inst.tag!r}"))
            continue
        if inst.tag not in allowed:
            violations.append(
                Violation(0, f"block {inst.tag} is not usable in {plan.mode} mode")
            )
        template = data.template(inst.tag)
        if len(inst.nodes) != template.size:
            violations.append(
                Violation(
                    0,
                    f"block {inst.tag} takes {template.size} nodes, got {len(inst.nodes)}",
                )
            )
            continue
        if any(n < 0 for n in inst.nodes):
            violations.append(Violation(0, f"negative node id in {inst.tag} instance"))
        if len(set(inst.nodes)) != len(inst.nodes):
            violations.append(
                Violation(0, f"block {inst.tag} placed on repeated node {inst.nodes}")
            )
    return violations


def _check_occupancy(data: BlockData, plan: Plan) -> tuple[dict[int, list[str]], list[Violation]]:
    """Per-node slot colours used, plus rule-1 violations."""
    slots: dict[int, list[str]] = {}
    violations = []
    for inst in plan.instances:
        template = data.template(inst.tag)
        for label, node in zip(template.labels, inst.nodes):
            slots.setdefault(node, []).append(template.color(label))
    for node, used in sorted(slots.items()):
        if len(used) > 2:
            violations.append(Violation(1, f"node {node} is covered by {len(used)} blocks"))
        elif len(used) == 2 and BLACK in used:
            violations.append(Violation(1, f"node {node} is shared through a black slot"))
    if slots:
        missing = sorted(set(range(max(slots) + 1)) - set(slots))
        if missing:
            violations.append(Violation(1, f"uncovered node ids: {missing}"))
    return slots, violations


def _accumulate(data: BlockData, plan: Plan) -> dict[tuple[int, int], list[int]]:
    """Signed (unit, heavy) nets per unordered node pair, keyed low-to-high."""
    nets: dict[tuple[int, int], list[int]] = {}
    for inst in plan.instances:
        for a, b, w in instance_edges(data, inst):
            key, sign = ((a, b), 1) if a < b else ((b, a), -1)
            net = nets.setdefault(key, [0, 0])
            if w == 1:
                net[0] += sign
            else:
                net[1] += sign * w
    return nets


_RESIDUALS = {
    (0, 0): 0,  # cancelled
    (1, 0): 1,
    (2, 0): 4,
    (0, 2): 2,
    (0, 4): 4,
}


def _resolve_pair(unit: int, heavy: int) -> tuple[int, int]:
    """Map a signed (unit, heavy) net to (direction, weight).

    Direction is +1 for low->high, -1 for high->low, 0 for no edge.
    Raises WeightClash/MixedWeightClash for illegal nets.
    """
    if unit and heavy:
        # Unreachable for well-occupied plans: every heavy template edge has a
        # black endpoint, so its pair can never also receive a unit arrow.
        raise MixedWeightClash(f"unit net {unit} and heavy net {heavy} on one pair")
    sign = 1 if (unit + heavy) > 0 else -1
    weight = _RESIDUALS.get((abs(unit), abs(heavy)))
    if weight is None:
        raise WeightClash(f"illegal net ({unit}, {heavy}) on one pair")
    return (0, 0) if weight == 0 else (sign, weight)


def validate_plan(data: BlockData, plan: Plan) -> list[Violation]:
    """All rule violations of a plan (empty list means the plan glues)."""
    violations = _check_instances(data, plan)
    if violations:
        return violations
    slots, occ_violations = _check_occupancy(data, plan)
    violations.extend(occ_violations)
    for (a, b), (unit, heavy) in sorted(_accumulate(data, plan).items()):
        try:
            _resolve_pair(unit, heavy)
        except GluingError as exc:
            violations.append(Violation(exc.rule, f"pair ({a}, {b}): {exc}"))
    return violations


def glue(data: BlockData, plan: Plan) -> GlueResult:
    """Glue a plan into a diagram, or raise a GluingError.

    The resulting diagram's nodes are exactly the covered ids ``0..max``; a
    node's colour is white when one more block could still attach there.
    """
    for v in _check_instances(data, plan):
        raise BadInstance(v.message)
    if not plan.instances:
        raise CoverageViolation("empty plan covers no nodes")
    slots, occ_violations = _check_occupancy(data, plan)
    for v in occ_violations:
        if "shared through a black" in v.message or "covered by" in v.message:
            raise OverlapViolation(v.message)
        raise CoverageViolation(v.message)

    edges = []
    for (a, b), (unit, heavy) in sorted(_accumulate(data, plan).items()):
        direction, weight = _resolve_pair(unit, heavy)
        if direction > 0:
            edges.append((a, b, weight))
        elif direction < 0:
            edges.append((b, a, weight))

    node_count = max(slots) + 1
    colors = tuple(
        WHITE if slots[n] == [WHITE] else BLACK for n in range(node_count)
    )
    return GlueResult(make_diagram(node_count, edges, mode=plan.mode), colors)


# --- plan text format --------------------------------------------------------


def parse_plan(text: str) -> Plan:
    """Parse the plan text format::

        mode quiver
        block Spike 0 1
        block Triangle 1 2 3

    Node ids follow the block's node-label declaration order.
    """
    mode = None
    instances = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if tokens[0] == "mode":
            if len(tokens) != 2 or tokens[1] not in MODES:
                raise BadInstance(f"plan line {lineno}: expected 'mode <quiver|s>'")
            if mode is not None:
                raise BadInstance(f"plan line {lineno}: duplicate mode line")
            mode = tokens[1]
        elif tokens[0] == "block":
            if len(tokens) < 3:
                raise BadInstance(f"plan line {lineno}: expected 'block <tag> <node>...'")
            try:
                nodes = tuple(int(t) for t in tokens[2:])
            except ValueError:
                raise BadInstance(f"plan line {lineno}: node ids must be integers") from None
            instances.append(BlockInstance(tokens[1], nodes))
        else:
            raise BadInstance(f"plan line {lineno}: unknown keyword {tokens[0]!r}")
    if mode is None:
        raise BadInstance("plan is missing a 'mode' line")
    return Plan(mode, tuple(instances))


def serialize_plan(plan: Plan) -> str:
    lines = [f"mode {plan.mode}"]
    lines.extend(f"block {i.tag} {' '.join(map(str, i.nodes))}" for i in plan.instances)
    return "\n".join(lines) + "\n"
