"""Building trees whose factorial windows hit prescribed values.

Input: a generation-indexed table of target values, strongly increasing
between generations (sufficiently biased).  Output: a rooted tree in which
every non-leaf vertex has the same number d of children and whose weighting
process visits each vertex for the first time at exactly the prescribed
value.  For d = 2 the full emitted sequence equals the flattened input; for
d >= 3 later visits of a vertex interleave inside a generation window, so
the roundtrip check compares first-visit values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .engine import OrderedTieBreak, factorials_weighting
from .errors import Mismatch, NotBiased, StructureError
from .trees import INF, RootedTree

__all__ = [
    "BiasedSequence",
    "OrderChoice",
    "is_sufficiently_biased",
    "realize_lengths",
    "RoundtripReport",
    "verify_roundtrip",
]


@dataclass(frozen=True)
class BiasedSequence:
    """Target first-visit values, grouped by generation.

    groups[0] must be d zeros (the root is selected d times, always at
    distance 0); groups[n] holds the d**n values for generation n in
    nondecreasing order.
    """

    d: int
    groups: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        if self.d < 2:
            raise StructureError("need branching degree d >= 2")
        if not self.groups:
            raise StructureError("need at least the generation-0 group")
        norm = []
        for n, group in enumerate(self.groups):
            vals = tuple(Fraction(v) for v in group)
            size = self.d if n == 0 else self.d**n
            if len(vals) != size:
                raise StructureError(f"generation {n} needs {size} values, got {len(vals)}")
            if any(v < 0 for v in vals):
                raise StructureError(f"generation {n} has a negative value")
            if n == 0 and any(v != 0 for v in vals):
                raise StructureError("generation 0 values must all be 0")
            if list(vals) != sorted(vals):
                raise StructureError(f"generation {n} values must be nondecreasing")
            if n >= 1 and vals[0] <= 0:
                raise StructureError(f"generation {n} values must be positive")
            norm.append(vals)
        object.__setattr__(self, "groups", tuple(norm))

    @property
    def depth(self) -> int:
        return len(self.groups) - 1

    def flattened(self) -> tuple[Fraction, ...]:
        return tuple(v for group in self.groups for v in group)


@dataclass(frozen=True)
class OrderChoice:
    """Per-generation processing orders.

    perms[n][i] is the within-generation slot (0-based, in fixed tree order)
    of the vertex processed i-th in generation n.  Missing generations use
    the identity.
    """

    perms: dict[int, tuple[int, ...]] = field(default_factory=dict)

    def slot_order(self, n: int, size: int) -> tuple[int, ...]:
        perm = self.perms.get(n)
        if perm is None:
            return tuple(range(size))
        if sorted(perm) != list(range(size)):
            raise StructureError(f"generation {n} order is not a permutation of 0..{size - 1}")
        return tuple(perm)


def is_sufficiently_biased(seq: BiasedSequence) -> tuple[bool, int | None]:
    """Whether each generation's first value dominates twice the d**(n+1)
    multiple of the sum of all previous generations' last values.  Returns
    the first failing generation index, or None."""
    d = seq.d
    running = Fraction(0)
    for n in range(len(seq.groups) - 1):
        running += seq.groups[n][-1]
        if seq.groups[n + 1][0] <= 2 * d ** (n + 1) * running:
            return False, n + 1
    return True, None


def _offsets(d: int, depth: int) -> list[int]:
    out = [0]
    for n in range(depth + 1):
        out.append(out[-1] + d**n)
    return out


def realize_lengths(seq: BiasedSequence, orders: OrderChoice | None = None) -> RootedTree:
    """Edge lengths of the realizing d-ary tree.

    Working down the generations in processing order, the length of the edge
    into the i-th vertex u of generation n+1 is its target value minus the
    weighted root-path contribution that the weighting process will have
    accumulated by u's first visit: ancestor edge j carries weight
    d**(n+1-j) + (number of earlier generation-(n+1) vertices below it).

    Each computed length must land in [first_target / 2, target]; a value
    outside that window means the input was not biased enough and raises
    NotBiased.  Integer targets yield integer lengths.
    """
    ok, bad = is_sufficiently_biased(seq)
    if not ok:
        raise NotBiased(f"generation {bad} first value fails the bias inequality")
    orders = orders or OrderChoice()
    d, depth = seq.d, seq.depth
    offsets = _offsets(d, depth)
    n_vertices = offsets[depth + 1]
    parents = [-1] * n_vertices
    lengths: list[Fraction | None] = [None] * n_vertices
    caps: list[int | float | None] = [None] * n_vertices
    for gen in range(1, depth + 1):
        for slot in range(d**gen):
            v = offsets[gen] + slot
            parents[v] = offsets[gen - 1] + slot // d
    for gen in range(1, depth + 1):
        order = orders.slot_order(gen, d**gen)
        group = seq.groups[gen]
        lo = group[0] / 2
        below: dict[int, int] = {}
        for i, slot in enumerate(order):
            v = offsets[gen] + slot
            target = group[i]
            acc = Fraction(0)
            u = parents[v]
            j = gen - 1
            while j >= 1:
                acc += (d ** (gen - j) + below.get(u, 0)) * lengths[u]
                u = parents[u]
                j -= 1
            value = target - acc
            if not lo <= value <= target:
                raise NotBiased(
                    f"generation {gen}, position {i + 1}: edge length {value} "
                    f"falls outside [{lo}, {target}]"
                )
            lengths[v] = value
            u = parents[v]
            while u != 0:
                below[u] = below.get(u, 0) + 1
                u = parents[u]
    for v in range(offsets[depth], n_vertices):
        caps[v] = INF
    return RootedTree(tuple(parents), tuple(lengths), tuple(caps))


@dataclass(frozen=True)
class RoundtripReport:
    """Outcome of re-running the weighting on a realized tree.

    first_visits[n] lists the realized first-visit values of generation n in
    processing order; they equal the input groups whenever this report is
    returned (a discrepancy raises Mismatch instead).  full_prefix_match
    additionally states whether the raw emitted sequence equals the
    flattened input, which holds exactly when d = 2.
    """

    tree: RootedTree
    first_visits: tuple[tuple[Fraction, ...], ...]
    full_prefix_match: bool
    coherent: bool
    steps_used: int


def verify_roundtrip(seq: BiasedSequence, orders: OrderChoice | None = None) -> RoundtripReport:
    """Realize the sequence, re-run the weighting with ties broken in
    processing order, and compare first-visit values generation by
    generation.  Raises Mismatch (with the flattened index) on any
    disagreement, and checks that selections never jump back a generation.
    """
    orders = orders or OrderChoice()
    tree = realize_lengths(seq, orders)
    d, depth = seq.d, seq.depth
    offsets = _offsets(d, depth)

    rank: dict[int, int] = {0: 0}
    for gen in range(1, depth + 1):
        for i, slot in enumerate(orders.slot_order(gen, d**gen)):
            rank[offsets[gen] + slot] = offsets[gen] + i

    n_max = 2 * d ** (depth + 1)
    run = factorials_weighting(tree, n_max, OrderedTieBreak(rank), record_trace=True)

    gen_of = tree.depths
    first_value: dict[int, Fraction] = {}
    coherent = True
    last_gen = 0
    for step in run.trace:
        g = gen_of[step.vertex]
        if g < last_gen:
            coherent = False
        last_gen = max(last_gen, g)
        if step.vertex not in first_value:
            first_value[step.vertex] = step.value

    flat_index = 0
    first_visits: list[tuple[Fraction, ...]] = []
    zeros = tuple(s.value for s in run.trace[: seq.d] if s.vertex == 0)
    if len(zeros) != seq.d or any(z != 0 for z in zeros):
        raise Mismatch("root window is not d zeros", index=0)
    first_visits.append(zeros)
    flat_index += seq.d
    for gen in range(1, depth + 1):
        got = []
        for i, slot in enumerate(orders.slot_order(gen, d**gen)):
            v = offsets[gen] + slot
            expected = seq.groups[gen][i]
            if v not in first_value:
                raise Mismatch(
                    f"generation {gen} vertex in position {i + 1} was never selected "
                    f"within {n_max} steps",
                    index=flat_index,
                )
            actual = first_value[v]
            if actual != expected:
                raise Mismatch(
                    f"generation {gen}, position {i + 1}: first visit at {actual}, "
                    f"wanted {expected}",
                    index=flat_index,
                )
            got.append(actual)
            flat_index += 1
        first_visits.append(tuple(got))

    flat = seq.flattened()
    values = run.sequence.values
    full_prefix = len(values) >= len(flat) and tuple(values[: len(flat)]) == flat
    if not coherent:
        raise Mismatch("a selection jumped back to an earlier generation", index=0)
    return RoundtripReport(tree, tuple(first_visits), full_prefix, coherent, run.steps)
