"""Electrical-network views of capacitated trees.

A tree becomes a resistor network by reading each edge length as a
resistance.  Leaves of infinite capacity are grounded (they stand for
infinite continuations); leaves of finite capacity are left open, no current
exits there.  On that network this module computes exact effective
resistances, unit current flows, harmonic vertex profiles, escape
probabilities of the associated random walk, and bracketing intervals for
the branching number of a generated tree.

All network quantities are exact rationals; floats appear only in Monte
Carlo estimates and in the final bisection report.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .engine import WeightingRun
from .errors import AllOpenCircuit, Inconclusive, StructureError
from .sources import ExplicitSource, TreeSource, expand, level_profile, LambdaScaledSource
from .trees import INF, RootedTree

__all__ = [
    "ResistanceResult",
    "effective_resistance",
    "laplacian_voltage_gap",
    "FlowAssignment",
    "unit_current_flow",
    "HarmonicProfile",
    "harmonic_profile",
    "EquidistributionReport",
    "equidistribution_check",
    "WalkResult",
    "exact_escape_probability",
    "random_walk_escape",
    "BranchingReport",
    "branching_number_estimate",
]


def _as_source(source: TreeSource | RootedTree) -> TreeSource:
    return ExplicitSource(source) if isinstance(source, RootedTree) else source


def _truncate(source: TreeSource | RootedTree, depth: int) -> RootedTree:
    if depth < 1:
        raise StructureError("depth must be >= 1")
    return expand(_as_source(source), depth)


def _subtree_resistances(tree: RootedTree) -> list[Fraction | None]:
    """R[v] = resistance from v down to the grounded leaves of its subtree,
    None where the subtree has no grounded leaf (open, infinite R).

    Children have larger ids than parents, so one reverse sweep is a
    post-order traversal.
    """
    n = len(tree.parents)
    children = tree.children
    caps = tree.capacities
    lengths = tree.lengths
    r: list[Fraction | None] = [None] * n
    for v in range(n - 1, -1, -1):
        kids = children[v]
        if not kids:
            r[v] = Fraction(0) if caps[v] == INF else None
            continue
        g = Fraction(0)
        for c in kids:
            rc = r[c]
            if rc is None:
                continue
            g += 1 / (lengths[c] + rc)
        r[v] = 1 / g if g else None
    return r


@dataclass(frozen=True)
class ResistanceResult:
    """Effective resistance of a depth-truncated tree.

    per_depth holds the resistance at every truncation depth 1..depth; the
    values never decrease, each is a lower bound for any deeper truncation.
    """

    value: Fraction
    depth: int
    per_depth: tuple[Fraction, ...]


def effective_resistance(source: TreeSource | RootedTree, depth: int) -> ResistanceResult:
    """Exact resistance between the root and the grounded boundary of the
    depth-truncation.  Raises AllOpenCircuit when no leaf is grounded."""
    src = _as_source(source)
    per_depth: list[Fraction] = []
    for h in range(1, depth + 1):
        r = _subtree_resistances(expand(src, h))[0]
        if r is None:
            raise AllOpenCircuit(f"no infinite-capacity leaf at truncation depth {h}")
        per_depth.append(r)
    return ResistanceResult(per_depth[-1], depth, tuple(per_depth))


def laplacian_voltage_gap(tree: RootedTree) -> Fraction:
    """Voltage difference produced by a unit current from the root to the
    merged grounded leaves, computed from the full graph Laplacian by exact
    Gaussian elimination.  Equals the effective resistance of the tree.
    """
    n = len(tree.parents)
    grounded = [v for v in tree.leaves if tree.capacities[v] == INF]
    if not grounded:
        raise AllOpenCircuit("no infinite-capacity leaf to ground")
    sink = set(grounded)
    # Node indices: root is eliminated (potential 0), all grounded leaves
    # merge into one sink variable, every other vertex keeps its own.
    idx: dict[int, int] = {}
    for v in range(1, n):
        if v not in sink:
            idx[v] = len(idx)
    sink_col = len(idx)
    m = sink_col + 1

    def col(v: int) -> int | None:
        if v == 0:
            return None
        return sink_col if v in sink else idx[v]

    # Row for vertex w states: sum over neighbors u of c_uw (F(w) - F(u))
    # equals the external injection at w, which is -1 at the sink and 0 at
    # every other non-root vertex.
    a = [[Fraction(0)] * m for _ in range(m)]
    b = [Fraction(0)] * m
    b[sink_col] = Fraction(-1)
    for v in range(1, n):
        u = tree.parents[v]
        c = 1 / tree.lengths[v]
        for x, y in ((col(u), col(v)), (col(v), col(u))):
            if x is None:
                continue
            a[x][x] += c
            if y is not None:
                a[x][y] -= c

    # Gaussian elimination, first nonzero pivot (exact, no stability issue).
    for k in range(m):
        piv = next(r for r in range(k, m) if a[r][k])
        if piv != k:
            a[k], a[piv] = a[piv], a[k]
            b[k], b[piv] = b[piv], b[k]
        inv = 1 / a[k][k]
        for r in range(k + 1, m):
            if not a[r][k]:
                continue
            f = a[r][k] * inv
            for c in range(k, m):
                a[r][c] -= f * a[k][c]
            b[r] -= f * b[k]
    x = [Fraction(0)] * m
    for k in range(m - 1, -1, -1):
        s = b[k]
        for c in range(k + 1, m):
            s -= a[k][c] * x[c]
        x[k] = s / a[k][k]
    # Unit current flows root -> sink; with F(root) = 0 the sink potential is
    # -R, and the gap F(root) - F(sink) is the resistance.
    return -x[sink_col]


@dataclass(frozen=True)
class FlowAssignment:
    """Unit flow from the root to the grounded boundary.

    flows[v] is the current on the edge into v (0 on edges into open
    subtrees).  The energy sum(length * flow**2) equals the effective
    resistance.
    """

    tree: RootedTree
    flows: dict[int, Fraction]
    energy: Fraction

    def by_address(self) -> dict[tuple[int, ...], Fraction]:
        addr = self.tree.addresses
        return {addr[v]: f for v, f in self.flows.items()}


def unit_current_flow(source: TreeSource | RootedTree, depth: int) -> FlowAssignment:
    """Current divider on the depth-truncation: a vertex's inflow splits
    among its children proportionally to 1/(length + subtree resistance)."""
    tree = _truncate(source, depth)
    r = _subtree_resistances(tree)
    if r[0] is None:
        raise AllOpenCircuit("no infinite-capacity leaf to carry the flow")
    flows: dict[int, Fraction] = {}
    inflow: dict[int, Fraction] = {0: Fraction(1)}
    energy = Fraction(0)
    for v in range(len(tree.parents)):
        f = inflow.get(v, Fraction(0))
        for c in tree.children[v]:
            if r[c] is None or f == 0:
                flows[c] = Fraction(0)
                continue
            fc = f * r[v] / (tree.lengths[c] + r[c])
            flows[c] = fc
            inflow[c] = fc
            energy += tree.lengths[c] * fc * fc
    return FlowAssignment(tree, flows, energy)


@dataclass(frozen=True)
class HarmonicProfile:
    """Subtree resistances as a vertex profile, with the per-edge limit
    measure they induce.

    values[v] is the resistance of the subtree at v, 0 when that subtree has
    no grounded leaf.  edge_limits[v] is the product over the root path of
    parent_value / (value + edge length); it coincides with the unit current
    flow on the same truncation.
    """

    tree: RootedTree
    values: dict[int, Fraction]
    edge_limits: dict[int, Fraction]


def harmonic_profile(source: TreeSource | RootedTree, depth: int) -> HarmonicProfile:
    tree = _truncate(source, depth)
    r = _subtree_resistances(tree)
    if r[0] is None:
        raise AllOpenCircuit("no infinite-capacity leaf below the root")
    values = {v: (Fraction(0) if rv is None else rv) for v, rv in enumerate(r)}
    limits: dict[int, Fraction] = {}
    for v in range(1, len(tree.parents)):
        u = tree.parents[v]
        parent_limit = limits.get(u, Fraction(1))
        if r[v] is None:
            # open subtree: profile value 0 by convention, no mass flows in
            limits[v] = Fraction(0)
        else:
            limits[v] = parent_limit * values[u] / (values[v] + tree.lengths[v])
    return HarmonicProfile(tree, values, limits)


@dataclass(frozen=True)
class EquidistributionReport:
    """Comparison of normalized edge weights of a weighting run against the
    harmonic flow on the same truncation, keyed by child address."""

    depth: int
    steps: int
    rows: tuple[tuple[tuple[int, ...], Fraction, Fraction], ...]
    max_deviation: Fraction

    def max_deviation_float(self) -> float:
        return float(self.max_deviation)


def equidistribution_check(
    run: WeightingRun, flow: FlowAssignment, max_depth: int
) -> EquidistributionReport:
    """How far the empirical edge frequencies of a run sit from the flow.

    The run's normalized weight of the edge into v is the fraction of terms
    whose chosen vertex passed through v, so it is the empirical measure of
    the branch at v; the flow is its harmonic limit.
    """
    omega = run.normalized_weights_by_address()
    eta = flow.by_address()
    depths = flow.tree.depths
    addr_of = flow.tree.addresses
    rows = []
    worst = Fraction(0)
    for v in sorted(flow.flows, key=lambda v: addr_of[v]):
        if depths[v] > max_depth:
            continue
        address = addr_of[v]
        w = omega.get(address, Fraction(0))
        f = eta[address]
        dev = abs(w - f)
        worst = max(worst, dev)
        rows.append((address, w, f))
    return EquidistributionReport(max_depth, run.steps, tuple(rows), worst)


@dataclass(frozen=True)
class WalkResult:
    trials: int
    escaped: int
    timeouts: int
    seed: int

    @property
    def fraction(self) -> float:
        return self.escaped / self.trials


def exact_escape_probability(source: TreeSource | RootedTree, depth: int) -> Fraction:
    """Probability that the conductance-biased walk from the root hits the
    grounded boundary before returning to the root: 1 over (total root
    conductance times effective resistance)."""
    tree = _truncate(source, depth)
    r = _subtree_resistances(tree)
    if r[0] is None:
        raise AllOpenCircuit("no grounded boundary to escape to")
    c_root = sum(1 / tree.lengths[c] for c in tree.children[0])
    return 1 / (c_root * r[0])


def random_walk_escape(
    source: TreeSource | RootedTree,
    depth: int,
    trials: int,
    seed: int,
    max_steps: int = 10**6,
) -> WalkResult:
    """Monte Carlo estimate of the escape probability.

    Each trial walks from the root, stepping to a neighbor with probability
    proportional to the conductance (1/length) of the joining edge, until it
    either reaches a grounded leaf (escape) or re-enters the root (failure).
    Trials exceeding max_steps count as failures and are tallied.
    """
    tree = _truncate(source, depth)
    if not any(tree.capacities[v] == INF for v in tree.leaves):
        raise AllOpenCircuit("no grounded boundary to escape to")
    n = len(tree.parents)
    neighbors: list[list[int]] = [[] for _ in range(n)]
    cumulative: list[list[float]] = [[] for _ in range(n)]
    for v in range(1, n):
        u = tree.parents[v]
        c = 1.0 / float(tree.lengths[v])
        neighbors[u].append(v)
        neighbors[v].append(u)
        cumulative[u].append(c)
        cumulative[v].append(c)
    for v in range(n):
        total = 0.0
        acc = []
        for w in cumulative[v]:
            total += w
            acc.append(total)
        cumulative[v] = acc
    grounded = {v for v in tree.leaves if tree.capacities[v] == INF}

    rng = random.Random(seed)
    escaped = 0
    timeouts = 0
    for _ in range(trials):
        v = 0
        for _ in range(max_steps):
            acc = cumulative[v]
            u = rng.random() * acc[-1]
            lo, hi = 0, len(acc) - 1
            while lo < hi:
                mid = (lo + hi) // 2
                if acc[mid] > u:
                    hi = mid
                else:
                    lo = mid + 1
            v = neighbors[v][lo]
            if v == 0:
                break
            if v in grounded:
                escaped += 1
                break
        else:
            timeouts += 1
    return WalkResult(trials, escaped, timeouts, seed)


@dataclass(frozen=True)
class BranchingReport:
    """Bisection bracket for the branching number.

    Scaling the edge into each depth-k vertex to length lam**(k-1) makes the
    truncated resistances diverge for lam at or above the branching number
    and stay bounded below it; each evaluation row records (lam, verdict,
    last resistance reached).  Resistances here are floats, the one place
    outside Monte Carlo where the package trades exactness for depth.
    """

    low: Fraction
    high: Fraction
    status: str
    evaluations: tuple[tuple[Fraction, str, float], ...]


_DEFAULT_SCHEDULE = (16, 64, 256, 1024, 2048, 4096)


def _profile_resistances(counts, lam: float, schedule, threshold) -> list[float]:
    """Truncated resistances sum(lam**(k-1) / count_k) at the schedule depths.

    Floats, built incrementally so neither lam**k nor the integer level
    counts are ever converted to float on their own; accumulation stops once
    the sum passes the divergence threshold (every term is positive, deeper
    values are then reported at the reached level).
    """
    out = []
    acc = 0.0
    term = 1.0 / counts[0]
    h = 0
    for depth in schedule:
        while h < depth and acc <= threshold:
            if h > 0:
                term *= lam * (counts[h - 1] / counts[h])
            acc += term
            h += 1
        out.append(acc)
    return out


def _classify(base: TreeSource, lam: Fraction, schedule, res_tol: float, threshold: int):
    profile = level_profile(base, schedule[-1])
    if profile is not None:
        counts = [count for count, _ in profile]
        values = _profile_resistances(counts, float(lam), schedule, threshold)
    else:
        scaled = LambdaScaledSource(base, lam)
        values = [float(effective_resistance(scaled, h).value) for h in schedule]
    if values[-1] > threshold:
        return "divergent", values[-1]
    if len(values) >= 2 and values[-2] > 0 and values[-1] / values[-2] >= 1.8:
        return "divergent", values[-1]
    if len(values) >= 2 and values[-1] - values[-2] < res_tol:
        return "convergent", values[-1]
    return "inconclusive", values[-1]


def branching_number_estimate(
    source: TreeSource | RootedTree,
    lam_lo,
    lam_hi,
    depth_schedule=None,
    tol=Fraction(1, 20),
) -> BranchingReport:
    """Bracket the branching number of the generated tree within tol.

    At each candidate lam the lam-scaled truncated resistances over the depth
    schedule are classified as divergent (past a 10**6 threshold, or still
    nearly doubling between the last two depths) or convergent (Cauchy within
    tol/8 at the tail).  An endpoint already on the wrong side collapses the
    interval to that endpoint.  An unclassifiable candidate raises
    Inconclusive rather than guessing.
    """
    base = _as_source(source)
    lo, hi = Fraction(lam_lo), Fraction(lam_hi)
    if not 0 < lo < hi:
        raise StructureError("need 0 < lam_lo < lam_hi")
    schedule = tuple(depth_schedule) if depth_schedule else _DEFAULT_SCHEDULE
    tol = Fraction(tol)
    res_tol = float(tol) / 8
    threshold = 10**6
    evals: list[tuple[Fraction, str, float]] = []

    def classify(lam: Fraction) -> str:
        verdict, last = _classify(base, lam, schedule, res_tol, threshold)
        evals.append((lam, verdict, last))
        if verdict == "inconclusive":
            raise Inconclusive(f"resistance at lam={lam} neither settles nor diverges over the schedule")
        return verdict

    if classify(lo) == "divergent":
        return BranchingReport(lo, lo, "collapsed-low", tuple(evals))
    if classify(hi) == "convergent":
        return BranchingReport(hi, hi, "collapsed-high", tuple(evals))
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if classify(mid) == "convergent":
            lo = mid
        else:
            hi = mid
    return BranchingReport(lo, hi, "bracketed", tuple(evals))
