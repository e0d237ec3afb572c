"""Inverting biased sequences into length functions on the regular tree."""

from fractions import Fraction

import pytest

from treefactorials import (
    BiasedSequence,
    Mismatch,
    NotBiased,
    OrderChoice,
    StructureError,
    canonical_form,
    canonical_skeleton,
    is_sufficiently_biased,
    realize_lengths,
    verify_roundtrip,
)

F = Fraction


def staircase(d: int, depth: int) -> BiasedSequence:
    """Biased sequence whose within-generation step beats every ancestor-path
    shift: step > sum of previous generations' last values, base large enough
    that no second visit interleaves with the first sweep."""
    groups = [(0,) * d]
    running = 0
    for n in range(1, depth + 1):
        running += groups[-1][-1]
        step = running + 1
        base = 4 * d**n * (running + d**n * step) + d**n
        groups.append(tuple(base + j * step for j in range(d**n)))
    return BiasedSequence(d, tuple(groups))


TWINS = BiasedSequence(2, ((0, 0), (100, 130), (3000, 3400, 3900, 4500)))


class TestBiasedSequence:
    def test_group_shapes_enforced(self):
        with pytest.raises(StructureError):
            BiasedSequence(2, ((0, 0), (10,)))  # generation 1 needs d terms
        with pytest.raises(StructureError):
            BiasedSequence(2, ((0,), (10, 12)))
        with pytest.raises(StructureError):
            BiasedSequence(1, ((0,),))

    def test_groups_must_be_sorted(self):
        with pytest.raises(StructureError):
            BiasedSequence(2, ((0, 0), (12, 10)))

    def test_zero_terms_past_generation_zero_rejected(self):
        with pytest.raises(StructureError):
            BiasedSequence(2, ((0, 0), (0, 0)))


class TestBiasCheck:
    def test_fast_growth_is_biased(self):
        seq = BiasedSequence(2, ((0, 0), (100, 100), (100000, 100001, 100002, 100003)))
        assert is_sufficiently_biased(seq) == (True, None)

    def test_zero_sum_needs_only_positivity(self):
        assert is_sufficiently_biased(BiasedSequence(2, ((0, 0), (1, 1)))) == (True, None)

    def test_constant_positive_fails_at_next_generation(self):
        seq = BiasedSequence(2, ((0, 0), (5, 5), (5, 5, 5, 5)))
        assert is_sufficiently_biased(seq) == (False, 2)

    def test_threshold_uses_generation_largest_term(self):
        # d=3: the running sum takes each generation's last entry (index d^i),
        # so a huge last entry in generation 1 defeats a head of 10000
        seq = BiasedSequence(3, ((0, 0, 0), (10, 11, 1000),
                                 tuple(range(10000, 10009))))
        assert is_sufficiently_biased(seq) == (False, 2)

    def test_staircases_are_biased(self):
        for d in (2, 3):
            assert is_sufficiently_biased(staircase(d, 3)) == (True, None)


class TestRealizeLengths:
    def test_generation_one_copies_values(self):
        t = realize_lengths(BiasedSequence(2, ((0, 0), (10, 12))))
        assert t.lengths[1:] == (10, 12)
        assert all(c == float("inf") for c in t.capacities[1:])

    def test_first_processed_grandchild_formula(self):
        t = realize_lengths(TWINS)
        # head slot sits below the first generation-1 vertex; no earlier
        # generation-2 vertex exists, so l = a - d * l(parent edge)
        assert t.lengths[3] == 3000 - 2 * 100

    def test_integer_inputs_give_integer_lengths(self):
        for d in (2, 3):
            t = realize_lengths(staircase(d, 3))
            assert all(x.denominator == 1 for x in t.lengths[1:])

    def test_length_bounds(self):
        seq = staircase(2, 3)
        t = realize_lengths(seq)
        flat_targets = {}
        gen_start = {1: 1, 2: 3, 3: 7}
        for gen in (1, 2, 3):
            group = seq.groups[gen]
            for k, v in enumerate(range(gen_start[gen], gen_start[gen] + len(group))):
                flat_targets[v] = (group[0], group[k])
        for v, (head, target) in flat_targets.items():
            assert F(head, 2) <= t.lengths[v] <= target

    def test_not_biased_rejected(self):
        seq = BiasedSequence(2, ((0, 0), (10, 12), (30, 31, 32, 33)))
        with pytest.raises(NotBiased):
            realize_lengths(seq)

    def test_order_choice_must_be_a_permutation(self):
        with pytest.raises(StructureError):
            verify_roundtrip(TWINS, OrderChoice({2: (0, 0, 1, 3)}))


class TestRoundtrip:
    def test_depth_one(self):
        rep = verify_roundtrip(BiasedSequence(2, ((0, 0), (10, 12))))
        assert rep.full_prefix_match and rep.coherent

    @pytest.mark.parametrize("depth", [1, 2, 3])
    def test_binary_staircase_full_prefix(self, depth):
        rep = verify_roundtrip(staircase(2, depth))
        assert rep.full_prefix_match
        assert rep.coherent

    @pytest.mark.parametrize("depth", [1, 2, 3])
    def test_ternary_staircase_first_visits(self, depth):
        rep = verify_roundtrip(staircase(3, depth))
        assert rep.coherent
        # d=2 is special: beyond it the emitted sequence interleaves repeat
        # visits, so only the first-visit schedule is pinned
        if depth == 1:
            assert rep.full_prefix_match

    def test_fractional_targets(self):
        groups = ((0, 0), (F(201, 2), F(267, 2)), (3000, 3400, 3900, 4500))
        rep = verify_roundtrip(BiasedSequence(2, groups))
        assert rep.coherent

    def test_tight_spacing_detected_as_mismatch(self):
        # Passes the bias inequality, but the within-generation spacing is
        # smaller than the ancestor-path shifts, so later slots get shorter
        # edges and are visited first. The check must refuse, not paper over.
        seq = BiasedSequence(2, ((0, 0), (100, 103), (1024, 1027, 1030, 1033)))
        assert is_sufficiently_biased(seq) == (True, None)
        with pytest.raises(Mismatch):
            verify_roundtrip(seq)


class TestTwins:
    def test_two_orders_roundtrip_to_different_trees(self):
        a = verify_roundtrip(TWINS)
        b = verify_roundtrip(TWINS, OrderChoice({2: (0, 2, 1, 3)}))
        assert a.full_prefix_match and b.full_prefix_match
        ka = canonical_form(canonical_skeleton(a.tree))
        kb = canonical_form(canonical_skeleton(b.tree))
        assert ka != kb

    def test_same_order_is_deterministic(self):
        assert realize_lengths(TWINS) == realize_lengths(TWINS)
