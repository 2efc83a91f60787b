import math
import os
import random
import statistics
import time
import unittest
from unittest import mock

from django.test import SimpleTestCase

from phylodist.classic_metrics import rf
from phylodist.conf import DEFAULT_TOLERANCES, Tolerances
from phylodist.exceptions import (
    DegenerateCover,
    DomainError,
    LabelSetMismatch,
    NotShared,
)
from phylodist.geodesic import (
    Support,
    SupportPair,
    check_p1,
    check_p2,
    common_edge_split,
    cone_path_length,
    extension_problem,
    geodesic_distance,
    gtp_disjoint,
    refine_support,
    support_length,
)
from phylodist.splits import Split, SplitVector, encode, split_index
from phylodist.tree_model import clades, parse_newick, random_binary_tree, tree_from_clusters

CHERRY_SWAP = ("((1,2),3);", "((1,3),2);")
DOUBLE_CROSSING = ("((1,2),(3,4));", "((1,3),(2,4));")
EXTENSION_PAIR = ("(((1,2):1,3):3,4);", "(1,((2,3):3,4):1);")


def pair(texts):
    return tuple(parse_newick(t) for t in texts)


def random_pairs(seed, count, sizes=(4, 5, 6)):
    rng = random.Random(seed)
    for _ in range(count):
        n = rng.choice(sizes)
        yield random_binary_tree(n, rng), random_binary_tree(n, rng)


def edges_of(support, side):
    return frozenset(e for p in support for e in getattr(p, side))


def reweighted(t, rng):
    """Same topology, fresh internal weights"""
    return tree_from_clusters(t.n, {c: 1.0 - rng.random() for c in clades(t)})


class FigureTests(SimpleTestCase):

    def test_single_crossing(self):
        a, b = pair(CHERRY_SWAP)
        self.assertEqual(rf(a, b).value, 2)
        self.assertAlmostEqual(geodesic_distance(a, b).distance, 2.0, delta=1e-12)

    def test_double_crossing(self):
        a, b = pair(DOUBLE_CROSSING)
        self.assertEqual(rf(a, b).value, 4)
        self.assertAlmostEqual(geodesic_distance(a, b).distance, 2 * math.sqrt(2), delta=1e-9)

    def test_extension_splits_the_support(self):
        a, b = pair(EXTENSION_PAIR)
        result = geodesic_distance(a, b)
        self.assertAlmostEqual(result.distance, 4 * math.sqrt(2), delta=1e-12)
        (support,) = result.supports
        self.assertEqual(len(support), 2)
        self.assertTrue(check_p1(support))
        self.assertTrue(check_p2(support))
        self.assertEqual(
            [[s.cluster for s, _ in p.a] for p in support],
            [[frozenset({1, 2})], [frozenset({1, 2, 3})]],
        )


class ExtensionProblemTests(SimpleTestCase):

    def test_complete_bipartite_pair_has_no_extension(self):
        a, b = pair(DOUBLE_CROSSING)
        support_pair = SupportPair(tuple(encode(a).splits().items()), tuple(encode(b).splits().items()))
        self.assertIsNone(extension_problem(support_pair))

    def test_extension_blocks(self):
        a, b = pair(EXTENSION_PAIR)
        support_pair = SupportPair(tuple(encode(a).splits().items()), tuple(encode(b).splits().items()))
        blocks = extension_problem(support_pair)
        self.assertAlmostEqual(blocks.cover_weight, 0.2, delta=1e-12)
        self.assertEqual([s.cluster for s, _ in blocks.c1], [frozenset({1, 2})])
        self.assertEqual([s.cluster for s, _ in blocks.d1], [frozenset({2, 3})])

    def test_unresolved_tree_gives_degenerate_cover(self):
        a, b = parse_newick("((1,2),3,4);"), parse_newick("(((3,4),1),2);")
        with self.assertRaises(DegenerateCover) as cm:
            geodesic_distance(a, b)
        self.assertEqual(cm.exception.split, Split.from_block({3, 4}, 4))

    def test_ratio_check(self):
        s1, s2 = Split.from_block({1, 2}, 4), Split.from_block({1, 3}, 4)
        rising = Support((SupportPair(((s1, 1.0),), ((s2, 2.0),)), SupportPair(((s1, 2.0),), ((s2, 1.0),))))
        self.assertTrue(check_p2(rising))
        self.assertFalse(check_p2(Support(tuple(reversed(rising.pairs)))))


class RefinementTests(SimpleTestCase):

    def test_support_length(self):
        s, t = Split.from_block({1, 2}, 4), Split.from_block({1, 3}, 4)
        unit = SupportPair(((s, 1.0),), ((t, 1.0),))
        self.assertEqual(support_length(Support((unit,))), 2.0)
        self.assertAlmostEqual(support_length(Support((unit, unit))), 2 * math.sqrt(2), delta=1e-12)
        self.assertAlmostEqual(support_length(Support((unit, unit, unit))), 2 * math.sqrt(3), delta=1e-12)

    def test_every_refinement_in_random_runs(self):
        refinements = []

        def recording(support, i, blocks, tolerances=DEFAULT_TOLERANCES):
            refined = refine_support(support, i, blocks, tolerances)
            refinements.append((support, refined))
            return refined

        with mock.patch("phylodist.geodesic.refine_support", side_effect=recording):
            for a, b in random_pairs(13, 200):
                geodesic_distance(a, b)

        self.assertGreater(len(refinements), 0)
        for case, (before, after) in enumerate(refinements):
            with self.subTest(case=case):
                self.assertEqual(len(after), len(before) + 1)
                self.assertEqual(edges_of(before, "a"), edges_of(after, "a"))
                self.assertEqual(edges_of(before, "b"), edges_of(after, "b"))
                self.assertTrue(check_p1(after))
                self.assertTrue(check_p2(after))


class CommonEdgeTests(SimpleTestCase):

    def test_split_at_shared_cluster(self):
        a = parse_newick("(((1,2):2,3):1,(4,5):1);")
        b = parse_newick("(((1,3):1,2):4,(4,5):1);")
        shared = Split.from_block({1, 2, 3}, 5)
        parts = common_edge_split(a, b, shared)
        self.assertEqual(parts.t1_c.n, 3)
        self.assertEqual(parts.t1_d.n, 3)
        self.assertEqual(parts.c_labels[1:], (frozenset({1}), frozenset({2}), frozenset({3})))
        self.assertEqual(parts.d_labels[1], frozenset({1, 2, 3}))
        self.assertEqual(len(parts.t1_c), 1)
        self.assertEqual(len(parts.t1_d), 1)

    def test_not_shared(self):
        a, b = pair(CHERRY_SWAP)
        with self.assertRaises(NotShared):
            common_edge_split(a, b, Split.from_block({1, 2}, 3))

    def test_shared_split_contributes_weight_difference(self):
        a = parse_newick("(((1,2):2,3):1,(4,5):1);")
        b = parse_newick("(((1,2):1,3):4,(4,5):1);")
        result = geodesic_distance(a, b)
        self.assertAlmostEqual(result.distance, math.sqrt(1 + 9), delta=1e-12)
        shared = [c.shared_split for c in result.components if c.shared_split is not None]
        self.assertEqual(len(shared), 3)

    def test_trace_uses_split_indices(self):
        a, b = pair(CHERRY_SWAP)
        trace = geodesic_distance(a, b).as_dict()
        (component,) = trace["components"]
        self.assertEqual(component["support"], [{"A": [3], "B": [2]}])
        self.assertEqual(split_index(Split.from_block({1, 3}, 3)), 2)


class DomainTests(SimpleTestCase):

    def test_disjoint_engine_rejects_shared_splits(self):
        v = SplitVector(4, {5: 1.0})
        with self.assertRaises(DomainError):
            gtp_disjoint(v, v)

    def test_label_sets_must_match(self):
        with self.assertRaises(LabelSetMismatch):
            geodesic_distance(parse_newick("((1,2),3);"), parse_newick("((1,2),(3,4));"))

    def test_one_sided_problem_is_the_norm(self):
        star = SplitVector(4, {})
        v = SplitVector(4, {5: 3.0, 10: 4.0})
        self.assertAlmostEqual(gtp_disjoint(star, v).distance, 5.0, delta=1e-15)

    def test_leaf_edges_are_noted_not_measured(self):
        a = parse_newick("((1:1,2:1):1,3:1);")
        b = parse_newick("((1:3,2:1):1,3:1);")
        result = geodesic_distance(a, b)
        self.assertEqual(result.distance, 0.0)
        self.assertEqual(len(result.notes), 1)

    def test_tolerances_are_passed_through(self):
        a, b = pair(EXTENSION_PAIR)
        loose = Tolerances(cover=0.9)
        # a cover of weight 0.2 now counts as no extension
        self.assertAlmostEqual(geodesic_distance(a, b, loose).distance, math.sqrt(40), delta=1e-12)


class MetricPropertyTests(SimpleTestCase):

    def test_identity(self):
        for a, _ in random_pairs(1, 50):
            self.assertEqual(geodesic_distance(a, a).distance, 0.0)

    def test_symmetry(self):
        for case, (a, b) in enumerate(random_pairs(2, 200)):
            with self.subTest(case=case):
                self.assertAlmostEqual(
                    geodesic_distance(a, b).distance, geodesic_distance(b, a).distance, delta=1e-12
                )

    def test_triangle_inequality(self):
        rng = random.Random(3)
        for case in range(200):
            n = rng.choice((4, 5, 6))
            a, b, c = (random_binary_tree(n, rng) for _ in range(3))
            with self.subTest(case=case):
                ab = geodesic_distance(a, b).distance
                bc = geodesic_distance(b, c).distance
                ac = geodesic_distance(a, c).distance
                self.assertLessEqual(ac, ab + bc + 1e-9)

    def test_cone_and_norm_bounds(self):
        for case, (a, b) in enumerate(random_pairs(4, 200)):
            with self.subTest(case=case):
                d = geodesic_distance(a, b).distance
                va, vb = encode(a), encode(b)
                self.assertLessEqual(d, cone_path_length(va, vb) + 1e-12)
                self.assertGreaterEqual(d, abs(va.norm - vb.norm) - 1e-12)

    def test_same_orthant_is_euclidean(self):
        rng = random.Random(5)
        for case in range(50):
            a = random_binary_tree(rng.choice((4, 5, 6)), rng)
            b = reweighted(a, rng)
            wa, wb = a.edge_weights(), b.edge_weights()
            expected = math.sqrt(math.fsum((wa[c] - wb[c]) ** 2 for c in clades(a)))
            with self.subTest(case=case):
                self.assertAlmostEqual(geodesic_distance(a, b).distance, expected, delta=1e-12)


@unittest.skipIf(os.environ.get("PHYLODIST_SKIP_SLOW") == "1", "slow timing checks disabled")
class ScalingTests(SimpleTestCase):

    def _median_runtime(self, n, trials, seed):
        rng = random.Random(seed)
        times = []
        for _ in range(trials):
            a, b = random_binary_tree(n, rng), random_binary_tree(n, rng)
            start = time.perf_counter()
            geodesic_distance(a, b)
            times.append(time.perf_counter() - start)
        return statistics.median(times)

    def test_hundred_leaves(self):
        rng = random.Random(6)
        a, b = random_binary_tree(100, rng), random_binary_tree(100, rng)
        start = time.perf_counter()
        geodesic_distance(a, b)
        self.assertLess(time.perf_counter() - start, 5.0)

    def test_doubling_leaves(self):
        small = self._median_runtime(50, 10, 7)
        large = self._median_runtime(100, 10, 8)
        self.assertLessEqual(large, 20 * max(small, 1e-3))
