import os
import random
import unittest

from django.test import SimpleTestCase

from phylodist.exceptions import (
    LabelError,
    LeafEdgeError,
    NewickSyntaxError,
    ShapeError,
    SizeError,
    TopologyCountOverflow,
    UnknownLabel,
)
from phylodist.tree_model import (
    clades,
    contract,
    count_binary_topologies,
    enumerate_binary_topologies,
    leaf_path_length,
    parse_newick,
    path_length_matrix,
    random_binary_tree,
    relabel,
    restrict,
    same_topology,
    serialize_newick,
    tree_from_clusters,
    weight_identical,
)


def edge_of_cluster(t, cluster):
    (v,) = [v for v in t.preorder[1:] if t.cluster(v) == frozenset(cluster)]
    return t.parent[v], v


class NewickParsingTests(SimpleTestCase):

    def test_weighted_tree(self):
        t = parse_newick("((1:0.5,2:0.5):1,3:2);")
        self.assertEqual(t.n, 3)
        self.assertEqual(t.vertex_count, 5)
        self.assertEqual(t.weight[t.leaf(3)], 2.0)
        self.assertEqual(clades(t), {frozenset({1, 2})})
        self.assertEqual(str(t), "((1:0.5,2:0.5):1,3:2);")

    def test_missing_lengths_default_to_one(self):
        t = parse_newick("((1,2),3);")
        self.assertEqual(t.weight[1:], (1.0,) * 4)

    def test_root_length_is_discarded(self):
        t = parse_newick("((1,2),3):5;")
        self.assertEqual(t.weight[0], 0.0)

    def test_bytes_input(self):
        self.assertEqual(parse_newick(b"(1,2);").n, 2)

    def test_serialization_orders_children_by_lowest_label(self):
        t = parse_newick("(3,(2,1));")
        self.assertEqual(serialize_newick(t), b"((1:1,2:1):1,3:1);")

    def test_syntax_errors(self):
        for text in ["((1,2),3)", "(a,b);", "((1,2),3));", "(1,2);(1,2);", "(1:,2);", ";"]:
            with self.subTest(text=text):
                with self.assertRaises(NewickSyntaxError):
                    parse_newick(text)

    def test_syntax_error_reports_position(self):
        with self.assertRaises(NewickSyntaxError) as cm:
            parse_newick("(1,x);")
        self.assertEqual(cm.exception.position, 3)

    def test_label_errors(self):
        for text in ["((1,2),2);", "(1,3);", "((0,1),2);"]:
            with self.subTest(text=text):
                with self.assertRaises(LabelError):
                    parse_newick(text)

    def test_shape_errors(self):
        for text in ["((1),2);", "(1:-1,2);", "1;"]:
            with self.subTest(text=text):
                with self.assertRaises(ShapeError):
                    parse_newick(text)

    def test_unknown_label(self):
        with self.assertRaises(UnknownLabel):
            parse_newick("((1,2),3);").leaf(7)


class TopologyCountTests(SimpleTestCase):

    def test_double_factorial(self):
        self.assertEqual(count_binary_topologies(3), 3)
        self.assertEqual(count_binary_topologies(4), 15)
        self.assertEqual(count_binary_topologies(5), 105)
        self.assertEqual(count_binary_topologies(18), 6332659870762850625)

    def test_overflow(self):
        with self.assertRaises(TopologyCountOverflow):
            count_binary_topologies(19)

    def test_enumeration_matches_count(self):
        for n in range(2, 8):
            with self.subTest(n=n):
                trees = enumerate_binary_topologies(n)
                self.assertEqual(len(trees), count_binary_topologies(n))
                self.assertEqual(len({clades(t) for t in trees}), len(trees))
                self.assertTrue(all(t.is_binary for t in trees))

    def test_enumeration_limit(self):
        with self.assertRaises(SizeError):
            enumerate_binary_topologies(9)


@unittest.skipIf(os.environ.get("PHYLODIST_SKIP_SLOW") == "1", "slow enumeration disabled")
class LargeEnumerationTests(SimpleTestCase):

    def test_eight_leaves(self):
        trees = enumerate_binary_topologies(8)
        self.assertEqual(len(trees), 135135)
        self.assertEqual(len({clades(t) for t in trees}), 135135)
        self.assertTrue(all(t.is_binary for t in trees))


class TreeOperationTests(SimpleTestCase):

    def test_path_lengths(self):
        t = parse_newick("((1:1,2:2):3,3:4);")
        d = path_length_matrix(t)
        self.assertEqual(d[1, 2], 3.0)
        self.assertEqual(d[1, 3], 8.0)
        self.assertEqual(d[3, 1], 8.0)
        self.assertEqual(path_length_matrix(t, weighted=False)[1, 3], 3.0)
        self.assertEqual(leaf_path_length(t, 2, 3), 9.0)
        self.assertEqual(leaf_path_length(t, 2, 3, weighted=False), 3)

    def test_lca(self):
        t = parse_newick("(((1,2),3),4);")
        self.assertEqual(t.cluster(t.lca(t.leaf(1), t.leaf(3))), frozenset({1, 2, 3}))
        self.assertEqual(t.lca(t.leaf(1), t.leaf(4)), 0)

    def test_contract(self):
        t = parse_newick("((1,2),3);")
        star = contract(t, edge_of_cluster(t, {1, 2}))
        self.assertEqual(str(star), "(1:1,2:1,3:1);")
        with self.assertRaises(LeafEdgeError):
            contract(t, (0, t.leaf(3)))

    def test_restrict(self):
        t = parse_newick("(((1,2),3),(4,5));")
        self.assertEqual(str(restrict(t, {1, 3, 4})), "((1:2,2:1):1,3:2);")
        with self.assertRaises(SizeError):
            restrict(t, {2})
        with self.assertRaises(UnknownLabel):
            restrict(t, {1, 9})

    def test_relabel(self):
        t = parse_newick("((1,3),2);")
        self.assertEqual(clades(relabel(t, {1: 2, 2: 1, 3: 3})), {frozenset({2, 3})})
        with self.assertRaises(LabelError):
            relabel(t, {1: 1, 2: 1, 3: 3})

    def test_tree_from_clusters(self):
        t = tree_from_clusters(4, {frozenset({1, 2}): 0.5, frozenset({1, 2, 3}): 2.0}, leaf_weight=3.0)
        self.assertEqual(str(t), "(((1:3,2:3):0.5,3:3):2,4:3);")
        with self.assertRaises(ShapeError):
            tree_from_clusters(4, {frozenset({1, 2}): 1.0, frozenset({2, 3}): 1.0})

    def test_weight_identity(self):
        a = parse_newick("((1:1,2:1):2,3:1);")
        b = parse_newick("(3:1,(2:1,1:1):2);")
        c = parse_newick("((1:1,2:1):3,3:1);")
        self.assertTrue(weight_identical(a, b))
        self.assertFalse(weight_identical(a, c))
        self.assertTrue(same_topology(a, c))


class RandomTreeTests(SimpleTestCase):

    def test_random_trees_are_binary_and_weighted(self):
        rng = random.Random(7)
        for n in range(2, 12):
            with self.subTest(n=n):
                t = random_binary_tree(n, rng)
                self.assertEqual(t.n, n)
                self.assertTrue(t.is_binary)
                self.assertTrue(all(0 < w <= 1 for w in t.weight[1:]))

    def test_seeded_generation_is_reproducible(self):
        first = [str(random_binary_tree(8, random.Random(3))) for _ in range(2)]
        self.assertEqual(first[0], first[1])

    def test_every_topology_is_reachable(self):
        rng = random.Random(11)
        seen = {clades(random_binary_tree(4, rng)) for _ in range(600)}
        self.assertEqual(len(seen), 15)
