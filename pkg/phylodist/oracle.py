"""
Brute-force reference implementations used to check the engines.

Nothing here imports the flow, geodesic or metric modules: compatibility,
covers, cuts and supports are recomputed from their definitions by
exhaustive enumeration.
"""
import logging
import math
from itertools import combinations, product

from .exceptions import DomainError, SizeError

logger = logging.getLogger(__name__)

MAX_COVER_VERTICES = 20
MAX_SUPPORT_SPLITS = 5
MAX_RF_LEAVES = 10
RATIO_SLACK = 1e-12


def _vertices(g):
    return [("L", i, v.weight) for i, v in enumerate(g.left)] + [("R", j, v.weight) for j, v in enumerate(g.right)]


def brute_min_cover(g):
    """
    Lightest vertex set touching every arc, by trying all subsets. Ties go
    to the lexicographically first set of vertex positions. Returns
    (left indices, right indices, weight).
    """
    vertices = _vertices(g)
    if len(vertices) > MAX_COVER_VERTICES:
        raise SizeError(f"exhaustive cover limited to {MAX_COVER_VERTICES} vertices")
    best = None
    for size in range(len(vertices) + 1):
        for chosen in combinations(range(len(vertices)), size):
            left = {vertices[k][1] for k in chosen if vertices[k][0] == "L"}
            right = {vertices[k][1] for k in chosen if vertices[k][0] == "R"}
            if not all(i in left or j in right for i, j in g.arcs):
                continue
            weight = math.fsum(vertices[k][2] for k in chosen)
            if best is None or weight < best[0] or (weight == best[0] and chosen < best[1]):
                best = (weight, chosen, frozenset(left), frozenset(right))
    weight, _, left, right = best
    return left, right, weight


def brute_min_cut(g):
    """Smallest s-t cut of the flow network, over every source side"""
    vertices = _vertices(g)
    if len(vertices) > MAX_COVER_VERTICES:
        raise SizeError(f"exhaustive cut limited to {MAX_COVER_VERTICES} vertices")
    best = math.inf
    for bits in product((False, True), repeat=len(vertices)):
        source_left = {vertices[k][1] for k in range(len(vertices)) if bits[k] and vertices[k][0] == "L"}
        source_right = {vertices[k][1] for k in range(len(vertices)) if bits[k] and vertices[k][0] == "R"}
        if any(i in source_left and j not in source_right for i, j in g.arcs):
            continue
        capacity = math.fsum(
            [v.weight for i, v in enumerate(g.left) if i not in source_left]
            + [v.weight for j, v in enumerate(g.right) if j in source_right]
        )
        best = min(best, capacity)
    return best


def _cluster(split):
    """Block of the split that leaves out the root label"""
    side = frozenset(split.side)
    return side if 0 not in side else frozenset(range(split.n + 1)) - side


def _compatible(x, y):
    return not (x & y) or x <= y or y <= x


def _norm(edges):
    return math.sqrt(sum(w * w for _, w in edges))


def _ordered_partitions(items, blocks):
    for assignment in product(range(blocks), repeat=len(items)):
        if len(set(assignment)) == blocks:
            yield [[items[k] for k in range(len(items)) if assignment[k] == b] for b in range(blocks)]


def _satisfies_p1(a_blocks, b_blocks):
    for i in range(len(a_blocks)):
        for j in range(i):
            for x, _ in a_blocks[i]:
                for y, _ in b_blocks[j]:
                    if not _compatible(x, y):
                        return False
    return True


def _satisfies_p2(a_blocks, b_blocks):
    ratios = [_norm(a) / _norm(b) for a, b in zip(a_blocks, b_blocks)]
    return all(r <= s * (1 + RATIO_SLACK) for r, s in zip(ratios, ratios[1:]))


def exhaustive_p3_violation(a_edges, b_edges):
    """
    Search every split of a support pair into (C1, C2), (D1, D2) with C2
    compatible with D1 and ||C1||/||D1|| < ||C2||/||D2||. Edges are
    (cluster, weight) pairs. Returns the first witness or None.
    """
    a_edges, b_edges = list(a_edges), list(b_edges)
    for ka in range(1, len(a_edges)):
        for c1 in combinations(a_edges, ka):
            c2 = [e for e in a_edges if e not in c1]
            for kb in range(1, len(b_edges)):
                for d2 in combinations(b_edges, kb):
                    d1 = [e for e in b_edges if e not in d2]
                    if not all(_compatible(x, y) for x, _ in c2 for y, _ in d1):
                        continue
                    if _norm(c1) * _norm(d2) < _norm(c2) * _norm(d1) * (1 - RATIO_SLACK):
                        return list(c1), c2, d1, list(d2)
    return None


def _edges(vector):
    return [(_cluster(s), w) for s, w in vector.splits().items()]


def _support_value(a_blocks, b_blocks):
    return math.sqrt(sum((_norm(a) + _norm(b)) ** 2 for a, b in zip(a_blocks, b_blocks)))


def _brute_disjoint(a_edges, b_edges, verify_p3):
    if not a_edges or not b_edges:
        return math.sqrt(_norm(a_edges) ** 2 + _norm(b_edges) ** 2)
    if max(len(a_edges), len(b_edges)) > MAX_SUPPORT_SPLITS:
        raise SizeError(f"support enumeration limited to {MAX_SUPPORT_SPLITS} splits per tree")
    best = math.inf
    for blocks in range(1, min(len(a_edges), len(b_edges)) + 1):
        for a_blocks in _ordered_partitions(a_edges, blocks):
            for b_blocks in _ordered_partitions(b_edges, blocks):
                if not _satisfies_p1(a_blocks, b_blocks) or not _satisfies_p2(a_blocks, b_blocks):
                    continue
                if verify_p3 and any(
                    exhaustive_p3_violation(a, b) is not None for a, b in zip(a_blocks, b_blocks)
                ):
                    continue
                best = min(best, _support_value(a_blocks, b_blocks))
    return best


def brute_geodesic(a, b, verify_p3=False):
    """
    Geodesic length between split vectors with no common split, as the
    shortest path over every support meeting the compatibility and ratio
    conditions. With verify_p3 only supports without an improving
    sub-partition are considered.
    """
    a_edges, b_edges = _edges(a), _edges(b)
    if {x for x, _ in a_edges} & {y for y, _ in b_edges}:
        raise DomainError("brute_geodesic needs vectors without common splits")
    return _brute_disjoint(a_edges, b_edges, verify_p3)


def _brute_with_shared(a_edges, b_edges):
    a_weights, b_weights = dict(a_edges), dict(b_edges)
    shared = sorted(a_weights.keys() & b_weights.keys(), key=lambda c: (len(c), sorted(c)))
    if not shared:
        return _brute_disjoint(a_edges, b_edges, False) ** 2
    k = shared[0]
    term = (a_weights[k] - b_weights[k]) ** 2
    inner_a = [(x, w) for x, w in a_edges if x < k]
    inner_b = [(x, w) for x, w in b_edges if x < k]
    outer_a = [(x, w) for x, w in a_edges if x != k and not x < k]
    outer_b = [(x, w) for x, w in b_edges if x != k and not x < k]
    return term + _brute_with_shared(inner_a, inner_b) + _brute_with_shared(outer_a, outer_b)


def brute_common_edge_geodesic(a, b):
    """Geodesic for vectors that may share splits, split apart at each shared cluster"""
    return math.sqrt(_brute_with_shared(_edges(a), _edges(b)))


def _clade_sets(t):
    below = {}
    kids = {}
    for v, p in enumerate(t.parent):
        kids.setdefault(p, []).append(v)

    def collect(v):
        if v not in kids:
            below[v] = frozenset({t.label[v]})
        else:
            below[v] = frozenset().union(*(collect(c) for c in kids[v]))
        return below[v]

    collect(0)
    return {below[v] for v in below if v != 0 and v in kids}


def brute_rf(a, b):
    """Symmetric difference of clade label sets found by recursive traversal"""
    if max(a.n, b.n) > MAX_RF_LEAVES:
        raise SizeError(f"brute_rf is limited to {MAX_RF_LEAVES} leaves")
    return len(_clade_sets(a) ^ _clade_sets(b))
