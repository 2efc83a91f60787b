"""
Geodesic distance between trees in the space of weighted trees.

Trees sharing a split are cut at that split into two independent
sub-problems; trees with disjoint split sets go through the support
refinement loop, where each step solves an extension problem as a minimum
weight vertex cover.
"""
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

from .conf import DEFAULT_TOLERANCES
from .exceptions import (
    DegenerateCover,
    DomainError,
    InternalInvariantViolation,
    IterationCap,
    LabelSetMismatch,
    NotShared,
    SizeMismatch,
)
from .maxflow import build_incompat_graph, min_weight_vertex_cover
from .splits import Split, SplitVector, compatible, split_index, weighted_splits

logger = logging.getLogger(__name__)


def _norm(edges):
    return math.sqrt(math.fsum(w * w for _, w in edges))


@dataclass(frozen=True)
class SupportPair:
    """Edges of tree 1 (a) and tree 2 (b) that are dropped and added together"""
    a: tuple
    b: tuple

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(sorted(self.a, key=lambda e: e[0])))
        object.__setattr__(self, "b", tuple(sorted(self.b, key=lambda e: e[0])))

    @property
    def norm_a(self):
        return _norm(self.a)

    @property
    def norm_b(self):
        return _norm(self.b)

    @property
    def ratio(self):
        return self.norm_a / self.norm_b


@dataclass(frozen=True)
class Support:
    pairs: tuple

    def __len__(self):
        return len(self.pairs)

    def __getitem__(self, i):
        return self.pairs[i]

    def __iter__(self):
        return iter(self.pairs)


class Extension(NamedTuple):
    c1: tuple
    c2: tuple
    d1: tuple
    d2: tuple
    cover_weight: float


@dataclass(frozen=True)
class GeodesicComponent:
    """
    One term of the squared distance: either the weight difference on a
    shared split, or the support of a disjoint sub-problem.
    """
    shared_split: object
    support: object
    term: float

    def as_dict(self):
        return {
            "shared_split": split_index(self.shared_split) if self.shared_split is not None else None,
            "support": [
                {"A": [split_index(s) for s, _ in pair.a], "B": [split_index(s) for s, _ in pair.b]}
                for pair in (self.support or ())
            ],
            "term": self.term,
        }


@dataclass(frozen=True)
class GeodesicResult:
    distance: float
    components: tuple = ()
    notes: tuple = ()

    @property
    def supports(self):
        return [c.support for c in self.components if c.support is not None]

    def as_dict(self):
        return {
            "distance": self.distance,
            "components": [c.as_dict() for c in self.components],
            "notes": list(self.notes),
        }


class CommonEdgeSplit(NamedTuple):
    """Sub-vectors on either side of a shared split, with their label maps"""
    t1_c: SplitVector
    t2_c: SplitVector
    t1_d: SplitVector
    t2_d: SplitVector
    c_labels: tuple
    d_labels: tuple


def cone_path_length(a, b):
    if a.n != b.n:
        raise SizeMismatch(f"split vectors over n={a.n} and n={b.n}")
    return a.norm + b.norm


def support_length(support):
    return math.sqrt(math.fsum((p.norm_a + p.norm_b) ** 2 for p in support))


def _isolated_split(graph):
    """A vertex without arcs: its split is compatible with the whole other side"""
    touched_left = {i for i, _ in graph.arcs}
    touched_right = {j for _, j in graph.arcs}
    for i, vertex in enumerate(graph.left):
        if i not in touched_left:
            return vertex.split
    for j, vertex in enumerate(graph.right):
        if j not in touched_right:
            return vertex.split
    return graph.left[0].split


def extension_problem(pair, tolerances=DEFAULT_TOLERANCES):
    """
    Partition a support pair into (C1, C2) and (D1, D2) with C2 compatible
    with D1 and ||C1||/||D1|| < ||C2||/||D2||, or None when no such
    partition exists.
    """
    graph = build_incompat_graph(pair.a, pair.b)
    cover = min_weight_vertex_cover(graph, tolerances.flow_epsilon)
    if cover.weight >= 1 - tolerances.cover:
        logger.debug(f"No extension for {len(pair.a)}x{len(pair.b)} pair, cover weight {cover.weight:.12g}")
        return None

    def edges(side, chosen):
        return tuple((side[k].split, side[k].raw_weight) for k in sorted(chosen))

    everything_left = range(len(graph.left))
    everything_right = range(len(graph.right))
    c1 = edges(graph.left, cover.left)
    c2 = edges(graph.left, set(everything_left) - cover.left)
    d2 = edges(graph.right, cover.right)
    d1 = edges(graph.right, set(everything_right) - cover.right)
    if not (c1 and c2 and d1 and d2):
        raise DegenerateCover(_isolated_split(graph))
    logger.debug(f"Extension found with cover weight {cover.weight:.12g}: {len(c1)}+{len(c2)} / {len(d1)}+{len(d2)}")
    return Extension(c1, c2, d1, d2, cover.weight)


def check_p1(support):
    """Later a-blocks are compatible with earlier b-blocks"""
    for i, later in enumerate(support):
        for earlier in support.pairs[:i]:
            for s, _ in later.a:
                for t, _ in earlier.b:
                    if not compatible(s, t):
                        return False
    return True


def check_p2(support, tolerance=DEFAULT_TOLERANCES.ratio):
    """Norm ratios are non-decreasing up to a relative tolerance"""
    ratios = [p.ratio for p in support]
    return all(r <= s * (1 + tolerance) for r, s in zip(ratios, ratios[1:]))


def refine_support(support, i, blocks, tolerances=DEFAULT_TOLERANCES):
    """Replace pair i by (C1, D1), (C2, D2)"""
    for s, _ in blocks.c2:
        for t, _ in blocks.d1:
            if not compatible(s, t):
                raise InternalInvariantViolation(f"refinement left {s} incompatible with {t}")
    pairs = list(support.pairs)
    pairs[i:i + 1] = [SupportPair(blocks.c1, blocks.d1), SupportPair(blocks.c2, blocks.d2)]
    refined = Support(tuple(pairs))
    if not check_p2(refined, tolerances.ratio):
        ratios = ", ".join(f"{p.ratio:.12g}" for p in refined)
        raise InternalInvariantViolation(f"norm ratios decrease after refinement: {ratios}")
    return refined


def _gtp(a, b, tolerances):
    """Support refinement loop over two disjoint split -> weight maps"""
    support = Support((SupportPair(tuple(a.items()), tuple(b.items())),))
    cap = min(len(a), len(b))
    i = 0
    while i < len(support):
        blocks = extension_problem(support[i], tolerances)
        if blocks is None:
            i += 1
            continue
        if len(support) + 1 > cap:
            raise IterationCap(f"support would grow past {cap} pairs")
        support = refine_support(support, i, blocks, tolerances)
    logger.debug(f"Final support has {len(support)} pairs for {len(a)}x{len(b)} splits")
    return support


def _disjoint(a, b, tolerances):
    if not a and not b:
        return GeodesicComponent(None, None, 0.0)
    if not a or not b:
        return GeodesicComponent(None, None, _norm(a.items()) ** 2 + _norm(b.items()) ** 2)
    support = _gtp(a, b, tolerances)
    return GeodesicComponent(None, support, support_length(support) ** 2)


def gtp_disjoint(a, b, tolerances=DEFAULT_TOLERANCES):
    """Geodesic between two split vectors without common splits"""
    if a.n != b.n:
        raise SizeMismatch(f"split vectors over n={a.n} and n={b.n}")
    first, second = a.splits(), b.splits()
    shared = first.keys() & second.keys()
    if shared:
        raise DomainError(f"split vectors share {len(shared)} splits, e.g. {min(shared)}")
    component = _disjoint(first, second, tolerances)
    return GeodesicResult(math.sqrt(component.term), (component,))


def _lift(split, members, n):
    """Split of a sub-problem expressed over the original labels"""
    labels = set()
    for lab in split.cluster:
        labels |= members[lab]
    return Split.from_block(labels, n)


def _split_on_common_edge(n, a, b, shared, members):
    """
    Cut both split maps at a shared split. The side without label 0 (K)
    becomes a problem on |K| leaves; on the other side K collapses into its
    smallest label.
    """
    inside = sorted(shared.cluster)
    inside_set = set(inside)
    outside = sorted(set(range(1, n + 1)) - inside_set)
    joint = inside[0]
    d_order = sorted(outside + [joint])
    c_index = {lab: i for i, lab in enumerate(inside, start=1)}
    d_index = {lab: i for i, lab in enumerate(d_order, start=1)}

    rest = frozenset().union(members[0], *(members[lab] for lab in outside))
    c_members = (rest,) + tuple(members[lab] for lab in inside)
    merged = frozenset().union(*(members[lab] for lab in inside))
    d_members = (members[0],) + tuple(merged if lab == joint else members[lab] for lab in d_order)

    def cut(weights):
        c_side, d_side = {}, {}
        for split, w in weights.items():
            if split == shared:
                continue
            cluster = split.cluster
            if cluster < inside_set:
                c_side[Split.from_block({c_index[lab] for lab in cluster}, len(inside))] = w
            elif cluster.isdisjoint(inside_set) or cluster > inside_set:
                if not cluster.isdisjoint(inside_set):
                    cluster = (cluster - inside_set) | {joint}
                d_side[Split.from_block({d_index[lab] for lab in cluster}, len(d_order))] = w
            else:
                raise InternalInvariantViolation(f"{split} crosses the shared split {shared}")
        return c_side, d_side

    a_c, a_d = cut(a)
    b_c, b_d = cut(b)
    return (len(inside), a_c, b_c, c_members), (len(d_order), a_d, b_d, d_members)


def common_edge_split(t1, t2, s):
    """
    Sub-problems on the two sides of a split shared by both trees.

    c_labels[i] and d_labels[i] give the original labels standing behind
    sub-problem label i.
    """
    if t1.n != t2.n:
        raise LabelSetMismatch(f"trees over {t1.n} and {t2.n} leaves")
    a, b = weighted_splits(t1), weighted_splits(t2)
    if s not in a or s not in b:
        raise NotShared(f"split {s} is not an edge of both trees")
    members = tuple(frozenset({lab}) for lab in range(t1.n + 1))
    (cn, a_c, b_c, c_labels), (dn, a_d, b_d, d_labels) = _split_on_common_edge(t1.n, a, b, s, members)
    return CommonEdgeSplit(
        SplitVector.from_splits(cn, a_c),
        SplitVector.from_splits(cn, b_c),
        SplitVector.from_splits(dn, a_d),
        SplitVector.from_splits(dn, b_d),
        c_labels,
        d_labels,
    )


def _solve(n, a, b, members, original_n, tolerances):
    shared = sorted(a.keys() & b.keys())
    if not shared:
        lifted_a = {_lift(s, members, original_n): w for s, w in a.items()}
        lifted_b = {_lift(s, members, original_n): w for s, w in b.items()}
        return [_disjoint(lifted_a, lifted_b, tolerances)]
    split = shared[0]
    head = GeodesicComponent(_lift(split, members, original_n), None, (a[split] - b[split]) ** 2)
    c_problem, d_problem = _split_on_common_edge(n, a, b, split, members)
    return (
        [head]
        + _solve(*c_problem, original_n, tolerances)
        + _solve(*d_problem, original_n, tolerances)
    )


def geodesic_distance(t1, t2, tolerances=DEFAULT_TOLERANCES):
    """Length of the geodesic between the internal-edge coordinates of two trees"""
    if t1.n != t2.n:
        raise LabelSetMismatch(f"trees over {t1.n} and {t2.n} leaves")
    n = t1.n
    members = tuple(frozenset({lab}) for lab in range(n + 1))
    components = tuple(_solve(n, weighted_splits(t1), weighted_splits(t2), members, n, tolerances))
    distance = math.sqrt(math.fsum(c.term for c in components))

    notes = []
    leaf_gap = math.sqrt(math.fsum(
        (t1.weight[t1.leaf_vertices[lab]] - t2.weight[t2.leaf_vertices[lab]]) ** 2
        for lab in range(1, n + 1)
    ))
    if leaf_gap > 0:
        notes.append(f"leaf edge weights differ (norm {leaf_gap:.12g}); not part of the distance")
    logger.debug(f"Geodesic {distance:.12g} from {len(components)} components")
    return GeodesicResult(distance, components, tuple(notes))
