"""
Classic tree comparison metrics: Robinson-Foulds and its length variant,
quartet and triplet counts, maximum agreement subtree, Align, node distance,
cophenetic correlation and the similarity based on probability.
"""
import logging
import math
from dataclasses import dataclass, field
from itertools import combinations, permutations

import numpy as np
from scipy.optimize import linear_sum_assignment

from .exceptions import (
    DomainError,
    InvalidClassAssignment,
    LabelSetMismatch,
    SizeError,
    ZeroLengthTree,
)
from .splits import Split, split_index
from .tree_model import clades, path_length_matrix, tree_from_clusters

logger = logging.getLogger(__name__)

AMBIGUOUS = "ambiguous"
NOT_SYMMETRIC = "not-symmetric-input"
DEGENERATE = "degenerate"

MAST_MAX_LEAVES = 16
SYMMETRY_TOLERANCE = 1e-12


@dataclass(frozen=True)
class DistanceReport:
    metric: str
    value: float
    flags: frozenset = frozenset()
    notes: tuple = ()

    @property
    def is_defined(self):
        return not (isinstance(self.value, float) and math.isnan(self.value))

    def as_dict(self):
        return {
            "metric": self.metric,
            "value": self.value if self.is_defined else None,
            "flags": sorted(self.flags),
            "notes": list(self.notes),
        }


@dataclass(frozen=True)
class ClassAssignment:
    """Class value of every internal vertex, root included"""
    classes: dict = field(default_factory=dict)

    def __getitem__(self, v):
        return self.classes[v]


def _same_labels(a, b):
    if a.n != b.n:
        raise LabelSetMismatch(f"trees over {a.n} and {b.n} leaves")


def rf(a, b):
    """Number of clusters found in exactly one of the two trees"""
    _same_labels(a, b)
    return DistanceReport("rf", len(clades(a) ^ clades(b)))


def strict_consensus(ts):
    """
    Minimal tree holding the clusters common to every input. Edge weights
    come from the first tree.
    """
    ts = list(ts)
    if not ts:
        raise SizeError("strict consensus needs at least one tree")
    first = ts[0]
    for t in ts[1:]:
        _same_labels(first, t)
    shared = set(clades(first))
    for t in ts[1:]:
        shared &= clades(t)
    weights = first.edge_weights()
    leaf_weights = {lab: first.weight[first.leaf_vertices[lab]] for lab in range(1, first.n + 1)}
    logger.debug(f"Strict consensus of {len(ts)} trees keeps {len(shared)} clusters")
    return tree_from_clusters(first.n, {c: weights[c] for c in shared}, leaf_weights)


def _edge_key(t, v):
    """Bipartition of the leaf labels obtained by cutting the edge above v"""
    cluster = t.leaf_mask[v]
    rest = t.full_mask ^ cluster
    return (min(cluster, rest), max(cluster, rest))


def _edges_by_key(t):
    keyed = {}
    for v in t.preorder[1:]:
        keyed.setdefault(_edge_key(t, v), []).append(v)
    return keyed


def _match_preference(t, v):
    if t.is_leaf(v):
        return (1, t.label[v])
    return (0, split_index(Split.from_block(t.cluster(v), t.n)))


def _rfl_value(a, b, a_keys, b_keys):
    total = []
    for key, edges in a_keys.items():
        partners = b_keys.get(key)
        if partners is None:
            total.extend(a.weight[v] for v in edges)
        elif len(partners) == len(edges):
            mine = sorted(edges, key=lambda v: _match_preference(a, v))
            theirs = sorted(partners, key=lambda u: _match_preference(b, u))
            total.extend(abs(a.weight[v] - b.weight[u]) for v, u in zip(mine, theirs))
        else:
            best = min(partners, key=lambda u: _match_preference(b, u))
            total.extend(abs(a.weight[v] - b.weight[best]) for v in edges)
    for key, edges in b_keys.items():
        if key not in a_keys:
            total.extend(b.weight[u] for u in edges)
    return math.fsum(total)


def _rematch_totals(a, b, a_keys, b_keys):
    """
    (chosen, lowest) totals over bipartitions cut by several edges in both
    trees: the preference matching against the cheapest one
    """
    chosen, lowest = [], []
    for key, edges in a_keys.items():
        partners = b_keys.get(key)
        if partners is None or len(partners) != len(edges) or len(edges) < 2:
            continue
        mine = sorted(edges, key=lambda v: _match_preference(a, v))
        theirs = sorted(partners, key=lambda u: _match_preference(b, u))
        costs = [
            math.fsum(abs(a.weight[v] - b.weight[u]) for v, u in zip(mine, order))
            for order in permutations(theirs)
        ]
        chosen.append(costs[0])
        lowest.append(min(costs))
    return math.fsum(chosen), math.fsum(lowest)


def rfl(a, b):
    """
    Robinson-Foulds length: unmatched edge weights of both trees plus the
    weight differences of matched edges. Two edges match when they cut the
    leaf labels the same way; a bipartition cut by a different number of
    edges in the two trees has no one-to-one matching and is flagged.
    """
    _same_labels(a, b)
    a_keys, b_keys = _edges_by_key(a), _edges_by_key(b)
    value = _rfl_value(a, b, a_keys, b_keys)

    flags, notes = set(), []
    uneven = [key for key, edges in a_keys.items() if key in b_keys and len(b_keys[key]) != len(edges)]
    if uneven:
        flags.add(AMBIGUOUS)
        notes.append(
            f"{len(uneven)} leaf bipartitions are cut by a different number of edges "
            "in the two trees; matches chosen by lowest split index"
        )
    chosen, lowest = _rematch_totals(a, b, a_keys, b_keys)
    if chosen - lowest > SYMMETRY_TOLERANCE:
        notes.append(
            f"edges cutting the same leaf bipartition could be matched differently for "
            f"rfl = {value - chosen + lowest:.12g}; matches chosen by lowest split index"
        )
    mirrored = _rfl_value(b, a, b_keys, a_keys)
    if abs(value - mirrored) > SYMMETRY_TOLERANCE:
        flags.add(NOT_SYMMETRIC)
        notes.append(f"rfl(a, b) = {value:.12g} but rfl(b, a) = {mirrored:.12g}")
    if flags:
        logger.warning(f"RFL flagged {sorted(flags)}: {'; '.join(notes)}")
    return DistanceReport("rfl", value, frozenset(flags), tuple(notes))


def _quartet_codes(d, i, j, k, rest):
    """0, 1, 2 for the pairing ij|kl, ik|jl, il|jk; 3 for an unresolved quartet"""
    sums = np.stack([
        d[i, j] + d[k, rest],
        d[i, k] + d[j, rest],
        d[i, rest] + d[j, k],
    ])
    lowest = sums.min(axis=0)
    unique = (sums == lowest).sum(axis=0) == 1
    return np.where(unique, sums.argmin(axis=0), 3)


def _lca_depths(t):
    d = path_length_matrix(t, weighted=False)
    depth = np.zeros(t.n + 1)
    for lab in range(1, t.n + 1):
        depth[lab] = t.depth[t.leaf_vertices[lab]]
    return (depth[:, None] + depth[None, :] - d) / 2


def _triplet_codes(lca, i, j, rest):
    """0, 1, 2 for the cherry ij, ik, jk; 3 for an unresolved triplet"""
    depths = np.stack([
        np.full(len(rest), lca[i, j]),
        lca[i, rest],
        lca[j, rest],
    ])
    highest = depths.max(axis=0)
    unique = (depths == highest).sum(axis=0) == 1
    return np.where(unique, depths.argmax(axis=0), 3)


def quartet(a, b):
    """Number of 4-leaf subsets whose unrooted topologies differ"""
    _same_labels(a, b)
    if a.n < 4:
        raise SizeError(f"quartets need n >= 4, got {a.n}")
    da, db = path_length_matrix(a, weighted=False), path_length_matrix(b, weighted=False)
    differing = 0
    for i, j, k in combinations(range(1, a.n + 1), 3):
        rest = np.arange(k + 1, a.n + 1)
        if rest.size:
            differing += int((_quartet_codes(da, i, j, k, rest) != _quartet_codes(db, i, j, k, rest)).sum())
    return DistanceReport("quartet", differing)


def _triplet_agreement(a, b):
    """Yield (i, j, ks, agree) with agree a mask over the third leaves ks"""
    la, lb = _lca_depths(a), _lca_depths(b)
    for i, j in combinations(range(1, a.n + 1), 2):
        rest = np.arange(j + 1, a.n + 1)
        if rest.size:
            yield i, j, rest, _triplet_codes(la, i, j, rest) == _triplet_codes(lb, i, j, rest)


def triplet(a, b):
    """Number of 3-leaf subsets whose rooted topologies differ"""
    _same_labels(a, b)
    if a.n < 3:
        raise SizeError(f"triplets need n >= 3, got {a.n}")
    differing = sum(int((~agree).sum()) for _, _, _, agree in _triplet_agreement(a, b))
    return DistanceReport("triplet", differing)


def triplet_length(a, b):
    """
    For every triplet i < j < k with the same rooted topology in both trees,
    add |d_a(i,j) - d_b(i,j)| + |d_a(i,k) - d_b(i,k)| over weighted paths.
    """
    _same_labels(a, b)
    if a.n < 3:
        raise SizeError(f"triplets need n >= 3, got {a.n}")
    gap = np.abs(path_length_matrix(a) - path_length_matrix(b))
    total = []
    for i, j, rest, agree in _triplet_agreement(a, b):
        ks = rest[agree]
        total.append(gap[i, j] * ks.size + gap[i, ks].sum())
    return DistanceReport("triplet-length", math.fsum(total))


def _cluster_masks(t):
    return [t.leaf_mask[v] for v in t.internal_edges]


def _restricted(masks, keep):
    return frozenset(m & keep for m in masks if (m & keep).bit_count() >= 2) - {keep}


def mast(a, b, max_leaves=MAST_MAX_LEAVES):
    """n minus the size of the largest leaf set on which both trees agree"""
    _same_labels(a, b)
    if a.n > max_leaves:
        raise SizeError(f"mast is computed exhaustively for n <= {max_leaves}, got {a.n}")
    ma, mb = _cluster_masks(a), _cluster_masks(b)
    for size in range(a.n, 2, -1):
        for leaves in combinations(range(1, a.n + 1), size):
            keep = sum(1 << lab for lab in leaves)
            if _restricted(ma, keep) == _restricted(mb, keep):
                logger.debug(f"Agreement subtree on {leaves}")
                return DistanceReport("mast", a.n - size)
    return DistanceReport("mast", a.n - 2)


def _jaccard(x, y):
    union = len(x | y)
    return len(x & y) / union if union else 0.0


def align_score(x, y, n):
    """Score of matching the leaf bipartitions x | rest and y | rest"""
    everything = frozenset(range(1, n + 1))
    x0, x1 = x, everything - x
    y0, y1 = y, everything - y
    return max(
        min(_jaccard(x0, y0), _jaccard(x1, y1)),
        min(_jaccard(x0, y1), _jaccard(x1, y0)),
    )


def align_matrix(a, b):
    rows = [a.cluster(v) for v in a.internal_edges]
    cols = [b.cluster(v) for v in b.internal_edges]
    size = max(len(rows), len(cols))
    scores = np.zeros((size, size))
    for r, x in enumerate(rows):
        for c, y in enumerate(cols):
            scores[r, c] = align_score(x, y, a.n)
    return scores


def align(a, b):
    """Maximum total score over one-to-one matchings of internal edges"""
    _same_labels(a, b)
    scores = align_matrix(a, b)
    flags, notes = set(), []
    ka, kb = len(a.internal_edges), len(b.internal_edges)
    if ka != kb:
        flags.add(DEGENERATE)
        notes.append(f"internal edge counts differ ({ka} vs {kb}); padded with zero-score edges")
        logger.warning(f"Align padding: {ka} vs {kb} internal edges")
    if scores.size == 0:
        return DistanceReport("align-score", 0.0, frozenset(flags), tuple(notes))
    rows, cols = linear_sum_assignment(scores, maximize=True)
    return DistanceReport("align-score", float(scores[rows, cols].sum()), frozenset(flags), tuple(notes))


def node_dist(a, b, k=1):
    """Mean k-th power difference of unweighted leaf path lengths"""
    _same_labels(a, b)
    if k not in (1, 2):
        raise DomainError(f"node distance exponent must be 1 or 2, got {k}")
    da, db = path_length_matrix(a, weighted=False), path_length_matrix(b, weighted=False)
    gaps = np.abs(da - db)[1:, 1:][np.triu_indices(a.n, 1)]
    value = 2.0 / (a.n * (a.n - 1)) * float(np.sum(gaps ** k))
    return DistanceReport("node" if k == 1 else "node2", value)


def default_class_assignment(t):
    """Depth + 1 for every internal vertex; the root gets class 1"""
    return ClassAssignment({v: t.depth[v] + 1 for v in range(t.vertex_count) if not t.is_leaf(v)})


def validate_class_assignment(t, assignment):
    internal = {v for v in range(t.vertex_count) if not t.is_leaf(v)}
    given = set(assignment.classes)
    if given != internal:
        missing = sorted(internal - given)
        extra = sorted(given - internal)
        raise InvalidClassAssignment(f"class map must cover the internal vertices: missing {missing}, extra {extra}")
    by_depth = {}
    for v in sorted(internal, key=t.depth.__getitem__):
        value = assignment[v]
        if not isinstance(value, int) or value < 1:
            raise InvalidClassAssignment(f"vertex {v} has class {value!r}; classes are positive integers")
        by_depth.setdefault(t.depth[v], set()).add(value)
    previous = 0
    for depth in sorted(by_depth):
        values = by_depth[depth]
        if len(values) > 1:
            raise InvalidClassAssignment(f"vertices at depth {depth} carry different classes {sorted(values)}")
        value = values.pop()
        if value < previous:
            raise InvalidClassAssignment(f"class {value} at depth {depth} is below the class of a shallower vertex")
        previous = value


def cophenetic_relations(t, assignment=None):
    """Class of the lowest common ancestor of every leaf pair i < j"""
    assignment = assignment or default_class_assignment(t)
    validate_class_assignment(t, assignment)
    return np.array([
        assignment[t.lca(t.leaf_vertices[i], t.leaf_vertices[j])]
        for i, j in combinations(range(1, t.n + 1), 2)
    ], dtype=float)


def cophenetic(a, b, ca=None, cb=None):
    """Pearson correlation between the cophenetic relations of two trees"""
    _same_labels(a, b)
    ra, rb = cophenetic_relations(a, ca), cophenetic_relations(b, cb)
    if np.ptp(ra) == 0 or np.ptp(rb) == 0:
        note = "DegenerateVariance: a cophenetic matrix is constant, the correlation is undefined"
        logger.warning(note)
        return DistanceReport("cophenetic", math.nan, frozenset({DEGENERATE}), (note,))
    return DistanceReport("cophenetic", float(np.corrcoef(ra, rb)[0, 1]))


def _weight_by_key(t):
    weights = {}
    for v in t.preorder[1:]:
        key = _edge_key(t, v)
        weights[key] = weights.get(key, 0.0) + t.weight[v]
    return weights


def _overlap(x, y, lx, ly):
    return math.fsum(w * y[key] for key, w in x.items() if key in y) / (lx * ly)


def similarity_prob(a, b):
    """1 - (S(a,b) + S(b,a)) / 2 with S(x,y) = M_xy / M_xx"""
    _same_labels(a, b)
    la, lb = a.total_length, b.total_length
    if la <= 0 or lb <= 0:
        raise ZeroLengthTree("similarity needs trees with positive total edge weight")
    wa, wb = _weight_by_key(a), _weight_by_key(b)
    m_ab = _overlap(wa, wb, la, lb)
    m_aa = _overlap(wa, wa, la, la)
    m_bb = _overlap(wb, wb, lb, lb)
    value = 1.0 - (m_ab / m_aa + m_ab / m_bb) / 2.0
    return DistanceReport("simprob", value)

