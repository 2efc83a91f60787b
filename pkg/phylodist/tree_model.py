"""
Rooted, leaf-labelled, edge-weighted trees and their Newick representation
"""
import logging
import math
import re
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .exceptions import (
    LabelError,
    LeafEdgeError,
    DomainError,
    NewickSyntaxError,
    ShapeError,
    SizeError,
    TopologyCountOverflow,
    UnknownLabel,
)

logger = logging.getLogger(__name__)

ROOT = 0
INTERNAL = -1
DETACHED = -2
DEFAULT_BRANCH_LENGTH = 1.0
MAX_ENUMERATION_LEAVES = 8
INT64_MAX = 2**63 - 1

_TOKEN = re.compile(
    r"\s*(?:(?P<punct>[(),:;])"
    r"|(?P<number>-?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][-+]?\d+)?))"
)


@dataclass(frozen=True)
class Tree:
    """
    Rooted tree over the label set {0..n}.

    Vertex 0 is the root and carries label 0. Every other vertex v owns the
    edge (parent[v], v) and its weight; leaves carry a label in 1..n and
    internal vertices carry INTERNAL.
    """
    n: int
    parent: tuple
    weight: tuple
    label: tuple

    def __post_init__(self):
        self._validate()

    def __str__(self):
        return serialize_newick(self).decode("ascii")

    def _validate(self):
        size = len(self.parent)
        if len(self.weight) != size or len(self.label) != size:
            raise ShapeError("parent, weight and label sequences differ in length")
        if self.n < 2:
            raise ShapeError(f"a tree needs at least two leaves, got n={self.n}")
        if size == 0 or self.parent[ROOT] != -1 or self.label[ROOT] != ROOT:
            raise ShapeError("vertex 0 must be the root")

        for v in range(1, size):
            p = self.parent[v]
            if not 0 <= p < size or p == v:
                raise ShapeError(f"vertex {v} has invalid parent {p}")
            w = self.weight[v]
            if not math.isfinite(w) or w < 0:
                raise ShapeError(f"edge above vertex {v} has invalid weight {w}")

        if len(self.preorder) != size:
            raise ShapeError("the parent map is not a single tree rooted at vertex 0")

        seen = set()
        for v in range(1, size):
            kids = len(self.children[v])
            if kids == 0:
                lab = self.label[v]
                if not 1 <= lab <= self.n:
                    raise LabelError(f"leaf label {lab} is outside 1..{self.n}")
                if lab in seen:
                    raise LabelError(f"duplicate leaf label {lab}")
                seen.add(lab)
            elif self.label[v] != INTERNAL:
                raise LabelError(f"internal vertex {v} carries label {self.label[v]}")
            elif kids == 1:
                raise ShapeError(f"vertex {v} has degree 2")
        if len(self.children[ROOT]) < 2:
            raise ShapeError("the root needs at least two children")
        if len(seen) != self.n:
            missing = sorted(set(range(1, self.n + 1)) - seen)
            raise LabelError(f"missing leaf labels {missing}")

    @cached_property
    def children(self):
        kids = [[] for _ in self.parent]
        for v, p in enumerate(self.parent):
            if p >= 0:
                kids[p].append(v)
        return tuple(tuple(k) for k in kids)

    @cached_property
    def preorder(self):
        order = []
        stack = [ROOT]
        while stack:
            v = stack.pop()
            order.append(v)
            stack.extend(reversed(self.children[v]))
        return tuple(order)

    @cached_property
    def depth(self):
        depth = [0] * len(self.parent)
        for v in self.preorder[1:]:
            depth[v] = depth[self.parent[v]] + 1
        return tuple(depth)

    @cached_property
    def leaf_mask(self):
        """Bitmask of the leaf labels below each vertex (bit l for label l)"""
        mask = [0] * len(self.parent)
        for v in reversed(self.preorder):
            if self.is_leaf(v):
                mask[v] = 1 << self.label[v]
            else:
                for c in self.children[v]:
                    mask[v] |= mask[c]
        return tuple(mask)

    @cached_property
    def lowest_label(self):
        low = [0] * len(self.parent)
        for v in reversed(self.preorder):
            if self.is_leaf(v):
                low[v] = self.label[v]
            else:
                low[v] = min(low[c] for c in self.children[v])
        return tuple(low)

    @cached_property
    def leaf_vertices(self):
        """Vertex of each leaf label; index 0 is the root"""
        where = [ROOT] * (self.n + 1)
        for v in range(1, len(self.parent)):
            if self.is_leaf(v):
                where[self.label[v]] = v
        return tuple(where)

    @cached_property
    def internal_edges(self):
        """Child vertices of the internal edges, in preorder"""
        return tuple(v for v in self.preorder[1:] if not self.is_leaf(v))

    @property
    def vertex_count(self):
        return len(self.parent)

    @property
    def full_mask(self):
        return self.leaf_mask[ROOT]

    @property
    def total_length(self):
        return math.fsum(self.weight[1:])

    @property
    def is_binary(self):
        return len(self.internal_edges) == self.n - 2

    def is_leaf(self, v):
        return v != ROOT and not self.children[v]

    def edges(self):
        return [(self.parent[v], v) for v in self.preorder[1:]]

    def sorted_children(self, v):
        return sorted(self.children[v], key=self.lowest_label.__getitem__)

    def leaf(self, label):
        if not 1 <= label <= self.n:
            raise UnknownLabel(f"label {label} is not in 1..{self.n}")
        return self.leaf_vertices[label]

    def cluster(self, v):
        return mask_to_labels(self.leaf_mask[v])

    def lca(self, u, v):
        depth = self.depth
        while u != v:
            if depth[u] >= depth[v]:
                u = self.parent[u]
            else:
                v = self.parent[v]
        return u

    def edge_weights(self):
        """Weight of every edge keyed by the leaf cluster below it"""
        return {self.cluster(v): self.weight[v] for v in self.preorder[1:]}


def mask_to_labels(mask):
    labels = []
    while mask:
        low = mask & -mask
        labels.append(low.bit_length() - 1)
        mask ^= low
    return frozenset(labels)


def labels_to_mask(labels):
    mask = 0
    for lab in labels:
        mask |= 1 << lab
    return mask


def _tokenize(text):
    pos = 0
    end = len(text.rstrip())
    while pos < end:
        match = _TOKEN.match(text, pos)
        if match is None:
            bad = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise NewickSyntaxError(f"unexpected character {text[bad]!r}", bad)
        kind = match.lastgroup
        yield kind, match.group(kind), match.start(kind)
        pos = match.end()


def _branch_length(tokens, i, weight, v):
    if i >= len(tokens) or tokens[i][1] != ":":
        return i
    if i + 1 >= len(tokens) or tokens[i + 1][0] != "number":
        raise NewickSyntaxError("':' must be followed by a number", tokens[i][2])
    kind, value, pos = tokens[i + 1]
    length = float(value)
    if length < 0:
        raise ShapeError(f"negative branch length {value} at character {pos}")
    weight[v] = length
    return i + 2


def parse_newick(text):
    """Parse one rooted Newick tree whose leaf labels are exactly 1..n"""
    if isinstance(text, (bytes, bytearray)):
        try:
            text = bytes(text).decode("utf-8")
        except UnicodeDecodeError as e:
            raise NewickSyntaxError("text is not UTF-8", e.start) from e

    tokens = list(_tokenize(text))
    parent, weight, label = [], [], []
    groups = []
    expect_subtree = True
    finished = False
    i = 0

    def new_vertex(lab):
        parent.append(groups[-1] if groups else -1)
        weight.append(DEFAULT_BRANCH_LENGTH)
        label.append(lab)
        return len(parent) - 1

    while i < len(tokens):
        kind, value, pos = tokens[i]
        i += 1
        if finished:
            raise NewickSyntaxError("text after ';'", pos)
        if expect_subtree:
            if value == "(":
                groups.append(new_vertex(INTERNAL))
            elif kind == "number":
                if not value.isdigit():
                    raise NewickSyntaxError(f"leaf label {value!r} is not a positive integer", pos)
                v = new_vertex(int(value))
                i = _branch_length(tokens, i, weight, v)
                expect_subtree = False
            else:
                raise NewickSyntaxError(f"expected '(' or a leaf label, found {value!r}", pos)
        elif value == ",":
            if not groups:
                raise NewickSyntaxError("',' outside parentheses", pos)
            expect_subtree = True
        elif value == ")":
            if not groups:
                raise NewickSyntaxError("unbalanced ')'", pos)
            i = _branch_length(tokens, i, weight, groups.pop())
        elif value == ";":
            if groups:
                raise NewickSyntaxError("unbalanced '('", pos)
            finished = True
        else:
            raise NewickSyntaxError(f"unexpected {value!r}", pos)

    if not finished:
        raise NewickSyntaxError("missing ';'", len(text))
    if label[ROOT] != INTERNAL:
        raise ShapeError("a tree needs at least two leaves")
    label[ROOT] = ROOT
    weight[ROOT] = 0.0
    n = len(label) - sum(1 for lab in label if lab == INTERNAL) - 1
    return Tree(n, tuple(parent), tuple(weight), tuple(label))


def format_number(w):
    if w.is_integer() and abs(w) < 1e16:
        return str(int(w))
    return repr(w)


def serialize_newick(t):
    """Newick bytes with children ordered by their lowest leaf label"""
    text = {}
    for v in reversed(t.preorder):
        if t.is_leaf(v):
            s = str(t.label[v])
        else:
            s = "(" + ",".join(text.pop(c) for c in t.sorted_children(v)) + ")"
        if v != ROOT:
            s = f"{s}:{format_number(t.weight[v])}"
        text[v] = s
    return (text[ROOT] + ";").encode("ascii")


def _build(n, parent, weight, label, root=ROOT):
    """
    Renumber a parent map into preorder with children sorted by lowest leaf
    label. Vertices not reachable from root are dropped.
    """
    kids = [[] for _ in parent]
    for v, p in enumerate(parent):
        if p >= 0 and v != root:
            kids[p].append(v)
    order = []
    stack = [root]
    while stack:
        v = stack.pop()
        order.append(v)
        stack.extend(kids[v])
    low = [math.inf] * len(parent)
    for v in reversed(order):
        if label[v] > 0:
            low[v] = label[v]
        for c in kids[v]:
            low[v] = min(low[v], low[c])

    new_parent, new_weight, new_label = [], [], []
    stack = [(root, -1)]
    while stack:
        v, p = stack.pop()
        here = len(new_parent)
        new_parent.append(p)
        new_weight.append(float(weight[v]) if p >= 0 else 0.0)
        new_label.append(label[v] if p >= 0 else ROOT)
        for c in sorted(kids[v], key=low.__getitem__, reverse=True):
            stack.append((c, here))
    return Tree(n, tuple(new_parent), tuple(new_weight), tuple(new_label))


def clades(t):
    """Leaf-label cluster of every internal edge"""
    return frozenset(t.cluster(v) for v in t.internal_edges)


def leaf_path_length(t, a, b, weighted=True):
    u, v = t.leaf(a), t.leaf(b)
    depth = t.depth
    total = 0.0 if weighted else 0
    while u != v:
        if depth[u] < depth[v]:
            u, v = v, u
        total += t.weight[u] if weighted else 1
        u = t.parent[u]
    return total


def path_length_matrix(t, weighted=True):
    """All-pairs leaf path lengths, indexed by label (row and column 0 unused)"""
    neighbours = [list(t.children[v]) for v in range(t.vertex_count)]
    for v in range(1, t.vertex_count):
        neighbours[v].append(t.parent[v])

    def step(u, v):
        if not weighted:
            return 1.0
        return t.weight[v] if t.parent[v] == u else t.weight[u]

    matrix = np.zeros((t.n + 1, t.n + 1))
    for a in range(1, t.n + 1):
        start = t.leaf_vertices[a]
        dist = {start: 0.0}
        stack = [start]
        while stack:
            u = stack.pop()
            for v in neighbours[u]:
                if v not in dist:
                    dist[v] = dist[u] + step(u, v)
                    stack.append(v)
        for b in range(1, t.n + 1):
            matrix[a, b] = dist[t.leaf_vertices[b]]
    return matrix


def contract(t, edge):
    """Collapse an internal edge, merging its two endpoints"""
    u, v = edge
    if 0 <= v < t.vertex_count and t.parent[v] == u:
        child = v
    elif 0 <= u < t.vertex_count and t.parent[u] == v:
        child = u
    else:
        raise DomainError(f"{edge} is not an edge of the tree")
    if t.is_leaf(child):
        raise LeafEdgeError(f"edge {edge} leads to leaf {t.label[child]}")

    parent = list(t.parent)
    for c in t.children[child]:
        parent[c] = parent[child]
    parent[child] = DETACHED
    return _build(t.n, parent, t.weight, t.label)


def count_binary_topologies(n):
    """(2n-3)!!, the number of rooted binary topologies on n labelled leaves"""
    if n < 2:
        raise SizeError(f"need at least two leaves, got {n}")
    count = math.prod(range(1, 2 * n - 2, 2))
    if count > INT64_MAX:
        raise TopologyCountOverflow(f"(2*{n}-3)!! does not fit in a signed 64-bit integer")
    return count


def tree_from_clusters(n, clusters, leaf_weight=DEFAULT_BRANCH_LENGTH):
    """
    Build the unique minimal tree with the given internal clusters.

    clusters maps each leaf-label set to the weight of its edge; leaf_weight
    is a number or a mapping label -> weight.
    """
    universe = set(range(1, n + 1))
    for cluster in clusters:
        if not 2 <= len(cluster) < n or not set(cluster) <= universe:
            raise ShapeError(f"{sorted(cluster)} is not an internal cluster over 1..{n}")

    parent, weight, label = [-1], [0.0], [ROOT]
    deepest = [ROOT] * (n + 1)
    for cluster in sorted(clusters, key=lambda c: (-len(c), sorted(c))):
        holders = {deepest[lab] for lab in cluster}
        if len(holders) != 1:
            raise ShapeError(f"cluster {sorted(cluster)} overlaps another cluster")
        v = len(parent)
        parent.append(holders.pop())
        weight.append(clusters[cluster])
        label.append(INTERNAL)
        for lab in cluster:
            deepest[lab] = v
    for lab in range(1, n + 1):
        parent.append(deepest[lab])
        weight.append(leaf_weight[lab] if hasattr(leaf_weight, "__getitem__") else leaf_weight)
        label.append(lab)
    return _build(n, parent, weight, label)


def enumerate_binary_topologies(n):
    """Every rooted binary topology on n leaves, unit weights, n <= 8"""
    if not 2 <= n <= MAX_ENUMERATION_LEAVES:
        raise SizeError(f"enumeration supports 2..{MAX_ENUMERATION_LEAVES} leaves, got {n}")

    def ordered(family):
        return sorted(family, key=lambda c: (len(c), sorted(c)))

    families = [frozenset({frozenset({1}), frozenset({2}), frozenset({1, 2})})]
    for k in range(3, n + 1):
        grown = []
        for family in families:
            for c in ordered(family):
                new = {x | {k} if x > c else x for x in family}
                new.update((c, c | {k}, frozenset({k})))
                grown.append(frozenset(new))
        families = grown
    logger.debug(f"Enumerated {len(families)} binary topologies on {n} leaves")
    return [
        tree_from_clusters(n, {c: DEFAULT_BRANCH_LENGTH for c in family if 1 < len(c) < n})
        for family in families
    ]


def restrict(t, leaves):
    """
    Minimal rooted subtree on the given leaves.

    Degree-2 vertices are suppressed by adding up their edge weights and the
    kept labels are renumbered 1..m in increasing order.
    """
    keep = sorted(set(leaves))
    if len(keep) < 2:
        raise SizeError("a restriction needs at least two leaves")
    for lab in keep:
        t.leaf(lab)
    rank = {lab: i for i, lab in enumerate(keep, start=1)}
    keep_mask = labels_to_mask(keep)
    count = [(mask & keep_mask).bit_count() for mask in t.leaf_mask]

    top = ROOT
    while True:
        inner = [c for c in t.children[top] if count[c] == len(keep)]
        if not inner:
            break
        top = inner[0]

    parent, weight, label = [-1], [0.0], [ROOT]
    stack = [(c, ROOT, t.weight[c]) for c in t.children[top] if count[c]]
    while stack:
        v, anchor, acc = stack.pop()
        live = [c for c in t.children[v] if count[c]]
        if not live:
            parent.append(anchor)
            weight.append(acc)
            label.append(rank[t.label[v]])
        elif len(live) == 1:
            stack.append((live[0], anchor, acc + t.weight[live[0]]))
        else:
            here = len(parent)
            parent.append(anchor)
            weight.append(acc)
            label.append(INTERNAL)
            stack.extend((c, here, t.weight[c]) for c in live)
    return _build(len(keep), parent, weight, label)


def relabel(t, mapping):
    """Same tree with leaf label l replaced by mapping[l]"""
    if sorted(mapping) != list(range(1, t.n + 1)) or sorted(mapping.values()) != list(range(1, t.n + 1)):
        raise LabelError(f"relabelling must be a permutation of 1..{t.n}")
    label = [mapping[lab] if lab > 0 else lab for lab in t.label]
    return _build(t.n, t.parent, t.weight, label)


def random_binary_tree(n, rng, weights=None):
    """
    Uniform random rooted binary tree on n leaves.

    Leaves are inserted one at a time on a uniformly chosen edge, the slot
    above the root included. weights draws one edge weight from rng and
    defaults to uniform on (0, 1].
    """
    if n < 2:
        raise SizeError(f"need at least two leaves, got {n}")
    if weights is None:
        def weights(r):
            return 1.0 - r.random()

    parent = [-1, ROOT, ROOT]
    label = [ROOT, 1, 2]
    for k in range(3, n + 1):
        x = rng.randrange(len(parent))
        joint = len(parent)
        label.append(INTERNAL)
        if x == ROOT:
            parent.append(ROOT)
            for v in range(1, joint):
                if parent[v] == ROOT:
                    parent[v] = joint
        else:
            parent.append(parent[x])
            parent[x] = joint
        parent.append(joint if x != ROOT else ROOT)
        label.append(k)
    weight = [0.0] + [weights(rng) for _ in range(len(parent) - 1)]
    return _build(n, parent, weight, label)


def weight_identical(a, b):
    """Same labels, same clusters, same weight on every edge"""
    return a.n == b.n and a.edge_weights() == b.edge_weights()


def same_topology(a, b):
    return a.n == b.n and clades(a) == clades(b)
