"""
Minimum-weight vertex cover of a vertex-weighted bipartite incompatibility
graph, through maximum flow.

The flow network is implicit: a source feeds every left vertex with capacity
equal to its weight, every arc runs left to right with unbounded capacity,
and every right vertex drains into the sink with capacity equal to its
weight.
"""
import logging
import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

from .conf import FLOW_EPSILON
from .exceptions import EmptySide
from .splits import compatible

logger = logging.getLogger(__name__)

SOURCE = ("s", -1)
SINK = ("t", -1)
LEFT = "L"
RIGHT = "R"


@dataclass(frozen=True)
class GraphVertex:
    split: object
    raw_weight: float
    weight: float


@dataclass(frozen=True)
class IncompatGraph:
    """Bipartite graph joining the incompatible splits of two edge sets"""
    left: tuple
    right: tuple
    arcs: tuple

    @cached_property
    def left_adjacency(self):
        adjacency = [[] for _ in self.left]
        for i, j in self.arcs:
            adjacency[i].append(j)
        return tuple(tuple(a) for a in adjacency)

    @cached_property
    def right_adjacency(self):
        adjacency = [[] for _ in self.right]
        for i, j in self.arcs:
            adjacency[j].append(i)
        return tuple(tuple(a) for a in adjacency)

    @property
    def vertex_count(self):
        return len(self.left) + len(self.right)


class FlowResult(NamedTuple):
    maxflow: float
    reachable_left: frozenset
    reachable_right: frozenset


class VertexCover(NamedTuple):
    left: frozenset
    right: frozenset
    weight: float


def _normalised(side, name):
    side = sorted(side, key=lambda item: item[0])
    norm_sq = math.fsum(w * w for _, w in side)
    if not side or norm_sq <= 0:
        raise EmptySide(f"the {name} side of the incompatibility graph is empty")
    return tuple(GraphVertex(s, w, w * w / norm_sq) for s, w in side)


def build_incompat_graph(a, b):
    """
    a and b are iterables of (split, weight). Vertex weights are squared
    weights over the side's squared norm, so each side sums to 1.
    """
    left = _normalised(a, "left")
    right = _normalised(b, "right")
    arcs = tuple(
        (i, j)
        for i, u in enumerate(left)
        for j, v in enumerate(right)
        if not compatible(u.split, v.split)
    )
    return IncompatGraph(left, right, arcs)


def graph_from_weights(left_weights, right_weights, arcs):
    """Graph with explicit vertex weights and arcs; splits are left unset"""
    left = tuple(GraphVertex(None, w, w) for w in left_weights)
    right = tuple(GraphVertex(None, w, w) for w in right_weights)
    return IncompatGraph(left, right, tuple(sorted(set(arcs))))


@dataclass
class FlowState:
    """Flow bookkeeping for one Edmonds-Karp run"""
    graph: IncompatGraph
    left_flow: list = field(default_factory=list)
    right_flow: list = field(default_factory=list)
    arc_flow: dict = field(default_factory=dict)

    def __post_init__(self):
        self.left_flow = [0.0] * len(self.graph.left)
        self.right_flow = [0.0] * len(self.graph.right)
        self.arc_flow = {arc: 0.0 for arc in self.graph.arcs}

    def left_residual(self, i):
        return self.graph.left[i].weight - self.left_flow[i]

    def right_residual(self, j):
        return self.graph.right[j].weight - self.right_flow[j]

    def push(self, path, amount):
        """Augment along a residual path; right-to-left steps cancel arc flow"""
        first, last = path[0], path[-1]
        self.left_flow[first[1]] += amount
        self.right_flow[last[1]] += amount
        for (side_u, u), (_, v) in zip(path, path[1:]):
            if side_u == LEFT:
                self.arc_flow[(u, v)] += amount
            else:
                self.arc_flow[(v, u)] -= amount

    @property
    def value(self):
        return math.fsum(self.left_flow)


def _saturate_arcs(state):
    """Push along every s -> a -> b -> t path once, in arc order"""
    for i, j in state.graph.arcs:
        delta = min(state.left_residual(i), state.right_residual(j))
        if delta > 0:
            state.left_flow[i] += delta
            state.right_flow[j] += delta
            state.arc_flow[(i, j)] += delta


def _residual_search(state, epsilon):
    """
    Breadth-first search from the source over residual capacity > epsilon.
    Returns the predecessor map of every reached vertex.
    """
    graph = state.graph
    previous = {}
    queue = deque()
    for i in range(len(graph.left)):
        if state.left_residual(i) > epsilon:
            previous[(LEFT, i)] = SOURCE
            queue.append((LEFT, i))
    while queue:
        side, u = queue.popleft()
        if side == LEFT:
            for j in graph.left_adjacency[u]:
                if (RIGHT, j) not in previous:
                    previous[(RIGHT, j)] = (LEFT, u)
                    queue.append((RIGHT, j))
        else:
            if SINK not in previous and state.right_residual(u) > epsilon:
                previous[SINK] = (RIGHT, u)
            for i in graph.right_adjacency[u]:
                if (LEFT, i) not in previous and state.arc_flow[(i, u)] > epsilon:
                    previous[(LEFT, i)] = (RIGHT, u)
                    queue.append((LEFT, i))
    return previous


def _path_to_sink(previous):
    path = []
    vertex = previous[SINK]
    while vertex != SOURCE:
        path.append(vertex)
        vertex = previous[vertex]
    path.reverse()
    return path


def _bottleneck(state, path):
    amount = min(state.left_residual(path[0][1]), state.right_residual(path[-1][1]))
    for (side_u, u), (_, v) in zip(path, path[1:]):
        if side_u == RIGHT:
            amount = min(amount, state.arc_flow[(v, u)])
    return amount


def edmonds_karp(g, epsilon=FLOW_EPSILON):
    """
    Maximum flow through the implicit network of g.

    A saturation pass over the length-3 paths precedes shortest-path
    augmentation; the vertices still reachable from the source at the end
    form the source side of a minimum cut.
    """
    state = FlowState(g)
    _saturate_arcs(state)

    augmentations = 0
    while True:
        previous = _residual_search(state, epsilon)
        if SINK not in previous:
            break
        path = _path_to_sink(previous)
        amount = _bottleneck(state, path)
        if amount <= epsilon:
            break
        state.push(path, amount)
        augmentations += 1

    logger.debug(
        f"Max flow {state.value:.6g} on {len(g.left)}x{len(g.right)} graph "
        f"with {len(g.arcs)} arcs after {augmentations} augmentations"
    )
    reachable_left = frozenset(i for side, i in previous if side == LEFT)
    reachable_right = frozenset(j for side, j in previous if side == RIGHT)
    return FlowResult(state.value, reachable_left, reachable_right)


def min_weight_vertex_cover(g, epsilon=FLOW_EPSILON):
    """Cover read off the minimum cut: unreachable left plus reachable right"""
    flow = edmonds_karp(g, epsilon)
    left = frozenset(range(len(g.left))) - flow.reachable_left
    right = flow.reachable_right
    return VertexCover(left, right, flow.maxflow)


def cover_weight(g, left, right):
    return math.fsum(g.left[i].weight for i in left) + math.fsum(g.right[j].weight for j in right)


def covers_all_arcs(g, left, right):
    return all(i in left or j in right for i, j in g.arcs)
