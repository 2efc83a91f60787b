"""
Pairwise distance matrices over collections of trees
"""
import json
import logging
import os
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import classic_metrics
from .classic_metrics import MAST_MAX_LEAVES, ClassAssignment, DistanceReport
from .conf import DEFAULT_TOLERANCES
from .exceptions import (
    DomainError,
    EngineError,
    LabelSetMismatch,
    PhyloDistError,
    SizeError,
    TreeInputError,
)
from .geodesic import cone_path_length, geodesic_distance
from .splits import encode, parse_split_vectors, split_to_tree
from .tree_model import parse_newick

logger = logging.getLogger(__name__)

METRICS = (
    "rf", "rfl", "quartet", "triplet", "triplet-length", "mast", "align",
    "node", "node2", "cophenetic", "simprob", "geodesic", "cone",
)
FORMATS = ("tsv", "json")

_SCOPE = re.compile(r"^tree\s*=\s*(\d+)$")
_CLASS_LINE = re.compile(r"^(\d+)\s+(\d+)$")


@dataclass(frozen=True)
class RunConfig:
    metric: str
    inputs: tuple
    output_format: str = "tsv"
    tolerances: object = DEFAULT_TOLERANCES
    jobs: int = 1
    k: int = 1
    mast_max_leaves: int = MAST_MAX_LEAVES
    class_map: str = None
    out: str = None
    trace: str = None

    def __post_init__(self):
        if self.metric not in METRICS:
            raise DomainError(f"unknown metric {self.metric!r}; choose from {', '.join(METRICS)}")
        if not self.inputs:
            raise SizeError("at least one input file is needed")
        if self.output_format not in FORMATS:
            raise DomainError(f"unknown format {self.output_format!r}; choose tsv or json")
        if self.jobs < 1:
            raise DomainError(f"jobs must be positive, got {self.jobs}")
        if self.k not in (1, 2):
            raise DomainError(f"node distance exponent must be 1 or 2, got {self.k}")


@dataclass(frozen=True)
class LoadedTree:
    tree: object
    source: str


@dataclass
class MatrixResult:
    metric: str
    values: np.ndarray
    reports: dict = field(default_factory=dict)
    traces: list = field(default_factory=list)

    @property
    def flagged(self):
        return {cell: r for cell, r in sorted(self.reports.items()) if r.flags or r.notes}


def content_lines(text):
    """(line number, stripped line) for every non-blank, non-comment line"""
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line and not line.startswith("#"):
            yield line_no, line


def is_vector_text(text):
    first = next(content_lines(text), None)
    return first is not None and first[1].startswith("n=")


def load_trees(path):
    """Trees of one file: a Newick tree per line, or split-vector blocks"""
    text = Path(path).read_text()
    if is_vector_text(text):
        try:
            vectors = parse_split_vectors(text)
            return [LoadedTree(split_to_tree(v), f"{path}:block {k}") for k, v in enumerate(vectors, start=1)]
        except TreeInputError as e:
            raise TreeInputError(f"{path}: {type(e).__name__}: {e}") from e
    loaded = []
    for line_no, line in content_lines(text):
        try:
            loaded.append(LoadedTree(parse_newick(line), f"{path}:{line_no}"))
        except TreeInputError as e:
            raise TreeInputError(f"{path}:{line_no}: {type(e).__name__}: {e}") from e
    return loaded


def load_collection(paths):
    trees = [item for path in paths for item in load_trees(path)]
    if not trees:
        raise SizeError("the input files hold no trees")
    n = trees[0].tree.n
    for item in trees[1:]:
        if item.tree.n != n:
            raise LabelSetMismatch(f"{item.source} has {item.tree.n} leaves, {trees[0].source} has {n}")
    logger.info(f"Read {len(trees)} trees over {n} leaves from {len(paths)} files")
    return trees


def parse_class_map(text):
    """
    `vertex class` lines apply to every tree; lines after a `tree=<i>` header
    apply to tree i only. Returns {None or tree index: {vertex: class}}.
    """
    scopes = {None: {}}
    scope = None
    for line_no, line in content_lines(text):
        header = _SCOPE.match(line)
        if header:
            scope = int(header.group(1))
            scopes.setdefault(scope, {})
            continue
        entry = _CLASS_LINE.match(line)
        if entry is None:
            raise TreeInputError(f"class map line {line_no}: expected 'vertex class', got {line!r}")
        scopes[scope][int(entry.group(1))] = int(entry.group(2))
    return scopes


def class_assignment_for(scopes, index, tree):
    merged = dict(scopes.get(None, {}))
    merged.update(scopes.get(index, {}))
    internal = {v for v in range(tree.vertex_count) if not tree.is_leaf(v)}
    return ClassAssignment({v: c for v, c in merged.items() if v in internal})


def compute_pair(
    metric, a, b, tolerances=DEFAULT_TOLERANCES, k=1, ca=None, cb=None, mast_max_leaves=MAST_MAX_LEAVES
):
    """DistanceReport for one pair, plus the geodesic trace when there is one"""
    if metric == "geodesic":
        result = geodesic_distance(a, b, tolerances)
        return DistanceReport("geodesic", result.distance, notes=result.notes), result.as_dict()
    if metric == "cone":
        return DistanceReport("cone", cone_path_length(encode(a), encode(b))), None
    if metric == "cophenetic":
        return classic_metrics.cophenetic(a, b, ca, cb), None
    if metric in ("node", "node2"):
        return classic_metrics.node_dist(a, b, 2 if metric == "node2" else k), None
    if metric == "mast":
        return classic_metrics.mast(a, b, mast_max_leaves), None
    engines = {
        "rf": classic_metrics.rf,
        "rfl": classic_metrics.rfl,
        "quartet": classic_metrics.quartet,
        "triplet": classic_metrics.triplet,
        "triplet-length": classic_metrics.triplet_length,
        "align": classic_metrics.align,
        "simprob": classic_metrics.similarity_prob,
    }
    return engines[metric](a, b), None


def _cell(task):
    i, j, metric, a, b, options = task
    try:
        report, trace = compute_pair(metric, a, b, **options)
        return i, j, report, trace, None
    except PhyloDistError as e:
        return i, j, None, None, (isinstance(e, EngineError), f"{type(e).__name__}: {e}")


def _tasks(trees, config, assignments):
    options = {"tolerances": config.tolerances, "k": config.k, "mast_max_leaves": config.mast_max_leaves}
    for i in range(len(trees)):
        for j in range(i + 1):
            extra = {}
            if config.metric == "cophenetic":
                extra = {"ca": assignments[i], "cb": assignments[j]}
            yield i, j, config.metric, trees[i], trees[j], {**options, **extra}


def compute_matrix(trees, config, class_scopes=None):
    """
    Fill the lower triangle, diagonal included, and mirror it. The first
    failing cell in row order aborts the run with the pair named.
    """
    assignments = None
    if config.metric == "cophenetic":
        if class_scopes is None:
            assignments = [None] * len(trees)
        else:
            assignments = [class_assignment_for(class_scopes, i, t) for i, t in enumerate(trees)]
    tasks = list(_tasks(trees, config, assignments))

    if config.jobs > 1 and len(tasks) > 1:
        chunk = max(1, len(tasks) // (config.jobs * 4))
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            outcomes = list(pool.map(_cell, tasks, chunksize=chunk))
    else:
        outcomes = [_cell(task) for task in tasks]

    size = len(trees)
    result = MatrixResult(config.metric, np.zeros((size, size)))
    for i, j, report, trace, failure in outcomes:
        if failure is not None:
            engine, message = failure
            error = EngineError if engine else TreeInputError
            raise error(f"pair ({i}, {j}): {message}")
        result.values[i, j] = result.values[j, i] = report.value
        result.reports[(i, j)] = report
        if trace is not None and i != j:
            result.traces.append({"i": i, "j": j, **trace})
    logger.info(f"Computed {len(tasks)} cells of the {config.metric} matrix with {config.jobs} jobs")
    return result


def default_jobs():
    from django.conf import settings

    configured = getattr(settings, "PHYLODIST", {}).get("DEFAULT_JOBS")
    return int(configured) if configured else (os.cpu_count() or 1)


def format_value(value):
    return f"{value:.12g}"


def format_tsv(result):
    size = result.values.shape[0]
    lines = ["\t" + "\t".join(str(j) for j in range(size))]
    for i in range(size):
        lines.append(f"{i}\t" + "\t".join(format_value(v) for v in result.values[i]))
    return "\n".join(lines) + "\n"


def _json_value(value):
    value = float(value)
    return None if np.isnan(value) else value


def format_json(result):
    document = {
        "metric": result.metric,
        "size": int(result.values.shape[0]),
        "matrix": [[_json_value(v) for v in row] for row in result.values],
    }
    return json.dumps(document, indent=2) + "\n"


def format_flags(report):
    return ", ".join(sorted(report.flags))


def format_report(result):
    cells = [{"i": i, "j": j, **report.as_dict()} for (i, j), report in result.flagged.items()]
    return json.dumps({"metric": result.metric, "flagged": cells}, indent=2) + "\n"


def format_traces(result):
    return "".join(json.dumps(trace, sort_keys=True) + "\n" for trace in result.traces)
