"""
Splits of the label set {0..n}: canonical form, lexicographic order,
compatibility, split vectors and reconstruction of a tree from its splits.
"""
import logging
import math
import re
from collections.abc import Sequence
from dataclasses import dataclass
from functools import cached_property, lru_cache, total_ordering
from itertools import combinations

from .exceptions import (
    DomainError,
    IncompatibleSplits,
    SizeError,
    SizeMismatch,
    VectorFormatError,
)
from .tree_model import format_number, labels_to_mask, mask_to_labels, tree_from_clusters

logger = logging.getLogger(__name__)

# split_index and split_at look positions up in an explicit enumeration up to
# this many leaves and use the ranking formula above it
ENUMERATION_LIMIT = 7

_HEADER = re.compile(r"^n\s*=\s*(\d+)$")
_INDEXED = re.compile(r"^(\d+)\s+(\S+)$")
_EXPLICIT = re.compile(r"^\{([^}]*)\}\s+(\S+)$")


def canonical_side(block, n):
    """
    Canonical block of the partition block | {0..n} - block.

    The smaller block wins; between equal halves (n odd) the one holding 0.
    """
    block = set(block)
    if not block <= set(range(n + 1)):
        raise DomainError(f"{sorted(block)} is not a subset of 0..{n}")
    other = set(range(n + 1)) - block
    if len(block) < 2 or len(other) < 2:
        raise DomainError(f"{sorted(block)} does not induce a split of 0..{n}: both blocks need two labels")
    if len(block) < len(other):
        side = block
    elif len(block) > len(other):
        side = other
    else:
        side = block if 0 in block else other
    return tuple(sorted(side))


@total_ordering
@dataclass(frozen=True)
class Split:
    """A two-block partition of {0..n}, stored by its canonical block"""
    side: tuple
    n: int

    def __post_init__(self):
        side = tuple(self.side)
        object.__setattr__(self, "side", side)
        if self.n < 3:
            raise SizeError(f"splits need n >= 3, got {self.n}")
        if side != canonical_side(side, self.n):
            raise DomainError(f"{set(side)} is not the canonical block of its split")

    def __lt__(self, other):
        if not isinstance(other, Split):
            return NotImplemented
        return self.sort_key < other.sort_key

    def __str__(self):
        rest = sorted(set(range(self.n + 1)) - set(self.side))
        return "{" + ",".join(map(str, self.side)) + "}|{" + ",".join(map(str, rest)) + "}"

    @classmethod
    def from_block(cls, block, n):
        return cls(canonical_side(block, n), n)

    @property
    def sort_key(self):
        return (self.n, len(self.side), self.side)

    @cached_property
    def mask(self):
        return labels_to_mask(self.side)

    @property
    def full_mask(self):
        return (1 << (self.n + 1)) - 1

    @cached_property
    def cluster_mask(self):
        """Mask of the block without the root label 0"""
        return self.mask if not self.mask & 1 else self.full_mask ^ self.mask

    @property
    def cluster(self):
        return mask_to_labels(self.cluster_mask)


def _k_offset(n, k):
    return sum(math.comb(n + 1, j) for j in range(2, k))


def sigma_size(n):
    """Number of splits of {0..n}; equals 2**n - n - 2"""
    size = _k_offset(n, n // 2 + 1)
    if n % 2:
        size += math.comb(n, n // 2)
    return size


def _iter_splits(n):
    for k in range(2, n // 2 + 1):
        for side in combinations(range(n + 1), k):
            yield Split(side, n)
    if n % 2:
        for rest in combinations(range(1, n + 1), n // 2):
            yield Split((0,) + rest, n)


@lru_cache(maxsize=None)
def _enumeration(n):
    splits = tuple(_iter_splits(n))
    return splits, {s: i for i, s in enumerate(splits, start=1)}


def _lex_rank(combo, universe):
    k = len(combo)
    rank = 0
    prev = -1
    for i, c in enumerate(combo):
        for v in range(prev + 1, c):
            rank += math.comb(universe - 1 - v, k - 1 - i)
        prev = c
    return rank


def _lex_unrank(rank, k, universe):
    combo = []
    v = 0
    for i in range(k):
        while True:
            count = math.comb(universe - 1 - v, k - 1 - i)
            if rank < count:
                break
            rank -= count
            v += 1
        combo.append(v)
        v += 1
    return tuple(combo)


def rank_split(s):
    """1-based position of s in the canonical order, by combinatorial ranking"""
    n, k = s.n, len(s.side)
    if k <= n // 2:
        return _k_offset(n, k) + _lex_rank(s.side, n + 1) + 1
    rest = tuple(x - 1 for x in s.side[1:])
    return _k_offset(n, n // 2 + 1) + _lex_rank(rest, n) + 1


def unrank_split(index, n):
    if not 1 <= index <= sigma_size(n):
        raise DomainError(f"split index {index} outside 1..{sigma_size(n)} for n={n}")
    rank = index - 1
    for k in range(2, n // 2 + 1):
        block = math.comb(n + 1, k)
        if rank < block:
            return Split(_lex_unrank(rank, k, n + 1), n)
        rank -= block
    rest = _lex_unrank(rank, n // 2, n)
    return Split((0,) + tuple(x + 1 for x in rest), n)


@dataclass(frozen=True)
class SplitOrder(Sequence):
    """
    All splits of {0..n} in lexicographic order: shorter canonical blocks
    first, equal lengths elementwise. Elements are produced on demand.
    """
    n: int

    def __post_init__(self):
        if self.n < 3:
            raise SizeError(f"no internal splits exist for n={self.n}")

    def __len__(self):
        return sigma_size(self.n)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[k] for k in range(*i.indices(len(self)))]
        if i < 0:
            i += len(self)
        return split_at(i + 1, self.n)

    def __iter__(self):
        if self.n <= ENUMERATION_LIMIT:
            return iter(_enumeration(self.n)[0])
        return _iter_splits(self.n)

    def __contains__(self, s):
        return isinstance(s, Split) and s.n == self.n


def canonical_order(n):
    return SplitOrder(n)


def split_index(s, order=None):
    if order is not None and order.n != s.n:
        raise SizeMismatch(f"split over n={s.n} looked up in the order for n={order.n}")
    if s.n <= ENUMERATION_LIMIT:
        return _enumeration(s.n)[1][s]
    return rank_split(s)


def split_at(index, n):
    if n < 3:
        raise SizeError(f"no internal splits exist for n={n}")
    if n <= ENUMERATION_LIMIT:
        splits = _enumeration(n)[0]
        if not 1 <= index <= len(splits):
            raise DomainError(f"split index {index} outside 1..{len(splits)} for n={n}")
        return splits[index - 1]
    return unrank_split(index, n)


def weighted_splits(t, keep_zero=False):
    """Split of every internal edge mapped to its weight"""
    return {
        Split.from_block(t.cluster(v), t.n): t.weight[v]
        for v in t.internal_edges
        if keep_zero or t.weight[v] > 0
    }


def splits_of(t):
    return frozenset(weighted_splits(t, keep_zero=True))


def compatible(a, b):
    if a.n != b.n:
        raise SizeMismatch(f"splits over n={a.n} and n={b.n}")
    full = a.full_mask
    left, right = a.mask, full ^ a.mask
    up, down = b.mask, full ^ b.mask
    return not (left & up and left & down and right & up and right & down)


def incompatible_pair(ss):
    """First incompatible pair in canonical order, or None"""
    ordered = sorted(ss)
    for i, a in enumerate(ordered):
        for b in ordered[i + 1:]:
            if not compatible(a, b):
                return a, b
    return None


def is_compatible_set(ss):
    return incompatible_pair(ss) is None


@dataclass(frozen=True)
class SplitVector:
    """Sparse coordinates of a tree: canonical split index -> positive weight"""
    n: int
    entries: tuple = ()

    def __post_init__(self):
        items = self.entries.items() if hasattr(self.entries, "items") else self.entries
        entries = tuple(sorted((int(i), float(w)) for i, w in items))
        object.__setattr__(self, "entries", entries)
        if self.n < 2:
            raise SizeError(f"split vectors need n >= 2, got {self.n}")
        if len(entries) > max(self.n - 2, 0):
            raise SizeError(f"{len(entries)} entries exceed the n-2={self.n - 2} internal edges of a tree")
        size = sigma_size(self.n) if self.n >= 3 else 0
        seen = set()
        for index, weight in entries:
            if not 1 <= index <= size:
                raise DomainError(f"split index {index} outside 1..{size} for n={self.n}")
            if index in seen:
                raise DomainError(f"split index {index} appears twice")
            if not math.isfinite(weight) or weight <= 0:
                raise DomainError(f"split index {index} has non-positive weight {weight}")
            seen.add(index)

    def __len__(self):
        return len(self.entries)

    @classmethod
    def from_splits(cls, n, weights):
        return cls(n, {split_index(s): w for s, w in weights.items() if w > 0})

    @property
    def weights(self):
        return dict(self.entries)

    @property
    def norm(self):
        return math.sqrt(math.fsum(w * w for _, w in self.entries))

    def splits(self):
        return {split_at(i, self.n): w for i, w in self.entries}


def encode(t):
    return SplitVector.from_splits(t.n, weighted_splits(t))


def split_to_tree(v):
    """Unique minimal tree with the vector's splits; leaf edges get weight 1"""
    splits = v.splits()
    pair = incompatible_pair(splits)
    if pair is not None:
        raise IncompatibleSplits(*pair)
    return tree_from_clusters(v.n, {s.cluster: w for s, w in splits.items()})


def binary_vector(splits, n):
    """Dense 0/1 indicator of a split set over the canonical order (n <= 7)"""
    if n > ENUMERATION_LIMIT:
        raise SizeError(f"dense vectors are limited to n <= {ENUMERATION_LIMIT}")
    chosen = {split_index(s) for s in splits}
    return tuple(int(i in chosen) for i in range(1, sigma_size(n) + 1))


def splits_from_binary(bits, n):
    if n > ENUMERATION_LIMIT:
        raise SizeError(f"dense vectors are limited to n <= {ENUMERATION_LIMIT}")
    if len(bits) != sigma_size(n):
        raise SizeMismatch(f"expected {sigma_size(n)} entries for n={n}, got {len(bits)}")
    return frozenset(split_at(i, n) for i, bit in enumerate(bits, start=1) if bit)


def parse_split_vectors(text):
    """
    Read split-vector blocks. Each block starts with an `n=<int>` line and
    lists `<index> <weight>` or `{a,b,c} <weight>` entries; `#` starts a
    comment line.
    """
    vectors = []
    n = None
    entries = None

    def close(line_no):
        if n is not None:
            try:
                vectors.append(SplitVector(n, entries))
            except (DomainError, SizeError) as e:
                raise VectorFormatError(str(e), line_no) from e

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        header = _HEADER.match(line)
        if header:
            close(line_no)
            n = int(header.group(1))
            entries = {}
            continue
        if n is None:
            raise VectorFormatError("entry before the first 'n=' header", line_no)
        indexed = _INDEXED.match(line)
        explicit = _EXPLICIT.match(line)
        try:
            if indexed:
                index = int(indexed.group(1))
                weight = float(indexed.group(2))
            elif explicit:
                block = [int(x) for x in explicit.group(1).split(",") if x.strip()]
                index = split_index(Split.from_block(block, n))
                weight = float(explicit.group(2))
            else:
                raise VectorFormatError(f"cannot read {line!r}", line_no)
        except (ValueError, DomainError, SizeError) as e:
            raise VectorFormatError(str(e), line_no) from e
        if index in entries:
            raise VectorFormatError(f"split index {index} given twice", line_no)
        entries[index] = weight
    close(None)
    return vectors


def format_split_vector(v, explicit=False):
    lines = [f"n={v.n}"]
    for index, weight in v.entries:
        if explicit:
            key = "{" + ",".join(map(str, split_at(index, v.n).side)) + "}"
        else:
            key = str(index)
        lines.append(f"{key} {format_number(weight)}")
    return "\n".join(lines) + "\n"
