"""
Core Codes
==========
Words, constant-weight codes and set systems, with exact verification,
the packing/code correspondence, the code file format and a brute-force
optimality oracle for tiny instances.

Coordinates and points are 0-based; symbols are integers 0..q-1 with 0 the
zero symbol.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations, product
from math import comb
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple, Union

import numpy as np
from scipy import sparse

from .config import load_config
from .errors import FormatError, ParameterError, SearchBudgetExhausted

logger = logging.getLogger(__name__)

# Minimum distance of a code with fewer than two words
UNDEFINED = "undefined"

Block = Tuple[int, ...]


@dataclass(frozen=True, order=True)
class Word:
    """A length-n vector over {0, ..., q-1}"""
    symbols: Tuple[int, ...]
    q: int

    def __post_init__(self):
        object.__setattr__(self, 'symbols', tuple(int(s) for s in self.symbols))
        if self.q < 2:
            raise ParameterError(f"alphabet size must be >= 2, got q={self.q}")
        if not self.symbols:
            raise ParameterError("word length must be positive")
        for s in self.symbols:
            if not 0 <= s < self.q:
                raise ParameterError(f"symbol {s} outside [0, {self.q - 1}]")

    @classmethod
    def from_support(cls, n: int, block: Iterable[int], symbol: int, q: int) -> 'Word':
        symbols = [0] * n
        for point in block:
            symbols[point] = symbol
        return cls(tuple(symbols), q)

    @property
    def n(self) -> int:
        return len(self.symbols)

    @cached_property
    def support(self) -> Tuple[int, ...]:
        return tuple(i for i, s in enumerate(self.symbols) if s)

    @property
    def weight(self) -> int:
        return sum(1 for s in self.symbols if s)

    def sparse(self) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
        """(support, nonzero values) view"""
        support = self.support
        return support, tuple(self.symbols[i] for i in support)

    def __str__(self) -> str:
        return ''.join(str(s) if s < 10 else f"({s})" for s in self.symbols)


def hamming_distance(u: Word, v: Word) -> int:
    """Distance by merging the two sorted supports"""
    if u.n != v.n:
        raise ParameterError(f"length mismatch: {u.n} vs {v.n}")
    su, sv = u.support, v.support
    a, b = u.symbols, v.symbols
    i = j = distance = 0
    while i < len(su) and j < len(sv):
        if su[i] == sv[j]:
            distance += a[su[i]] != b[sv[j]]
            i += 1
            j += 1
        elif su[i] < sv[j]:
            distance += 1
            i += 1
        else:
            distance += 1
            j += 1
    return distance + (len(su) - i) + (len(sv) - j)


@dataclass(frozen=True)
class CodeParams:
    n: int
    d: int
    w: int
    q: int

    def __str__(self) -> str:
        return f"({self.n},{self.d},{self.w})_{self.q}"


@dataclass(frozen=True)
class Code:
    """A nonempty set of words with claimed parameters (n, d, w)_q.

    Words are kept sorted lexicographically and deduplicated.
    """
    words: Tuple[Word, ...]
    params: CodeParams
    provenance: str = ""

    def __post_init__(self):
        words = tuple(sorted(set(self.words)))
        if not words:
            raise ParameterError("a code must contain at least one word")
        p = self.params
        for word in words:
            if word.n != p.n or word.q != p.q:
                raise ParameterError(
                    f"word {word} does not match length {p.n} / alphabet {p.q}")
        object.__setattr__(self, 'words', words)

    @classmethod
    def build(cls, words: Iterable[Word], n: int, d: int, w: int, q: int,
              provenance: str = "") -> 'Code':
        return cls(tuple(words), CodeParams(n, d, w, q), provenance)

    @classmethod
    def from_array(cls, array: np.ndarray, d: int, w: int, q: int,
                   provenance: str = "") -> 'Code':
        array = np.asarray(array)
        n = array.shape[1]
        return cls.build((Word(tuple(row), q) for row in array.tolist()), n, d, w, q, provenance)

    def __len__(self) -> int:
        return len(self.words)

    def __iter__(self):
        return iter(self.words)

    @cached_property
    def array(self) -> np.ndarray:
        return np.array([w.symbols for w in self.words], dtype=np.int64)

    @property
    def n(self) -> int:
        return self.params.n

    def with_provenance(self, provenance: str) -> 'Code':
        return Code(self.words, self.params, provenance)


@dataclass(frozen=True)
class SetSystem:
    """Points 0..point_count-1 and a set of blocks"""
    point_count: int
    blocks: Tuple[Block, ...]

    def __post_init__(self):
        blocks = tuple(sorted(tuple(sorted(int(p) for p in b)) for b in self.blocks))
        for block in blocks:
            if len(set(block)) != len(block):
                raise ParameterError(f"block {block} repeats a point")
            if block and (block[0] < 0 or block[-1] >= self.point_count):
                raise ParameterError(f"block {block} not contained in [0, {self.point_count})")
        for a, b in zip(blocks, blocks[1:]):
            if a == b:
                raise ParameterError(f"block {a} appears twice")
        object.__setattr__(self, 'blocks', blocks)

    def __len__(self) -> int:
        return len(self.blocks)

    @property
    def block_sizes(self) -> frozenset:
        return frozenset(len(b) for b in self.blocks)

    def is_uniform(self, sizes: Iterable[int]) -> bool:
        return self.block_sizes <= frozenset(sizes)

    @cached_property
    def block_set(self) -> frozenset:
        return frozenset(self.blocks)


@dataclass
class VerificationReport:
    valid: bool
    actual_min_distance: Union[int, str]
    weight_violations: List[Word] = field(default_factory=list)
    distance_violations: List[Tuple[Word, Word, int]] = field(default_factory=list)
    weight_violation_count: int = 0
    distance_violation_count: int = 0

    def to_dict(self) -> Dict:
        return {
            "valid": self.valid,
            "actual_min_distance": self.actual_min_distance,
            "weight_violation_count": self.weight_violation_count,
            "distance_violation_count": self.distance_violation_count,
            "weight_violations": [str(w) for w in self.weight_violations],
            "distance_violations": [
                {"u": str(u), "v": str(v), "distance": dist}
                for u, v, dist in self.distance_violations
            ],
        }


def _dense_block(arr: np.ndarray, start: int, stop: int, d: int):
    """Distances from rows [start, stop) to every later row"""
    m = arr.shape[0]
    dist = (arr[start:stop, None, :] != arr[None, :, :]).sum(axis=2)
    upper = np.arange(m)[None, :] > np.arange(start, stop)[:, None]
    if not upper.any():
        return None, np.empty((0, 3), dtype=np.int64)
    local_min = int(dist[upper].min())
    bad_i, bad_j = np.nonzero(upper & (dist < d))
    bad = np.stack([bad_i + start, bad_j, dist[bad_i, bad_j]], axis=1)
    return local_min, bad


def _dense_pairs(arr: np.ndarray, d: int, workers: int):
    m, n = arr.shape
    rows_per_chunk = max(1, 2_000_000 // max(1, m * n))
    bounds = [(s, min(m, s + rows_per_chunk)) for s in range(0, m - 1, rows_per_chunk)]
    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda b: _dense_block(arr, b[0], b[1], d), bounds))
    else:
        results = [_dense_block(arr, s, e, d) for s, e in bounds]
    mins = [r[0] for r in results if r[0] is not None]
    bad = np.concatenate([r[1] for r in results]) if results else np.empty((0, 3), dtype=np.int64)
    return min(mins), bad


def _sparse_pairs(arr: np.ndarray, d: int, w: int, q: int):
    """Pairwise distances of a constant-weight code through incidence products.

    For weight-w words u, v with |supp u & supp v| = o and g agreeing nonzero
    coordinates, d(u, v) = 2w - o - g. Pairs with disjoint supports sit at 2w.
    """
    m, n = arr.shape
    rows, cols = np.nonzero(arr)
    ones = np.ones(len(rows), dtype=np.int32)
    supports = sparse.csr_matrix((ones, (rows, cols)), shape=(m, n))
    symbols = sparse.csr_matrix((ones, (rows, cols * q + arr[rows, cols])), shape=(m, n * q))
    overlap = sparse.triu(supports @ supports.T + symbols @ symbols.T, k=1).tocoo()
    dist = 2 * w - overlap.data
    total_pairs = m * (m - 1) // 2
    candidates = []
    if overlap.nnz:
        candidates.append(int(dist.min()))
    if total_pairs > overlap.nnz:
        candidates.append(2 * w)
    mask = dist < d
    bad = np.stack([overlap.row[mask], overlap.col[mask], dist[mask]], axis=1).astype(np.int64)
    if len(bad):
        bad = bad[np.lexsort((bad[:, 1], bad[:, 0]))]
    return min(candidates), bad


def conflict_pairs(arr: np.ndarray, d: int, w: int, q: int) -> np.ndarray:
    """Rows (i, j, distance), i < j, of every word pair closer than d"""
    if len(arr) < 2:
        return np.empty((0, 3), dtype=np.int64)
    if len(arr) <= load_config().DENSE_VERIFY_LIMIT or d > 2 * w:
        return _dense_pairs(arr, d, 1)[1]
    return _sparse_pairs(arr, d, w, q)[1]


def verify_code(code: Code, workers: Optional[int] = None,
                max_reported: Optional[int] = None) -> VerificationReport:
    """Check constant weight w and pairwise distance >= d.

    The report is the same whichever kernel or worker count is used.
    """
    config = load_config()
    workers = workers or config.WORKERS
    max_reported = config.MAX_REPORTED_VIOLATIONS if max_reported is None else max_reported
    p = code.params
    arr = code.array
    m = len(code)

    weights = (arr != 0).sum(axis=1)
    bad_weight = np.flatnonzero(weights != p.w)
    weight_violations = [code.words[i] for i in bad_weight[:max_reported]]

    if m < 2:
        min_distance: Union[int, str] = UNDEFINED
        bad = np.empty((0, 3), dtype=np.int64)
    elif len(bad_weight) or p.d > 2 * p.w or m <= config.DENSE_VERIFY_LIMIT:
        min_distance, bad = _dense_pairs(arr, p.d, workers)
    else:
        min_distance, bad = _sparse_pairs(arr, p.d, p.w, p.q)

    distance_violations = [
        (code.words[i], code.words[j], int(dist)) for i, j, dist in bad[:max_reported].tolist()
    ]
    report = VerificationReport(
        valid=not len(bad_weight) and not len(bad),
        actual_min_distance=min_distance,
        weight_violations=weight_violations,
        distance_violations=distance_violations,
        weight_violation_count=int(len(bad_weight)),
        distance_violation_count=int(len(bad)),
    )
    if not report.valid:
        logger.debug(f"{p} code invalid: {report.weight_violation_count} weight, "
                     f"{report.distance_violation_count} distance violations")
    return report


def system_to_code(system: SetSystem, q: int = 2, symbol: int = 1,
                   provenance: str = "") -> Code:
    """Incidence vectors of the blocks, as an (n, 2(k-t+1), k)_2 style code.

    The claimed distance is the true minimum over the blocks (2k when no two
    blocks meet), so the result always verifies.
    """
    sizes = system.block_sizes
    if not system.blocks:
        raise ParameterError("system has no blocks; codes are nonempty")
    if len(sizes) != 1:
        raise ParameterError(f"system is not uniform: block sizes {sorted(sizes)}")
    k = next(iter(sizes))
    largest = 0
    blocks = [frozenset(b) for b in system.blocks]
    if len(blocks) > 1:
        largest = max(len(a & b) for a, b in combinations(blocks, 2)) if len(blocks) <= 2000 \
            else _max_pair_overlap(system)
    words = [Word.from_support(system.point_count, b, symbol, q) for b in system.blocks]
    return Code.build(words, system.point_count, 2 * (k - largest), k, q, provenance)


def _max_pair_overlap(system: SetSystem) -> int:
    m = len(system.blocks)
    rows = np.repeat(np.arange(m), [len(b) for b in system.blocks])
    cols = np.concatenate([np.array(b) for b in system.blocks])
    inc = sparse.csr_matrix((np.ones(len(rows), dtype=np.int32), (rows, cols)),
                            shape=(m, system.point_count))
    gram = sparse.triu(inc @ inc.T, k=1)
    return int(gram.max()) if gram.nnz else 0


def code_to_system(code: Code) -> SetSystem:
    if any(s > 1 for w in code.words for s in w.symbols):
        raise ParameterError("code is not binary")
    return SetSystem(code.n, tuple(w.support for w in code.words))


def packing_code_convert(obj: Union[SetSystem, Code]) -> Union[Code, SetSystem]:
    """SetSystem -> binary code of incidence vectors, Code -> system of supports"""
    if isinstance(obj, SetSystem):
        return system_to_code(obj)
    if isinstance(obj, Code):
        return code_to_system(obj)
    raise ParameterError(f"cannot convert {type(obj).__name__}")


# Code file format ----------------------------------------------------------

def format_code(code: Code) -> str:
    p = code.params
    lines = [f"{p.n} {p.d} {p.w} {p.q}"]
    lines.extend(' '.join(str(s) for s in w.symbols) for w in code.words)
    return '\n'.join(lines) + '\n'


def parse_code(text: str, provenance: str = "") -> Code:
    """Parse the code file format; lines starting with '#' are comments"""
    lines = [(i, line) for i, line in enumerate(text.splitlines(), start=1)
             if not line.lstrip().startswith('#')]
    if not lines:
        raise FormatError("empty code file", 1)
    header_line, header = lines[0][0], lines[0][1].split()
    if len(header) != 4:
        raise FormatError("header must be 'n d w q'", header_line)
    try:
        n, d, w, q = (int(x) for x in header)
    except ValueError:
        raise FormatError("header fields must be integers", header_line)
    words = []
    seen: Dict[Tuple[int, ...], int] = {}
    for lineno, line in lines[1:]:
        if not line.strip():
            continue
        try:
            symbols = tuple(int(x) for x in line.split())
        except ValueError:
            raise FormatError("word entries must be integers", lineno)
        if len(symbols) != n:
            raise FormatError(f"expected {n} symbols, found {len(symbols)}", lineno)
        if symbols in seen:
            raise FormatError(f"repeated word, first seen on line {seen[symbols]}", lineno)
        seen[symbols] = lineno
        try:
            words.append(Word(symbols, q))
        except ParameterError as e:
            raise FormatError(str(e), lineno)
    if not words:
        raise FormatError("code file contains no words", lines[-1][0])
    return Code.build(words, n, d, w, q, provenance)


def write_code(code: Code, path: Union[str, Path]) -> None:
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(format_code(code))


def read_code(path: Union[str, Path]) -> Code:
    try:
        with open(path, 'r', encoding='utf-8') as f:
            text = f.read()
    except OSError as e:
        raise FormatError(f"cannot read {path}: {e}") from e
    return parse_code(text, provenance=f"file:{Path(path).name}")


# Brute-force oracle ----------------------------------------------------------

def all_weight_words(n: int, w: int, q: int) -> np.ndarray:
    """Every weight-w word of length n, in lexicographic order"""
    rows = []
    for support in combinations(range(n), w):
        for values in product(range(1, q), repeat=w):
            row = [0] * n
            for i, v in zip(support, values):
                row[i] = v
            rows.append(row)
    arr = np.array(rows, dtype=np.int64).reshape(len(rows), n)
    if len(arr):
        arr = arr[np.lexsort(arr.T[::-1])]
    return arr


def _bitset(mask: np.ndarray) -> int:
    return int.from_bytes(np.packbits(mask, bitorder='little').tobytes(), 'little')


def _color_sort(candidates: int, adjacency: List[int]) -> Tuple[List[int], List[int]]:
    """Greedy colouring of the candidate set; colours give clique-size bounds"""
    order: List[int] = []
    colors: List[int] = []
    uncolored = candidates
    color = 0
    while uncolored:
        color += 1
        available = uncolored
        while available:
            low = available & -available
            v = low.bit_length() - 1
            available &= ~low & ~adjacency[v]
            uncolored &= ~low
            order.append(v)
            colors.append(color)
    return order, colors


class _OutOfBudget(Exception):
    pass


def max_clique(adjacency: List[int], vertex_count: int, budget: int) -> Tuple[List[int], int]:
    """Branch and bound with greedy colouring bounds over int bitsets.

    Returns (clique, nodes expanded). Raises _OutOfBudget with the best
    clique in args[0] when more than ``budget`` nodes are needed.
    """
    best: List[int] = []
    current: List[int] = []
    nodes = 0

    # seed with a lexicographic greedy clique
    candidates = (1 << vertex_count) - 1
    while candidates:
        low = candidates & -candidates
        v = low.bit_length() - 1
        best.append(v)
        candidates &= adjacency[v]

    def expand(candidates: int) -> None:
        nonlocal nodes, best
        nodes += 1
        if nodes > budget:
            raise _OutOfBudget(list(best))
        order, colors = _color_sort(candidates, adjacency)
        for idx in range(len(order) - 1, -1, -1):
            if len(current) + colors[idx] <= len(best):
                return
            v = order[idx]
            current.append(v)
            remaining = candidates & adjacency[v]
            if remaining:
                expand(remaining)
            elif len(current) > len(best):
                best = list(current)
            current.pop()
            candidates &= ~(1 << v)

    if vertex_count:
        expand((1 << vertex_count) - 1)
    return sorted(best), nodes


def brute_force_max(n: int, d: int, w: int, q: int,
                    search_budget: Optional[int] = None) -> Tuple[int, Optional[Code]]:
    """Exact A_q(n, d, w) by clique search over the compatibility graph"""
    config = load_config()
    budget = search_budget or config.DEFAULT_BUDGET
    if w > n:
        return 0, None
    vertex_count = comb(n, w) * (q - 1) ** w
    if vertex_count > config.BRUTE_FORCE_VERTEX_LIMIT:
        raise ParameterError(
            f"instance too large for exhaustive search: {vertex_count} words "
            f"> {config.BRUTE_FORCE_VERTEX_LIMIT}")

    words = all_weight_words(n, w, q)
    adjacency = [_bitset((words != row).sum(axis=1) >= d) & ~(1 << i) for i, row in enumerate(words)]
    provenance = f"brute-force-clique({n},{d},{w},{q})"
    try:
        clique, nodes = max_clique(adjacency, len(words), budget)
    except _OutOfBudget as e:
        partial = Code.from_array(words[e.args[0]], d, w, q, provenance + ":partial")
        raise SearchBudgetExhausted(
            f"clique search for {CodeParams(n, d, w, q)} exceeded {budget} nodes",
            partial=partial, moves_used=budget)
    logger.debug(f"Clique search {CodeParams(n, d, w, q)}: size {len(clique)} after {nodes} nodes")
    witness = Code.from_array(words[clique], d, w, q, provenance)
    return len(clique), witness
