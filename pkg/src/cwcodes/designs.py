"""
Combinatorial Designs
=====================
Constructs and verifies the ingredients that get lifted into q-ary codes:
one- and near-one-factorizations, Steiner triple systems, Latin squares with
subsquares, {3}-GDDs and IGDDs (including disjoint pairs of type 5^1 1^{6t}),
greedy packings, the cyclic 2-(13,4,1) design and a randomized engine that
turns one design into several pairwise disjoint copies.

Every design returned by a public function has passed its full validity
check (pair coverage counted exhaustively).
"""

import logging
from collections import Counter
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from itertools import combinations
from math import comb
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np

from .config import load_config
from .core_codes import Block, SetSystem
from .errors import FormatError, ParameterError, SearchBudgetExhausted, VerificationError

logger = logging.getLogger(__name__)

Edge = Tuple[int, int]


# Domain types ---------------------------------------------------------------

@dataclass(frozen=True)
class Factorization:
    """Edge partition of K_n into (near-)one-factors"""
    n: int
    factors: Tuple[Tuple[Edge, ...], ...]
    near: bool = False

    def isolated_vertex(self, index: int) -> Optional[int]:
        covered = {v for e in self.factors[index] for v in e}
        missing = [v for v in range(self.n) if v not in covered]
        return missing[0] if len(missing) == 1 else None


@dataclass(frozen=True)
class GroupedDesign:
    """A K-GDD: blocks cover each cross-group pair exactly once"""
    base: SetSystem
    groups: Tuple[Tuple[int, ...], ...]
    block_size_set: frozenset = frozenset({3})

    @property
    def type_string(self) -> str:
        counts = Counter(len(g) for g in self.groups)
        return ' '.join(f"{size}^{counts[size]}" for size in sorted(counts, reverse=True))

    @property
    def point_count(self) -> int:
        return self.base.point_count

    @property
    def blocks(self) -> Tuple[Block, ...]:
        return self.base.blocks


@dataclass(frozen=True)
class IncompleteGDD:
    """A K-IGDD of type (g, h)^t: one hole per group, hole pairs uncovered"""
    base: SetSystem
    groups: Tuple[Tuple[int, ...], ...]
    holes: Tuple[Tuple[int, ...], ...]

    @property
    def blocks(self) -> Tuple[Block, ...]:
        return self.base.blocks


@dataclass(frozen=True)
class LatinSquare:
    n: int
    cells: Tuple[Tuple[int, ...], ...]
    # (rows, cols, symbols) of a marked subsquare
    subsquare: Optional[Tuple[Tuple[int, ...], Tuple[int, ...], Tuple[int, ...]]] = None

    @classmethod
    def from_array(cls, array: np.ndarray, subsquare=None) -> 'LatinSquare':
        return cls(len(array), tuple(tuple(int(x) for x in row) for row in array), subsquare)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.cells, dtype=np.int64).reshape(self.n, self.n)


@dataclass(frozen=True)
class Packing:
    """t-(n, w, lambda) packing; blocks may repeat when lambda > 1"""
    n: int
    w: int
    t: int
    lam: int
    blocks: Tuple[Block, ...]

    def as_system(self) -> SetSystem:
        return SetSystem(self.n, self.blocks)

    def __len__(self) -> int:
        return len(self.blocks)


@dataclass
class DisjointifyResult:
    systems: List[SetSystem]
    moves_used: int
    restarts: int
    # |B|^s < C(n, k) guarantees existence of the copies
    guaranteed_by_count: bool
    seed: int = 0
    # blocks of different copies share fewer than this many points
    separation: int = 0

    def to_dict(self) -> Dict:
        return {
            "copies": len(self.systems),
            "blocks_per_copy": len(self.systems[0]) if self.systems else 0,
            "moves_used": self.moves_used,
            "restarts": self.restarts,
            "guaranteed_by_count": self.guaranteed_by_count,
            "seed": self.seed,
            "separation": self.separation,
        }


# Verification ---------------------------------------------------------------

def pair_coverage(point_count: int, blocks: Iterable[Block]) -> np.ndarray:
    """Symmetric matrix of pair multiplicities (diagonal = replication)"""
    blocks = list(blocks)
    incidence = np.zeros((len(blocks), point_count), dtype=np.int64)
    for row, block in enumerate(blocks):
        incidence[row, list(block)] = 1
    return incidence.T @ incidence


def _off_diagonal(matrix: np.ndarray) -> np.ndarray:
    return ~np.eye(len(matrix), dtype=bool)


def verify_factorization(f: Factorization) -> None:
    n = f.n
    seen = np.zeros((n, n), dtype=np.int64)
    for index, factor in enumerate(f.factors):
        degree = Counter(v for e in factor for v in e)
        if any(c != 1 for c in degree.values()):
            raise VerificationError(f"factor {index} is not a matching")
        expected = n - 1 if f.near else n
        if len(degree) != expected:
            raise VerificationError(f"factor {index} covers {len(degree)} vertices, expected {expected}")
        for a, b in factor:
            seen[a, b] += 1
            seen[b, a] += 1
    if not (seen[_off_diagonal(seen)] == 1).all():
        raise VerificationError("factors do not partition the edges of K_n")
    if f.near:
        isolated = sorted(f.isolated_vertex(i) for i in range(len(f.factors)))
        if isolated != list(range(n)):
            raise VerificationError("some vertex is not isolated exactly once")


def verify_steiner(system: SetSystem, k: int = 3) -> None:
    if system.blocks and system.block_sizes != {k}:
        raise VerificationError(f"blocks are not all of size {k}")
    cover = pair_coverage(system.point_count, system.blocks)
    if not (cover[_off_diagonal(cover)] == 1).all():
        raise VerificationError(f"not a 2-({system.point_count},{k},1) design")


def _group_index(point_count: int, groups: Sequence[Sequence[int]]) -> np.ndarray:
    label = np.full(point_count, -1, dtype=np.int64)
    for gi, group in enumerate(groups):
        for p in group:
            if label[p] != -1:
                raise VerificationError(f"point {p} lies in two groups")
            label[p] = gi
    if (label < 0).any():
        raise VerificationError("groups do not cover every point")
    return label


def verify_gdd(gdd: GroupedDesign) -> None:
    base = gdd.base
    if base.blocks and not base.is_uniform(gdd.block_size_set):
        raise VerificationError(f"block sizes {sorted(base.block_sizes)} outside K")
    label = _group_index(base.point_count, gdd.groups)
    cover = pair_coverage(base.point_count, base.blocks)
    same_group = label[:, None] == label[None, :]
    if cover[same_group & _off_diagonal(cover)].any():
        raise VerificationError("a block contains two points of one group")
    if not (cover[~same_group] == 1).all():
        raise VerificationError("some cross-group pair is not covered exactly once")


def verify_igdd(igdd: IncompleteGDD) -> None:
    base = igdd.base
    label = _group_index(base.point_count, igdd.groups)
    in_hole = np.zeros(base.point_count, dtype=bool)
    for gi, hole in enumerate(igdd.holes):
        for p in hole:
            if label[p] != gi:
                raise VerificationError(f"hole point {p} outside its group")
            in_hole[p] = True
    cover = pair_coverage(base.point_count, base.blocks)
    uncovered = (label[:, None] == label[None, :]) | (in_hole[:, None] & in_hole[None, :])
    if cover[uncovered & _off_diagonal(cover)].any():
        raise VerificationError("a group or hole pair is covered")
    if not (cover[~uncovered] == 1).all():
        raise VerificationError("some required pair is not covered exactly once")


def verify_latin_square(square: LatinSquare) -> None:
    arr = square.array
    n = square.n
    target = np.arange(n)
    if not all((np.sort(arr, axis=1) == target).all(axis=1)):
        raise VerificationError("a row is not a permutation")
    if not all((np.sort(arr, axis=0) == target[:, None]).all(axis=0)):
        raise VerificationError("a column is not a permutation")
    if square.subsquare is not None:
        rows, cols, symbols = square.subsquare
        sub = arr[np.ix_(rows, cols)]
        if set(np.unique(sub).tolist()) != set(symbols):
            raise VerificationError("subsquare uses foreign symbols")
        k = len(symbols)
        if not all(len(set(r)) == k for r in sub.tolist()) or not all(len(set(c)) == k for c in sub.T.tolist()):
            raise VerificationError("subsquare is not Latin")


def verify_packing(packing: Packing) -> None:
    if any(len(set(b)) != packing.w for b in packing.blocks):
        raise VerificationError(f"blocks are not {packing.w}-subsets")
    counts = Counter(t for b in packing.blocks for t in combinations(sorted(b), packing.t))
    if counts and max(counts.values()) > packing.lam:
        raise VerificationError(f"some {packing.t}-subset lies in more than {packing.lam} blocks")


def intersection_size(a: SetSystem, b: SetSystem) -> int:
    if a.point_count != b.point_count:
        raise ParameterError(f"order mismatch: {a.point_count} vs {b.point_count}")
    return len(a.block_set & b.block_set)


def relabel(system: SetSystem, mapping: Union[Sequence[int], Dict[int, int]],
            point_count: Optional[int] = None) -> SetSystem:
    """Image of the system under a point map"""
    return SetSystem(point_count or system.point_count,
                     tuple(tuple(mapping[p] for p in b) for b in system.blocks))


def _child_seed(seed: int, *tags: int) -> int:
    return int(np.random.SeedSequence([seed, *tags]).generate_state(1)[0])


# Factorizations -------------------------------------------------------------

def one_factorization(n: int) -> Factorization:
    """Round-robin (circle method) one-factorization of K_n"""
    if n < 2 or n % 2:
        raise ParameterError(f"one-factorization requires even n >= 2, got {n}")
    m = n - 1
    factors = []
    for r in range(m):
        edges = [(r, n - 1)]
        for i in range(1, n // 2):
            a, b = (r + i) % m, (r - i) % m
            edges.append((min(a, b), max(a, b)))
        factors.append(tuple(sorted(edges)))
    result = Factorization(n, tuple(factors))
    verify_factorization(result)
    return result


def near_one_factorization(n: int) -> Factorization:
    """Near-one-factorization of K_n (n odd), labeled so that factor i
    isolates vertex i and the last factor is {{0,1},{2,3},...,{n-3,n-2}}.
    """
    if n < 3 or n % 2 == 0:
        raise ParameterError(f"near-one-factorization requires odd n >= 3, got {n}")
    # factor r isolates r and pairs r+i with r-i
    relabeling = [0] * n
    relabeling[0] = n - 1
    for i in range(1, (n - 1) // 2 + 1):
        relabeling[i] = 2 * (i - 1)
        relabeling[n - i] = 2 * (i - 1) + 1
    factors: Dict[int, Tuple[Edge, ...]] = {}
    for r in range(n):
        edges = []
        for i in range(1, (n - 1) // 2 + 1):
            a, b = relabeling[(r + i) % n], relabeling[(r - i) % n]
            edges.append((min(a, b), max(a, b)))
        factors[relabeling[r]] = tuple(sorted(edges))
    result = Factorization(n, tuple(factors[v] for v in range(n)), near=True)
    verify_factorization(result)
    return result


# Steiner triple systems -----------------------------------------------------

def steiner_triple_system(n: int) -> SetSystem:
    """Bose construction for n = 3 (mod 6), Skolem construction for n = 1 (mod 6)"""
    if n < 1 or n % 6 not in (1, 3):
        raise ParameterError(f"STS(n) requires n = 1 or 3 (mod 6), got {n}")
    blocks: List[Block] = []
    if n % 6 == 3:
        v = n // 3
        half = (v + 1) // 2

        def point(x: int, i: int) -> int:
            return x % v + v * (i % 3)

        for x in range(v):
            blocks.append((point(x, 0), point(x, 1), point(x, 2)))
        for x, y in combinations(range(v), 2):
            z = ((x + y) * half) % v
            for i in range(3):
                blocks.append((point(x, i), point(y, i), point(z, i + 1)))
    else:
        k = (n - 1) // 6
        v = 2 * k
        infinity = n - 1

        def point(x: int, i: int) -> int:
            return x % v + v * (i % 3)

        def circ(x: int, y: int) -> int:
            s = (x + y) % v
            return s // 2 if s % 2 == 0 else k + s // 2

        for x in range(k):
            blocks.append((point(x, 0), point(x, 1), point(x, 2)))
            for i in range(3):
                blocks.append((infinity, point(x + k, i), point(x, i + 1)))
        for x, y in combinations(range(v), 2):
            for i in range(3):
                blocks.append((point(x, i), point(y, i), point(circ(x, y), i + 1)))
    system = SetSystem(n, tuple(blocks))
    verify_steiner(system)
    if len(system) != n * (n - 1) // 6:
        raise VerificationError(f"STS({n}) has {len(system)} blocks")
    return system


def sts_containing_block(n: int, block: Block = (0, 1, 2)) -> SetSystem:
    """STS(n) relabeled so that ``block`` is one of its triples"""
    base = steiner_triple_system(n)
    first = base.blocks[0]
    others = [p for p in range(n) if p not in first]
    free = [p for p in range(n) if p not in block]
    mapping = {}
    for src, dst in zip(first, block):
        mapping[src] = dst
    for src, dst in zip(others, free):
        mapping[src] = dst
    return relabel(base, mapping)


# Latin squares ----------------------------------------------------------------

def latin_square_subsquare(n: int, k: int) -> LatinSquare:
    """Latin square of side n whose top-left k x k corner is a subsquare on
    symbols 0..k-1. Rows below the first k are completed one perfect
    matching at a time.
    """
    if n < 1 or not 0 <= k <= n // 2:
        raise ParameterError(f"subsquare of side {k} needs 0 <= k <= floor(n/2) = {n // 2}")
    arr = np.full((n, n), -1, dtype=np.int64)
    for i in range(k):
        for j in range(k):
            arr[i, j] = (i + j) % k
        for j in range(n - k):
            arr[i, k + j] = k + (i + j) % (n - k)

    for row in range(k, n):
        graph = nx.Graph()
        columns = [('c', j) for j in range(n)]
        graph.add_nodes_from(columns)
        graph.add_nodes_from(('s', s) for s in range(n))
        for j in range(n):
            used = set(arr[:row, j].tolist())
            graph.add_edges_from((('c', j), ('s', s)) for s in range(n) if s not in used)
        matching = nx.bipartite.hopcroft_karp_matching(graph, top_nodes=columns)
        for j in range(n):
            arr[row, j] = matching[('c', j)][1]

    marked = (tuple(range(k)), tuple(range(k)), tuple(range(k))) if k else None
    square = LatinSquare.from_array(arr, marked)
    verify_latin_square(square)
    return square


def disjoint_latin_pair(n: int) -> Tuple[LatinSquare, LatinSquare]:
    """Two Latin squares sharing the top-left 3 x 3 subsquare and differing
    in every other cell.
    """
    if n < 6:
        raise ParameterError(f"disjoint Latin squares with a common 3-subsquare need n >= 6, got {n}")
    first = latin_square_subsquare(n, 3)
    arr = first.array
    sigma = np.empty(n, dtype=np.int64)
    sigma[:3] = [1, 2, 0]
    sigma[3:] = 3 + (np.arange(n - 3) + 1) % (n - 3)
    second = sigma[arr]
    second[:3, :3] = arr[:3, :3]
    other = LatinSquare.from_array(second, first.subsquare)
    verify_latin_square(other)
    outside = np.ones((n, n), dtype=bool)
    outside[:3, :3] = False
    if (arr[outside] == second[outside]).any():
        raise VerificationError("squares agree outside the common subsquare")
    return first, other


def gdd_from_latin(square: LatinSquare) -> GroupedDesign:
    """{3}-GDD of type n^3: point r is a row, n + c a column, 2n + s a symbol"""
    verify_latin_square(square)
    n = square.n
    blocks = [(i, n + j, 2 * n + s) for i, row in enumerate(square.cells) for j, s in enumerate(row)]
    groups = tuple(tuple(range(i * n, (i + 1) * n)) for i in range(3))
    gdd = GroupedDesign(SetSystem(3 * n, tuple(blocks)), groups)
    verify_gdd(gdd)
    return gdd


def igdd_from_latin(square: LatinSquare) -> IncompleteGDD:
    """{3}-IGDD of type (n, k)^3 from a square with a marked subsquare"""
    verify_latin_square(square)
    if square.subsquare is None:
        raise ParameterError("square has no marked subsquare")
    n = square.n
    rows, cols, symbols = square.subsquare
    hole_cells = {(i, j) for i in rows for j in cols}
    blocks = [(i, n + j, 2 * n + s)
              for i, row in enumerate(square.cells) for j, s in enumerate(row)
              if (i, j) not in hole_cells]
    groups = tuple(tuple(range(i * n, (i + 1) * n)) for i in range(3))
    holes = (tuple(rows), tuple(n + c for c in cols), tuple(2 * n + s for s in symbols))
    igdd = IncompleteGDD(SetSystem(3 * n, tuple(blocks)), groups, holes)
    verify_igdd(igdd)
    return igdd


def disjoint_igdd_pair(n: int) -> Tuple[IncompleteGDD, IncompleteGDD]:
    """Disjoint {3}-IGDDs of type (n, 3)^3 with holes {0,1,2} in each group"""
    if n < 6:
        raise ParameterError(f"disjoint IGDDs of type (n,3)^3 need n >= 6, got {n}")
    first, second = disjoint_latin_pair(n)
    a, b = igdd_from_latin(first), igdd_from_latin(second)
    if intersection_size(a.base, b.base):
        raise VerificationError("IGDD pair is not disjoint")
    return a, b


# Hardcoded disjoint GDD pairs of type 5^1 1^6 and 5^1 1^12, group {0,...,4}

TABLE_5_1_T1 = (
    ((0, 5, 10), (0, 6, 9), (0, 7, 8), (1, 5, 9), (1, 6, 7), (1, 8, 10),
     (2, 5, 7), (2, 6, 8), (2, 9, 10), (3, 5, 6), (3, 7, 10), (3, 8, 9),
     (4, 5, 8), (4, 6, 10), (4, 7, 9)),
    ((0, 5, 9), (0, 6, 8), (0, 7, 10), (1, 5, 6), (1, 7, 8), (1, 9, 10),
     (2, 5, 8), (2, 6, 10), (2, 7, 9), (3, 5, 7), (3, 6, 9), (3, 8, 10),
     (4, 5, 10), (4, 6, 7), (4, 8, 9)),
)

TABLE_5_1_T2 = (
    ((0, 5, 11), (0, 6, 10), (0, 7, 13), (0, 8, 16), (0, 9, 14), (0, 12, 15),
     (1, 10, 12), (1, 11, 16), (1, 13, 15), (1, 5, 8), (1, 6, 14), (1, 7, 9),
     (2, 5, 15), (2, 6, 13), (2, 7, 11), (2, 8, 10), (2, 9, 12), (2, 14, 16),
     (3, 5, 12), (3, 6, 7), (3, 8, 14), (3, 9, 16), (3, 10, 13), (3, 11, 15),
     (4, 5, 13), (4, 6, 16), (4, 7, 10), (4, 8, 11), (4, 9, 15), (4, 12, 14),
     (5, 6, 9), (5, 7, 16), (5, 10, 14), (6, 8, 15), (6, 11, 12), (7, 8, 12),
     (7, 14, 15), (8, 9, 13), (9, 10, 11), (10, 15, 16), (11, 13, 14), (12, 13, 16)),
    ((0, 5, 13), (0, 6, 15), (0, 7, 16), (0, 8, 10), (0, 9, 11), (0, 12, 14),
     (1, 5, 9), (1, 6, 12), (1, 7, 15), (1, 8, 11), (1, 10, 14), (1, 13, 16),
     (2, 5, 14), (2, 6, 16), (2, 7, 12), (2, 8, 9), (2, 10, 11), (2, 13, 15),
     (3, 5, 11), (3, 6, 14), (3, 7, 9), (3, 8, 15), (3, 10, 16), (3, 12, 13),
     (4, 5, 7), (4, 6, 9), (4, 8, 13), (4, 10, 12), (4, 11, 16), (4, 14, 15),
     (5, 6, 10), (5, 8, 12), (5, 15, 16), (6, 7, 8), (6, 11, 13), (7, 10, 13),
     (7, 11, 14), (8, 14, 16), (9, 10, 15), (9, 12, 16), (9, 13, 14), (11, 12, 15)),
)


def _groups_5_1(point_count: int) -> Tuple[Tuple[int, ...], ...]:
    return ((0, 1, 2, 3, 4),) + tuple((p,) for p in range(5, point_count))


def _gdd_pair_from_blocks(point_count: int, side_a, side_b) -> Tuple[GroupedDesign, GroupedDesign]:
    groups = _groups_5_1(point_count)
    return (GroupedDesign(SetSystem(point_count, tuple(side_a)), groups),
            GroupedDesign(SetSystem(point_count, tuple(side_b)), groups))


def gdd_pair_5_1(t: int, seed: Optional[int] = None,
                 budget: Optional[int] = None) -> Tuple[GroupedDesign, GroupedDesign]:
    """Two disjoint {3}-GDDs of type 5^1 1^{6t} on 6t+5 points, group {0,...,4}"""
    if t < 0:
        raise ParameterError(f"t must be nonnegative, got {t}")
    config = load_config()
    seed = config.DEFAULT_SEED if seed is None else seed
    budget = budget or config.DEFAULT_BUDGET
    n = 6 * t + 5

    if t == 0:
        pair = _gdd_pair_from_blocks(n, (), ())
    elif t == 1:
        pair = _gdd_pair_from_blocks(n, *TABLE_5_1_T1)
    elif t == 2:
        pair = _gdd_pair_from_blocks(n, *TABLE_5_1_T2)
    elif t % 3 in (0, 2):
        pair = _gdd_pair_5_1_from_intersection_one(t, seed, budget)
    else:
        pair = _gdd_pair_5_1_from_igdds(t, seed, budget)

    a, b = pair
    verify_gdd(a)
    verify_gdd(b)
    expected = (n * (n - 1) // 2 - 10) // 3
    if len(a.base) != expected or len(b.base) != expected:
        raise VerificationError(f"type 5^1 1^{6 * t} pair has {len(a.base)}/{len(b.base)} blocks, expected {expected}")
    if intersection_size(a.base, b.base):
        raise VerificationError("type 5^1 GDD pair is not disjoint")
    logger.debug(f"Disjoint GDD pair of type {a.type_string}: {expected} blocks per side")
    return a, b


def _normalize_group_first(point_count: int, group: Sequence[int], blocks_a, blocks_b):
    """Relabel so the size-5 group becomes {0,...,4}"""
    rest = [p for p in range(point_count) if p not in set(group)]
    mapping = {p: i for i, p in enumerate(sorted(group))}
    mapping.update({p: 5 + i for i, p in enumerate(rest)})
    side_a = [tuple(mapping[p] for p in b) for b in blocks_a]
    side_b = [tuple(mapping[p] for p in b) for b in blocks_b]
    return _gdd_pair_from_blocks(point_count, side_a, side_b)


def _gdd_pair_5_1_from_intersection_one(t: int, seed: int, budget: int):
    g = 2 * t + 1
    inf1, inf2 = 3 * g, 3 * g + 1
    a, b = gdd_pair_intersection_one(g, seed=_child_seed(seed, t, 1), budget=budget)
    common = (0, g, 2 * g)
    blocks_a = [blk for blk in a.blocks if blk != common]
    blocks_b = [blk for blk in b.blocks if blk != common]
    small_a, small_b = gdd_pair_3_1(2 * t, seed=_child_seed(seed, t, 2), budget=budget)
    for i in range(3):
        mapping = {0: i * g, 1: inf1, 2: inf2}
        mapping.update({3 + k: i * g + 1 + k for k in range(2 * t)})
        blocks_a.extend(tuple(mapping[p] for p in blk) for blk in small_a.blocks)
        blocks_b.extend(tuple(mapping[p] for p in blk) for blk in small_b.blocks)
    return _normalize_group_first(3 * g + 2, (0, g, 2 * g, inf1, inf2), blocks_a, blocks_b)


def _gdd_pair_5_1_from_igdds(t: int, seed: int, budget: int):
    g = 2 * t + 1
    inf1, inf2 = 3 * g, 3 * g + 1
    igdd_a, igdd_b = disjoint_igdd_pair(g)
    blocks_a = list(igdd_a.blocks)
    blocks_b = list(igdd_b.blocks)
    sub_a, sub_b = gdd_pair_5_1((t - 1) // 3, seed=_child_seed(seed, t, 3), budget=budget)
    for i in range(3):
        mapping = {0: i * g, 1: i * g + 1, 2: i * g + 2, 3: inf1, 4: inf2}
        mapping.update({5 + k: i * g + 3 + k for k in range(2 * t - 2)})
        blocks_a.extend(tuple(mapping[p] for p in blk) for blk in sub_a.blocks)
        blocks_b.extend(tuple(mapping[p] for p in blk) for blk in sub_b.blocks)
    # the 11 points of the three size-5 groups carry a type 5^1 1^6 pair
    big_group = sorted([i * g + x for i in range(3) for x in range(3)] + [inf1, inf2])
    fill_a, fill_b = TABLE_5_1_T1
    blocks_a.extend(tuple(big_group[p] for p in blk) for blk in fill_a)
    blocks_b.extend(tuple(big_group[p] for p in blk) for blk in fill_b)
    return _normalize_group_first(3 * g + 2, big_group[:5], blocks_a, blocks_b)


def gdd_pair_intersection_one(g: int, seed: Optional[int] = None,
                              budget: Optional[int] = None) -> Tuple[GroupedDesign, GroupedDesign]:
    """Two {3}-GDDs of type g^3 sharing exactly the block {0, g, 2g}.

    Searches isotopes gamma(alpha(i) + beta(j)) of the cyclic square i + j
    that agree with it in exactly one cell.
    """
    if g == 3:
        raise ParameterError("intersection 1 not achievable for type 3^3")
    if g < 7 or g % 2 == 0:
        raise ParameterError(f"intersection-one pairs are built for odd g >= 7, got {g}")
    config = load_config()
    seed = config.DEFAULT_SEED if seed is None else seed
    budget = budget or config.DEFAULT_BUDGET
    stall_limit = config.STALL_LIMIT
    rng = np.random.default_rng(seed)

    base = (np.arange(g)[:, None] + np.arange(g)[None, :]) % g

    def agreements(perms) -> int:
        alpha, beta, gamma = perms
        return int((gamma[(alpha[:, None] + beta[None, :]) % g] == base).sum())

    moves = 0
    restarts = 0
    found = None
    while moves < budget and found is None:
        perms = [rng.permutation(g) for _ in range(3)]
        score = abs(agreements(perms) - 1)
        best = score
        stall = 0
        while score and moves < budget and stall < stall_limit:
            moves += 1
            which = int(rng.integers(3))
            i, j = rng.choice(g, size=2, replace=False)
            perms[which][[i, j]] = perms[which][[j, i]]
            candidate = abs(agreements(perms) - 1)
            if candidate <= score:
                score = candidate
            else:
                perms[which][[i, j]] = perms[which][[j, i]]
            if score < best:
                best, stall = score, 0
            else:
                stall += 1
        if score == 0:
            found = perms
        else:
            restarts += 1
            logger.debug(f"g={g}: restart {restarts} after {moves} moves (best {best})")

    if found is None:
        raise SearchBudgetExhausted(
            f"no intersection-one pair of type {g}^3 within {budget} moves", moves_used=moves)

    alpha, beta, gamma = found
    other = gamma[(alpha[:, None] + beta[None, :]) % g]
    # move the shared cell to (0, 0) with symbol 0 in both squares
    i0, j0 = (int(x[0]) for x in np.nonzero(other == base))
    s0 = int(base[i0, j0])
    row_perm = np.arange(g)
    row_perm[[0, i0]] = row_perm[[i0, 0]]
    col_perm = np.arange(g)
    col_perm[[0, j0]] = col_perm[[j0, 0]]
    sym_map = np.arange(g)
    sym_map[[0, s0]] = sym_map[[s0, 0]]
    first = sym_map[base[np.ix_(row_perm, col_perm)]]
    second = sym_map[other[np.ix_(row_perm, col_perm)]]
    a = gdd_from_latin(LatinSquare.from_array(first))
    b = gdd_from_latin(LatinSquare.from_array(second))
    shared = a.base.block_set & b.base.block_set
    if shared != {(0, g, 2 * g)}:
        raise VerificationError(f"expected the single common block (0,{g},{2 * g}), got {sorted(shared)}")
    logger.debug(f"Intersection-one pair of type {g}^3 after {moves} moves, {restarts} restarts")
    return a, b


def gdd_pair_3_1(r: int, seed: Optional[int] = None,
                 budget: Optional[int] = None) -> Tuple[GroupedDesign, GroupedDesign]:
    """Two disjoint {3}-GDDs of type 3^1 1^r with group {0, 1, 2}.

    Both come from one STS(3 + r) through the block {0, 1, 2}; the second is
    its image under a permutation fixing 0, 1, 2 found by hill-climbing.
    """
    v = 3 + r
    if r < 0 or v % 6 not in (1, 3) or not (r in (4, 6) or v >= 13):
        raise ParameterError(f"disjoint GDD pair of type 3^1 1^{r} is inadmissible")
    config = load_config()
    seed = config.DEFAULT_SEED if seed is None else seed
    budget = budget or config.DEFAULT_BUDGET

    sts = sts_containing_block(v, (0, 1, 2))
    gdd_blocks = SetSystem(v, tuple(b for b in sts.blocks if b != (0, 1, 2)))
    result = disjointify_search(gdd_blocks, 2, seed=seed, budget=budget, movable=range(3, v))
    groups = ((0, 1, 2),) + tuple((p,) for p in range(3, v))
    a, b = (GroupedDesign(s, groups) for s in result.systems)
    verify_gdd(a)
    verify_gdd(b)
    return a, b


# Packings ---------------------------------------------------------------------

def greedy_packing(n: int, w: int, t: int, lam: int = 1, seed: Optional[int] = None,
                   max_overlap: Optional[int] = None) -> Packing:
    """Maximal t-(n, w, lambda) packing by first fit over all w-subsets.

    Candidates are scanned lexicographically, or in a seeded random order
    when ``seed`` is given. ``max_overlap`` additionally caps how many points
    two chosen blocks may share. With lambda > 1 the scan repeats, so a
    block can be chosen more than once.
    """
    if not (1 <= t <= w <= n) or lam < 1:
        raise ParameterError(f"packing needs 1 <= t <= w <= n and lambda >= 1, got t={t}, w={w}, n={n}, lambda={lam}")
    if seed is None:
        candidates: List[Block] = list(combinations(range(n), w))
    else:
        pool = np.array(list(combinations(range(n), w)), dtype=np.int64).reshape(-1, w)
        order = np.random.default_rng(seed).permutation(len(pool))
        candidates = [tuple(row) for row in pool[order].tolist()]

    covered: Counter = Counter()
    overlaps = set()
    chosen: List[Block] = []
    added = True
    # blocks repeat on later passes until no t-subset has room left
    while added:
        added = False
        for block in candidates:
            subsets = list(combinations(block, t))
            if any(covered[s] >= lam for s in subsets):
                continue
            if max_overlap is not None and max_overlap < w:
                wider = list(combinations(block, max_overlap + 1))
                if any(s in overlaps for s in wider):
                    continue
                overlaps.update(wider)
            covered.update(subsets)
            chosen.append(block)
            added = True
        if lam == 1:
            break
    packing = Packing(n, w, t, lam, tuple(chosen))
    verify_packing(packing)
    return packing


def maximum_packing_5_mod_6(n: int, seed: Optional[int] = None,
                            budget: Optional[int] = None) -> Packing:
    """Maximum 2-(n, 3, 1) packing for n = 5 (mod 6): a 5^1 1^{n-5} GDD plus
    blocks {0,1,2} and {0,3,4}.
    """
    if n % 6 != 5:
        raise ParameterError(f"n must be 5 (mod 6), got {n}")
    gdd, _ = gdd_pair_5_1((n - 5) // 6, seed=seed, budget=budget)
    packing = Packing(n, 3, 2, 1, gdd.blocks + ((0, 1, 2), (0, 3, 4)))
    verify_packing(packing)
    return packing


def design_13_4() -> SetSystem:
    """2-(13, 4, 1) design from the translates of {0, 1, 3, 9} mod 13"""
    base = (0, 1, 3, 9)
    system = SetSystem(13, tuple(tuple((x + s) % 13 for x in base) for s in range(13)))
    verify_steiner(system, k=4)
    return system


# Disjointification ------------------------------------------------------------

def _key_masks(block: Sequence[int], perm: np.ndarray, combos: List[Tuple[int, ...]]) -> List[int]:
    masks = []
    for combo in combos:
        m = 0
        for j in combo:
            m |= 1 << int(perm[block[j]])
        masks.append(m)
    return masks


def _find_disjoint_copy(blocks: List[Block], combos: List[List[Tuple[int, ...]]],
                        incident: List[List[int]], movable: np.ndarray, forbidden: set,
                        rng: np.random.Generator, point_count: int, budget: int, stall_limit: int):
    """Hill-climb a point permutation until no key of an image block is forbidden.

    Returns (perm or None, moves, restarts).
    """
    allowed = frozenset(int(p) for p in movable)
    moves = 0
    restarts = 0
    while moves < budget:
        perm = np.arange(point_count)
        perm[movable] = rng.permutation(movable)
        keys = [_key_masks(b, perm, c) for b, c in zip(blocks, combos)]
        hits = [sum(k in forbidden for k in ks) for ks in keys]
        colliding = {i for i, h in enumerate(hits) if h}
        total = sum(hits)
        best = total
        stall = 0
        while total and moves < budget and stall < stall_limit:
            moves += 1
            # move a point of a colliding block
            target = blocks[sorted(colliding)[int(rng.integers(len(colliding)))]]
            options = [p for p in target if p in allowed]
            if not options:
                break
            a = options[int(rng.integers(len(options)))]
            b = int(movable[int(rng.integers(len(movable)))])
            if a == b:
                continue
            pa, pb = int(perm[a]), int(perm[b])
            swap = (1 << pa) | (1 << pb)
            updated = {}
            delta = 0
            for i in set(incident[a]) | set(incident[b]):
                new_keys = [k ^ swap if bool(k >> pa & 1) != bool(k >> pb & 1) else k for k in keys[i]]
                h = sum(k in forbidden for k in new_keys)
                updated[i] = (new_keys, h)
                delta += h - hits[i]
            if delta <= 0:
                perm[a], perm[b] = pb, pa
                total += delta
                for i, (new_keys, h) in updated.items():
                    keys[i], hits[i] = new_keys, h
                    if h:
                        colliding.add(i)
                    else:
                        colliding.discard(i)
            if total < best:
                best, stall = total, 0
            else:
                stall += 1
        if not total:
            return perm, moves, restarts
        restarts += 1
        logger.debug(f"restart {restarts} after {moves} moves (best {best} collisions)")
    return None, moves, restarts


def _disjointify_attempt(point_count: int, blocks: List[Block], s: int, seed: int,
                         budget: int, stall_limit: int, movable: List[int], separation: int):
    rng = np.random.default_rng(seed)
    incident: List[List[int]] = [[] for _ in range(point_count)]
    for i, block in enumerate(blocks):
        for p in block:
            incident[p].append(i)
    combos = [list(combinations(range(len(b)), min(separation, len(b)))) for b in blocks]
    movable_arr = np.array(sorted(movable), dtype=np.int64)
    identity = np.arange(point_count)
    forbidden = {k for b, c in zip(blocks, combos) for k in _key_masks(b, identity, c)}
    copies = [SetSystem(point_count, tuple(blocks))]
    moves_used = 0
    restarts = 0
    for copy_index in range(1, s):
        perm, moves, rs = _find_disjoint_copy(blocks, combos, incident, movable_arr, forbidden, rng,
                                              point_count, budget - moves_used, stall_limit)
        moves_used += moves
        restarts += rs
        if perm is None:
            return copies, moves_used, restarts, False
        copies.append(SetSystem(point_count, tuple(tuple(int(perm[p]) for p in b) for b in blocks)))
        forbidden.update(k for b, c in zip(blocks, combos) for k in _key_masks(b, perm, c))
        logger.debug(f"copy {copy_index + 1}/{s} after {moves_used} moves")
    return copies, moves_used, restarts, True


def _shared_subsets(a: SetSystem, b: SetSystem, size: int) -> int:
    keys_a = {c for blk in a.blocks for c in combinations(blk, min(size, len(blk)))}
    return sum(1 for blk in b.blocks for c in combinations(blk, min(size, len(blk))) if c in keys_a)


def disjointify_search(seed_system: SetSystem, s: int, seed: Optional[int] = None,
                       budget: Optional[int] = None, workers: Optional[int] = None,
                       stall_limit: Optional[int] = None,
                       movable: Optional[Iterable[int]] = None,
                       separation: Optional[int] = None) -> DisjointifyResult:
    """Find ``s`` images of ``seed_system`` under point permutations whose
    block sets are pairwise disjoint.

    Copies are added one at a time; each new copy hill-climbs transpositions
    of its permutation against the blocks of all earlier copies and restarts
    from a fresh random permutation after ``stall_limit`` moves without
    progress. ``movable`` restricts the permutation to a subset of points.
    With ``separation`` = m, blocks of different copies may not even share
    m points (plain disjointness is m = block size).
    Raises SearchBudgetExhausted (with the copies found so far) when the
    total move budget runs out; that does not prove nonexistence.
    """
    if s < 1:
        raise ParameterError(f"target count must be >= 1, got {s}")
    config = load_config()
    seed = config.DEFAULT_SEED if seed is None else seed
    budget = budget or config.DEFAULT_BUDGET
    workers = workers or config.WORKERS
    stall_limit = stall_limit or config.STALL_LIMIT
    n = seed_system.point_count
    blocks = list(seed_system.blocks)
    movable = sorted(set(range(n)) if movable is None else set(movable))
    sizes = seed_system.block_sizes
    k = max(sizes) if sizes else 0
    separation = k if separation is None else separation
    if separation < 1:
        raise ParameterError(f"separation must be >= 1, got {separation}")
    guaranteed = len(sizes) == 1 and separation >= k and len(blocks) ** s < comb(n, k)
    if guaranteed:
        logger.info(f"{s} disjoint copies guaranteed to exist: {len(blocks)}^{s} < C({n},{k})")

    if workers <= 1:
        copies, moves, restarts, ok = _disjointify_attempt(
            n, blocks, s, seed, budget, stall_limit, movable, separation)
    else:
        children = np.random.SeedSequence(seed).spawn(workers)
        share = max(1, budget // workers)
        best = None
        pool = ProcessPoolExecutor(max_workers=workers)
        try:
            futures = [pool.submit(_disjointify_attempt, n, blocks, s, int(child.generate_state(1)[0]),
                                   share, stall_limit, movable, separation)
                       for child in children]
            for future in as_completed(futures):
                outcome = future.result()
                if outcome[3]:
                    best = outcome
                    break
                if best is None or len(outcome[0]) > len(best[0]):
                    best = outcome
        finally:
            # attempts still running after a success are abandoned
            pool.shutdown(wait=best is None or not best[3], cancel_futures=True)
        copies, moves, restarts, ok = best

    if not ok:
        raise SearchBudgetExhausted(
            f"found {len(copies)} of {s} disjoint copies within {budget} moves",
            partial=copies, moves_used=moves)
    for x, y in combinations(copies, 2):
        if _shared_subsets(x, y, separation):
            raise VerificationError(f"copies share a {separation}-subset of points")
    logger.debug(f"{s} disjoint copies of a {len(blocks)}-block system: {moves} moves, {restarts} restarts")
    return DisjointifyResult(copies, moves, restarts, guaranteed, seed, separation)


def disjointify(seed_system: SetSystem, s: int, seed: Optional[int] = None,
                budget: Optional[int] = None, workers: Optional[int] = None,
                separation: Optional[int] = None) -> List[SetSystem]:
    return disjointify_search(seed_system, s, seed=seed, budget=budget, workers=workers,
                              separation=separation).systems


# Design file format -----------------------------------------------------------

def format_design(system: SetSystem, groups: Optional[Sequence[Sequence[int]]] = None) -> str:
    lines = [f"{system.point_count} {len(system)}"]
    if groups is not None:
        lines.append("groups: " + ';'.join(','.join(str(p) for p in g) for g in groups))
    lines.extend(' '.join(str(p) for p in b) for b in system.blocks)
    return '\n'.join(lines) + '\n'


def parse_design(text: str) -> Tuple[SetSystem, Optional[Tuple[Tuple[int, ...], ...]]]:
    lines = text.splitlines()
    if not lines:
        raise FormatError("empty design file", 1)
    header = lines[0].split()
    try:
        n, b = (int(x) for x in header)
    except ValueError:
        raise FormatError("header must be 'n b'", 1)
    groups = None
    body = lines[1:]
    start = 2
    if body and body[0].startswith("groups:"):
        try:
            groups = tuple(tuple(int(p) for p in part.split(',')) for part in body[0][7:].strip().split(';'))
        except ValueError:
            raise FormatError("malformed groups line", 2)
        body = body[1:]
        start = 3
    blocks = []
    for lineno, line in enumerate(body, start=start):
        if not line.strip():
            continue
        try:
            blocks.append(tuple(int(p) for p in line.split()))
        except ValueError:
            raise FormatError("block entries must be integers", lineno)
    if len(blocks) != b:
        raise FormatError(f"header declares {b} blocks, found {len(blocks)}", 1)
    try:
        return SetSystem(n, tuple(blocks)), groups
    except ParameterError as e:
        raise FormatError(str(e))


def write_design(path: Union[str, Path], system: SetSystem,
                 groups: Optional[Sequence[Sequence[int]]] = None) -> None:
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(format_design(system, groups))


def read_design(path: Union[str, Path]):
    try:
        with open(path, 'r', encoding='utf-8') as f:
            text = f.read()
    except OSError as e:
        raise FormatError(f"cannot read {path}: {e}") from e
    return parse_design(text)
