"""
Code Lifting
============
Turns families of pairwise disjoint binary constant-weight codes into q-ary
codes by writing symbol i on the ones of the i-th code, plus every
construction built on top of that step: the (n,3,2)_q codes from
factorizations, the (n,4,3)_q dispatcher (Steiner triple systems, GDD
pairs, maximum packings, cyclic codes, Graham-Sloane classes), the
13-point plane lift, disjoint t-packings for distance w+1 and the
random-symbol construction with conflict deletion.

Every code returned here has been verified at its declared parameters.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import bounds
from .config import load_config
from .core_codes import (
    Code,
    CodeParams,
    SetSystem,
    Word,
    all_weight_words,
    conflict_pairs,
    system_to_code,
    verify_code,
)
from .designs import (
    Packing,
    design_13_4,
    disjointify,
    gdd_pair_5_1,
    greedy_packing,
    maximum_packing_5_mod_6,
    near_one_factorization,
    one_factorization,
    steiner_triple_system,
)
from .errors import ParameterError, SearchBudgetExhausted, VerificationError

logger = logging.getLogger(__name__)

# Cyclic generators of the length-7 codes, one per extra symbol (q = 4, 5, 6)
CYCLIC_7_GENERATORS = ("0000121", "0033001", "0020302", "0004404", "0005055")

# Five-word (5,4,3)_3 and two-word (4,4,3)_3 codes of maximum size
OPTIMAL_TERNARY_5_4_3 = ("12100", "01210", "00121", "10012", "21001")
OPTIMAL_TERNARY_4_4_3 = ("0111", "2022")

# Planes on 13 points cover 52 of the 286 triples, so at most five of them
# can pairwise share no triple
MAX_SEPARATED_PLANES = 5


@dataclass(frozen=True)
class LiftPlan:
    """Binary codes paired with the nonzero symbol each one is lifted to"""
    classes: Tuple[Tuple[Code, int], ...]
    q: int

    def __post_init__(self):
        if not self.classes:
            raise ParameterError("a lift plan needs at least one class")
        symbols = [s for _, s in self.classes]
        if len(set(symbols)) != len(symbols):
            raise ParameterError(f"duplicate symbols in lift plan: {symbols}")
        for code, symbol in self.classes:
            if not 1 <= symbol < self.q:
                raise ParameterError(f"symbol {symbol} outside [1, {self.q - 1}]")
            if any(s > 1 for word in code for s in word.symbols):
                raise ParameterError("lift classes must be binary codes")
        first = self.classes[0][0].params
        for code, _ in self.classes[1:]:
            if (code.params.n, code.params.w) != (first.n, first.w):
                raise ParameterError("lift classes must share length and weight")
        seen = set()
        for code, _ in self.classes:
            supports = {w.support for w in code}
            if seen & supports:
                raise ParameterError("lift classes are not pairwise disjoint")
            seen |= supports

    @classmethod
    def from_systems(cls, systems: Sequence[SetSystem], q: int) -> 'LiftPlan':
        return cls(tuple((system_to_code(s), i + 1) for i, s in enumerate(systems)), q)

    @property
    def n(self) -> int:
        return self.classes[0][0].params.n

    @property
    def w(self) -> int:
        return self.classes[0][0].params.w


@dataclass
class ProbabilisticRun:
    packing: Packing
    seed: int
    lam: int
    t: int
    # ordered count: sum over words u of |conf(u)|
    conflicts_found: int
    deleted: int
    final: Code
    expectation_bound: Fraction

    def to_dict(self) -> Dict:
        return {
            "packing_blocks": len(self.packing),
            "seed": self.seed,
            "lambda": self.lam,
            "t": self.t,
            "conflicts_found": self.conflicts_found,
            "deleted": self.deleted,
            "final_size": len(self.final),
            "expectation_bound": str(self.expectation_bound),
        }


def _finish(words: Sequence[Word], params: CodeParams, provenance: str) -> Code:
    code = Code.build(words, params.n, params.d, params.w, params.q, provenance)
    report = verify_code(code)
    if not report.valid:
        raise VerificationError(f"{params} code from '{provenance}' failed verification", report)
    logger.info(f"Constructed {params} code of size {len(code)} via {provenance}")
    return code


def _lifted_words(plan: LiftPlan) -> List[Word]:
    return [Word.from_support(plan.n, word.support, symbol, plan.q)
            for code, symbol in plan.classes for word in code]


def lift(plan: LiftPlan, d: Optional[int] = None, provenance: str = "") -> Code:
    """Union of the classes with symbol i written on the ones of class i.

    With ``d`` given the result is verified at that distance; otherwise the
    true minimum distance is measured and recorded.
    """
    words = _lifted_words(plan)
    provenance = provenance or f"lift x{len(plan.classes)}"
    if d is None:
        unchecked = Code.build(words, plan.n, 1, plan.w, plan.q)
        measured = verify_code(unchecked).actual_min_distance
        d = measured if isinstance(measured, int) else 2 * plan.w
    code = _finish(words, CodeParams(plan.n, d, plan.w, plan.q), provenance)
    expected = sum(len(c) for c, _ in plan.classes)
    if len(code) != expected:
        raise VerificationError(f"lift lost words: {len(code)} of {expected}")
    return code


# Shortening -------------------------------------------------------------------

def support_counts(code: Code) -> np.ndarray:
    return (code.array != 0).sum(axis=0)


def best_shortening_coordinate(code: Code) -> Tuple[int, int]:
    """(coordinate, words removed) for the coordinate in the fewest supports"""
    counts = support_counts(code)
    coord = int(np.argmin(counts))
    return coord, int(counts[coord])


def shorten(code: Code, coord: int, provenance: str = "") -> Code:
    """Drop every word using ``coord`` and delete that coordinate"""
    p = code.params
    if not 0 <= coord < p.n:
        raise ParameterError(f"coordinate {coord} outside [0, {p.n})")
    kept = [w for w in code if w.symbols[coord] == 0]
    if not kept:
        raise ParameterError(f"shortening at coordinate {coord} leaves no words")
    words = [Word(w.symbols[:coord] + w.symbols[coord + 1:], p.q) for w in kept]
    return _finish(words, CodeParams(p.n - 1, p.d, p.w, p.q),
                   provenance or f"{code.provenance} shortened at {coord}")


# (n, 3, 2)_q ---------------------------------------------------------------------

def construct_n32(n: int, q: int) -> Code:
    """Optimal (n,3,2)_q code: lifted (near-)one-factors, plus mixed-symbol
    words on the last near-one-factor when n is odd and q <= n.
    """
    if n < 2 or q < 2:
        raise ParameterError(f"need n >= 2 and q >= 2, got n={n}, q={q}")
    words: List[Word] = []
    if n % 2 == 0:
        factorization = one_factorization(n)
        s = min(q - 1, n - 1)
        mixed = 0
    else:
        factorization = near_one_factorization(n)
        s = n if q > n else q - 1
        mixed = 0 if q > n else (q - 1) // 2
    for index in range(s):
        for edge in factorization.factors[index]:
            words.append(Word.from_support(n, edge, index + 1, q))
    for j in range(mixed):
        symbols = [0] * n
        symbols[2 * j], symbols[2 * j + 1] = 2 * j + 1, 2 * j + 2
        words.append(Word(tuple(symbols), q))
    kind = "near-one-factor" if n % 2 else "one-factor"
    provenance = f"{kind} lift x{s}" + (f" + {mixed} mixed" if mixed else "")
    return _finish(words, CodeParams(n, 3, 2, q), provenance)


# (n, 4, 3)_q ---------------------------------------------------------------------

def graham_sloane_classes(n: int, w: int = 3) -> List[SetSystem]:
    """Partition of all w-subsets of [n] by coordinate sum mod n.

    Two members of one class differ in at least two points, so each class
    is a binary (n, 4, w) code.
    """
    if n < w or w < 1:
        raise ParameterError(f"need 1 <= w <= n, got n={n}, w={w}")
    buckets: List[List[Tuple[int, ...]]] = [[] for _ in range(n)]
    for block in combinations(range(n), w):
        buckets[sum(block) % n].append(block)
    return [SetSystem(n, tuple(b)) for b in buckets]


def _lift_nonempty(classes: Sequence[SetSystem], q: int, d: int, provenance: str) -> Code:
    systems = [c for c in classes if len(c)]
    return lift(LiftPlan.from_systems(systems, q), d=d, provenance=provenance)


def partition_lift_asymptotic(n: int, q: int) -> Code:
    """Lift the best run of q-1 consecutive Graham-Sloane classes"""
    if q < 2 or q - 1 > n:
        raise ParameterError(f"partition lift needs 1 <= q-1 <= n, got n={n}, q={q}")
    classes = graham_sloane_classes(n)
    tau = n // (q - 1)
    parts = [classes[j * (q - 1):(j + 1) * (q - 1)] for j in range(tau)]
    sizes = [sum(len(c) for c in part) for part in parts]
    best = int(np.argmax(sizes))
    code = _lift_nonempty(parts[best], q, 4, f"partition lift part {best + 1}/{tau}")
    floor = bounds.partition_lower(n, q).value
    if len(code) < floor:
        raise VerificationError(f"partition lift has {len(code)} words, below {floor}")
    return code


def _words_from_strings(strings: Sequence[str], q: int) -> List[Word]:
    return [Word(tuple(int(c) for c in s), q) for s in strings]


def cyclic_code_7(q: int) -> Code:
    """All cyclic shifts of the first q-1 generators: 7(q-1) words"""
    if not 4 <= q <= 6:
        raise ParameterError(f"cyclic length-7 code defined for q in 4..6, got {q}")
    words = []
    for generator in CYCLIC_7_GENERATORS[:q - 1]:
        for shift in range(7):
            words.append(generator[shift:] + generator[:shift])
    return _finish(_words_from_strings(words, q), CodeParams(7, 4, 3, q), "cyclic length-7 code")


def shortened_cyclic_code_6(q: int) -> Code:
    return shorten(cyclic_code_7(q), 0, "shortened cyclic length-7 code")


def _pad(strings: Sequence[str], n: int) -> List[str]:
    return [s + "0" * (n - len(s)) for s in strings]


def _lift_copies(seed_system: SetSystem, s: int, q: int, seed: int, budget: int,
                 workers: int, provenance: str, separation: Optional[int] = None,
                 d: int = 4) -> Tuple[Code, Optional[SearchBudgetExhausted]]:
    """Lift s disjoint copies; on budget exhaustion lift what was found"""
    try:
        systems = disjointify(seed_system, s, seed=seed, budget=budget, workers=workers,
                              separation=separation)
        exhausted = None
    except SearchBudgetExhausted as e:
        systems = e.partial
        exhausted = e
        logger.warning(f"{provenance}: only {len(systems)} of {s} copies found")
        provenance = f"{provenance} (partial {len(systems)}/{s})"
    return lift(LiftPlan.from_systems(systems, q), d=d, provenance=provenance), exhausted


def _ternary_5_mod_6(n: int, seed: int, budget: int, with_group_words: bool = True) -> Code:
    t = (n - 5) // 6
    if t == 0:
        return _finish(_words_from_strings(OPTIMAL_TERNARY_5_4_3, 3), CodeParams(5, 4, 3, 3),
                       "optimal (5,4,3)_3 code")
    a, b = gdd_pair_5_1(t, seed=seed, budget=budget)
    words = _lifted_words(LiftPlan.from_systems([a.base, b.base], 3))
    provenance = f"disjoint 5^1 1^{n - 5} GDD pair lift"
    if with_group_words:
        words += _words_from_strings(_pad(OPTIMAL_TERNARY_5_4_3, n), 3)
        provenance += " + optimal (5,4,3)_3 on the group"
    return _finish(words, CodeParams(n, 4, 3, 3), provenance)


def _ternary_4_mod_6(n: int, seed: int, budget: int) -> Code:
    extra = _pad(OPTIMAL_TERNARY_4_4_3, n)
    if n == 4:
        return _finish(_words_from_strings(extra, 3), CodeParams(4, 4, 3, 3), "optimal (4,4,3)_3 code")
    longer = _ternary_5_mod_6(n + 1, seed, budget, with_group_words=False)
    short = [Word(w.symbols[1:], 3) for w in longer if w.symbols[0] == 0]
    words = short + _words_from_strings(extra, 3)
    return _finish(words, CodeParams(n, 4, 3, 3),
                   f"shortened 5^1 1^{n - 4} GDD pair lift + optimal (4,4,3)_3 on the group")


def construct_n43(n: int, q: int, seed: Optional[int] = None, budget: Optional[int] = None,
                  workers: Optional[int] = None) -> Code:
    """Largest (n,4,3)_q code the design constructions reach for (n, q)"""
    if n < 3 or q < 2:
        raise ParameterError(f"need n >= 3 and q >= 2, got n={n}, q={q}")
    config = load_config()
    seed = config.DEFAULT_SEED if seed is None else seed
    budget = budget or config.DEFAULT_BUDGET
    workers = workers or config.WORKERS

    if q >= n + 1:
        return _lift_nonempty(graham_sloane_classes(n), q, 4, "Graham-Sloane lift")
    if n == 7 and 4 <= q <= 6:
        return cyclic_code_7(q)
    if n == 6 and 4 <= q <= 6:
        return shortened_cyclic_code_6(q)
    if q == 3 and n % 6 == 5:
        return _ternary_5_mod_6(n, seed, budget)
    if q == 3 and n % 6 == 4:
        return _ternary_4_mod_6(n, seed, budget)

    residue = n % 6
    exhausted = None
    if residue in (1, 3):
        s = min(q - 1, 2 if n == 7 else n - 2)
        code, exhausted = _lift_copies(steiner_triple_system(n), s, q, seed, budget, workers,
                                       f"STS({n}) x{s}")
    elif residue in (0, 2):
        s = min(q - 1, 2 if n == 6 else n - 1)
        lifted, exhausted = _lift_copies(steiner_triple_system(n + 1), s, q, seed, budget, workers,
                                         f"STS({n + 1}) x{s}")
        code = shorten(lifted, n, f"{lifted.provenance} minus point {n}")
    elif residue == 5:
        s = min(q - 1, n - 4)
        packing = maximum_packing_5_mod_6(n, seed=seed, budget=budget).as_system()
        code, exhausted = _lift_copies(packing, s, q, seed, budget, workers,
                                       f"maximum packing({n}) x{s}")
    else:
        s = min(q - 1, n - 3)
        packing = maximum_packing_5_mod_6(n + 1, seed=seed, budget=budget).as_system()
        lifted, exhausted = _lift_copies(packing, s, q, seed, budget, workers,
                                         f"maximum packing({n + 1}) x{s}")
        coord, removed = best_shortening_coordinate(lifted)
        logger.debug(f"shortening at coordinate {coord} removes {removed} words")
        code = shorten(lifted, coord, f"{lifted.provenance} shortened at {coord}")

    if q >= 4:
        alternative = partition_lift_asymptotic(n, q)
        if len(alternative) > len(code):
            logger.info(f"partition lift ({len(alternative)}) beats design lift ({len(code)})")
            code, exhausted = alternative, None
    if exhausted is not None:
        raise SearchBudgetExhausted(
            f"{CodeParams(n, 4, 3, q)}: disjoint copies not found, best code has {len(code)} words",
            partial=code, moves_used=exhausted.moves_used)
    return code


# (13, 6, 4)_q ------------------------------------------------------------------------

def construct_13_6_4(q: int, seed: Optional[int] = None, budget: Optional[int] = None,
                     workers: Optional[int] = None) -> Code:
    """Lift of copies of the 13-point plane that pairwise share no triple.

    Words of distinct classes sit at distance 8 minus their overlap, so the
    copies must be triple-separated, not merely disjoint.
    """
    if q < 2:
        raise ParameterError(f"alphabet size must be >= 2, got {q}")
    config = load_config()
    seed = config.DEFAULT_SEED if seed is None else seed
    budget = budget or config.DEFAULT_BUDGET
    s = min(q - 1, MAX_SEPARATED_PLANES)
    if q - 1 > s:
        logger.warning(f"q={q}: at most {s} triple-separated planes exist, lifting {s}")
    code, exhausted = _lift_copies(design_13_4(), s, q, seed, budget, workers or config.WORKERS,
                                   f"13-point plane lift x{s}", separation=3, d=6)
    if exhausted is not None:
        raise SearchBudgetExhausted(
            f"{CodeParams(13, 6, 4, q)}: found {len(code) // 13} of {s} separated planes",
            partial=code, moves_used=exhausted.moves_used)
    return code


# Distance w + 1 ------------------------------------------------------------------------

def construct_w_plus_1(n: int, w: int, q: int, t: int, seed: Optional[int] = None,
                       budget: Optional[int] = None, workers: Optional[int] = None) -> Code:
    """Lift of q-1 disjoint copies of a greedy t-(n, w, 1) packing"""
    if t < 1 or 2 * t > w + 1:
        raise ParameterError(f"need 1 <= t <= (w+1)/2, got t={t}, w={w}")
    if q < 2 or q - 1 > w // t:
        raise ParameterError(f"need q-1 <= floor(w/t) = {w // t}, got q={q}")
    if w > n:
        raise ParameterError(f"weight {w} exceeds length {n}")
    config = load_config()
    seed = config.DEFAULT_SEED if seed is None else seed
    packing = greedy_packing(n, w, t, 1)
    code, exhausted = _lift_copies(packing.as_system(), q - 1, q, seed, budget or config.DEFAULT_BUDGET,
                                   workers or config.WORKERS,
                                   f"{t}-({n},{w},1) packing x{q - 1}", d=w + 1)
    if exhausted is not None:
        raise SearchBudgetExhausted(
            f"{CodeParams(n, w + 1, w, q)}: disjoint packings not found",
            partial=code, moves_used=exhausted.moves_used)
    return code


def gv_crossover(w: int = 4, q: int = 3, n_max: int = 200, seed: Optional[int] = None,
                 budget: Optional[int] = None) -> Optional[Dict]:
    """First n at which the disjoint-packing lift beats Gilbert-Varshamov"""
    t = (w + 1) // 2
    while t > 1 and q - 1 > w // t:
        t -= 1
    for n in range(w + 1, n_max + 1):
        gv = bounds.gv_lower(n, w + 1, w, q).value
        try:
            size = len(construct_w_plus_1(n, w, q, t, seed=seed, budget=budget))
        except SearchBudgetExhausted:
            logger.debug(f"n={n}: no disjoint packings within budget")
            continue
        if size > gv:
            logger.info(f"Packing lift beats GV at n={n}: {size} > {gv}")
            return {"n": n, "size": size, "gv_lower": gv, "t": t}
    return None


# Random symbols with conflict deletion ------------------------------------------------

def expectation_bound(n: int, d: int, w: int, q: int, lam: int) -> Fraction:
    """Upper bound on the expected ordered conflict count"""
    t = (2 * w - d + 2) // 2
    f = (2 * w - d + 1) // 2
    return Fraction(lam * (lam - 1) * comb(t, f) * comb(n, t), (q - 1) ** f)


def probabilistic_construct(n: int, d: int, w: int, q: int, lam: Optional[int] = None,
                            seed: Optional[int] = None) -> ProbabilisticRun:
    """Random nonzero symbols on the blocks of a greedy t-(n, w, lambda)
    packing, then delete maximum-conflict words until distance d holds.
    """
    if not (1 <= d <= 2 * w and w <= n):
        raise ParameterError(f"need 1 <= d <= 2w and w <= n, got n={n}, d={d}, w={w}")
    if q < 3:
        raise ParameterError("random symbol assignment needs q >= 3")
    config = load_config()
    seed = config.DEFAULT_SEED if seed is None else seed
    t = (2 * w - d + 2) // 2
    lam = bounds.balanced_lambda(w, d, q) if lam is None else lam
    if lam < 1:
        raise ParameterError(f"lambda must be >= 1, got {lam}")

    # blocks share at most t points, so conflicts only come from t-overlaps
    packing = greedy_packing(n, w, t, lam, seed=seed, max_overlap=t)
    rng = np.random.default_rng(seed)
    m = len(packing)
    arr = np.zeros((m, n), dtype=np.int64)
    for row, block in enumerate(packing.blocks):
        arr[row, list(block)] = rng.integers(1, q, size=w)

    pairs = conflict_pairs(arr, d, w, q)
    neighbours: List[set] = [set() for _ in range(m)]
    for i, j, _ in pairs.tolist():
        neighbours[i].add(j)
        neighbours[j].add(i)
    order = np.lexsort(arr.T[::-1])
    rank = np.empty(m, dtype=np.int64)
    rank[order] = np.arange(m)
    alive = np.ones(m, dtype=bool)
    deleted = 0
    while True:
        degrees = [len(nb) for nb in neighbours]
        top = max(degrees, default=0)
        if top == 0:
            break
        victim = min((i for i in range(m) if degrees[i] == top), key=lambda i: rank[i])
        for j in neighbours[victim]:
            neighbours[j].discard(victim)
        neighbours[victim].clear()
        alive[victim] = False
        deleted += 1

    final = Code.from_array(arr[alive], d, w, q, f"random symbols on {t}-({n},{w},{lam}) packing")
    report = verify_code(final)
    if not report.valid:
        raise VerificationError(f"{final.params} conflict deletion left violations", report)
    bound = expectation_bound(n, d, w, q, lam)
    logger.info(f"Random-symbol code {final.params}: {m} words, {len(pairs)} conflicting pairs, "
                f"{deleted} deleted, expectation bound {float(bound):.2f}")
    return ProbabilisticRun(packing, seed, lam, t, 2 * len(pairs), deleted, final, bound)


# Dispatcher ------------------------------------------------------------------------------

def construct(n: int, d: int, w: int, q: int, seed: Optional[int] = None,
              budget: Optional[int] = None, workers: Optional[int] = None,
              lam: Optional[int] = None, t: Optional[int] = None) -> Code:
    """Route (n, d, w, q) to the matching construction"""
    if not 1 <= w <= n or d < 1 or q < 2:
        raise ParameterError(f"need 1 <= w <= n, d >= 1, q >= 2, got {CodeParams(n, d, w, q)}")
    params = CodeParams(n, d, w, q)
    if d > 2 * w:
        return _finish([Word.from_support(n, range(w), 1, q)], params, "single word")
    if d == 1:
        words = all_weight_words(n, w, q)
        if len(words) > load_config().BRUTE_FORCE_VERTEX_LIMIT:
            raise ParameterError(f"{params}: the whole space has {len(words)} words, too many to emit")
        return _finish([Word(tuple(r), q) for r in words.tolist()], params, "all weight-w words")
    if (d, w) == (3, 2):
        return construct_n32(n, q)
    if (d, w) == (4, 3):
        return construct_n43(n, q, seed=seed, budget=budget, workers=workers)
    if (n, d, w) == (13, 6, 4):
        return construct_13_6_4(q, seed=seed, budget=budget, workers=workers)
    if d == 2 * w:
        supports = [range(i * w, (i + 1) * w) for i in range(n // w)]
        return _finish([Word.from_support(n, s, 1, q) for s in supports], params, "disjoint supports")
    if d == w + 1:
        if t is None:
            t = (w + 1) // 2
            while t > 1 and q - 1 > w // t:
                t -= 1
        elif t < 1 or q - 1 > w // t:
            raise ParameterError(f"{params}: strength t={t} needs 1 <= t and q-1 <= floor(w/t)")
        if q - 1 <= w // t:
            return construct_w_plus_1(n, w, q, t, seed=seed, budget=budget, workers=workers)
    if q == 2:
        packing = greedy_packing(n, w, w - (d + 1) // 2 + 1, 1)
        return _finish([Word.from_support(n, b, 1, 2) for b in packing.blocks], params,
                       "greedy packing")
    return probabilistic_construct(n, d, w, q, lam=lam, seed=seed).final
