"""
Bounds Ledger
=============
Upper bounds, lower bounds and exact values of A_q(n, d, w), the maximum
size of a q-ary code of length n, constant weight w and minimum distance d.

All arithmetic is exact (integers and Fractions). Values that only hold
asymptotically, or that assume an object whose existence is not proven,
carry ``rigorous=False`` and never enter the best upper/lower bound.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial
from typing import Dict, List, Optional, Tuple

from .core_codes import CodeParams
from .errors import InconsistentBoundsError, ParameterError

logger = logging.getLogger(__name__)

EXACT = "exact"
UPPER = "upper"
LOWER = "lower"


@dataclass(frozen=True)
class BoundValue:
    value: int
    kind: str
    provenance: str
    assumptions: str = ""
    rigorous: bool = True

    def to_dict(self) -> Dict:
        data = {"value": self.value, "kind": self.kind, "provenance": self.provenance}
        if self.assumptions:
            data["assumptions"] = self.assumptions
        if not self.rigorous:
            data["rigorous"] = False
        return data


@dataclass
class BoundReport:
    params: CodeParams
    values: List[BoundValue] = field(default_factory=list)
    best_upper: Optional[int] = None
    best_lower: Optional[int] = None
    exact: Optional[BoundValue] = None

    def to_dict(self) -> Dict:
        p = self.params
        return {
            "params": {"n": p.n, "d": p.d, "w": p.w, "q": p.q},
            "bounds": [v.to_dict() for v in self.values],
            "best_upper": self.best_upper,
            "best_lower": self.best_lower,
            "exact": self.exact.to_dict() if self.exact else None,
        }


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def _floor(x: Fraction) -> int:
    return x.numerator // x.denominator


def _t_and_f(w: int, d: int) -> Tuple[int, int]:
    """t = ceil((2w-d+1)/2) and f = floor((2w-d+1)/2)"""
    return (2 * w - d + 2) // 2, (2 * w - d + 1) // 2


# Number theory helpers ---------------------------------------------------------

def is_prime_power(m: int) -> bool:
    if m < 2:
        return False
    p = 2
    while p * p <= m and m % p:
        p += 1
    if m % p:
        return True  # m is prime
    while m % p == 0:
        m //= p
    return m == 1


def is_power_of_two(m: int) -> bool:
    return m >= 1 and m & (m - 1) == 0


# Recursive and packing upper bounds ---------------------------------------------

def svanstrom_length(n: int, d: int, w: int, q: int, inner: int) -> BoundValue:
    """Upper bound from deleting a coordinate where words are zero"""
    if w >= n:
        raise ParameterError(f"length recursion needs w < n, got w={w}, n={n}")
    return BoundValue(n * inner // (n - w), UPPER, "length recursion",
                      f"A_q({n - 1},{d},{w}) <= {inner}")


def svanstrom_weight(n: int, d: int, w: int, q: int, inner: int) -> BoundValue:
    """Upper bound from fixing a coordinate and its nonzero symbol"""
    if w < 1:
        raise ParameterError("weight recursion needs w >= 1")
    return BoundValue(n * (q - 1) * inner // w, UPPER, "weight recursion",
                      f"A_q({n - 1},{d},{w - 1}) <= {inner}")


def johnson_schonheim(n: int, k: int, t: int, lam: int = 1) -> BoundValue:
    """Nested-floor bound on the size of a t-(n, k, lambda) packing"""
    if not 0 <= t <= k <= n:
        raise ParameterError(f"need 0 <= t <= k <= n, got t={t}, k={k}, n={n}")
    value = lam
    for i in range(t - 1, -1, -1):
        value = (n - i) * value // (k - i)
    loose = Fraction(lam * comb(n, t), comb(k, t))
    return BoundValue(value, UPPER, "Johnson-Schonheim packing bound",
                      f"lambda*C(n,t)/C(k,t) = {loose}")


def exact_2w(n: int, w: int, q: int) -> BoundValue:
    if w < 1:
        raise ParameterError("distance 2w needs w >= 1")
    return BoundValue(n // w, EXACT, "pairwise disjoint supports")


def support_packing_upper(n: int, d: int, w: int, q: int) -> Optional[BoundValue]:
    """Supports through a t-set carry distinct symbol patterns on it, so they
    form a t-packing of index (q-1)^t (d odd) or (q-1)^(t-1) (d even).
    """
    if not 1 <= d <= 2 * w or w > n:
        return None
    t, _ = _t_and_f(w, d)
    lam = (q - 1) ** (t if d % 2 else t - 1)
    bound = johnson_schonheim(n, w, t, lam)
    return BoundValue(bound.value, UPPER, "support packing",
                      f"{t}-(n,w,{lam}) packing of supports")


def distinct_support_upper(n: int, d: int, w: int, q: int) -> Optional[BoundValue]:
    """No (2w-d+1)-set lies in two supports when d > w"""
    s = 2 * w - d + 1
    if not 1 <= s <= w or w > n:
        return None
    bound = johnson_schonheim(n, w, s, 1)
    return BoundValue(bound.value, UPPER, "distinct supports",
                      f"supports pairwise share at most {s - 1} points")


def half_weight_upper(n: int, w: int, q: int) -> BoundValue:
    """(q-1)^t C(n,t)/C(w,t) with t = ceil(w/2), for distance w + 1"""
    if w > n or w < 1:
        raise ParameterError(f"need 1 <= w <= n, got w={w}, n={n}")
    t = (w + 1) // 2
    return BoundValue((q - 1) ** t * comb(n, t) // comb(w, t), UPPER,
                      "half-weight support packing", "distance w+1")


def chain_upper(n: int, d: int, w: int, q: int) -> BoundValue:
    """Best value over the length/weight recursions, trivial counts, the 2w
    formula and both support packing bounds, fully unwound with memoization.
    """
    if n < 0 or w < 0 or q < 2:
        raise ParameterError(f"invalid parameters {CodeParams(n, d, w, q)}")

    @lru_cache(maxsize=None)
    def best(m: int, k: int) -> int:
        if k > m:
            return 0
        if k == 0:
            return 1
        total = comb(m, k) * (q - 1) ** k
        if d <= 1:
            return total
        if d > 2 * k:
            return 1
        if d == 2 * k:
            return m // k
        candidates = [total, m * (q - 1) * best(m - 1, k - 1) // k]
        if k < m:
            candidates.append(m * best(m - 1, k) // (m - k))
        for extra in (support_packing_upper(m, d, k, q), distinct_support_upper(m, d, k, q)):
            if extra is not None:
                candidates.append(extra.value)
        return min(candidates)

    return BoundValue(best(n, w), UPPER, "recursion chain")


# Weight 3, distance 4 --------------------------------------------------------------

def u_value(n: int, q: int) -> int:
    return (q - 1) * n * ((n - 1) // 2) // 3


def u_bound(n: int, q: int) -> BoundValue:
    if n < 3:
        raise ParameterError(f"U(n,q) needs n >= 3, got {n}")
    return BoundValue(u_value(n, q), UPPER, "U(n,q)")


def b_value(n: int, q: int) -> Fraction:
    return Fraction((q - 1) * n * (n - 1), 6)


_THIRDS = (Fraction(2, 3), Fraction(0), Fraction(1, 3))


def u_correction(n: int, q: int) -> Fraction:
    """B(n,q) - U(n,q) by residue of n mod 6 and q mod 3"""
    residue = n % 6
    if residue in (1, 3):
        return Fraction(0)
    if residue in (0, 2):
        return Fraction((q - 1) * n, 6)
    if residue == 4:
        return Fraction((q - 1) * n, 6) + _THIRDS[q % 3]
    return _THIRDS[q % 3]


def n43_upper(n: int, q: int) -> BoundValue:
    if n < 3:
        raise ParameterError(f"need n >= 3, got {n}")
    u = u_value(n, q)
    supports = comb(n, 3)
    if supports < u:
        return BoundValue(supports, UPPER, "distinct supports", "at most C(n,3) supports")
    if n % 6 == 5 and q % 3 != 1:
        value = u - 1
        # deleting a coordinate gives the same value from U(n-1, q)
        chained = n * u_value(n - 1, q) // (n - 3)
        return BoundValue(min(value, chained, supports), UPPER, "U(n,q) - 1",
                          "n = 5 (mod 6), q != 1 (mod 3)")
    return BoundValue(u, UPPER, "U(n,q)")


def delta(n: int, q: int) -> Fraction:
    r = q % 3
    if n % 6 == 5:
        return Fraction(4 * (q - 1) - (2, 0, 1)[r], 3)
    if n % 6 == 4:
        return Fraction(4 * (q - 1) - (5, 3, 4)[r], 3)
    raise ParameterError(f"delta is defined for n = 4, 5 (mod 6), got n={n}")


def epsilon(n: int, q: int) -> int:
    if n % 6 == 5:
        return 0 if q % 3 == 1 else 1
    if n % 6 == 4:
        return 0
    raise ParameterError(f"epsilon is defined for n = 4, 5 (mod 6), got n={n}")


def residue_bracket(n: int, q: int) -> Optional[Tuple[BoundValue, BoundValue]]:
    """U - delta <= A_q(n,4,3) <= U - epsilon from lifted large sets of
    maximum packings (q <= n-3 for n = 5, q <= n-2 for n = 4 mod 6).
    """
    residue = n % 6
    if residue not in (4, 5) or q < 2 or n < 5:
        return None
    if q > (n - 3 if residue == 5 else n - 2):
        return None
    u = u_value(n, q)
    low = Fraction(u) - delta(n, q)
    note = f"n = {residue} (mod 6), q <= {n - 3 if residue == 5 else n - 2}"
    return (BoundValue(_floor(low), LOWER, "large set of maximum packings", note),
            BoundValue(u - epsilon(n, q), UPPER, "U(n,q) - epsilon", note))


def partition_lower(n: int, q: int) -> BoundValue:
    """Largest of floor(n/(q-1)) parts of Graham-Sloane classes"""
    if q < 2 or q - 1 > n:
        raise ParameterError(f"partition bound needs 1 <= q-1 <= n, got n={n}, q={q}")
    tau = n // (q - 1)
    value = max(0, _ceil_div(n * (n - 1) * (n - q), 6 * tau))
    return BoundValue(value, LOWER, "Graham-Sloane partition", f"tau = {tau}")


# Sphere sizes and existence bounds -------------------------------------------------

def sphere_size(n: int, w: int, q: int, r: int) -> int:
    """Weight-w words within Hamming distance r of a fixed weight-w word"""
    if r < 0 or w > n or q < 2:
        raise ParameterError(f"need r >= 0, w <= n, q >= 2")
    total = 0
    for i in range(r + 1):
        for j in range(min(i // 2, n - w) + 1):
            if j > w or i - 2 * j > w - j:
                continue
            total += (comb(w, j) * comb(n - w, j) * comb(w - j, i - 2 * j)
                      * (q - 1) ** j * (q - 2) ** (i - 2 * j))
    return total


def gv_lower(n: int, d: int, w: int, q: int) -> BoundValue:
    if d < 1:
        raise ParameterError(f"distance must be >= 1, got {d}")
    value = _ceil_div(comb(n, w) * (q - 1) ** w, sphere_size(n, w, q, d - 1))
    return BoundValue(value, LOWER, "Gilbert-Varshamov")


def balanced_lambda(w: int, d: int, q: int) -> int:
    """Packing index balancing the two terms of the random-symbol bound"""
    t, _ = _t_and_f(w, d)
    exponent = t if d % 2 else t - 1
    return max(1, _floor((Fraction((q - 1) ** exponent, comb(w, t)) + 1) / 2))


def prob_lower(n: int, d: int, w: int, q: int, lam: Optional[int] = None) -> BoundValue:
    """Expected size after conflict deletion on a t-(n,w,lambda) packing.

    Assumes a packing with lambda*C(n,t)/C(w,t) blocks exists, which can
    fail at finite n; reported as non-rigorous.
    """
    if not 1 <= d <= 2 * w:
        raise ParameterError(f"need 1 <= d <= 2w, got d={d}, w={w}")
    lam = balanced_lambda(w, d, q) if lam is None else lam
    if lam < 1:
        raise ParameterError(f"lambda must be >= 1, got {lam}")
    t, f = _t_and_f(w, d)
    density = Fraction(lam, comb(w, t)) - Fraction(lam * (lam - 1) * comb(t, f), (q - 1) ** f)
    return BoundValue(max(0, _floor(density * comb(n, t))), LOWER, "random symbols on a packing",
                      f"lambda = {lam}, assumes a packing of size lambda*C(n,t)/C(w,t)",
                      rigorous=False)


def asymptotic_reference(n: int, d: int, w: int, q: int) -> List[BoundValue]:
    """Leading-order values of the asymptotic statements (not bounds at finite n)"""
    refs: List[BoundValue] = []
    if (d, w) == (4, 3):
        refs.append(BoundValue(_floor(Fraction((q - 1) * n * n, 6)), EXACT,
                               "asymptotic (q-1)n^2/6", "fixed q, n -> infinity", rigorous=False))
    if d == w + 1 and w % 2 == 0:
        v = Fraction(factorial(w // 2), factorial(w)) * n ** (w // 2)
        refs.append(BoundValue(_floor((q - 1) * v), LOWER, "asymptotic (q-1)V(n,w)",
                               "n -> infinity", rigorous=False))
        refs.append(BoundValue(_floor((q - 1) ** (w // 2) * v), UPPER, "asymptotic (q-1)^(w/2)V(n,w)",
                               "n -> infinity", rigorous=False))
    if 1 <= d <= 2 * w <= 2 * n:
        t, _ = _t_and_f(w, d)
        exponent = t if d % 2 else t - 1
        scale = comb(w, t) if d % 2 else comb(w, t) * t
        value = Fraction((q - 1) ** exponent * comb(n, t), 4 * scale * comb(w, t))
        refs.append(BoundValue(_floor(value), LOWER, "asymptotic random-symbol regime",
                               f"lambda = {balanced_lambda(w, d, q)}, q large", rigorous=False))
    return refs


# Exact values ---------------------------------------------------------------------

def _binary_n43(n: int) -> int:
    residue = n % 6
    if residue in (1, 3):
        return n * (n - 1) // 6
    if residue in (0, 2):
        return n * (n - 2) // 6
    if residue == 5:
        return (n * (n - 1) - 8) // 6
    return (n * (n - 2) - 2) // 6


def _exact_n43(n: int, q: int) -> Optional[BoundValue]:
    if n < 3:
        return None
    if n <= q - 1:
        return BoundValue(comb(n, 3), EXACT, "Graham-Sloane lift", "n <= q-1")
    if q == 2:
        return BoundValue(_binary_n43(n), EXACT, "maximum triple packing")
    if n == 7 and 4 <= q <= 6:
        return BoundValue(7 * (q - 1), EXACT, "cyclic length-7 code")
    if n == 6 and 4 <= q <= 6:
        return BoundValue(4 * (q - 1), EXACT, "shortened cyclic length-7 code")
    residue = n % 6
    if residue in (1, 3):
        if q <= n - 1:
            return BoundValue(_floor(b_value(n, q)), EXACT, "disjoint STS lift", "q <= n-1")
        if q == n and n != 7:
            return BoundValue(comb(n, 3), EXACT, "large set of STS lift", "q = n")
    if residue in (0, 2) and q <= n:
        return BoundValue((q - 1) * n * (n - 2) // 6, EXACT, "disjoint STS(n+1) lift minus a point",
                          "q <= n")
    if q == 3 and residue == 4:
        return BoundValue(u_value(n, 3), EXACT, "shortened GDD pair lift + (4,4,3)_3")
    if q == 3 and residue == 5:
        return BoundValue(u_value(n, 3) - 1, EXACT, "GDD pair lift + (5,4,3)_3")
    return None


def exact_value(n: int, d: int, w: int, q: int) -> Optional[BoundValue]:
    """Exact A_q(n,d,w) with provenance when it is determined, else None"""
    if q < 2 or n < 0 or w < 0:
        raise ParameterError(f"invalid parameters {CodeParams(n, d, w, q)}")
    if w > n:
        return BoundValue(0, EXACT, "empty space")
    if w == 0:
        return BoundValue(1, EXACT, "zero word")
    if d <= 1:
        return BoundValue(comb(n, w) * (q - 1) ** w, EXACT, "whole space")
    if d > 2 * w:
        return BoundValue(1, EXACT, "single word")
    if d == 2 * w:
        return exact_2w(n, w, q)
    if (d, w) == (3, 2):
        if q <= n:
            return BoundValue((q - 1) * n // 2, EXACT, "factorization lift", "q <= n")
        return BoundValue(comb(n, 2), EXACT, "factorization lift", "q > n")
    if (d, w) == (4, 3):
        found = _exact_n43(n, q)
        if found is not None:
            return found
        if q % 2 and is_prime_power(q) and n == q:
            return BoundValue(comb(q, 3), EXACT, "finite geometry", "q odd prime power")
        if is_power_of_two(q) and n == q + 1:
            return BoundValue(comb(q + 1, 3), EXACT, "finite geometry", "q power of two")
    if (d, w) == (4, 4):
        if q % 2 and is_prime_power(q) and n == q + 1:
            return BoundValue((q - 1) * comb(q + 1, 4), EXACT, "finite geometry", "q odd prime power")
        if is_power_of_two(q) and q > 2 and n == q + 2:
            return BoundValue((q - 1) * comb(q + 2, 4), EXACT, "finite geometry", "q power of two")
    if (n, d, w) == (13, 6, 4) and q <= 5:
        return BoundValue(13 * (q - 1), EXACT, "13-point plane lift",
                          "q-1 planes pairwise sharing no triple")
    return None


# Report ---------------------------------------------------------------------------

def bound_report(n: int, d: int, w: int, q: int, constructed: Optional[int] = None,
                 constructed_provenance: str = "construction") -> BoundReport:
    """Every applicable bound for (n, d, w, q), with best bracket and exact value.

    ``constructed`` is the size of a verified code, added as a lower bound.
    """
    if n < 1 or w < 0 or d < 1 or q < 2:
        raise ParameterError(f"invalid parameters {CodeParams(n, d, w, q)}")
    report = BoundReport(CodeParams(n, d, w, q))
    values = report.values

    values.append(BoundValue(comb(n, w) * (q - 1) ** w, UPPER, "whole space"))
    if w <= n:
        values.append(chain_upper(n, d, w, q))
        for extra in (support_packing_upper(n, d, w, q), distinct_support_upper(n, d, w, q)):
            if extra is not None:
                values.append(extra)
        values.append(gv_lower(n, d, w, q))
        if d == w + 1 and w >= 1:
            values.append(half_weight_upper(n, w, q))
        if 1 <= d <= 2 * w:
            values.append(prob_lower(n, d, w, q))
            values.extend(asymptotic_reference(n, d, w, q))
    if (d, w) == (4, 3) and n >= 3:
        values.append(u_bound(n, q))
        values.append(n43_upper(n, q))
        bracket = residue_bracket(n, q)
        if bracket:
            values.extend(bracket)
        if q - 1 <= n:
            values.append(partition_lower(n, q))
    if constructed is not None:
        values.append(BoundValue(constructed, LOWER, constructed_provenance, "verified code"))

    exact = exact_value(n, d, w, q)
    rigorous = [v for v in values if v.rigorous]
    uppers = [v.value for v in rigorous if v.kind == UPPER]
    lowers = [v.value for v in rigorous if v.kind == LOWER]
    if exact is not None:
        values.append(exact)
        if (uppers and exact.value > min(uppers)) or (lowers and exact.value < max(lowers)):
            raise InconsistentBoundsError(
                f"{report.params}: exact {exact.value} outside [{max(lowers, default=0)}, {min(uppers)}]")
        uppers.append(exact.value)
        lowers.append(exact.value)
    report.exact = exact
    report.best_upper = min(uppers) if uppers else None
    report.best_lower = max(lowers) if lowers else 0
    if report.best_upper is not None and report.best_lower > report.best_upper:
        raise InconsistentBoundsError(
            f"{report.params}: lower bound {report.best_lower} exceeds upper bound {report.best_upper}")
    for v in values:
        if not v.rigorous and v.kind == LOWER and report.best_upper is not None and v.value > report.best_upper:
            logger.warning(f"{report.params}: non-rigorous '{v.provenance}' value {v.value} "
                           f"exceeds upper bound {report.best_upper}")
    return report
