"""Counting functions for distinct denominators, first subscripts and d_p.

Notation: D is the set of distinct Bernoulli denominators, F the set of
least subscripts of each denominator, and d_p = D_{p-1} / p.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .arith import (
    PrimeTable,
    _divisors_from,
    carmichael_lambda,
    factorize,
    is_prime,
    prime_array,
)
from .denom_sieve import DEFAULT_SEGMENT, SieveConfig, iter_blocks
from .staudt_clausen import class_label, denominator

__all__ = [
    "BETA",
    "BetaConstant",
    "CountingReport",
    "DPlusOneSplit",
    "bernoulli_denominators",
    "count_D",
    "count_F",
    "count_dp_not_in_D",
    "d_plus_one_split",
    "dp_values",
    "f_reference",
    "first_subscripts",
    "germain_witnesses",
    "is_bernoulli_denominator",
    "is_first_subscript",
    "mod3_split",
    "partition_counts",
    "witness_in_D",
    "witness_notin_D",
]


@dataclass(frozen=True)
class BetaConstant:
    """Erdos-Tenenbaum-Ford constant 1 - (1 + log log 2) / log 2."""

    beta: float = 1 - (1 + math.log(math.log(2))) / math.log(2)


BETA = BetaConstant().beta


@dataclass(frozen=True)
class CountingReport:
    bound: int
    count: int
    reference: float
    ratio: float


def _report(bound: int, count: int, reference: float) -> CountingReport:
    ratio = count / reference if reference > 0 and math.isfinite(reference) else math.nan
    return CountingReport(bound, count, reference, ratio)


def _pi(x: int) -> int:
    return len(prime_array(x))


def is_bernoulli_denominator(d: int, table: PrimeTable | None = None) -> bool:
    """True iff d = D_n for some even n > 0."""
    if d <= 2 or d % 6:
        return False
    if table is not None and d <= table.limit:
        factors = table.factors(d)
    else:
        factors = factorize(d).factors
    if any(e > 1 for _, e in factors):
        return False
    lam = math.lcm(*(p - 1 for p, _ in factors))
    return _closed(d, lam, table)


def _closed(d: int, lam: int, table: PrimeTable | None) -> bool:
    # d = D_lam iff every prime q with q - 1 | lam divides d; the converse
    # inclusion holds because p - 1 | lam for each p | d
    if table is not None and lam <= table.limit:
        divs = table.divisors(lam)
        check = table.is_prime
    else:
        divs = _divisors_from(factorize(lam).factors)
        check = is_prime
    return all(d % (e + 1) == 0 for e in divs if check(e + 1))


def is_first_subscript(n: int) -> bool:
    """True iff n is the least even subscript with denominator D_n."""
    if n < 2 or n % 2:
        return False
    return carmichael_lambda(denominator(n).value) == n


def f_reference(x: float) -> float:
    """x / ((log x)^beta * sqrt(log log x)); nan where log log x <= 0."""
    ll = math.log(math.log(x)) if x > 1 else -1.0
    if ll <= 0:
        return math.nan
    return x / (math.log(x) ** BETA * math.sqrt(ll))


def count_F(
    x: int | Sequence[int],
    *,
    segment_size: int = DEFAULT_SEGMENT,
    workers: int = 1,
    checkpoint_file=None,
) -> CountingReport | list[CountingReport]:
    """Number of first subscripts <= x, with ratio to f(x).

    Runs the sieve; n is a first subscript exactly when lambda(D_n) = n.
    Pass a sequence of bounds to get one report per bound from a single pass.
    """
    bounds = [x] if isinstance(x, int) else sorted(x)
    totals = [0] * len(bounds)
    config = SieveConfig(max(bounds[-1], 2), segment_size, workers)
    for block in iter_blocks(config, checkpoint_file):
        firsts = block.n[block.lam == block.n]
        for k, c in enumerate(np.searchsorted(firsts, bounds, side="right").tolist()):
            totals[k] += c
    out = [
        _report(b, c, f_reference(b) if b >= 16 else math.nan) for b, c in zip(bounds, totals)
    ]
    return out[0] if isinstance(x, int) else out


def bernoulli_denominators(x: int, table: PrimeTable | None = None) -> list[int]:
    """All members of D up to x, ascending."""
    if x < 6:
        return []
    table = table or PrimeTable(x)
    # candidates: squarefree multiples of 6
    sqfree = np.ones(x // 6 + 1, dtype=bool)
    sqfree[0] = False
    m = 6 * np.arange(x // 6 + 1)
    for p in prime_array(math.isqrt(x)).tolist():
        sqfree &= m % (p * p) != 0
    out = []
    for d in (6 * np.flatnonzero(sqfree)).tolist():
        lam = math.lcm(*(p - 1 for p, _ in table.factors(d)))
        if _closed(d, lam, table):
            out.append(d)
    return out


def count_D(x: int, table: PrimeTable | None = None) -> CountingReport:
    """Number of distinct Bernoulli denominators <= x, with ratio to pi(x)."""
    if x < 6:
        raise ValueError("x must be >= 6")
    return _report(x, len(bernoulli_denominators(x, table)), _pi(x))


def _dp_lambda(p: int, table: PrimeTable) -> tuple[int, int]:
    # (d_p, lambda(d_p)) from the divisors of p - 1
    d, lam = 1, 1
    for e in table.divisors(p - 1):
        q = e + 1
        if q != p and table.is_prime(q):
            d *= q
            lam = lam * e // math.gcd(lam, e)
    return d, lam


def dp_values(x: int, table: PrimeTable | None = None) -> dict[int, int]:
    """Map each odd prime p <= x to d_p."""
    table = table or PrimeTable(x)
    return {p: _dp_lambda(p, table)[0] for p in table.primes.tolist() if p > 2}


def partition_counts(
    x: int, targets: Sequence[int], table: PrimeTable | None = None
) -> dict[int, tuple[int, float]]:
    """For each d, the number of odd primes p <= x with d_p = d and its share of pi(x)."""
    if x < 3:
        raise ValueError("x must be >= 3")
    tally = Counter(dp_values(x, table).values())
    pi = _pi(x)
    return {d: (tally[d], tally[d] / pi) for d in targets}


def count_dp_not_in_D(x: int, table: PrimeTable | None = None) -> CountingReport:
    """Primes p <= x with d_p outside D, via lambda(d_p) = p - 1."""
    if x < 3:
        raise ValueError("x must be >= 3")
    table = table or PrimeTable(x)
    count = sum(
        1 for p in table.primes.tolist() if p > 2 and _dp_lambda(p, table)[1] == p - 1
    )
    return _report(x, count, _pi(x))


@dataclass(frozen=True)
class DPlusOneSplit:
    bound: int
    composite: int
    prime: int

    @property
    def total(self) -> int:
        return self.composite + self.prime

    @property
    def composite_fraction(self) -> float:
        return self.composite / self.total if self.total else math.nan

    @property
    def prime_fraction(self) -> float:
        return self.prime / self.total if self.total else math.nan


def d_plus_one_split(x: int, table: PrimeTable | None = None) -> DPlusOneSplit:
    """Split {d in D : d + 1 <= x} by whether d + 1 is prime."""
    if x < 7:
        raise ValueError("x must be >= 7")
    table = table or PrimeTable(x)
    ds = bernoulli_denominators(x - 1, table)
    prime = sum(1 for d in ds if table.is_prime(d + 1))
    return DPlusOneSplit(x, len(ds) - prime, prime)


def mod3_split(x: int) -> tuple[int, int]:
    """(#{d in D <= x : d/6 = 1 mod 3}, #{... = 2 mod 3}); reported, not interpreted."""
    ds = bernoulli_denominators(x)
    r = Counter((d // 6) % 3 for d in ds)
    return r[1], r[2]


def witness_notin_D(x: int) -> list[int]:
    """Primes p = 2q - 1 <= x with q prime, q = 3 mod 4, q > 3.

    Each such p has d_p outside D.
    """
    if x < 3:
        raise ValueError("x must be >= 3")
    return [
        2 * q - 1
        for q in prime_array((x + 1) // 2).tolist()
        if q > 3 and q % 4 == 3 and is_prime(2 * q - 1)
    ]


def witness_in_D(x: int) -> list[int]:
    """Primes p = 6q + 1 <= x with q = 2r + 1 and r all prime; p - 1 lies in D."""
    out = []
    for r in prime_array(max((x - 7) // 12, 0)).tolist():
        q = 2 * r + 1
        if is_prime(q) and is_prime(6 * q + 1):
            out.append(6 * q + 1)
    return out


def germain_witnesses(x: int) -> list[int]:
    """Primes p <= x with 2p + 1 prime."""
    return [p for p in prime_array(x).tolist() if is_prime(2 * p + 1)]


def first_subscripts(x: int) -> list[int]:
    """Members of F up to x by direct class labels (no sieve)."""
    table = PrimeTable(x + 1)
    return [n for n in range(2, x + 1, 2) if class_label(n, table) == n]
