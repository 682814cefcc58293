"""Von Staudt-Clausen denominators and exact Bernoulli numbers.

For even n >= 2 the reduced denominator of B_n is the product of the primes
p with p - 1 | n, and B_n plus the sum of 1/p over those primes is an
integer.  Everything here is exact; no floating point is involved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .arith import PrimeSet, PrimeTable, divisors, is_prime

__all__ = [
    "ORACLE_CAP",
    "Denom",
    "bernoulli_frac",
    "bernoulli_oracle",
    "class_label",
    "d_p",
    "denominator",
    "t_class",
]

Rational = Fraction

ORACLE_CAP = 512


@dataclass(frozen=True)
class Denom:
    """A squarefree denominator held both as an integer and as its primes."""

    value: int
    prime_set: PrimeSet

    def __post_init__(self):
        if self.prime_set.product() != self.value:
            raise ValueError("value must equal the product of prime_set")

    @classmethod
    def from_primes(cls, primes: PrimeSet) -> Denom:
        return cls(primes.product(), primes)

    def __int__(self) -> int:
        return self.value


def _check_even(n: int) -> None:
    if n < 2 or n % 2:
        raise ValueError(f"subscript must be a positive even integer, got {n}")


def t_class(m: int, table: PrimeTable | None = None) -> PrimeSet:
    """The set of primes p with p - 1 dividing m."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if m % 2:
        return PrimeSet((2,))
    if table is not None and m <= table.limit:
        divs = table.divisors(m)
        check = table.is_prime
    else:
        divs = divisors(m)
        check = is_prime
    return PrimeSet(tuple(d + 1 for d in divs if check(d + 1)))


def denominator(n: int, table: PrimeTable | None = None) -> Denom:
    """D_n for even n >= 2."""
    _check_even(n)
    return Denom.from_primes(t_class(n, table))


def class_label(n: int, table: PrimeTable | None = None) -> int:
    """lambda(D_n) = lcm{p - 1 : p - 1 | n}.

    Two even subscripts share a denominator iff their labels agree, and n is
    the least subscript of its class iff class_label(n) == n.
    """
    _check_even(n)
    return math.lcm(*(p - 1 for p in t_class(n, table)))


def bernoulli_frac(n: int) -> Fraction:
    """Fractional part of B_n in [0, 1), from the denominator alone."""
    den = denominator(n)
    D = den.value
    s = sum(D // p for p in den.prime_set) % D
    return Fraction((-s) % D, D)


@lru_cache(maxsize=None)
def _bernoulli_upto(n: int) -> tuple[Fraction, ...]:
    # sum_{j=0}^{m} C(m+1, j) B_j = 0, with odd B_j = 0 for j > 1
    B = [Fraction(1), Fraction(-1, 2)]
    for m in range(2, n + 1):
        if m % 2:
            B.append(Fraction(0))
            continue
        acc = Fraction(1) - Fraction(m + 1, 2)
        for j in range(2, m, 2):
            acc += math.comb(m + 1, j) * B[j]
        B.append(-acc / (m + 1))
    return tuple(B)


def bernoulli_oracle(n: int, cap: int = ORACLE_CAP) -> Fraction:
    """Exact B_n via the binomial recurrence (independent of von Staudt-Clausen)."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if n > cap:
        raise ValueError(f"n={n} exceeds oracle cap {cap}")
    # cache on the next power of two so sweeps reuse one table
    size = min(cap, max(16, 1 << n.bit_length()))
    return _bernoulli_upto(size)[n]


def d_p(p: int, table: PrimeTable | None = None) -> Denom:
    """D_{p-1} / p for an odd prime p."""
    if p < 3 or not is_prime(p):
        raise ValueError(f"d_p needs an odd prime, got {p}")
    full = denominator(p - 1, table)
    return Denom.from_primes(full.prime_set.without(p))
