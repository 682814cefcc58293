"""Integer arithmetic primitives: sieving, primality, factorization, lambda."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator

import numpy as np

__all__ = [
    "CapacityError",
    "Factorization",
    "PrimeSet",
    "PrimeTable",
    "carmichael_lambda",
    "divisors",
    "factorize",
    "is_prime",
    "is_squarefree",
    "prime_array",
    "sieve_primes",
    "valuation",
]

# Bytes a single boolean sieve may allocate before we refuse.
DEFAULT_MAX_BYTES = 2 << 30

_U64 = 1 << 64
# First 12 primes as strong-pseudoprime witnesses: deterministic below 3.3e24.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_TABLE_CUTOFF = 1 << 16


class CapacityError(MemoryError):
    """Raised when a request would exceed the configured memory budget."""


def prime_array(limit: int, max_bytes: int = DEFAULT_MAX_BYTES) -> np.ndarray:
    """Primes <= limit as an int64 array (odd-only Eratosthenes)."""
    if limit < 0:
        raise ValueError("limit must be >= 0")
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    if limit // 2 + 1 > max_bytes:
        raise CapacityError(
            f"sieving to {limit} needs ~{limit // 2 + 1} bytes, budget is {max_bytes}"
        )
    # odd[i] represents 2*i + 1
    odd = np.ones(limit // 2 + 1, dtype=bool)
    odd[0] = False
    if 2 * (len(odd) - 1) + 1 > limit:
        odd[-1] = False
    for i in range(1, (math.isqrt(limit) - 1) // 2 + 1):
        if odd[i]:
            p = 2 * i + 1
            odd[p * p // 2 :: p] = False
    out = 2 * np.flatnonzero(odd).astype(np.int64) + 1
    return np.concatenate((np.array([2], dtype=np.int64), out))


def sieve_primes(limit: int, max_bytes: int = DEFAULT_MAX_BYTES) -> list[int]:
    """All primes in [2, limit], ascending."""
    return prime_array(limit, max_bytes).tolist()


@lru_cache(maxsize=1)
def _small_table() -> tuple[bytes, tuple[int, ...]]:
    primes = prime_array(_TABLE_CUTOFF)
    flags = bytearray(_TABLE_CUTOFF + 1)
    for p in primes.tolist():
        flags[p] = 1
    return bytes(flags), tuple(primes.tolist())


def _strong_probable_prime(n: int, a: int, d: int, s: int) -> bool:
    x = pow(a, d, n)
    if x == 1 or x == n - 1:
        return True
    for _ in range(s - 1):
        x = x * x % n
        if x == n - 1:
            return True
    return False


def is_prime(n: int) -> bool:
    """Deterministic primality for 0 <= n < 2**64 (and well beyond)."""
    if n < 0:
        raise ValueError("n must be >= 0")
    flags, small = _small_table()
    if n <= _TABLE_CUTOFF:
        return bool(flags[n])
    for p in small[:25]:
        if n % p == 0:
            return False
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    return all(_strong_probable_prime(n, a, d, s) for a in _MR_BASES)


def valuation(n: int, r: int) -> int:
    """Exponent of the prime r in n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    e = 0
    while n % r == 0:
        n //= r
        e += 1
    return e


@dataclass(frozen=True)
class Factorization:
    value: int
    factors: tuple[tuple[int, int], ...]

    def __post_init__(self):
        prod = 1
        last = 1
        for p, e in self.factors:
            if p <= last or e < 1:
                raise ValueError(f"malformed factorization {self.factors}")
            last = p
            prod *= p**e
        if prod != self.value:
            raise ValueError(f"factors multiply to {prod}, not {self.value}")

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.factors)

    def num_divisors(self) -> int:
        return math.prod(e + 1 for _, e in self.factors)

    def is_squarefree(self) -> bool:
        return all(e == 1 for _, e in self.factors)


@dataclass(frozen=True)
class PrimeSet:
    """A sorted tuple of distinct primes, e.g. T_m = {p : p - 1 | m}."""

    primes: tuple[int, ...]

    def __post_init__(self):
        if any(a >= b for a, b in zip(self.primes, self.primes[1:])):
            raise ValueError("primes must be strictly increasing")

    @classmethod
    def of(cls, primes: Iterable[int]) -> PrimeSet:
        return cls(tuple(sorted(set(primes))))

    def __iter__(self) -> Iterator[int]:
        return iter(self.primes)

    def __len__(self) -> int:
        return len(self.primes)

    def __contains__(self, p: object) -> bool:
        return p in self.primes

    def product(self) -> int:
        return math.prod(self.primes)

    def without(self, p: int) -> PrimeSet:
        return PrimeSet(tuple(q for q in self.primes if q != p))

    def __str__(self) -> str:
        return "{" + ",".join(map(str, self.primes)) + "}"


def _rho(n: int) -> int:
    # Brent's variant; deterministic sequence of constants
    if n % 2 == 0:
        return 2
    for c in range(1, 200):
        y, r, q, g = 2, 1, 1, 1
        x = ys = y
        m = 128
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g
    raise ArithmeticError(f"rho failed to split {n}")


def _split_into(n: int, out: dict[int, int]) -> None:
    if n == 1:
        return
    if is_prime(n):
        out[n] = out.get(n, 0) + 1
        return
    d = _rho(n)
    _split_into(d, out)
    _split_into(n // d, out)


@lru_cache(maxsize=1)
def _trial_primes() -> tuple[int, ...]:
    return tuple(sieve_primes(10**6))


def factorize(n: int) -> Factorization:
    """Prime factorization by trial division up to 1e6, then Pollard rho."""
    if n < 1:
        raise ValueError("n must be >= 1")
    found: dict[int, int] = {}
    m = n
    for p in _trial_primes():
        if p * p > m:
            break
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            found[p] = e
    if m > 1:
        _split_into(m, found)
    return Factorization(n, tuple(sorted(found.items())))


def _divisors_from(factors: Iterable[tuple[int, int]]) -> list[int]:
    divs = [1]
    for p, e in factors:
        divs = [d * p**k for d in divs for k in range(e + 1)]
    divs.sort()
    return divs


def divisors(n: int) -> list[int]:
    """Sorted positive divisors of n."""
    return _divisors_from(factorize(n).factors)


def _lambda_from(factors: Iterable[tuple[int, int]]) -> int:
    lam = 1
    for p, e in factors:
        if p == 2:
            part = 1 if e == 1 else 2 if e == 2 else 1 << (e - 2)
        else:
            part = p ** (e - 1) * (p - 1)
        lam = lam * part // math.gcd(lam, part)
    return lam


def carmichael_lambda(n: int) -> int:
    """Carmichael's lambda: exponent of the unit group mod n."""
    return _lambda_from(factorize(n).factors)


def is_squarefree(n: int) -> bool:
    return factorize(n).is_squarefree()


class PrimeTable:
    """Smallest-prime-factor table for fast bulk work on n <= limit.

    Read-only after construction.
    """

    def __init__(self, limit: int, max_bytes: int = DEFAULT_MAX_BYTES):
        if limit < 2:
            limit = 2
        if 4 * (limit + 1) > max_bytes:
            raise CapacityError(f"prime table to {limit} exceeds {max_bytes} bytes")
        self.limit = limit
        spf = np.zeros(limit + 1, dtype=np.int32)
        for p in prime_array(math.isqrt(limit)).tolist():
            view = spf[p * p :: p]
            view[view == 0] = p
        idx = np.flatnonzero(spf == 0)
        spf[idx] = idx
        self._spf = spf
        self.primes = np.flatnonzero(spf[2:] == np.arange(2, limit + 1)) + 2
        self._flags = bytes(np.concatenate(([0, 0], spf[2:] == np.arange(2, limit + 1))).astype(np.uint8))

    def is_prime(self, n: int) -> bool:
        if n <= self.limit:
            return n >= 0 and self._flags[n] == 1
        return is_prime(n)

    def factors(self, n: int) -> list[tuple[int, int]]:
        if n > self.limit:
            return list(factorize(n).factors)
        spf = self._spf
        out = []
        while n > 1:
            p = int(spf[n])
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        return out

    def divisors(self, n: int) -> list[int]:
        return _divisors_from(self.factors(n))

    def carmichael_lambda(self, n: int) -> int:
        return _lambda_from(self.factors(n))
