"""Shared brute-force oracles.

Everything here deliberately avoids the package so it can check it.
"""

import math
from fractions import Fraction
from functools import lru_cache

import pytest


def naive_is_prime(n):
    if n < 2:
        return False
    return all(n % k for k in range(2, math.isqrt(n) + 1))


def naive_T(n):
    """Primes p with p - 1 | n, by scanning every candidate."""
    return [p for p in range(2, n + 2) if n % (p - 1) == 0 and naive_is_prime(p)]


def naive_D(n):
    return math.prod(naive_T(n))


@lru_cache(maxsize=None)
def taylor_bernoulli(n):
    """B_n from t/(e^t - 1) by inverting the exponential series exactly."""
    # (e^t - 1)/t = sum t^k/(k+1)!; invert the power series
    a = [Fraction(1, math.factorial(k + 1)) for k in range(n + 1)]
    b = [Fraction(1)]
    for k in range(1, n + 1):
        b.append(-sum(a[j] * b[k - j] for j in range(1, k + 1)))
    return b[n] * math.factorial(n)


@pytest.fixture(scope="session")
def table_1e5():
    from bernden.arith import PrimeTable

    return PrimeTable(10**5 + 1)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py" in nodeid and getattr(rep, "when", "call") == "call":
                name = nodeid.split("::")[-1]
                lines.append((name, "PASS" if outcome == "passed" else "FAIL"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for name, status in sorted(lines, key=lambda x: _ac_order(x[0])):
            terminalreporter.write_line(f"{status}  {name}")


def _ac_order(name):
    digits = "".join(c for c in name.split("_")[1] if c.isdigit()) if "_ac" in name else ""
    return (int(digits) if digits else 99, name)
