"""Bernoulli-number denominators: von Staudt-Clausen classes, sieves and counts."""

from .arith import (
    CapacityError,
    Factorization,
    PrimeSet,
    carmichael_lambda,
    divisors,
    factorize,
    is_prime,
    sieve_primes,
    valuation,
)
from .denom_sieve import (
    ClassKey,
    ClassReport,
    SieveConfig,
    residue_statistics,
    s_class_counts,
    sieve_denominators,
    u_set,
    u_set_excluding,
)
from .setstats import (
    BETA,
    count_D,
    count_dp_not_in_D,
    count_F,
    d_plus_one_split,
    is_bernoulli_denominator,
    is_first_subscript,
    partition_counts,
    witness_in_D,
    witness_notin_D,
)
from .staudt_clausen import Denom, bernoulli_frac, bernoulli_oracle, d_p, denominator, t_class

__version__ = "0.1.0"
