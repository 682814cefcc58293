"""Segmented shifted-prime sieve over even subscripts.

For every prime p <= N + 1 the sieve visits the multiples of p - 1 and folds
p into the running state of each even subscript n it meets:

* a 128-bit class digest (XOR-fold in the low word, wrapping sum-fold in
  the high word of per-prime 64-bit mixes), so equal T-sets give equal keys
  regardless of the order primes arrive in;
* a running lcm of p - 1, which ends as lambda(D_n).  It always divides n,
  so int64 never overflows, and it is an exact label for the class of n
  (D_n = D_{lambda(D_n)}).

Subscripts are stored by index i = n // 2.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .arith import DEFAULT_MAX_BYTES, CapacityError, PrimeSet, PrimeTable, prime_array
from .staudt_clausen import class_label, t_class

logger = logging.getLogger(__name__)

__all__ = [
    "ClassKey",
    "ClassReport",
    "DigestCollision",
    "SieveBlock",
    "SieveConfig",
    "class_members",
    "iter_blocks",
    "read_checkpoint",
    "residue_statistics",
    "s_class_counts",
    "sieve_denominators",
    "stable_power",
    "u_set",
    "u_set_excluding",
]

MAGIC = b"BDEN"
VERSION = 1
RECORD = np.dtype([("n", "<u8"), ("lo", "<u8"), ("hi", "<u8"), ("lam", "<u8")])
HEADER_SIZE = len(MAGIC) + 2

DEFAULT_SEGMENT = 1 << 22
# per-index bytes held live by a segment: n, lo, hi, lam, plus slack for temporaries
_BYTES_PER_INDEX = 64
_PAIR_CHUNK = 1 << 20
_SMALL_STRIDE = 2048

_MASK = (1 << 64) - 1
_SEED_LO = 0x243F6A8885A308D3
_SEED_HI = 0x13198A2E03707344


class DigestCollision(RuntimeError):
    """Two different T-sets produced the same digest (or vice versa)."""


def _mix(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK
    return x ^ (x >> 31)


def _mix_array(x: np.ndarray) -> np.ndarray:
    x = x.astype(np.uint64) + np.uint64(0x9E3779B97F4A7C15)
    x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return x ^ (x >> np.uint64(31))


def _prime_hashes(p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    with np.errstate(over="ignore"):
        lo = _mix_array(p.astype(np.uint64) ^ np.uint64(_SEED_LO))
        hi = _mix_array(_mix_array(p) ^ np.uint64(_SEED_HI))
    return lo, hi


@dataclass(frozen=True, order=True)
class ClassKey:
    digest: int

    @property
    def lo(self) -> int:
        return self.digest & _MASK

    @property
    def hi(self) -> int:
        return self.digest >> 64

    @classmethod
    def from_words(cls, lo: int, hi: int) -> ClassKey:
        return cls((int(hi) << 64) | int(lo))

    @classmethod
    def from_primes(cls, primes: Iterable[int]) -> ClassKey:
        lo = hi = 0
        for p in sorted(set(primes)):
            lo ^= _mix(p ^ _SEED_LO)
            hi = (hi + _mix(_mix(p) ^ _SEED_HI)) & _MASK
        return cls.from_words(lo, hi)


@dataclass(frozen=True)
class SieveConfig:
    limit: int
    segment_size: int = DEFAULT_SEGMENT
    workers: int = 1
    max_bytes: int = DEFAULT_MAX_BYTES

    def __post_init__(self):
        if self.limit < 2:
            raise ValueError("limit must be >= 2")
        if self.segment_size < 2 or self.segment_size % 2:
            raise ValueError("segment_size must be even and >= 2")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    @property
    def last_index(self) -> int:
        return self.limit // 2


@dataclass
class SieveBlock:
    """Sieve results for a contiguous run of even subscripts."""

    n: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    lam: np.ndarray

    def __len__(self) -> int:
        return len(self.n)

    def key(self, j: int) -> ClassKey:
        return ClassKey.from_words(self.lo[j], self.hi[j])

    def records(self) -> np.ndarray:
        rec = np.empty(len(self.n), dtype=RECORD)
        rec["n"] = self.n
        rec["lo"] = self.lo
        rec["hi"] = self.hi
        rec["lam"] = self.lam
        return rec

    @classmethod
    def from_records(cls, rec: np.ndarray) -> SieveBlock:
        return cls(
            rec["n"].astype(np.int64),
            rec["lo"].copy(),
            rec["hi"].copy(),
            rec["lam"].astype(np.int64),
        )


class _Primes:
    """Odd primes >= 5 with their strides and hashes, shared by segments."""

    def __init__(self, limit: int, max_bytes: int):
        p = prime_array(limit + 1, max_bytes)
        p = p[p >= 5]
        self.p = p
        self.stride = (p - 1) // 2
        self.lo, self.hi = _prime_hashes(p)
        base_lo, base_hi = _prime_hashes(np.array([2, 3], dtype=np.int64))
        self.base_lo = base_lo[0] ^ base_lo[1]
        with np.errstate(over="ignore"):
            self.base_hi = base_hi[0] + base_hi[1]


def _sieve_segment(primes: _Primes, start: int, stop: int) -> SieveBlock:
    """Sieve indices [start, stop), i.e. even n in [2*start, 2*stop)."""
    size = stop - start
    lo = np.full(size, primes.base_lo, dtype=np.uint64)
    hi = np.full(size, primes.base_hi, dtype=np.uint64)
    lam = np.full(size, 2, dtype=np.int64)

    cut = int(np.searchsorted(primes.stride, stop - 1, side="right"))
    split = min(cut, int(np.searchsorted(primes.stride, _SMALL_STRIDE, side="right")))

    with np.errstate(over="ignore"):
        for j in range(split):
            s = int(primes.stride[j])
            off = (-start) % s
            if off >= size:
                continue
            lo[off::s] ^= primes.lo[j]
            hi[off::s] += primes.hi[j]
            v = lam[off::s]
            lam[off::s] = np.lcm(v, 2 * s)

        stride = primes.stride[split:cut]
        first = -(-start // stride) * stride
        counts = np.maximum((stop - 1 - first) // stride + 1, 0)
        plo, phi = primes.lo[split:cut], primes.hi[split:cut]
        # chunk primes so each batch yields about _PAIR_CHUNK (index, prime) pairs
        csum = np.cumsum(counts)
        a = 0
        while a < len(stride):
            base = csum[a - 1] if a else 0
            b = int(np.searchsorted(csum, base + _PAIR_CHUNK, side="right"))
            b = max(b, a + 1)
            c = counts[a:b]
            total = int(c.sum())
            if total:
                rep_s = np.repeat(stride[a:b], c)
                grp = np.repeat(np.cumsum(c) - c, c)
                pos = np.repeat(first[a:b] - start, c) + (np.arange(total) - grp) * rep_s
                np.bitwise_xor.at(lo, pos, np.repeat(plo[a:b], c))
                np.add.at(hi, pos, np.repeat(phi[a:b], c))
                np.lcm.at(lam, pos, 2 * rep_s)
            a = b

    n = 2 * np.arange(start, stop, dtype=np.int64)
    return SieveBlock(n, lo, hi, lam)


_WORKER_PRIMES: _Primes | None = None


def _init_worker(limit: int, max_bytes: int) -> None:
    global _WORKER_PRIMES
    _WORKER_PRIMES = _Primes(limit, max_bytes)


def _worker_segment(bounds: tuple[int, int]) -> SieveBlock:
    assert _WORKER_PRIMES is not None
    return _sieve_segment(_WORKER_PRIMES, *bounds)


def _segments(start: int, last: int, seg: int) -> list[tuple[int, int]]:
    return [(a, min(a + seg, last + 1)) for a in range(start, last + 1, seg)]


def _compute_blocks(config: SieveConfig, start: int) -> Iterator[SieveBlock]:
    last = config.last_index
    if start > last:
        return
    seg = config.segment_size
    need = seg * _BYTES_PER_INDEX + _PAIR_CHUNK * 48
    if need > config.max_bytes:
        raise CapacityError(
            f"segment_size {seg} needs ~{need} bytes, budget is {config.max_bytes}"
        )
    bounds = _segments(start, last, seg)
    if config.workers == 1 or len(bounds) == 1:
        primes = _Primes(config.limit, config.max_bytes)
        for k, (a, b) in enumerate(bounds):
            logger.info("segment %d/%d: n in [%d, %d]", k + 1, len(bounds), 2 * a, 2 * b - 2)
            yield _sieve_segment(primes, a, b)
        return
    with ProcessPoolExecutor(
        max_workers=config.workers,
        initializer=_init_worker,
        initargs=(config.limit, config.max_bytes),
    ) as pool:
        # map() yields in submission order, which keeps emission ascending
        for k, block in enumerate(pool.map(_worker_segment, bounds)):
            logger.info("segment %d/%d done", k + 1, len(bounds))
            yield block


def read_checkpoint(path: str | os.PathLike) -> np.ndarray:
    """Complete records from a checkpoint file (partial trailing record dropped)."""
    with open(path, "rb") as fh:
        head = fh.read(HEADER_SIZE)
        if len(head) < HEADER_SIZE or head[:4] != MAGIC:
            raise ValueError(f"{path}: not a BDEN checkpoint")
        version = int.from_bytes(head[4:6], "little")
        if version != VERSION:
            raise ValueError(f"{path}: unsupported checkpoint version {version}")
        raw = fh.read()
    whole = len(raw) // RECORD.itemsize * RECORD.itemsize
    rec = np.frombuffer(raw[:whole], dtype=RECORD)
    expected = 2 * np.arange(1, len(rec) + 1, dtype=np.uint64)
    if not np.array_equal(rec["n"], expected):
        raise ValueError(f"{path}: records are not the consecutive even subscripts 2, 4, ...")
    return rec


def _open_checkpoint(path: str | os.PathLike) -> tuple[np.ndarray, object]:
    if os.path.exists(path) and os.path.getsize(path) > 0:
        rec = read_checkpoint(path)
        fh = open(path, "r+b")
        fh.truncate(HEADER_SIZE + len(rec) * RECORD.itemsize)
        fh.seek(0, os.SEEK_END)
        return rec, fh
    fh = open(path, "wb")
    fh.write(MAGIC + VERSION.to_bytes(2, "little"))
    return np.zeros(0, dtype=RECORD), fh


def iter_blocks(
    config: SieveConfig, checkpoint_file: str | os.PathLike | None = None
) -> Iterator[SieveBlock]:
    """Sieve blocks in ascending n covering every even n <= config.limit.

    With ``checkpoint_file`` the records already on disk are replayed first
    and newly computed blocks are appended, so an interrupted run resumes
    where it stopped.
    """
    if checkpoint_file is None:
        yield from _compute_blocks(config, 1)
        return
    rec, fh = _open_checkpoint(checkpoint_file)
    try:
        keep = rec[rec["n"] <= config.limit]
        for a in range(0, len(keep), config.segment_size):
            yield SieveBlock.from_records(keep[a : a + config.segment_size])
        for block in _compute_blocks(config, len(rec) + 1):
            fh.write(block.records().tobytes())
            fh.flush()
            yield block
    finally:
        fh.close()


def sieve_denominators(
    config: SieveConfig, checkpoint_file: str | os.PathLike | None = None
) -> Iterator[tuple[int, ClassKey, int]]:
    """(n, key(T_n), lambda(D_n)) for every even n <= limit, ascending."""
    for block in iter_blocks(config, checkpoint_file):
        for n, lo, hi, lam in zip(
            block.n.tolist(), block.lo.tolist(), block.hi.tolist(), block.lam.tolist()
        ):
            yield n, ClassKey.from_words(lo, hi), lam


@dataclass
class ClassReport:
    first: int
    second: int | None
    t_set: PrimeSet
    counts: list[tuple[int, int]] = field(default_factory=list)

    def count_at(self, bound: int) -> int:
        return dict(self.counts)[bound]


def _firsts_upto(max_first: int) -> list[int]:
    return [f for f in range(2, max_first + 1, 2) if class_label(f) == f]


def _check_labels(block: SieveBlock, mask: np.ndarray, key: ClassKey, label: int) -> None:
    # digest and lambda must agree on class membership
    by_key = (block.lo == np.uint64(key.lo)) & (block.hi == np.uint64(key.hi))
    if not np.array_equal(by_key, mask):
        bad = block.n[by_key != mask][0]
        raise DigestCollision(f"digest and lambda disagree for n={bad} (class {label})")


def s_class_counts(
    limit: int,
    max_first: int,
    checkpoints: Sequence[int] | None = None,
    *,
    segment_size: int = DEFAULT_SEGMENT,
    workers: int = 1,
    checkpoint_file: str | os.PathLike | None = None,
) -> list[ClassReport]:
    """Counts of S_{2k} below each checkpoint for every first subscript 2k <= max_first."""
    bounds = sorted(checkpoints) if checkpoints else [limit]
    if bounds[-1] > limit:
        raise ValueError("checkpoints must not exceed limit")
    config = SieveConfig(limit, segment_size, workers)
    firsts = _firsts_upto(max_first)
    sets = {f: t_class(f) for f in firsts}
    keys = {f: ClassKey.from_primes(sets[f]) for f in firsts}
    members: dict[int, list[int]] = {f: [] for f in firsts}
    counts = {f: [0] * len(bounds) for f in firsts}
    targets = np.array(firsts, dtype=np.int64)

    for block in iter_blocks(config, checkpoint_file):
        hit = np.isin(block.lam, targets)
        for f in firsts:
            mask = hit & (block.lam == f)
            _check_labels(block, mask, keys[f], f)
            sel = block.n[mask]
            if len(members[f]) < 2:
                members[f].extend(sel[: 2 - len(members[f])].tolist())
            pos = np.searchsorted(sel, bounds, side="right")
            for k, c in enumerate(pos.tolist()):
                counts[f][k] += c

    reports = []
    for f in firsts:
        first, *rest = members[f]
        assert first == f
        reports.append(
            ClassReport(f, rest[0] if rest else None, sets[f], list(zip(bounds, counts[f])))
        )
    return reports


def class_members(
    first: int,
    limit: int,
    *,
    segment_size: int = DEFAULT_SEGMENT,
    workers: int = 1,
    checkpoint_file: str | os.PathLike | None = None,
) -> np.ndarray:
    """Elements of S_first up to limit, ascending."""
    if class_label(first) != first:
        raise ValueError(f"{first} is not a first subscript")
    key = ClassKey.from_primes(t_class(first))
    out = []
    for block in iter_blocks(SieveConfig(limit, segment_size, workers), checkpoint_file):
        mask = block.lam == first
        _check_labels(block, mask, key, first)
        out.append(block.n[mask])
    return np.concatenate(out) if out else np.zeros(0, dtype=np.int64)


def residue_statistics(
    first: int, limit: int, moduli: Sequence[int], **sieve_opts
) -> dict[int, list[int]]:
    """Residue-class counts of S_first up to limit for each modulus."""
    if not moduli:
        raise ValueError("moduli must be nonempty")
    elems = class_members(first, limit, **sieve_opts)
    return {m: np.bincount(elems % m, minlength=m).tolist() for m in moduli}


def _table_for(limit: int) -> PrimeTable | None:
    return PrimeTable(limit + 1) if limit > 1000 else None


def u_set(n: int, limit: int, table: PrimeTable | None = None) -> list[int]:
    """Multiples mn <= limit with D_{mn} = D_n."""
    if n < 2 or n % 2:
        raise ValueError("n must be a positive even integer")
    table = table or _table_for(limit)
    target = t_class(n, table)
    return [m for m in range(n, limit + 1, n) if t_class(m, table) == target]


def u_set_excluding(n: int, r: int, limit: int, table: PrimeTable | None = None) -> list[int]:
    """Members of U_n <= limit whose cofactor m/n is prime to r."""
    return [m for m in u_set(n, limit, table) if (m // n) % r]


def stable_power(n: int, r: int, max_i: int) -> int:
    """Largest i <= max_i with D_{n r^j} = D_n for every j <= i."""
    target = t_class(n)
    i = 0
    while i < max_i and t_class(n * r ** (i + 1)) == target:
        i += 1
    return i
