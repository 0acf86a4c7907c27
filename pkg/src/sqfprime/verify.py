"""Range verification of n = s + p with s squarefree and p*p <= n.

Every n is scanned against the primes in increasing order. The index of the
first prime p with n - p squarefree (or with p >= n, when the run of
non-squarefree differences reaches n itself) is the *streak* of n. From it:

* n is an exception iff the stopping prime exceeds sqrt(n);
* otherwise the stopping prime is the witness and ``streak + 1`` is the
  number of checks it took;
* b_k is the first n whose streak is at least k.

One pass over a range therefore yields the verification report and the
streak table together.
"""
from __future__ import annotations

import hashlib
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .primes import PrimeTable, build_prime_table, is_prime
from .squarefree import (
    DEFAULT_SEGMENT_SIZE,
    is_squarefree,
    sieve_segment,
    smallest_square_divisor,
)

log = logging.getLogger(__name__)

KNOWN_EXCEPTIONS = (1, 2, 3, 6, 11, 30, 155, 247)
KNOWN_STREAKS = {
    1: 6, 2: 11, 3: 30, 4: 155, 5: 155, 6: 247, 7: 5753,
    8: 90263, 9: 90263, 10: 90263, 11: 90263,
    12: 1481287, 13: 7409327, 14: 7409327, 15: 7409327,
}
# b_16 is known to exceed this bound
STREAK_SEARCH_LIMIT = 10**9
MAX_CHECKS_BOUND = 17

MAX_RANGE = 10**12
# primes beyond sqrt(n) are still needed for streaks (247 runs to 13 > sqrt(247))
STREAK_LOOKBACK = 1000
CHECKPOINT_VERSION = 1


class CheckpointError(RuntimeError):
    pass


class VerificationError(RuntimeError):
    """A spot recheck disagreed with the vectorised scan."""


@dataclass(frozen=True)
class WitnessResult:
    n: int
    witness: int | None
    checks: int

    @property
    def is_exception(self) -> bool:
        return self.witness is None


@dataclass
class VerificationReport:
    range_lo: int
    range_hi: int
    exceptions: list[int] = field(default_factory=list)
    max_checks: int = 0
    max_checks_at: int = 0
    segments_done: int = 0
    elapsed: float = 0.0
    failures: dict[int, list[tuple[int, int]]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "range": [self.range_lo, self.range_hi],
            "exceptions": [
                {"n": n, "failures": [{"p": p, "q": q} for p, q in self.failures.get(n, [])]}
                for n in self.exceptions
            ],
            "max_checks": self.max_checks,
            "max_checks_at": self.max_checks_at,
            "segments": self.segments_done,
            "elapsed_seconds": round(self.elapsed, 3),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "VerificationReport":
        lo, hi = d["range"]
        excs = d["exceptions"]
        return cls(
            range_lo=lo,
            range_hi=hi,
            exceptions=[e["n"] for e in excs],
            max_checks=d["max_checks"],
            max_checks_at=d["max_checks_at"],
            segments_done=d["segments"],
            elapsed=d.get("elapsed_seconds", 0.0),
            failures={e["n"]: [(f["p"], f["q"]) for f in e["failures"]] for e in excs},
        )


@dataclass
class StreakTable:
    entries: dict[int, int]
    scanned_up_to: int

    def to_dict(self) -> dict:
        return {
            "scanned_up_to": self.scanned_up_to,
            "b": {str(k): v for k, v in sorted(self.entries.items())},
        }


@dataclass
class SegmentResult:
    lo: int
    hi: int
    exceptions: list[int]
    max_checks: int
    max_checks_at: int
    streak_firsts: dict[int, int]


# --------------------------------------------------------------------------
# scalar routines (also the oracles for the vectorised scan)

def _require_primes(table: PrimeTable, bound: int) -> None:
    if table.limit < bound:
        raise ValueError(f"prime table up to {table.limit} does not reach {bound}")


def find_witness(n: int, table: PrimeTable, lookup=None) -> WitnessResult:
    """Smallest prime p with p*p <= n and n - p squarefree.

    ``lookup`` maps an integer to its squarefreeness; a ``SegmentBitmap``
    works directly and raises ``MissingSegmentError`` outside its window.
    The default is the trial-division oracle.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    _require_primes(table, math.isqrt(n))
    sf = is_squarefree if lookup is None else lookup
    checks = 0
    for p in table:
        if p * p > n:
            break
        checks += 1
        if sf(n - p):
            return WitnessResult(n, p, checks)
    return WitnessResult(n, None, checks)


def failure_certificate(n: int, table: PrimeTable) -> list[tuple[int, int]]:
    """For every prime p with p*p <= n, a prime q with q*q | n - p.

    Raises ValueError if some n - p is squarefree, i.e. n is no exception.
    """
    _require_primes(table, math.isqrt(n))
    out = []
    for p in table:
        if p * p > n:
            break
        q = smallest_square_divisor(n - p)
        if q is None:
            raise ValueError(f"{n} - {p} is squarefree; {n} is not an exception")
        out.append((p, q))
    return out


def streak(n: int) -> int:
    """Number of leading primes p_1 < p_2 < ... below n with every n - p_l non-squarefree."""
    k = 0
    p = 2
    while p < n and not is_squarefree(n - p):
        k += 1
        p += 1
        while not is_prime(p):
            p += 1
    return k


# --------------------------------------------------------------------------
# vectorised segment scan

def scan_segment(lo: int, hi: int, table: PrimeTable, spot_checks: int = 0) -> SegmentResult:
    """Scan [lo, hi); ``table`` must hold every prime up to isqrt(hi - 1)."""
    _require_primes(table, math.isqrt(hi - 1))
    primes = table.primes
    lookback = max(math.isqrt(hi - 1), STREAK_LOOKBACK)
    wlo = max(1, lo - lookback)
    bits = sieve_segment(wlo, hi, table).bits
    size = hi - lo
    base = lo - wlo

    first = np.full(size, -1, dtype=np.int32)
    active = np.arange(size, dtype=np.int64 if len(bits) >= 2**31 else np.int32)
    for j, p in enumerate(primes[primes <= lookback].tolist()):
        off = active + (base - p)
        if lo <= p:
            stop = (active + lo) <= p
            done = stop | bits[np.maximum(off, 0)]
        else:
            done = bits[off]
        first[active[done]] = j
        active = active[~done]
        if active.size == 0:
            break
    if active.size:
        # streak outran the sieved window; finish with the oracle
        for i in active.tolist():
            first[i] = streak(lo + i)

    stopping = _stopping_primes(first, primes)
    nvals = np.arange(lo, hi, dtype=np.int64)
    exc_mask = stopping * stopping > nvals
    exceptions = (nvals[exc_mask]).tolist()

    checks = np.where(exc_mask, 0, first + 1)
    max_checks = int(checks.max())
    max_checks_at = lo + int(checks.argmax()) if max_checks else 0

    firsts = {}
    top = int(first.max())
    for k in range(1, top + 1):
        firsts[k] = lo + int(np.argmax(first >= k))

    if spot_checks:
        _spot_check(lo, hi, first, exc_mask, table, spot_checks)

    return SegmentResult(lo, hi, exceptions, max_checks, max_checks_at, firsts)


def _stopping_primes(first: np.ndarray, primes: np.ndarray) -> np.ndarray:
    if int(first.max(initial=0)) < len(primes):
        return primes[first]
    # only reachable for streaks longer than the table; extend on demand
    extra = []
    p = int(primes[-1])
    while len(primes) + len(extra) <= int(first.max()):
        p += 1
        if is_prime(p):
            extra.append(p)
    return np.concatenate((primes, np.array(extra, dtype=np.int64)))[first]


def _spot_check(lo, hi, first, exc_mask, table, count) -> None:
    rng = np.random.default_rng(lo)
    for i in rng.integers(0, hi - lo, size=min(count, hi - lo)).tolist():
        n = lo + i
        w = find_witness(n, table)
        if w.is_exception != bool(exc_mask[i]) or (
            not w.is_exception and w.checks != int(first[i]) + 1
        ):
            raise VerificationError(f"spot recheck of n={n} disagrees with segment scan")


_WORKER_TABLE: PrimeTable | None = None


def _init_worker(table: PrimeTable) -> None:
    global _WORKER_TABLE
    _WORKER_TABLE = table


def _worker(args) -> SegmentResult:
    lo, hi, spot = args
    return scan_segment(lo, hi, _WORKER_TABLE, spot)


# --------------------------------------------------------------------------
# range driver

def segments(lo: int, hi: int, segment_size: int):
    """Split [lo, hi) at multiples of segment_size."""
    start = lo
    while start < hi:
        end = min(hi, (start // segment_size + 1) * segment_size)
        yield start, end
        start = end


@dataclass
class _Accumulator:
    lo: int
    hi: int
    segment_size: int
    next_lo: int
    exceptions: list[int] = field(default_factory=list)
    max_checks: int = 0
    max_checks_at: int = 0
    segments_done: int = 0
    streaks: dict[int, int] = field(default_factory=dict)

    def merge(self, res: SegmentResult) -> None:
        if res.lo != self.next_lo:
            raise RuntimeError(f"segment [{res.lo}, {res.hi}) merged out of order")
        self.exceptions.extend(res.exceptions)
        if res.max_checks > self.max_checks:
            self.max_checks, self.max_checks_at = res.max_checks, res.max_checks_at
        for k, n in res.streak_firsts.items():
            self.streaks.setdefault(k, n)
        self.segments_done += 1
        self.next_lo = res.hi

    def payload(self) -> dict:
        return {
            "version": CHECKPOINT_VERSION,
            "range": [self.lo, self.hi],
            "segment_size": self.segment_size,
            "next_segment_lo": self.next_lo,
            "partial_exceptions": self.exceptions,
            "partial_max_checks": self.max_checks,
            "partial_max_checks_at": self.max_checks_at,
            "partial_streaks": {str(k): v for k, v in sorted(self.streaks.items())},
            "segments_done": self.segments_done,
        }


def _digest(payload: dict) -> str:
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()


def write_checkpoint(path: Path, acc: _Accumulator) -> None:
    payload = acc.payload()
    doc = dict(payload, digest=_digest(payload))
    tmp = Path(str(path) + ".tmp")
    tmp.write_text(json.dumps(doc, sort_keys=True))
    os.replace(tmp, path)


def load_checkpoint(path: Path, lo: int, hi: int, segment_size: int) -> _Accumulator:
    try:
        doc = json.loads(Path(path).read_text())
        digest = doc.pop("digest")
        keys = (
            "version", "range", "segment_size", "next_segment_lo", "partial_exceptions",
            "partial_max_checks", "partial_max_checks_at", "partial_streaks", "segments_done",
        )
        missing = [k for k in keys if k not in doc]
    except (OSError, ValueError, AttributeError, KeyError) as exc:
        raise CheckpointError(f"unreadable checkpoint {path}: {exc}") from exc
    if missing:
        raise CheckpointError(f"checkpoint {path} lacks fields {missing}")
    if digest != _digest(doc):
        raise CheckpointError(f"checkpoint {path} fails its digest check")
    if doc["version"] != CHECKPOINT_VERSION:
        raise CheckpointError(f"checkpoint {path} has unsupported version {doc['version']}")
    if doc["range"] != [lo, hi] or doc["segment_size"] != segment_size:
        raise CheckpointError(
            f"checkpoint {path} is for range {doc['range']} with segments of "
            f"{doc['segment_size']}, not [{lo}, {hi}) with {segment_size}"
        )
    nxt = doc["next_segment_lo"]
    if not (lo <= nxt <= hi) or (nxt not in (lo, hi) and nxt % segment_size):
        raise CheckpointError(f"checkpoint {path} resumes at misaligned position {nxt}")
    excs = doc["partial_exceptions"]
    if excs != sorted(excs) or any(not lo <= e < nxt for e in excs):
        raise CheckpointError(f"checkpoint {path} lists exceptions outside [{lo}, {nxt})")
    acc = _Accumulator(lo, hi, segment_size, nxt)
    acc.exceptions = list(excs)
    acc.max_checks = doc["partial_max_checks"]
    acc.max_checks_at = doc["partial_max_checks_at"]
    acc.streaks = {int(k): v for k, v in doc["partial_streaks"].items()}
    acc.segments_done = doc["segments_done"]
    return acc


def _scan_range(
    lo: int,
    hi: int,
    segment_size: int = DEFAULT_SEGMENT_SIZE,
    workers: int = 1,
    checkpoint: str | os.PathLike | None = None,
    spot_checks: int = 0,
) -> _Accumulator:
    if not 1 <= lo < hi <= MAX_RANGE + 1:
        raise ValueError(f"need 1 <= lo < hi <= {MAX_RANGE + 1}, got [{lo}, {hi})")
    if segment_size < 1000:
        raise ValueError(f"segment size must be >= 1000, got {segment_size}")
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")

    acc = _Accumulator(lo, hi, segment_size, lo)
    ckpt = Path(checkpoint) if checkpoint is not None else None
    if ckpt is not None and ckpt.exists():
        acc = load_checkpoint(ckpt, lo, hi, segment_size)
        log.info("resuming at %d (%d segments done)", acc.next_lo, acc.segments_done)

    todo = list(segments(acc.next_lo, hi, segment_size))
    if not todo:
        return acc
    table = build_prime_table(max(math.isqrt(hi - 1), STREAK_LOOKBACK))
    per_seg = -(-spot_checks * segment_size // (hi - lo)) if spot_checks else 0
    jobs = [(a, b, per_seg) for a, b in todo]

    def consume(results):
        for res in results:
            acc.merge(res)
            if ckpt is not None:
                write_checkpoint(ckpt, acc)
            log.info("segment [%d, %d) done: %d exceptions so far, max checks %d",
                     res.lo, res.hi, len(acc.exceptions), acc.max_checks)

    if workers == 1 or len(jobs) == 1:
        _init_worker(table)
        consume(map(_worker, jobs))
    else:
        with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(table,)) as pool:
            # bounded look-ahead keeps memory flat and checkpoints current
            batch = 2 * workers
            for i in range(0, len(jobs), batch):
                consume(pool.map(_worker, jobs[i : i + batch]))
    return acc


def verify_range(
    lo: int,
    hi: int,
    segment_size: int = DEFAULT_SEGMENT_SIZE,
    workers: int = 1,
    checkpoint: str | os.PathLike | None = None,
    spot_checks: int = 0,
) -> VerificationReport:
    """Verify every n in [lo, hi); the report lists the exceptions with certificates."""
    t0 = time.perf_counter()
    acc = _scan_range(lo, hi, segment_size, workers, checkpoint, spot_checks)
    cert_table = build_prime_table(max(2, math.isqrt(max(acc.exceptions, default=4))))
    return VerificationReport(
        range_lo=lo,
        range_hi=hi,
        exceptions=acc.exceptions,
        max_checks=acc.max_checks,
        max_checks_at=acc.max_checks_at,
        segments_done=acc.segments_done,
        elapsed=time.perf_counter() - t0,
        failures={n: failure_certificate(n, cert_table) for n in acc.exceptions},
    )


def compute_streaks(
    hi: int,
    segment_size: int = DEFAULT_SEGMENT_SIZE,
    workers: int = 1,
    checkpoint: str | os.PathLike | None = None,
) -> StreakTable:
    """b_k for every k reached by some n <= hi."""
    if hi < 7:
        raise ValueError(f"streak scan needs hi >= 7, got {hi}")
    acc = _scan_range(1, hi + 1, segment_size, workers, checkpoint)
    return StreakTable(dict(sorted(acc.streaks.items())), hi)
