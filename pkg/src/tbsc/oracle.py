"""Brute-force checks that do not go through the stream decoder.

Delay profiles are read off the block recovery matrix by batch elimination,
and erasure schedules are enumerated (or sampled uniformly) by counting.
`verify_tbsc` drives the relay pipeline over those schedules.
"""

from __future__ import annotations

import json
import bisect
from dataclasses import asdict, dataclass
from functools import lru_cache
from typing import Iterator, Optional

import numpy as np

from . import __version__
from .errors import ConstructionInvalidError, ScheduleSpaceTooLarge
from .gf2 import BinMatrix, block, rref
from .relay import (
    RelayNetworkSpec,
    _account,
    _parity_stream,
    _run_rd,
    _run_sr,
    _source_ints,
    default_horizon,
)
from .streaming import DelayProfile, ErasureSchedule, StreamCodeSpec

__all__ = [
    "recovery_matrix",
    "oracle_recovery_times",
    "count_schedules",
    "enumerate_schedules",
    "sample_schedule",
    "VerificationReport",
    "verify_tbsc",
    "REPORT_SCHEMA_VERSION",
]

REPORT_SCHEMA_VERSION = 1
MAX_SCHEDULES = 10**6


def recovery_matrix(spec: StreamCodeSpec) -> BinMatrix:
    """Map from a burst's erased symbols to the parity received after it.

    Block row ``r`` (``1..b``) holds symbols ``S[t+r-1]``; block column
    ``c`` (``1..horizon``) is parity packet ``P[t+b+c-1]``; block ``(r, c)``
    is ``P_{b-r+c}``.
    """
    b, H = spec.b, spec.horizon
    return block([[spec.block(b - r + c) for c in range(1, H + 1)] for r in range(1, b + 1)])


def oracle_recovery_times(spec: StreamCodeSpec) -> DelayProfile:
    """Delay profile from the ranks of growing column prefixes of `recovery_matrix`.

    Symbol ``x`` is pinned by the first ``c`` parity packets iff the unit
    vector ``e_x`` lies in the row space of the transposed prefix, i.e. some
    row of its reduced echelon form equals ``e_x``.  A symbol of block row
    ``r`` pinned first at prefix ``c`` has delay ``b + c - r``.
    """
    b, k, w, H = spec.b, spec.k, spec.w, spec.horizon
    a = recovery_matrix(spec).array
    first = np.zeros(b * k, dtype=np.int64)
    for c in range(1, H + 1):
        r, pivots = rref(BinMatrix(a[:, : c * w].T))
        for row, col in enumerate(pivots):
            if first[col] == 0 and r[row].sum() == 1:
                first[col] = c
        if first.all():
            break
    if not first.all():
        x = int(np.flatnonzero(first == 0)[0])
        raise ConstructionInvalidError(
            f"S_{x % k + 1}[t+{x // k}] is never recovered from {H} parity packets"
        )
    rows = np.repeat(np.arange(1, b + 1), k)
    delays = (b + first - rows).reshape(b, k)
    return DelayProfile(tuple(int(d) for d in delays.max(axis=0)))


def _check_channel(b: int, window: int) -> None:
    # with window 1 two runs could touch and merge into one longer run
    if b < 1 or window < 2:
        raise ValueError(f"need b >= 1 and window >= 2, got b={b}, window={window}")


@lru_cache(maxsize=256)
def _tail_counts(b: int, window: int, horizon: int) -> tuple[int, ...]:
    """``f[pos]``: admissible schedules on ``[pos, horizon)`` with any first run starting at ``>= pos``."""
    f = [1] * (horizon + window + b + 1)
    for pos in range(horizon - 1, -1, -1):
        total = 1
        for s in range(pos, horizon):
            for length in range(1, min(b, horizon - s) + 1):
                total += f[s + length - 1 + window]
        f[pos] = total
    return tuple(f)


def count_schedules(b: int, window: int, horizon: int) -> int:
    """Number of admissible erasure sets within ``[0, horizon)``."""
    _check_channel(b, window)
    if horizon <= 0:
        return 1
    return _tail_counts(b, window, horizon)[0]


def enumerate_schedules(
    b: int, window: int, horizon: int, limit: int = MAX_SCHEDULES
) -> list[ErasureSchedule]:
    """Every admissible schedule within ``[0, horizon)``, in lexicographic order."""
    n = count_schedules(b, window, horizon)
    if n > limit:
        raise ScheduleSpaceTooLarge(
            f"{n} schedules for b={b}, window={window}, horizon={horizon} exceed {limit}; "
            "use randomized mode"
        )

    def walk(pos: int, prefix: tuple[int, ...]) -> Iterator[tuple[int, ...]]:
        yield prefix
        for s in range(pos, horizon):
            for length in range(1, min(b, horizon - s) + 1):
                run = tuple(range(s, s + length))
                yield from walk(s + length - 1 + window, prefix + run)

    return [ErasureSchedule(frozenset(e), window, b) for e in sorted(walk(0, ()))]


@lru_cache(maxsize=256)
def _choice_tables(b: int, window: int, horizon: int):
    """Per start position: cumulative weights of (stop, run at (s, length)...) choices."""
    f = _tail_counts(b, window, horizon)
    tables = []
    for pos in range(horizon):
        options: list[Optional[tuple[int, int]]] = [None]
        cum = [1]
        for s in range(pos, horizon):
            for length in range(1, min(b, horizon - s) + 1):
                options.append((s, length))
                cum.append(cum[-1] + f[s + length - 1 + window])
        tables.append((options, cum))
    return tables


def sample_schedule(
    rng: np.random.Generator, b: int, window: int, horizon: int
) -> ErasureSchedule:
    """Draw one admissible schedule uniformly at random."""
    _check_channel(b, window)
    tables = _choice_tables(b, window, horizon) if horizon > 0 else []
    erased: list[int] = []
    pos = 0
    while pos < horizon:
        options, cum = tables[pos]
        u = int(rng.random() * cum[-1])
        pick = options[bisect.bisect_right(cum, u)]
        if pick is None:
            break
        s, length = pick
        erased.extend(range(s, s + length))
        pos = s + length - 1 + window
    return ErasureSchedule(frozenset(erased), window, b)


@dataclass
class VerificationReport:
    """Result of checking a relay code against its burst channels."""

    b1: int
    b2: int
    T: int
    mode: str
    horizon: int
    seed: int
    budget: Optional[int]
    rate: str
    sr_schedules: int
    rd_schedules: int
    pairs_checked: int
    max_delay: list[int]
    passed: bool
    failure: Optional[dict] = None
    schema_version: int = REPORT_SCHEMA_VERSION
    tool_version: str = __version__

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> VerificationReport:
        return cls(**d)


class _Pipeline:
    """Both hops of one relay code on a fixed source stream."""

    def __init__(self, spec: RelayNetworkSpec, horizon: int, seed: int):
        self.spec = spec
        self.horizon = horizon
        self.src = _source_ints(spec, None, horizon, seed)
        # parity of the source stream and of the erasure-free relay output,
        # shared by every run whose relay forwards on time
        self.sr_par = _parity_stream(spec.sr, self.src)
        self.ref = _run_sr(spec, frozenset(), self.src, horizon, strict=True, parity=self.sr_par)[0]
        self.rd_par = _parity_stream(spec.rd, self.ref)

    def _sr(self, erased: frozenset[int]):
        return _run_sr(self.spec, erased, self.src, self.horizon, strict=False, parity=self.sr_par)

    def sr_ok(self, erased: frozenset[int]) -> bool:
        r_stream, relay = self._sr(erased)
        return not relay.violations and r_stream == self.ref

    def rd_run(self, erased: frozenset[int], r_stream=None) -> tuple[list[str], tuple[int, ...]]:
        failures: list[str] = []
        if r_stream is None or r_stream == self.ref:
            when, vals = _run_rd(self.spec, erased, self.ref, self.horizon, parity=self.rd_par)
        else:
            when, vals = _run_rd(self.spec, erased, r_stream, self.horizon)
        worst = _account(self.spec, self.src, when, vals, self.horizon, failures)
        return failures, worst

    def pair(self, sr_erased: frozenset[int], rd_erased: frozenset[int]) -> tuple[list[str], tuple[int, ...]]:
        r_stream, relay = self._sr(sr_erased)
        failures = [
            f"relay needed S_{self.spec.k + 1 - i}[{s}] at t={t} before decoding it"
            for t, i, s in relay.violations
        ]
        more, worst = self.rd_run(rd_erased, r_stream)
        return failures + more, worst

    def shrink(self, sr_erased: frozenset[int], rd_erased: frozenset[int]) -> tuple[frozenset, frozenset]:
        """Greedily drop erasures while the pair still fails."""
        changed = True
        while changed:
            changed = False
            for hop in (0, 1):
                for t in sorted((sr_erased, rd_erased)[hop]):
                    cand = [sr_erased, rd_erased]
                    cand[hop] = cand[hop] - {t}
                    if self.pair(*cand)[0]:
                        sr_erased, rd_erased = cand
                        changed = True
        return sr_erased, rd_erased

    def failure_record(self, sr_erased, rd_erased) -> dict:
        sr_erased, rd_erased = self.shrink(frozenset(sr_erased), frozenset(rd_erased))
        failures, _ = self.pair(sr_erased, rd_erased)
        return {
            "sr_erased": sorted(sr_erased),
            "rd_erased": sorted(rd_erased),
            "messages": failures[:10],
        }


def verify_tbsc(
    spec: RelayNetworkSpec,
    mode: str = "exhaustive",
    budget: int = 1000,
    seed: int = 0,
    horizon: Optional[int] = None,
    limit: int = MAX_SCHEDULES,
) -> VerificationReport:
    """Check that every admissible pair of erasure schedules meets the deadline.

    ``exhaustive`` covers all pairs of admissible schedules within
    ``horizon`` (default ``2(T+1)``).  The destination only sees the relay
    output, so a pair passes iff the relay reproduces its erasure-free
    output under the first-hop schedule and the destination meets the
    deadline on that output under the second-hop schedule; each schedule
    is simulated once.  ``randomized`` runs ``budget`` full pipeline
    simulations on uniformly drawn admissible pairs (default horizon
    ``4(T+1)``).
    """
    if mode not in ("exhaustive", "randomized"):
        raise ValueError(f"unknown mode {mode!r}")
    if horizon is None:
        horizon = 2 * (spec.T + 1) if mode == "exhaustive" else default_horizon(spec)
    pipe = _Pipeline(spec, horizon, seed)
    sr_win, rd_win = spec.sr.window, spec.rd.window
    worst = [0] * spec.k
    failure = None

    if mode == "exhaustive":
        sr_all = enumerate_schedules(spec.b1, sr_win, horizon, limit)
        rd_all = enumerate_schedules(spec.b2, rd_win, horizon, limit)
        bad_sr = [s.erased for s in sr_all if not pipe.sr_ok(s.erased)]
        bad_rd = []
        for s in rd_all:
            failures, d = pipe.rd_run(s.erased)
            if failures:
                bad_rd.append(s.erased)
            else:
                worst = [max(a, x) for a, x in zip(worst, d)]
        if bad_sr or bad_rd:
            key = lambda e: (len(e), sorted(e))  # noqa: E731
            sr_e = min(bad_sr, key=key) if bad_sr else frozenset()
            rd_e = min(bad_rd, key=key) if bad_rd else frozenset()
            if bad_sr and bad_rd:
                rd_e = frozenset()
            failure = pipe.failure_record(sr_e, rd_e)
        n_sr, n_rd, pairs = len(sr_all), len(rd_all), len(sr_all) * len(rd_all)
    else:
        rng = np.random.default_rng(seed)
        pairs = 0
        for _ in range(budget):
            sr_e = sample_schedule(rng, spec.b1, sr_win, horizon).erased
            rd_e = sample_schedule(rng, spec.b2, rd_win, horizon).erased
            failures, d = pipe.pair(sr_e, rd_e)
            pairs += 1
            if failures:
                failure = pipe.failure_record(sr_e, rd_e)
                break
            worst = [max(a, x) for a, x in zip(worst, d)]
        n_sr = n_rd = pairs

    rate = spec.rate
    return VerificationReport(
        b1=spec.b1,
        b2=spec.b2,
        T=spec.T,
        mode=mode,
        horizon=horizon,
        seed=seed,
        budget=budget if mode == "randomized" else None,
        rate=f"{rate.numerator}/{rate.denominator}",
        sr_schedules=n_sr,
        rd_schedules=n_rd,
        pairs_checked=pairs,
        max_delay=worst,
        passed=failure is None and max(worst, default=0) <= spec.T,
        failure=failure,
    )
