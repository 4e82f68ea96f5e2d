"""Three-node relay pipeline: source -> relay -> destination.

The relay decodes the source-relay code and forwards a re-ordered, delayed
copy of the source stream over the relay-destination code::

    R_i[t] = S_{k+1-i}[t - lag_i],   lag_i = d_sr(k+1-i)

where ``d_sr`` is the source-relay delay profile.  Each coordinate is
forwarded exactly when its worst-case decoding delay has elapsed, so the
relay's output never depends on which erasures actually occurred.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConstructionInvalidError, InadmissibleScheduleError, RelayCausalityError
from .streaming import (
    DelayProfile,
    Decoder,
    Encoder,
    ErasureSchedule,
    StreamCodeSpec,
    unpack_bits,
)

__all__ = [
    "RelayNetworkSpec",
    "SimulationReport",
    "Relay",
    "relay_lag",
    "simulate_network",
    "worst_case_delays",
    "default_horizon",
]


@dataclass(frozen=True)
class RelayNetworkSpec:
    """A ``(b1, b2, T)`` relay code: two point-to-point codes plus the relay lag table."""

    b1: int
    b2: int
    T: int
    sr: StreamCodeSpec
    rd: StreamCodeSpec
    d_sr: DelayProfile
    d_rd: DelayProfile
    path: str = "type-a-to-b"

    def __post_init__(self):
        if self.sr.k != self.rd.k:
            raise ValueError(f"hop dimensions differ: {self.sr.k} vs {self.rd.k}")
        if len(self.d_sr) != self.k or len(self.d_rd) != self.k:
            raise ValueError("delay profiles must have one entry per message coordinate")
        k = self.k
        for i in range(1, k + 1):
            if self.d_sr[k + 1 - i] + self.d_rd[i] > self.T:
                raise ConstructionInvalidError(
                    f"coordinate {k + 1 - i}: d_sr + d_rd = "
                    f"{self.d_sr[k + 1 - i]} + {self.d_rd[i]} exceeds T={self.T}"
                )

    @property
    def k(self) -> int:
        return self.sr.k

    @property
    def lags(self) -> tuple[int, ...]:
        """``lag_i`` for relay coordinates ``i = 1..k`` (0-based tuple)."""
        k = self.k
        return tuple(self.d_sr[k + 1 - i] for i in range(1, k + 1))

    @property
    def rate(self):
        return self.sr.rate

    def predicted_end_to_end(self) -> DelayProfile:
        """``d_sr(j) + d_rd(k+1-j)`` for each source coordinate ``j``."""
        k = self.k
        return DelayProfile(tuple(self.d_sr[j] + self.d_rd[k + 1 - j] for j in range(1, k + 1)))

    def with_sr(self, sr: StreamCodeSpec) -> RelayNetworkSpec:
        return RelayNetworkSpec(self.b1, self.b2, self.T, sr, self.rd, self.d_sr, self.d_rd, self.path)


def relay_lag(i: int, k: int, b2: int) -> int:
    """``ceil((k + 1 - i) / b2)``: multiplier of ``b1`` in the closed-form relay delay."""
    if not 1 <= i <= k:
        raise ValueError(f"coordinate {i} outside 1..{k}")
    return math.ceil((k + 1 - i) / b2)


def default_horizon(spec: RelayNetworkSpec) -> int:
    return 4 * (spec.T + 1)


def _reverse(x: int, k: int) -> int:
    return int(format(x, f"0{k}b")[::-1], 2)


def _lag_groups(spec: RelayNetworkSpec) -> tuple[tuple[int, int, np.ndarray], ...]:
    """``(lag, source-coordinate mask, 0-based source indices)`` per distinct lag."""
    groups: dict[int, int] = {}
    for j in range(1, spec.k + 1):
        groups[spec.d_sr[j]] = groups.get(spec.d_sr[j], 0) | 1 << (j - 1)
    return tuple(
        (lag, m, np.array([j for j in range(spec.k) if (m >> j) & 1]))
        for lag, m in sorted(groups.items())
    )


class Relay:
    """Decode-and-forward relay.

    Call `step` once per time slot with the received source-relay packet
    (``(message, parity)`` ints or ``None``); it returns ``R[t]`` packed as
    an int, coordinate ``i`` at bit ``i - 1``.  With ``strict=False`` an
    undecoded reference is recorded in ``violations`` and forwarded as 0
    instead of raising `RelayCausalityError`.
    """

    def __init__(self, spec: RelayNetworkSpec, strict: bool = True):
        self.spec = spec
        self.strict = strict
        self.decoder = Decoder(spec.sr)
        self.t = 0
        self._groups = _lag_groups(spec)
        self._values: dict[int, int] = {}
        self._decoded: dict[int, int] = {}
        self._keep = max(spec.lags) + 1
        self._times: list[list[int]] = []
        self.violations: list[tuple[int, int, int]] = []

    @property
    def recovery_times(self) -> np.ndarray:
        """``(t, k)`` array: time each source symbol was decoded at the relay, -1 if never."""
        return np.array(self._times, dtype=np.int64).reshape(-1, self.spec.k)

    def receive(self, packet: Optional[tuple[int, int]]) -> list[tuple[int, int, int]]:
        t, k = self.t, self.spec.k
        if packet is None:
            self._values[t] = 0
            self._decoded[t] = 0
            self._times.append([-1] * k)
        else:
            self._values[t] = packet[0]
            self._decoded[t] = (1 << k) - 1
            self._times.append([t] * k)
        events = self.decoder.step_int(packet)
        for s, j, bit in events:
            if s in self._decoded:
                self._decoded[s] |= 1 << (j - 1)
                if bit:
                    self._values[s] |= 1 << (j - 1)
            self._times[s][j - 1] = t
        return events

    def emit(self) -> int:
        """``R[t]`` for the current slot, from symbols decoded so far."""
        t, k = self.t, self.spec.k
        out = 0
        for lag, smask, _ in self._groups:
            s = t - lag
            if s < 0:
                continue
            have = self._decoded.get(s, 0) & smask
            if have != smask:
                missing = smask & ~have
                if self.strict:
                    j = (missing & -missing).bit_length()
                    raise RelayCausalityError(f"R_{k + 1 - j}[{t}] needs S_{j}[{s}], not decoded by t={t}")
                self.violations.extend(
                    (t, k - j, s) for j in range(k) if (missing >> j) & 1
                )
            out |= self._values[s] & have
        self._values.pop(t - self._keep, None)
        self._decoded.pop(t - self._keep, None)
        self.t += 1
        return _reverse(out, k)

    def step(self, packet: Optional[tuple[int, int]]) -> int:
        self.receive(packet)
        return self.emit()


@dataclass
class SimulationReport:
    """Outcome of one pass through the relay pipeline.

    ``relay_time`` and ``destination_time`` are ``(horizon, k)`` arrays
    indexed by source time and 0-based coordinate, holding the time the
    symbol was recovered (-1 if never).
    """

    horizon: int
    T: int
    sr_erased: tuple[int, ...]
    rd_erased: tuple[int, ...]
    relay_time: np.ndarray
    destination_time: np.ndarray
    max_delay: tuple[int, ...]
    success: bool
    failures: list[str] = field(default_factory=list)
    trace: Optional[str] = None

    @property
    def accounted_times(self) -> range:
        return range(max(self.horizon - self.T, 0))

    @staticmethod
    def _as_dict(a: np.ndarray) -> dict[tuple[int, int], int]:
        return {(int(t), int(j) + 1): int(a[t, j]) for t, j in zip(*np.nonzero(a >= 0))}

    @property
    def relay_times(self) -> dict[tuple[int, int], int]:
        return self._as_dict(self.relay_time)

    @property
    def destination_times(self) -> dict[tuple[int, int], int]:
        return self._as_dict(self.destination_time)


def _check_schedule(sched: ErasureSchedule, code: StreamCodeSpec, hop: str) -> None:
    if sched.b > code.b or sched.window < code.window:
        raise InadmissibleScheduleError(
            f"{hop} schedule channel (b={sched.b}, window={sched.window}) exceeds the code's "
            f"(b={code.b}, window={code.window})"
        )
    if not sched.is_admissible():
        raise InadmissibleScheduleError(f"{hop} schedule {sched.sorted()} is not admissible")


def _source_ints(spec: RelayNetworkSpec, source, horizon: int, seed: int) -> list[int]:
    if source is None:
        rng = np.random.default_rng(seed)
        return [int(x) for x in rng.integers(0, 1 << spec.k, size=horizon)]
    src = np.asarray(source, dtype=np.int64)
    if src.shape != (horizon, spec.k):
        raise ValueError(f"source must have shape {(horizon, spec.k)}, got {src.shape}")
    weights = 1 << np.arange(spec.k, dtype=np.int64)
    return [int(x) for x in src @ weights]


def _parity_stream(code: StreamCodeSpec, stream: list[int]) -> list[int]:
    enc = Encoder(code)
    return [enc.push_int(m) for m in stream]


def _run_sr(spec, erased, src, horizon, strict, lines=None, parity=None):
    """Source and relay; ``parity`` is the first-hop parity of ``src`` if already known."""
    relay = Relay(spec, strict=strict)
    if parity is None:
        parity = _parity_stream(spec.sr, src[:horizon])
    out = []
    for t in range(horizon):
        y = None if t in erased else (src[t], parity[t])
        r = relay.step(y)
        out.append(r)
        if lines is not None:
            lines.append(_trace_sr(spec, t, src[t], parity[t], y, r))
    return out, relay


def _run_rd(spec, erased, r_stream, horizon, lines=None, parity=None):
    """Destination side; returns (recovery time array, recovered value array) by source time."""
    k, lags = spec.k, spec.lags
    groups = _lag_groups(spec)
    if parity is None:
        parity = _parity_stream(spec.rd, r_stream[:horizon])
    received = np.ones(horizon, dtype=bool)
    received[[t for t in erased if t < horizon]] = False
    when = np.full((horizon, k), -1, dtype=np.int64)
    vals = np.zeros(horizon, dtype=np.int64)

    # systematic symbols: a received R[t] delivers source time t - lag at once
    r = np.array(r_stream[:horizon], dtype=np.int64)
    bits = (r[:, None] >> np.arange(k)) & 1
    flat = bits[:, ::-1] @ (1 << np.arange(k, dtype=np.int64))
    for lag, smask, idx in groups:
        ts = np.flatnonzero(received[lag:]) + lag
        when[np.ix_(ts - lag, idx)] = ts[:, None]
        vals[ts - lag] |= flat[ts] & smask

    dec = Decoder(spec.rd)
    for t in range(horizon):
        y = (r_stream[t], parity[t]) if received[t] else None
        got = []
        for tr, i, bit in dec.step_int(y):
            t0 = tr - lags[i - 1]
            if 0 <= t0 < horizon:
                j = k + 1 - i
                when[t0, j - 1] = t
                if bit:
                    vals[t0] |= 1 << (j - 1)
                got.append((t0, j, bit))
        if lines is not None:
            if y is not None:
                for lag, _, idx in groups:
                    if t >= lag:
                        got.extend((t - lag, j + 1, int(flat[t] >> j) & 1) for j in idx)
            lines[t] += _trace_rd(spec, r_stream[t], parity[t], y, got)
    return when, vals


def _fmt(mask: int, n: int) -> str:
    return "".join(str(b) for b in unpack_bits(mask, n))


def _trace_sr(spec, t, msg, par, y, r) -> str:
    k, w = spec.k, spec.sr.w
    x = f"{_fmt(msg, k)} {_fmt(par, w)}"
    yy = "ERASED" if y is None else x
    return f"{t} | X {x} | Y {yy} | R {_fmt(r, k)}"


def _trace_rd(spec, r, par, y, got) -> str:
    k, w = spec.k, spec.rd.w
    z = f"{_fmt(r, k)} {_fmt(par, w)}"
    zz = "ERASED" if y is None else z
    dest = " ".join(f"S{j}[{t0}]={bit}" for t0, j, bit in sorted(got))
    return f" | Z {z} | W {zz} | dest {dest or '-'}"


def _account(spec, src, when, vals, horizon, failures) -> tuple[int, ...]:
    k, T = spec.k, spec.T
    n = max(horizon - T, 0)
    if n == 0:
        return (0,) * k
    w = when[:n]
    delay = w - np.arange(n)[:, None]
    missing = w < 0
    late = (~missing) & (delay > T)
    wrong = np.flatnonzero(vals[:n] != np.asarray(src[:n], dtype=np.int64))
    if missing.any() or late.any() or wrong.size:
        for t0, j in zip(*np.nonzero(missing)):
            failures.append(f"S_{j + 1}[{t0}] not recovered at destination")
        for t0, j in zip(*np.nonzero(late)):
            failures.append(f"S_{j + 1}[{t0}] recovered with delay {delay[t0, j]} > T={T}")
        for t0 in wrong:
            diff = int(vals[t0]) ^ src[t0]
            bad = [j + 1 for j in range(k) if (diff >> j) & 1 and not missing[t0, j]]
            failures.extend(f"S_{j}[{t0}] recovered with wrong value" for j in bad)
    return tuple(int(x) for x in np.where(missing, 0, delay).max(axis=0))


def simulate_network(
    spec: RelayNetworkSpec,
    sr_sched: ErasureSchedule | None = None,
    rd_sched: ErasureSchedule | None = None,
    source=None,
    horizon: int | None = None,
    seed: int = 0,
    strict: bool = True,
    trace: bool = False,
) -> SimulationReport:
    """Run source -> relay -> destination once.

    ``source`` is a ``(horizon, k)`` 0/1 array; random bits from ``seed``
    when omitted.  Delays are accounted for source times ``t`` with
    ``t + T < horizon``.  ``strict`` makes relay causality violations raise
    instead of being reported as failures.
    """
    horizon = default_horizon(spec) if horizon is None else horizon
    sr_sched = sr_sched or ErasureSchedule.for_code(spec.sr)
    rd_sched = rd_sched or ErasureSchedule.for_code(spec.rd)
    _check_schedule(sr_sched, spec.sr, "source-relay")
    _check_schedule(rd_sched, spec.rd, "relay-destination")
    src = _source_ints(spec, source, horizon, seed)

    lines: list[str] | None = [] if trace else None
    failures: list[str] = []
    r_stream, relay = _run_sr(spec, sr_sched.erased, src, horizon, strict, lines)
    for t, i, s in relay.violations:
        failures.append(f"relay needed S_{spec.k + 1 - i}[{s}] at t={t} before decoding it")
    when, vals = _run_rd(spec, rd_sched.erased, r_stream, horizon, lines)
    worst = _account(spec, src, when, vals, horizon, failures)
    return SimulationReport(
        horizon=horizon,
        T=spec.T,
        sr_erased=tuple(sr_sched.sorted()),
        rd_erased=tuple(rd_sched.sorted()),
        relay_time=relay.recovery_times,
        destination_time=when,
        max_delay=worst,
        success=not failures,
        failures=failures,
        trace="\n".join(lines) + "\n" if trace else None,
    )


def worst_case_delays(
    spec: RelayNetworkSpec,
    positions: range | None = None,
    horizon: int | None = None,
    seed: int = 0,
) -> DelayProfile:
    """End-to-end worst-case delay per source coordinate over single-burst pairs.

    Every pair (full-length burst on the first hop at ``s``, full-length
    burst on the second hop at ``r``) for ``s, r`` in ``positions`` is
    covered.  The destination only sees the relay output, so a pair's
    outcome is the relay check for ``s`` combined with the destination
    run for ``r``; each hop is simulated once per position.
    """
    horizon = default_horizon(spec) if horizon is None else horizon
    positions = range(2 * (spec.T + 1)) if positions is None else positions
    src = _source_ints(spec, None, horizon, seed)
    sr_par = _parity_stream(spec.sr, src)
    ref = _run_sr(spec, frozenset(), src, horizon, strict=True, parity=sr_par)[0]
    rd_par = _parity_stream(spec.rd, ref)

    for s in positions:
        erased = frozenset(range(s, s + spec.b1))
        r_stream, relay = _run_sr(spec, erased, src, horizon, strict=False, parity=sr_par)
        if relay.violations or r_stream != ref:
            raise ConstructionInvalidError(f"relay cannot forward on time after a burst at {list(erased)}")

    worst = [0] * spec.k
    for r in positions:
        erased = frozenset(range(r, r + spec.b2))
        failures: list[str] = []
        when, vals = _run_rd(spec, erased, ref, horizon, parity=rd_par)
        d = _account(spec, src, when, vals, horizon, failures)
        if failures:
            raise ConstructionInvalidError(f"burst at {sorted(erased)}: {failures[0]}")
        worst = [max(a, b) for a, b in zip(worst, d)]
    return DelayProfile(tuple(worst))
