"""Point-to-point burst-erasure streaming codes.

A ``(b, T')`` streaming code is a systematic convolutional code: packet
``X[t] = (S[t], P[t])`` with parity ``P[t] = sum_{i=0}^{T'} S[t-i] P_i`` over
GF(2), where each ``P_i`` is a ``k x w`` binary matrix.  The channel erases
whole packets in bursts of at most ``b``; every message symbol must come
back within ``T'`` packets.

Bit vectors cross the public API as sequences of 0/1 (coordinate ``j`` is
position ``j - 1``).  Internally they are packed ints, coordinate ``j`` at
bit ``j - 1``.
"""

from __future__ import annotations

from collections import deque
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import NamedTuple, Optional

import numpy as np

from .errors import (
    ConstructionInvalidError,
    DecodeError,
    DimensionError,
    InconsistentSystemError,
)
from .gf2 import BinMatrix, IncrementalSolver

__all__ = [
    "StreamCodeSpec",
    "DelayProfile",
    "ErasureSchedule",
    "Encoder",
    "Decoder",
    "Recovered",
    "encode_stream",
    "is_admissible",
    "measure_delay_profile",
    "format_trace",
    "parse_trace",
    "pack_bits",
    "unpack_bits",
]


def pack_bits(bits: Sequence[int]) -> int:
    out = 0
    for j, x in enumerate(bits):
        if x & 1:
            out |= 1 << j
    return out


def unpack_bits(mask: int, n: int) -> tuple[int, ...]:
    return tuple((mask >> j) & 1 for j in range(n))


def _xor_rows(masks: Sequence[int], sel: int) -> int:
    acc = 0
    while sel:
        low = sel & -sel
        acc ^= masks[low.bit_length() - 1]
        sel ^= low
    return acc


@dataclass(frozen=True)
class StreamCodeSpec:
    """One ``(b, horizon)`` streaming code with ``k`` message and ``w`` parity symbols."""

    b: int
    horizon: int
    k: int
    w: int
    parity: tuple[BinMatrix, ...]

    def __post_init__(self):
        object.__setattr__(self, "parity", tuple(self.parity))
        if self.k < 1 or self.w < 1:
            raise ValueError(f"need k, w >= 1 (got k={self.k}, w={self.w})")
        if not 1 <= self.b <= self.horizon:
            raise ValueError(f"need 1 <= b <= horizon (got b={self.b}, horizon={self.horizon})")
        if len(self.parity) != self.horizon + 1:
            raise ValueError(f"expected {self.horizon + 1} parity matrices, got {len(self.parity)}")
        for i, m in enumerate(self.parity):
            if m.shape != (self.k, self.w):
                raise DimensionError(f"P_{i} has shape {m.shape}, expected {(self.k, self.w)}")

    @property
    def n(self) -> int:
        return self.k + self.w

    @property
    def rate(self) -> Fraction:
        return Fraction(self.k, self.n)

    @property
    def window(self) -> int:
        """Sliding-window length of the channel this code is built for."""
        return self.horizon + 1

    def block(self, i: int) -> BinMatrix:
        """``P_i``, with the zero matrix outside ``[0, horizon]``."""
        if 0 <= i <= self.horizon:
            return self.parity[i]
        return BinMatrix.zeros(self.k, self.w)

    def nonzero_blocks(self) -> dict[int, BinMatrix]:
        return {i: m for i, m in enumerate(self.parity) if not m.is_zero()}

    def with_block(self, i: int, m: BinMatrix) -> StreamCodeSpec:
        parity = list(self.parity)
        parity[i] = m
        return StreamCodeSpec(self.b, self.horizon, self.k, self.w, tuple(parity))

    @cached_property
    def _col_masks(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(m.col_masks()) for m in self.parity)

    @cached_property
    def _active_lags(self) -> tuple[int, ...]:
        return tuple(i for i, m in enumerate(self.parity) if not m.is_zero())

    @cached_property
    def _tables(self) -> tuple[tuple[tuple[int, ...], ...], ...]:
        """Per lag, 8-bit chunk lookup tables for ``message -> message @ P_i``."""
        out = []
        for m in self.parity:
            rows = m.row_masks()
            chunks = []
            for base in range(0, self.k, 8):
                part = rows[base : base + 8]
                chunks.append(tuple(_xor_rows(part, x) for x in range(1 << len(part))))
            out.append(tuple(chunks))
        return tuple(out)

    def _times(self, i: int, message: int) -> int:
        acc = 0
        for tab in self._tables[i]:
            acc ^= tab[message & 0xFF]
            message >>= 8
        return acc


@dataclass(frozen=True)
class DelayProfile:
    """Worst-case recovery delay of each message coordinate, in packets."""

    delays: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "delays", tuple(int(d) for d in self.delays))
        if any(d < 0 for d in self.delays):
            raise ValueError("delays must be non-negative")

    def __len__(self) -> int:
        return len(self.delays)

    def __getitem__(self, j: int) -> int:
        """Delay of coordinate ``j`` (1-based)."""
        if not 1 <= j <= len(self.delays):
            raise IndexError(j)
        return self.delays[j - 1]

    def __iter__(self):
        return iter(self.delays)

    def __str__(self) -> str:
        return ",".join(str(d) for d in self.delays)


@dataclass(frozen=True)
class ErasureSchedule:
    """Erased time indices on a burst channel with burst limit ``b``.

    Admissible iff every maximal run of erasures has length at most ``b``
    and consecutive runs satisfy ``start(next) - end(prev) >= window``.
    """

    erased: frozenset[int]
    window: int
    b: int

    def __post_init__(self):
        object.__setattr__(self, "erased", frozenset(int(t) for t in self.erased))
        if any(t < 0 for t in self.erased):
            raise ValueError("erased time indices must be >= 0")

    @classmethod
    def for_code(cls, spec: StreamCodeSpec, erased: Iterable[int] = ()) -> ErasureSchedule:
        return cls(frozenset(erased), spec.window, spec.b)

    def runs(self) -> list[tuple[int, int]]:
        """Maximal runs as inclusive ``(start, end)`` pairs, in time order."""
        out: list[tuple[int, int]] = []
        for t in sorted(self.erased):
            if out and t == out[-1][1] + 1:
                out[-1] = (out[-1][0], t)
            else:
                out.append((t, t))
        return out

    def is_admissible(self) -> bool:
        runs = self.runs()
        if any(e - s + 1 > self.b for s, e in runs):
            return False
        return all(nxt[0] - prev[1] >= self.window for prev, nxt in zip(runs, runs[1:]))

    def sorted(self) -> list[int]:
        return sorted(self.erased)


def is_admissible(sched: ErasureSchedule) -> bool:
    return sched.is_admissible()


class Encoder:
    """Stateful encoder; feed message packets in time order starting at ``t = 0``."""

    def __init__(self, spec: StreamCodeSpec):
        self.spec = spec
        self.t = 0
        # newest first; S[t] = 0 for t < 0
        self._history: deque[int] = deque([0] * (spec.horizon + 1), maxlen=spec.horizon + 1)

    def push_int(self, message: int) -> int:
        """Encode a packed message; returns the packed parity."""
        self._history.appendleft(message)
        hist = self._history
        spec = self.spec
        parity = 0
        for i in spec._active_lags:
            if hist[i]:
                parity ^= spec._times(i, hist[i])
        self.t += 1
        return parity

    def push(self, message: Sequence[int]) -> np.ndarray:
        """Encode ``S[t]`` and return ``X[t] = (S[t], P[t])`` as a 0/1 array."""
        if len(message) != self.spec.k:
            raise DimensionError(f"message must have {self.spec.k} bits, got {len(message)}")
        parity = self.push_int(pack_bits(message))
        return np.array(list(message) + list(unpack_bits(parity, self.spec.w)), dtype=np.uint8)


def encode_stream(spec: StreamCodeSpec, messages: np.ndarray) -> np.ndarray:
    """Encode a ``(time, k)`` array of message bits into ``(time, n)`` packets."""
    enc = Encoder(spec)
    return np.array([enc.push(row) for row in np.asarray(messages)], dtype=np.uint8).reshape(-1, spec.n)


class Recovered(NamedTuple):
    time: int
    coord: int
    bit: int


class Decoder:
    """Online erasure decoder for one streaming code.

    Each erased message symbol ``S_j[t]`` becomes unknown ``t * k + (j - 1)``
    of an `IncrementalSolver`.  A received packet pins its own message
    symbols at once and adds ``w`` parity equations whose right-hand sides
    have the known symbols' contributions removed.
    """

    def __init__(self, spec: StreamCodeSpec):
        self.spec = spec
        self.t = 0
        self.solver = IncrementalSolver(None)
        self._known: dict[int, int] = {}
        self._unknown: dict[int, int] = {}
        # number of times in the window that still hold unresolved symbols
        self._open = 0
        self.lost: list[tuple[int, int]] = []

    def step_int(self, packet: Optional[tuple[int, int]]) -> list[tuple[int, int, int]]:
        """Process ``Y[t]`` given as ``(message, parity)`` ints, or ``None`` if erased.

        Returns ``(time, coord, bit)`` for erased symbols pinned at this step;
        symbols of a received packet are not listed.
        """
        spec = self.spec
        k, H = spec.k, spec.horizon
        t = self.t
        pinned_out: list[tuple[int, int, int]] = []
        full = (1 << k) - 1
        if packet is None:
            self._known[t] = 0
            self._unknown[t] = full
            self._open += 1
        else:
            msg, par = packet
            self._known[t] = msg
            self._unknown[t] = 0
            if self._open:
                pinned_out = self._absorb_parity(t, par)

        old = t - H - 1
        if old in self._known:
            u = self._unknown.pop(old)
            self._known.pop(old)
            if u:
                self._open -= 1
                self.lost.extend((old, j + 1) for j in range(k) if (u >> j) & 1)
                self.solver.forget(full << (old * k))
        self.t += 1
        return pinned_out

    def _absorb_parity(self, t: int, par: int) -> list[tuple[int, int, int]]:
        spec = self.spec
        k = spec.k
        cols = spec._col_masks
        syndrome = par
        terms = []
        for i in spec._active_lags:
            s = t - i
            if s < 0:
                continue
            kn = self._known[s]
            if kn:
                syndrome ^= spec._times(i, kn)
            u = self._unknown[s]
            if u:
                terms.append((cols[i], u, s * k))
        equations = []
        for c in range(spec.w):
            mask = 0
            for colm, u, shift in terms:
                m = colm[c] & u
                if m:
                    mask |= m << shift
            equations.append((mask, (syndrome >> c) & 1))
        out = []
        for mask, rhs in equations:
            if not mask:
                if rhs:
                    raise DecodeError(f"inconsistent parity at t={t}")
                continue
            try:
                pinned = self.solver.add_mask(mask, rhs)
            except InconsistentSystemError as exc:
                raise DecodeError(f"inconsistent parity at t={t}") from exc
            for var, bit in pinned.items():
                s, j = divmod(var, k)
                if s in self._unknown:
                    self._unknown[s] &= ~(1 << j)
                    if bit:
                        self._known[s] |= 1 << j
                    if not self._unknown[s]:
                        self._open -= 1
                out.append((s, j + 1, bit))
        return out

    def step(self, packet, t: int | None = None) -> list[Recovered]:
        """Process ``Y[t]`` (a length-``n`` 0/1 vector, or ``None`` if erased).

        Returns the message symbols newly recovered at this time step.
        """
        if t is not None and t != self.t:
            raise ValueError(f"packets must arrive in order: expected t={self.t}, got {t}")
        if packet is None:
            return [Recovered(*ev) for ev in self.step_int(None)]
        if len(packet) != self.spec.n:
            raise DimensionError(f"packet must have {self.spec.n} bits, got {len(packet)}")
        bits = [int(x) for x in packet]
        k = self.spec.k
        msg = pack_bits(bits[:k])
        now = self.t
        pinned = self.step_int((msg, pack_bits(bits[k:])))
        own = [Recovered(now, j + 1, (msg >> j) & 1) for j in range(k)]
        return own + [Recovered(*ev) for ev in pinned]


def _burst_delays(spec: StreamCodeSpec, start: int, length: int, rng: np.random.Generator) -> np.ndarray:
    """Per-coordinate max delay over the erased packets of one burst.

    Returns -1 entries for symbols never recovered within ``horizon``.
    """
    k = spec.k
    steps = start + length + spec.horizon
    enc, dec = Encoder(spec), Decoder(spec)
    msgs = [int(x) for x in rng.integers(0, 1 << k, size=steps)]
    delays = np.full((length, k), -1)
    for t in range(steps):
        par = enc.push_int(msgs[t])
        erased = start <= t < start + length
        for s, j, bit in dec.step_int(None if erased else (msgs[t], par)):
            if start <= s < start + length:
                if bit != (msgs[s] >> (j - 1)) & 1:
                    raise DecodeError(f"wrong value for S_{j}[{s}]")
                delays[s - start, j - 1] = t - s
    if (delays < 0).any():
        return np.full(k, -1)
    return delays.max(axis=0)


def measure_delay_profile(spec: StreamCodeSpec, seed: int = 0) -> DelayProfile:
    """Delay profile observed by decoding a worst-case burst.

    The burst erases ``X[t..t+b-1]`` after a clean history and is followed
    by clean reception.  Shorter bursts are decoded too and must not exceed
    the full-burst delays.
    """
    rng = np.random.default_rng(seed)
    start = spec.horizon
    full = _burst_delays(spec, start, spec.b, rng)
    if (full < 0).any():
        raise ConstructionInvalidError(
            f"a burst of length {spec.b} leaves symbols unrecovered within {spec.horizon}"
        )
    for length in range(1, spec.b):
        part = _burst_delays(spec, start, length, rng)
        if (part < 0).any() or (part > full).any():
            raise ConstructionInvalidError(
                f"burst of length {length} is worse than the full burst: {part} vs {full}"
            )
    return DelayProfile(tuple(int(d) for d in full))


def format_trace(packets: Iterable[Optional[Sequence[int]]], k: int) -> str:
    """Render packets as ``"t | message-bits | parity-bits"`` or ``"t | ERASED"`` lines."""
    lines = []
    for t, pkt in enumerate(packets):
        if pkt is None:
            lines.append(f"{t} | ERASED")
        else:
            bits = "".join(str(int(x)) for x in pkt)
            lines.append(f"{t} | {bits[:k]} | {bits[k:]}")
    return "\n".join(lines) + "\n"


def parse_trace(text: str) -> list[Optional[np.ndarray]]:
    out: list[Optional[np.ndarray]] = []
    for ln in text.strip().splitlines():
        fields = [f.strip() for f in ln.split("|")]
        if int(fields[0]) != len(out):
            raise ValueError(f"trace out of order at line {ln!r}")
        if fields[1:] == ["ERASED"]:
            out.append(None)
        elif len(fields) == 3:
            out.append(np.array([int(ch) for ch in fields[1] + fields[2]], dtype=np.uint8))
        else:
            raise ValueError(f"bad trace line {ln!r}")
    return out
