"""Parity-matrix families for rate-optimal three-node streaming codes.

Two families are built here:

* Type A: identity blocks placed at multiples of the burst length.  The
  ``j``-th group of ``w`` message coordinates is repaired ``j * b`` packets
  after a burst, and the trailing ``q`` coordinates after ``(p + 1) * b``.
* Type B: shifted identity blocks at ``j * b + q`` plus a head block
  ``(I_q 0)`` at lag ``b`` and single-entry blocks at lags ``1 .. b-1`` that
  let the first ``q`` coordinates come back within ``b`` packets.

A relay network with burst limits ``(b1, b2)`` and deadline ``T`` pairs one
of each: the family with the staircase of identity blocks goes on the hop
with the smaller burst.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import ConstructionInvalidError, InfeasibleParametersError
from .gf2 import BinMatrix, block
from .relay import RelayNetworkSpec
from .streaming import DelayProfile, StreamCodeSpec, measure_delay_profile

__all__ = [
    "TypeAParams",
    "TypeBParams",
    "FeasibilityReport",
    "decompose",
    "mod1",
    "build_type_a",
    "build_type_b",
    "predicted_profile_a",
    "predicted_profile_b",
    "reduced_p0_matrix",
    "head_permutation_block",
    "rate_bound",
    "feasibility",
    "build_tbsc",
]


def mod1(i: int, n: int) -> int:
    """``i mod n`` taking values in ``1..n`` rather than ``0..n-1``."""
    return (i - 1) % n + 1


def decompose(k: int, w: int) -> tuple[int, int]:
    """Split ``k = p * w + q`` with ``0 < q <= w``."""
    if k < 1 or w < 1:
        raise InfeasibleParametersError(f"need k, w >= 1 (got k={k}, w={w})")
    q = mod1(k, w)
    return (k - q) // w, q


@dataclass(frozen=True)
class TypeAParams:
    b: int
    w: int
    k: int
    horizon: int

    @property
    def p(self) -> int:
        return decompose(self.k, self.w)[0]

    @property
    def q(self) -> int:
        return decompose(self.k, self.w)[1]

    def check(self) -> None:
        if self.b < 1:
            raise InfeasibleParametersError(f"burst length must be >= 1, got {self.b}")
        p, _ = decompose(self.k, self.w)
        if (p + 1) * self.b > self.horizon:
            raise InfeasibleParametersError(
                f"Type-A needs (p+1)*b <= horizon, got ({p}+1)*{self.b} > {self.horizon}"
            )


@dataclass(frozen=True)
class TypeBParams:
    b: int
    k: int
    horizon: int

    @property
    def p(self) -> int:
        return decompose(self.k, self.b)[0]

    @property
    def q(self) -> int:
        return decompose(self.k, self.b)[1]

    def check(self) -> None:
        if self.b < 1:
            raise InfeasibleParametersError(f"burst length must be >= 1, got {self.b}")
        decompose(self.k, self.b)
        if self.horizon < self.k:
            raise InfeasibleParametersError(
                f"Type-B needs horizon >= k = p*b+q, got horizon={self.horizon} < {self.k}"
            )
        if self.horizon < self.b:
            raise InfeasibleParametersError(f"horizon {self.horizon} < burst length {self.b}")


def _stacked_identity(k: int, w: int, top: int, size: int) -> np.ndarray:
    """``k x w`` zero matrix with ``I_size`` placed at rows ``top+1..``, columns ``1..size``."""
    a = np.zeros((k, w), dtype=np.uint8)
    a[top : top + size, :size] = np.eye(size, dtype=np.uint8)
    return a


def build_type_a(params: TypeAParams) -> StreamCodeSpec:
    params.check()
    b, w, k, H = params.b, params.w, params.k, params.horizon
    p, q = params.p, params.q
    mats = [np.zeros((k, w), dtype=np.uint8) for _ in range(H + 1)]
    for j in range(1, p + 1):
        mats[j * b] = _stacked_identity(k, w, (j - 1) * w, w)
    mats[(p + 1) * b] = _stacked_identity(k, w, p * w, q)
    return StreamCodeSpec(b=b, horizon=H, k=k, w=w, parity=tuple(BinMatrix(m) for m in mats))


def build_type_b(params: TypeBParams) -> StreamCodeSpec:
    params.check()
    b, k, H = params.b, params.k, params.horizon
    p, q = params.p, params.q
    mats = [np.zeros((k, b), dtype=np.uint8) for _ in range(H + 1)]
    for j in range(1, p + 1):
        mats[j * b + q] = _stacked_identity(k, b, (j - 1) * b + q, b)
    mats[b] = _stacked_identity(k, b, 0, q)
    if q != b:
        for i in range(1, b):
            d = mod1(i, q)
            e = q + mod1(i, b - q)
            mats[i][d - 1, e - 1] = 1
    return StreamCodeSpec(b=b, horizon=H, k=k, w=b, parity=tuple(BinMatrix(m) for m in mats))


def predicted_profile_a(params: TypeAParams) -> DelayProfile:
    p, q = params.p, params.q
    delays = [j * params.b for j in range(1, p + 1) for _ in range(params.w)]
    delays += [(p + 1) * params.b] * q
    return DelayProfile(tuple(delays))


def predicted_profile_b(params: TypeBParams) -> DelayProfile:
    p, q, b = params.p, params.q, params.b
    delays = [b] * q + [j * b + q for j in range(1, p + 1) for _ in range(b)]
    return DelayProfile(tuple(delays))


def reduced_p0_matrix(b: int, q: int, parity: StreamCodeSpec) -> BinMatrix:
    """Leading ``b x q`` corner of the Type-B recovery matrix, top ``q`` rows per block.

    Block ``(r, c)`` is ``P'_{b-r+c}``; the result is ``(b*q) x (b*q)``.
    """
    if not 1 <= q <= b:
        raise InfeasibleParametersError(f"need 1 <= q <= b, got q={q}, b={b}")
    rows = [
        [BinMatrix(parity.block(b - r + c).array[:q, :]) for c in range(1, q + 1)]
        for r in range(1, b + 1)
    ]
    return block(rows)


def head_permutation_block(b: int, q: int, parity: StreamCodeSpec) -> BinMatrix:
    """Right ``b-q`` columns of the lower ``b-q`` block rows of `reduced_p0_matrix`.

    For a Type-B family this ``q(b-q)`` square matrix is a permutation matrix.
    """
    if not 1 <= q < b:
        raise InfeasibleParametersError(f"need 1 <= q < b, got q={q}, b={b}")
    rows = [
        [BinMatrix(parity.block(b - r + c).array[:q, q:]) for c in range(1, q + 1)]
        for r in range(q + 1, b + 1)
    ]
    return block(rows)


def rate_bound(b1: int, b2: int, T: int) -> Fraction:
    """Largest achievable rate of a ``(b1, b2, T)`` relay streaming code."""
    if b1 < 1 or b2 < 1:
        raise InfeasibleParametersError(f"burst lengths must be >= 1, got b1={b1}, b2={b2}")
    if T < b1 + b2:
        raise InfeasibleParametersError(f"need T >= b1 + b2, got T={T} < {b1 + b2}")
    return min(Fraction(T - b1, T - b1 + b2), Fraction(T - b2, T - b2 + b1))


@dataclass(frozen=True)
class FeasibilityReport:
    b1: int
    b2: int
    T: int
    feasible: bool
    sufficient: bool
    prior_work: bool
    optimal_rate: Fraction
    path: str  # "type-a-to-b" | "type-b-to-a" | "equal-b" | "none"

    def constraint(self) -> str:
        lo, hi = sorted((self.b1, self.b2))
        return f"(T - {hi}) / {lo} >= ceil((T - {lo}) / {hi})"


def feasibility(b1: int, b2: int, T: int) -> FeasibilityReport:
    rate = rate_bound(b1, b2, T)
    lo, hi = min(b1, b2), max(b1, b2)
    # (T - hi) / lo >= ceil((T - lo) / hi), in integers
    feasible = T - hi >= lo * -(-(T - lo) // hi)
    sufficient = b1 != b2 and (T - b1 - b2) * abs(b1 - b2) >= b1 * b2
    prior = (T - b1 - b2) % hi == 0
    if not feasible:
        path = "none"
    elif b1 < b2:
        path = "type-a-to-b"
    elif b2 < b1:
        path = "type-b-to-a"
    else:
        path = "equal-b"
    return FeasibilityReport(b1, b2, T, feasible, sufficient, prior, rate, path)


@lru_cache(maxsize=1024)
def build_tbsc(b1: int, b2: int, T: int) -> RelayNetworkSpec:
    """Build the rate-optimal relay code for ``(b1, b2, T)``.

    ``b1 <= b2`` puts a Type-A code on the source-relay hop and a Type-B
    code on the relay-destination hop; ``b2 < b1`` swaps the roles.
    With ``b1 == b2`` the recipe is outside the strict-inequality case, so
    both hops are decoded against a burst and must show the predicted
    profiles before the spec is returned.
    """
    rep = feasibility(b1, b2, T)
    if not rep.feasible:
        raise InfeasibleParametersError(
            f"(b1, b2, T) = ({b1}, {b2}, {T}) violates {rep.constraint()}: "
            f"({T} - {max(b1, b2)}) / {min(b1, b2)} < {math.ceil((T - min(b1, b2)) / max(b1, b2))}"
        )
    if b1 <= b2:
        k = T - b1
        sr_p = TypeAParams(b=b1, w=b2, k=k, horizon=T - b2)
        rd_p = TypeBParams(b=b2, k=k, horizon=T - b1)
        sr, d_sr = build_type_a(sr_p), predicted_profile_a(sr_p)
        rd, d_rd = build_type_b(rd_p), predicted_profile_b(rd_p)
    else:
        k = T - b2
        sr_p = TypeBParams(b=b1, k=k, horizon=T - b2)
        rd_p = TypeAParams(b=b2, w=b1, k=k, horizon=T - b1)
        sr, d_sr = build_type_b(sr_p), predicted_profile_b(sr_p)
        rd, d_rd = build_type_a(rd_p), predicted_profile_a(rd_p)
    if b1 == b2:
        for hop, code, predicted in (("source-relay", sr, d_sr), ("relay-destination", rd, d_rd)):
            measured = measure_delay_profile(code)
            if measured != predicted:
                raise ConstructionInvalidError(
                    f"equal-b {hop} code has delays {measured}, expected {predicted}"
                )
    return RelayNetworkSpec(b1=b1, b2=b2, T=T, sr=sr, rd=rd, d_sr=d_sr, d_rd=d_rd, path=rep.path)
