"""JSON manifest for a `RelayNetworkSpec`.

Parity matrices are embedded in the matrix text format; only nonzero
blocks are listed.  ``dumps(loads(dumps(spec))) == dumps(spec)``.
"""

from __future__ import annotations

import json

from .gf2 import BinMatrix
from .relay import RelayNetworkSpec
from .streaming import DelayProfile, StreamCodeSpec

MANIFEST_SCHEMA_VERSION = 1


def _code_to_dict(code: StreamCodeSpec) -> dict:
    return {
        "b": code.b,
        "horizon": code.horizon,
        "k": code.k,
        "w": code.w,
        "parity": {str(i): m.to_text() for i, m in code.nonzero_blocks().items()},
    }


def _code_from_dict(d: dict) -> StreamCodeSpec:
    k, w, H = d["k"], d["w"], d["horizon"]
    parity = [BinMatrix.zeros(k, w) for _ in range(H + 1)]
    for i, text in d["parity"].items():
        parity[int(i)] = BinMatrix.from_text(text)
    return StreamCodeSpec(b=d["b"], horizon=H, k=k, w=w, parity=tuple(parity))


def to_dict(spec: RelayNetworkSpec) -> dict:
    rate = spec.rate
    return {
        "schema_version": MANIFEST_SCHEMA_VERSION,
        "b1": spec.b1,
        "b2": spec.b2,
        "T": spec.T,
        "k": spec.k,
        "path": spec.path,
        "rate": f"{rate.numerator}/{rate.denominator}",
        "d_sr": list(spec.d_sr),
        "d_rd": list(spec.d_rd),
        "sr": _code_to_dict(spec.sr),
        "rd": _code_to_dict(spec.rd),
    }


def from_dict(d: dict) -> RelayNetworkSpec:
    if d.get("schema_version") != MANIFEST_SCHEMA_VERSION:
        raise ValueError(f"unsupported manifest schema {d.get('schema_version')!r}")
    return RelayNetworkSpec(
        b1=d["b1"],
        b2=d["b2"],
        T=d["T"],
        sr=_code_from_dict(d["sr"]),
        rd=_code_from_dict(d["rd"]),
        d_sr=DelayProfile(tuple(d["d_sr"])),
        d_rd=DelayProfile(tuple(d["d_rd"])),
        path=d["path"],
    )


def dumps(spec: RelayNetworkSpec) -> str:
    return json.dumps(to_dict(spec), indent=2, sort_keys=True) + "\n"


def loads(text: str) -> RelayNetworkSpec:
    return from_dict(json.loads(text))
