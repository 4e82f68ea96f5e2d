import itertools

import numpy as np
import pytest

from tbsc import build_tbsc
from tbsc.gf2 import BinMatrix

ACCEPTANCE: dict[str, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[name]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")


@pytest.fixture(scope="session")
def example_spec():
    return build_tbsc(2, 3, 7)


def mat(rows: str) -> BinMatrix:
    """``"100;010"`` -> 2x3 matrix."""
    return BinMatrix([[int(c) for c in r] for r in rows.split(";")])


def brute_rank(a: np.ndarray) -> int:
    """Rank from the size of the row space, by enumerating all row combinations."""
    a = np.asarray(a, dtype=np.int64)
    combos = np.array(list(itertools.product((0, 1), repeat=a.shape[0])), dtype=np.int64)
    span = {tuple(r) for r in (combos @ a) % 2}
    return int(np.log2(len(span)))


def brute_recovery_times(spec, erased: set[int], until: int) -> dict[tuple[int, int], int]:
    """Time each erased ``S_j[s]`` is first pinned, by enumerating the kernel.

    Unknowns are the erased symbols; received parity ``P[t]`` constrains them
    through ``P_{t-s}``.  A symbol is pinned by the parity seen so far iff no
    vector in the kernel of the observation map has that coordinate set.
    """
    k, w = spec.k, spec.w
    unknowns = [(s, j) for s in sorted(erased) for j in range(1, k + 1)]
    zs = np.array(list(itertools.product((0, 1), repeat=len(unknowns))), dtype=np.int64)
    cols = []
    out: dict[tuple[int, int], int] = {}
    for t in range(until + 1):
        if t not in erased:
            for c in range(1, w + 1):
                cols.append([spec.block(t - s)[j, c] if 0 <= t - s <= spec.horizon else 0 for s, j in unknowns])
        if cols:
            a = np.array(cols, dtype=np.int64).T
            kernel = zs[~((zs @ a) % 2).any(axis=1)]
        else:
            kernel = zs
        free = kernel.any(axis=0)
        for idx, key in enumerate(unknowns):
            if not free[idx] and key not in out:
                out[key] = t
    return out


def brute_profile(spec) -> tuple[int, ...]:
    """Per-coordinate worst delay for a full burst at t=0, from `brute_recovery_times`."""
    erased = set(range(spec.b))
    times = brute_recovery_times(spec, erased, spec.b + spec.horizon)
    return tuple(
        max(times[(s, j)] - s for s in erased) for j in range(1, spec.k + 1)
    )
