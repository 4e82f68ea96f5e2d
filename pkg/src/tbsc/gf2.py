"""Dense linear algebra over GF(2).

`BinMatrix` is an immutable 0/1 matrix with 1-based ``(row, col)`` access.
`IncrementalSolver` keeps a growing linear system in reduced row-echelon
form and reports which unknowns become pinned as equations arrive.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence

import numpy as np

from .errors import DimensionError, InconsistentSystemError

__all__ = [
    "BinMatrix",
    "IncrementalSolver",
    "block",
    "mat_mul",
    "rank",
    "is_invertible",
    "rref",
]


class BinMatrix:
    """Immutable binary matrix.

    Entries are stored as a read-only ``uint8`` array.  Public indexing is
    1-based: ``m[1, 1]`` is the top-left entry.
    """

    __slots__ = ("_a",)

    def __init__(self, data):
        a = np.array(data, dtype=np.int64, copy=True)
        if a.ndim != 2:
            raise DimensionError(f"expected a 2-D array, got shape {a.shape}")
        if a.shape[0] < 1 or a.shape[1] < 1:
            raise DimensionError(f"matrix must be at least 1x1, got {a.shape}")
        if np.any((a != 0) & (a != 1)):
            raise ValueError("entries must be 0 or 1")
        a = a.astype(np.uint8)
        a.setflags(write=False)
        self._a = a

    @classmethod
    def zeros(cls, rows: int, cols: int) -> BinMatrix:
        return cls(np.zeros((rows, cols), dtype=np.uint8))

    @classmethod
    def identity(cls, n: int) -> BinMatrix:
        return cls(np.eye(n, dtype=np.uint8))

    @classmethod
    def from_text(cls, text: str) -> BinMatrix:
        """Parse the matrix text format: ``"rows cols"`` then one 0/1 line per row."""
        lines = [ln.strip() for ln in text.strip().splitlines()]
        try:
            rows, cols = (int(x) for x in lines[0].split())
        except (ValueError, IndexError) as exc:
            raise ValueError(f"bad matrix header: {lines[:1]!r}") from exc
        body = lines[1:]
        if len(body) != rows:
            raise ValueError(f"expected {rows} rows, found {len(body)}")
        for ln in body:
            if len(ln) != cols or set(ln) - {"0", "1"}:
                raise ValueError(f"bad matrix row {ln!r}")
        return cls([[int(ch) for ch in ln] for ln in body])

    def to_text(self) -> str:
        head = f"{self.rows} {self.cols}"
        body = ["".join("1" if x else "0" for x in row) for row in self._a]
        return "\n".join([head, *body]) + "\n"

    @property
    def rows(self) -> int:
        return self._a.shape[0]

    @property
    def cols(self) -> int:
        return self._a.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self._a.shape

    @property
    def array(self) -> np.ndarray:
        """Read-only 0-based view of the entries."""
        return self._a

    @property
    def T(self) -> BinMatrix:
        return BinMatrix(self._a.T)

    def __getitem__(self, idx: tuple[int, int]) -> int:
        i, j = idx
        if not (1 <= i <= self.rows and 1 <= j <= self.cols):
            raise IndexError(f"({i}, {j}) outside 1..{self.rows} x 1..{self.cols}")
        return int(self._a[i - 1, j - 1])

    def is_zero(self) -> bool:
        return not self._a.any()

    def nonzero_entries(self) -> list[tuple[int, int]]:
        """1-based positions of the ones, row-major."""
        return [(int(i) + 1, int(j) + 1) for i, j in zip(*np.nonzero(self._a))]

    def row_masks(self) -> list[int]:
        """Each row packed into an int, column ``j`` at bit ``j - 1``."""
        weights = 1 << np.arange(self.cols, dtype=object)
        return [int(np.dot(row.astype(object), weights)) for row in self._a]

    def col_masks(self) -> list[int]:
        """Each column packed into an int, row ``i`` at bit ``i - 1``."""
        return self.T.row_masks()

    def __matmul__(self, other: BinMatrix) -> BinMatrix:
        return mat_mul(self, other)

    def __add__(self, other: BinMatrix) -> BinMatrix:
        if self.shape != other.shape:
            raise DimensionError(f"cannot add {self.shape} and {other.shape}")
        return BinMatrix(self._a ^ other._a)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BinMatrix):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self._a, other._a))

    def __hash__(self) -> int:
        return hash((self.shape, self._a.tobytes()))

    def __repr__(self) -> str:
        rows = ";".join("".join(str(x) for x in r) for r in self._a)
        return f"BinMatrix({self.rows}x{self.cols}: {rows})"


def mat_mul(a: BinMatrix, b: BinMatrix) -> BinMatrix:
    if a.cols != b.rows:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    prod = a.array.astype(np.int64) @ b.array.astype(np.int64)
    return BinMatrix(prod & 1)


def block(blocks: Sequence[Sequence[BinMatrix]]) -> BinMatrix:
    """Assemble a block matrix from a 2-D grid of conformable blocks."""
    return BinMatrix(np.block([[m.array for m in row] for row in blocks]))


def _rref_array(a: np.ndarray) -> tuple[np.ndarray, list[int]]:
    # pivot: first column with a nonzero entry, taken from the lowest row index
    r = a.astype(np.uint8, copy=True)
    nrows, ncols = r.shape
    pivots: list[int] = []
    row = 0
    for col in range(ncols):
        if row == nrows:
            break
        hits = np.flatnonzero(r[row:, col])
        if hits.size == 0:
            continue
        src = row + int(hits[0])
        if src != row:
            r[[row, src]] = r[[src, row]]
        mask = r[:, col].astype(bool)
        mask[row] = False
        r[mask] ^= r[row]
        pivots.append(col)
        row += 1
    return r, pivots


def rref(a: BinMatrix) -> tuple[np.ndarray, list[int]]:
    """Reduced row-echelon form and 0-based pivot columns."""
    return _rref_array(a.array)


def rank(a: BinMatrix) -> int:
    return len(_rref_array(a.array)[1])


def is_invertible(a: BinMatrix) -> bool:
    return a.rows == a.cols and rank(a) == a.rows


def _bits(mask: int) -> Iterable[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class IncrementalSolver:
    """Online GF(2) elimination with reporting of pinned unknowns.

    Equations are rows ``coeffs . x = rhs``.  Variables are 0-based.  The
    pending (not yet fully pinned) rows are kept in reduced row-echelon form
    keyed by pivot variable; a row that collapses to a single variable moves
    that variable into ``determined`` and leaves the row store.

    ``num_vars=None`` makes the variable space unbounded, which the stream
    decoder uses with time-indexed variables.
    """

    def __init__(self, num_vars: int | None):
        self.num_vars = num_vars
        self._rows: dict[int, tuple[int, int]] = {}
        self._det_mask = 0
        self._det_ones = 0

    @property
    def determined(self) -> dict[int, int]:
        return {v: (self._det_ones >> v) & 1 for v in _bits(self._det_mask)}

    @property
    def pending_equations(self) -> int:
        return len(self._rows)

    def is_determined(self, var: int) -> bool:
        return bool((self._det_mask >> var) & 1)

    def value(self, var: int) -> int:
        if not self.is_determined(var):
            raise KeyError(var)
        return (self._det_ones >> var) & 1

    def add_equation(self, coeffs: Sequence[int], rhs: int) -> dict[int, int]:
        """Add one equation given as a 0/1 coefficient vector.

        Returns the variables pinned by this equation, mapped to their values.
        Raises `InconsistentSystemError` if the equation contradicts the
        system.
        """
        if self.num_vars is not None and len(coeffs) != self.num_vars:
            raise DimensionError(f"expected {self.num_vars} coefficients, got {len(coeffs)}")
        mask = 0
        for v, c in enumerate(coeffs):
            if c & 1:
                mask |= 1 << v
        return self.add_mask(mask, rhs)

    def add_mask(self, mask: int, rhs: int) -> dict[int, int]:
        """Same as `add_equation` with the coefficients packed into an int."""
        rhs &= 1
        if self.num_vars is not None and mask >> self.num_vars:
            raise DimensionError("coefficient mask exceeds num_vars")
        rhs ^= (mask & self._det_ones).bit_count() & 1
        mask &= ~self._det_mask
        for piv, (m, r) in self._rows.items():
            if (mask >> piv) & 1:
                mask ^= m
                rhs ^= r
        if not mask:
            if rhs:
                raise InconsistentSystemError("equation reduces to 0 = 1")
            return {}

        piv = (mask & -mask).bit_length() - 1
        pinned: dict[int, int] = {}
        for other in list(self._rows):
            m, r = self._rows[other]
            if (m >> piv) & 1:
                m ^= mask
                r ^= rhs
                if m & (m - 1):
                    self._rows[other] = (m, r)
                else:
                    del self._rows[other]
                    pinned[other] = r
        if mask & (mask - 1):
            self._rows[piv] = (mask, rhs)
        else:
            pinned[piv] = rhs
        for v, val in pinned.items():
            self._det_mask |= 1 << v
            if val:
                self._det_ones |= 1 << v
        return pinned

    def forget(self, mask: int) -> None:
        """Drop determined variables in ``mask`` that no equation will mention again."""
        mask &= self._det_mask
        self._det_mask &= ~mask
        self._det_ones &= ~mask
