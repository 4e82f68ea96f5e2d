import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from tbsc.constructions import reduced_p0_matrix
from tbsc.errors import DimensionError, InconsistentSystemError
from tbsc.gf2 import BinMatrix, IncrementalSolver, is_invertible, mat_mul, rank

from conftest import brute_rank, mat


def bits(shape):
    return arrays(np.uint8, shape, elements=st.integers(0, 1))


def test_identity_times_matrix():
    m = mat("101;011;110")
    assert BinMatrix.identity(3) @ m == m


def test_xor_accumulation():
    assert mat_mul(mat("11"), mat("1;1")) == mat("0")


def test_unit_row_picks_first_row_of_sr_block(example_spec):
    e1 = mat("10000")
    assert e1 @ example_spec.sr.parity[2] == mat("100")


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        mat_mul(mat("11"), mat("1;1;1"))


def test_one_based_access_and_text_roundtrip():
    m = mat("010;001")
    assert m[1, 2] == 1 and m[2, 3] == 1 and m[1, 1] == 0
    with pytest.raises(IndexError):
        m[0, 1]
    text = m.to_text()
    assert text == "2 3\n010\n001\n"
    assert BinMatrix.from_text(text) == m


@pytest.mark.parametrize("bad", ["2 2\n01\n", "1 2\n012\n", "x\n0\n"])
def test_bad_text(bad):
    with pytest.raises(ValueError):
        BinMatrix.from_text(bad)


def test_entries_must_be_bits():
    with pytest.raises(ValueError):
        BinMatrix([[0, 2]])
    with pytest.raises(DimensionError):
        BinMatrix(np.zeros((0, 3)))


def test_rank_basics():
    assert rank(BinMatrix.zeros(4, 4)) == 0
    assert rank(BinMatrix.identity(6)) == 6
    assert not is_invertible(mat("11;11"))
    assert not is_invertible(mat("10"))


def test_rank_of_reduced_head_matrix(example_spec):
    m = reduced_p0_matrix(3, 2, example_spec.rd)
    assert m.shape == (6, 6)
    assert brute_rank(m.array) == 6
    assert rank(m) == 6 and is_invertible(m)


def test_solver_examples():
    s = IncrementalSolver(2)
    assert s.add_equation([1, 1], 1) == {}
    assert s.add_equation([0, 1], 0) == {1: 0, 0: 1}
    assert s.determined == {0: 1, 1: 0}
    # redundant equations pin nothing new
    assert s.add_equation([1, 0], 1) == {}


def test_solver_inconsistency():
    s = IncrementalSolver(2)
    s.add_equation([1, 1], 1)
    s.add_equation([1, 0], 0)
    with pytest.raises(InconsistentSystemError):
        s.add_equation([0, 1], 0)


def test_solver_length_check():
    with pytest.raises(DimensionError):
        IncrementalSolver(3).add_equation([1, 0], 1)


def test_solver_on_head_matrix_pins_everything_at_the_end(example_spec):
    a = reduced_p0_matrix(3, 2, example_spec.rd).array
    x = np.array([1, 0, 1, 1, 0, 1])
    rhs = (a.astype(int) @ x) % 2
    s = IncrementalSolver(6)
    for i in range(5):
        s.add_equation(list(a[i]), int(rhs[i]))
        assert len(s.determined) < 6
    s.add_equation(list(a[5]), int(rhs[5]))
    assert s.determined == {v: int(x[v]) for v in range(6)}


@settings(max_examples=60, deadline=None)
@given(bits((8, 8)), st.permutations(range(8)))
def test_rank_invariant_under_row_permutation(a, perm):
    assert rank(BinMatrix(a)) == rank(BinMatrix(a[list(perm)])) == brute_rank(a)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 8).flatmap(lambda n: st.tuples(bits((n, n)), bits((n,)))))
def test_invertible_iff_solver_recovers(args):
    a, x = args
    n = a.shape[0]
    rhs = (a.astype(int) @ x.astype(int)) % 2
    s = IncrementalSolver(n)
    for row, r in zip(a, rhs):
        s.add_equation(list(row), int(r))
    recovered = s.determined == {v: int(x[v]) for v in range(n)}
    assert is_invertible(BinMatrix(a)) == recovered
    # whatever was pinned must be right
    assert all(x[v] == b for v, b in s.determined.items())


@settings(max_examples=40, deadline=None)
@given(
    st.tuples(st.integers(1, 16), st.integers(1, 16), st.integers(1, 16), st.integers(1, 16)).flatmap(
        lambda d: st.tuples(bits((d[0], d[1])), bits((d[1], d[2])), bits((d[2], d[3])))
    )
)
def test_mat_mul_associative(abc):
    a, b, c = (BinMatrix(m) for m in abc)
    assert (a @ b) @ c == a @ (b @ c)


def test_solver_never_unpins():
    rng = np.random.default_rng(3)
    s = IncrementalSolver(10)
    x = rng.integers(0, 2, 10)
    seen = set()
    for _ in range(30):
        row = rng.integers(0, 2, 10)
        s.add_equation(list(row), int(row @ x % 2))
        now = set(s.determined)
        assert seen <= now
        seen = now
