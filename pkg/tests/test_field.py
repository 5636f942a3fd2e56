import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mbrrepair.field import (
    GF256,
    Field,
    FieldError,
    FieldMismatchError,
    Matrix,
    SingularMatrixError,
    field_add,
    field_inv,
    field_mul,
    is_irreducible,
    mat_inverse,
    mat_mul,
    mat_rank,
    mat_solve,
    mat_solve_any,
    parse_field,
    vandermonde,
)

F7 = Field.prime(7)
GF16 = Field.binary(4, 0b10011)


def slow_gf256_mul(a, b, poly=0x11D):
    # shift-and-add, independent of the log tables
    r = 0
    for bit in range(8):
        if (b >> bit) & 1:
            r ^= a << bit
    for bit in range(15, 7, -1):
        if (r >> bit) & 1:
            r ^= poly << (bit - 8)
    return r


def naive_matmul(field, a, b):
    rows, inner, cols = len(a), len(b), len(b[0])
    out = [[0] * cols for _ in range(rows)]
    for i in range(rows):
        for j in range(cols):
            acc = 0
            for t in range(inner):
                acc = int(field.add(acc, field.mul(a[i][t], b[t][j])))
            out[i][j] = acc
    return out


def test_prime_field_examples():
    three, five = F7.element(3), F7.element(5)
    assert field_add(three, five).value == 1
    assert field_mul(three, five).value == 1
    assert field_inv(three).value == 5
    assert field_inv(F7.element(1)).value == 1
    for x in range(7):
        assert field_add(F7.element(0), F7.element(x)).value == x


def test_gf256_examples():
    a = GF256.element(0x02)
    assert field_mul(a, GF256.element(0x80)).value == 0x1D
    for x in (0, 1, 0x53, 0xFF):
        e = GF256.element(x)
        assert field_add(e, e).value == 0
        assert field_mul(GF256.element(1), e).value == x


def test_gf256_inverse_exhaustive():
    for x in range(1, 256):
        assert int(GF256.mul(x, GF256.inv(x))) == 1


def test_gf256_mul_matches_shift_and_add():
    a = np.arange(256).repeat(256)
    b = np.tile(np.arange(256), 256)
    fast = GF256.mul(a, b)
    slow = np.array([slow_gf256_mul(int(x), int(y)) for x, y in zip(a, b)])
    assert np.array_equal(fast, slow)


@pytest.mark.parametrize("field", [F7, Field.prime(11), GF16], ids=repr)
def test_field_axioms_exhaustive(field):
    q = field.q
    a, b, c = np.meshgrid(np.arange(q), np.arange(q), np.arange(q), indexing="ij")
    a, b, c = a.ravel(), b.ravel(), c.ravel()
    assert np.array_equal(field.add(field.add(a, b), c), field.add(a, field.add(b, c)))
    assert np.array_equal(field.mul(field.mul(a, b), c), field.mul(a, field.mul(b, c)))
    assert np.array_equal(field.mul(a, field.add(b, c)), field.add(field.mul(a, b), field.mul(a, c)))
    assert np.array_equal(field.add(a, b), field.add(b, a))
    assert np.array_equal(field.mul(a, b), field.mul(b, a))
    nz = np.arange(1, q)
    assert np.all(field.mul(nz, field.inv(nz)) == 1)
    assert np.all(field.add(nz, field.neg(nz)) == 0)


def test_gf256_axioms_sampled(rng):
    a, b, c = rng.integers(0, 256, size=(3, 20000))
    f = GF256
    assert np.array_equal(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)))
    assert np.array_equal(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)))


def test_nonprimitive_polynomial_still_builds_tables():
    # x^8+x^4+x^3+x+1 is irreducible but x is not a generator
    f = Field.binary(8, 0x11B)
    assert f.generator != 2
    for x in range(1, 256):
        assert int(f.mul(x, f.inv(x))) == 1


def test_field_construction_errors():
    with pytest.raises(FieldError):
        Field.prime(8)
    with pytest.raises(FieldError):
        Field.binary(8, 0x100)  # x^8, reducible
    with pytest.raises(FieldError):
        Field.binary(4, 0x11D)
    assert not is_irreducible(0b101)  # (x+1)^2
    assert is_irreducible(0b111)


def test_mismatched_fields_rejected():
    with pytest.raises(FieldMismatchError):
        field_add(F7.element(1), Field.prime(11).element(1))
    with pytest.raises(FieldMismatchError):
        field_mul(F7.element(1), GF256.element(1))
    with pytest.raises(FieldError):
        F7.element(7)


def test_zero_has_no_inverse():
    with pytest.raises(ZeroDivisionError):
        field_inv(F7.element(0))
    with pytest.raises(ZeroDivisionError):
        GF256.inv(0)


def test_parse_field():
    assert parse_field("gf256") == GF256
    assert parse_field("257") == Field.prime(257)
    assert parse_field("GF(7)") == F7
    assert parse_field("gf2^4:0x13") == GF16
    with pytest.raises(FieldError):
        parse_field("banana")
    with pytest.raises(FieldError):
        parse_field("9")


def test_mat_mul_examples():
    a = Matrix(F7, [[1, 1], [1, 2]])
    assert mat_mul(a, Matrix(F7, [[1], [3]])).tolist() == [[4], [0]]
    x = Matrix(F7, [[3, 4, 5], [6, 0, 1]])
    assert mat_mul(Matrix.identity(F7, 2), x) == x
    assert mat_mul(Matrix.zeros(F7, 2, 2), x) == Matrix.zeros(F7, 2, 3)
    with pytest.raises(ValueError):
        mat_mul(x, x)
    with pytest.raises(FieldMismatchError):
        mat_mul(Matrix(GF256, [[1]]), Matrix(F7, [[1]]))


@pytest.mark.parametrize("field", [F7, GF256], ids=repr)
def test_mat_mul_matches_naive(field, rng):
    for _ in range(20):
        r, m, c = rng.integers(1, 6, size=3)
        a = rng.integers(0, field.q, size=(r, m))
        b = rng.integers(0, field.q, size=(m, c))
        got = mat_mul(Matrix(field, a), Matrix(field, b)).tolist()
        assert got == naive_matmul(field, a.tolist(), b.tolist())


def test_solve_identity_and_singular():
    rhs = Matrix(F7, [[1, 2], [3, 4]])
    assert mat_solve(Matrix.identity(F7, 2), rhs) == rhs
    with pytest.raises(SingularMatrixError):
        mat_solve(Matrix.zeros(F7, 2, 2), rhs)
    with pytest.raises(SingularMatrixError):
        mat_inverse(Matrix(GF256, [[1, 2], [1, 2]]))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.integers(1, 4), st.sampled_from(["7", "gf256", "13"]), st.integers(0, 2**32 - 1))
def test_solve_roundtrip(size, cols, fname, seed):
    field = parse_field(fname)
    rng = np.random.default_rng(seed)
    a = Matrix(field, rng.integers(0, field.q, size=(size, size)))
    if mat_rank(a) < size:
        with pytest.raises(SingularMatrixError):
            mat_inverse(a)
        return
    x = Matrix(field, rng.integers(0, field.q, size=(size, cols)))
    assert mat_solve(a, mat_mul(a, x)) == x
    inv = mat_inverse(a)
    assert mat_mul(a, inv) == Matrix.identity(field, size)
    assert mat_mul(inv, a) == Matrix.identity(field, size)


def test_rank_examples():
    assert mat_rank(Matrix.identity(F7, 4)) == 4
    assert mat_inverse(Matrix.identity(GF256, 3)) == Matrix.identity(GF256, 3)
    v = vandermonde(GF256, [1, 2, 3, 4, 5], 5)
    assert mat_rank(v) == 5
    dup = Matrix(F7, [[1, 2, 3], [1, 2, 3], [0, 1, 4]])
    assert mat_rank(dup) == 2
    assert mat_rank(Matrix.zeros(F7, 3, 3)) == 0


def test_solve_any_consistent_and_not():
    a = Matrix(F7, [[1, 0], [0, 1], [1, 1]])
    x = Matrix(F7, [[2], [5]])
    got = mat_solve_any(a, mat_mul(a, x))
    assert got == x
    with pytest.raises(SingularMatrixError):
        mat_solve_any(a, Matrix(F7, [[1], [1], [0]]))


def test_matrix_is_immutable_and_hashable():
    m = Matrix(F7, [[1, 2], [3, 4]])
    with pytest.raises(ValueError):
        m.a[0, 0] = 5
    assert hash(m) == hash(Matrix(F7, [[1, 2], [3, 4]]))
    with pytest.raises(FieldError):
        Matrix(F7, [[7]])
