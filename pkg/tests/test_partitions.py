import numpy as np
import pytest

from qqlax.errors import InvalidData
from qqlax.partitions import (
    Partition,
    TupleOfPartitions,
    diagram_stats,
    enumerate_partitions,
    enumerate_tuples,
    partition_count,
)


def euler_counts(n_max, colors=1):
    """Coefficients of prod (1-q^n)^{-colors} by polynomial multiplication."""
    coefs = np.zeros(n_max + 1)
    coefs[0] = 1.0
    for n in range(1, n_max + 1):
        # multiply by 1/(1-q^n)^colors = (sum_k q^{nk})^colors
        for _ in range(colors):
            out = np.zeros_like(coefs)
            for k in range(0, n_max + 1, n):
                out[k:] += coefs[: n_max + 1 - k] if k else coefs
            coefs = out
    return [int(round(c)) for c in coefs]


def test_enumerate_empty():
    assert enumerate_partitions(0) == [Partition()]


def test_p4_is_5():
    assert len(enumerate_partitions(4)) == 5


def test_counts_match_euler_product():
    expected = euler_counts(10)
    for k in range(11):
        assert partition_count(k) == expected[k]


def test_no_duplicates_and_sorted():
    parts = enumerate_partitions(8)
    assert len(set(parts)) == len(parts)
    rows = [p.rows for p in parts]
    assert rows == sorted(rows, reverse=True)


def test_tuple_enumeration():
    assert enumerate_tuples(2, 0) == [TupleOfPartitions([(), ()])]
    # coefficient of q^2 in prod (1-q^n)^{-2} is 5
    assert len(enumerate_tuples(2, 2)) == 5
    expected = euler_counts(6, colors=2)
    for k in range(7):
        assert len(enumerate_tuples(2, k)) == expected[k]
    for k in range(9):
        assert len(enumerate_tuples(1, k)) == partition_count(k)


def test_invalid_partition():
    with pytest.raises(InvalidData):
        Partition((1, 2))
    with pytest.raises(InvalidData):
        Partition((2, -1))


def test_transpose_involution():
    for k in range(11):
        for lam in enumerate_partitions(k):
            assert lam.transpose().transpose() == lam


def test_hooks_2_1():
    lam = Partition((2, 1))
    hooks = sorted(lam.hook(i, j) for i, j in lam.boxes())
    assert hooks == [1, 1, 3]


def test_hooks_against_brute_force():
    # oracle: hook(i,j) = #{boxes in same row to the right} + #{same column below} + 1
    for k in range(1, 9):
        for lam in enumerate_partitions(k):
            boxes = set(lam.boxes())
            for i, j in boxes:
                arm = sum(1 for (a, b) in boxes if a == i and b > j)
                leg = sum(1 for (a, b) in boxes if b == j and a > i)
                assert lam.arm(i, j) == arm
                assert lam.hook(i, j) == arm + leg + 1


def test_boundary_of_empty():
    e = Partition()
    assert e.addable() == [(1, 1)]
    assert e.removable() == []


def test_boundary_2_1():
    lam = Partition((2, 1))
    assert set(lam.addable()) == {(1, 3), (2, 2), (3, 1)}
    assert set(lam.removable()) == {(1, 2), (2, 1)}


def test_boundary_brute_force():
    # oracle: a position is addable iff adding it yields a valid partition
    for k in range(7):
        for lam in enumerate_partitions(k):
            adds = set()
            for i in range(1, len(lam) + 2):
                rows = list(lam.rows) + [0] * (i - len(lam.rows))
                rows[i - 1] += 1
                try:
                    Partition(rows)
                    adds.add((i, lam.row(i) + 1))
                except InvalidData:
                    pass
            assert set(lam.addable()) == adds
            assert len(lam.addable()) == len(lam.removable()) + 1


def test_add_remove_round_trip():
    for k in range(9):
        for lam in enumerate_partitions(k):
            for corner in lam.addable():
                assert lam.add_box(corner).remove_box(corner) == lam


def test_d_omega_sums_to_size():
    for total in range(7):
        for Lam in enumerate_tuples(2, total):
            assert sum(Lam.d_omega(om) for om in range(2)) == total
    for total in range(5):
        for Lam in enumerate_tuples(3, total):
            assert sum(Lam.d_omega(om) for om in range(3)) == total


def test_diagram_stats_contents():
    lam = Partition((2, 1))
    st = diagram_stats(lam)
    # content exponents (a-1, b-1) in the 12-plane reading (a along eps_1)
    assert st["contents"][(1, 2)] == (1, 0)
    assert st["contents"][(2, 1)] == (0, 1)
    assert st["transpose"] == Partition((2, 1))
