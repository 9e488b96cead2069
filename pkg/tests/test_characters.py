import numpy as np
import pytest

from qqlax.characters import (
    ParamAssignment,
    VirtualCharacter,
    Weight,
    char_algebra,
    divide_one_minus,
    k24_character,
    localization_characters,
    n24_character,
    orbifold_tangent_character,
    pleth_exp,
    s24_character,
    tangent_character,
    v12_character,
    w12_character,
)
from qqlax.elliptic import FOUR_D, EllipticParams
from qqlax.errors import InvalidData, PoleAtWeight
from qqlax.partitions import Partition, TupleOfPartitions, enumerate_tuples


def params4d(n, x=0.0):
    return ParamAssignment(
        x=x,
        a=tuple(0.9 + 0.31 * k + 0.11j * k for k in range(n)),
        e1=0.37 + 0.05j,
        e2=0.23 - 0.02j,
        m=0.61 + 0.07j,
        elliptic=EllipticParams(kernel=FOUR_D),
    )


def random_character(n, rng, support=6):
    out = VirtualCharacter.zero(n)
    for _ in range(support):
        w = Weight(
            int(rng.integers(-1, 2)),
            tuple(int(rng.integers(-2, 3)) for _ in range(n)),
            int(rng.integers(-2, 3)),
            int(rng.integers(-2, 3)),
            int(rng.integers(-1, 2)),
        )
        out += VirtualCharacter.monomial(w, int(rng.integers(-3, 4)) or 1)
    return out


def test_dual_reverses_weights():
    n = 2
    V = VirtualCharacter.monomial(Weight.a(n, 1)) + VirtualCharacter.monomial(Weight.a(n, 2))
    D = char_algebra("Dual", V)
    assert D == VirtualCharacter.monomial(-Weight.a(n, 1)) + VirtualCharacter.monomial(-Weight.a(n, 2))


def test_p1_p2_product():
    n = 1
    P1 = VirtualCharacter.one(n) - VirtualCharacter.monomial(Weight.e1(n))
    P2 = VirtualCharacter.one(n) - VirtualCharacter.monomial(Weight.e2(n))
    prod = char_algebra("Multiply", P1, P2)
    expected = (
        VirtualCharacter.one(n)
        - VirtualCharacter.monomial(Weight.e1(n))
        - VirtualCharacter.monomial(Weight.e2(n))
        + VirtualCharacter.monomial(Weight.e1(n) + Weight.e2(n))
    )
    assert prod == expected


def test_cancellation():
    rng = np.random.default_rng(0)
    V = random_character(2, rng)
    assert char_algebra("Add", V, -V) == VirtualCharacter.zero(2)


def test_ring_axioms_spot_check():
    rng = np.random.default_rng(5)
    for _ in range(5):
        A = random_character(2, rng, 4)
        B = random_character(2, rng, 4)
        C = random_character(2, rng, 4)
        assert A * B == B * A
        assert (A * B) * C == A * (B * C)
        assert A * (B + C) == A * B + A * C


def test_eps4_elimination():
    n = 1
    w = Weight.e4(n, 2)
    assert (w.c1, w.c2, w.cm) == (-2, -2, -2)
    # eps1+eps2+eps3+eps4 = 0 holds structurally
    total = Weight.e1(n) + Weight.e2(n) + Weight.e3(n) + Weight.e4(n)
    assert total == Weight.zero(n)


def test_pleth_single_weight_and_empty():
    p = params4d(1)
    w = Weight.m(1)
    assert abs(pleth_exp(VirtualCharacter.monomial(w), p) - 1 / p.m) < 1e-15
    assert pleth_exp(VirtualCharacter.zero(1), p) == 1


def test_pleth_multiplicative():
    rng = np.random.default_rng(7)
    p = params4d(2)
    for _ in range(6):
        A = random_character(2, rng, 5)
        B = random_character(2, rng, 5)
        try:
            lhs = pleth_exp(A + B, p)
            rhs = pleth_exp(A, p) * pleth_exp(B, p)
        except PoleAtWeight:
            continue
        assert abs(lhs - rhs) <= 1e-12 * max(abs(lhs), 1.0)


def test_pleth_dual_sign_identity_4d():
    # E[V*] = (-1)^rank E[V] in 4d since theta(-x) = -theta(x) there, hence
    # E[-V*] * E[V] = (-1)^rank.
    rng = np.random.default_rng(9)
    p = params4d(2)
    for _ in range(6):
        V = random_character(2, rng, 5)
        try:
            lhs = pleth_exp(V.dual(), p)
            rhs = (-1) ** (V.rank() % 2) * pleth_exp(V, p)
            prod = pleth_exp(-V.dual(), p) * pleth_exp(V, p)
        except PoleAtWeight:
            continue
        assert abs(lhs - rhs) <= 1e-10 * max(abs(lhs), 1.0)
        assert abs(prod - (-1) ** (V.rank() % 2)) <= 1e-10


def test_pleth_pole_error():
    p = params4d(1)
    with pytest.raises(PoleAtWeight):
        pleth_exp(VirtualCharacter.monomial(Weight.zero(1)), p)


def test_zn_component_charges():
    n = 3
    q2 = VirtualCharacter.monomial(Weight.e2(n))
    assert q2.zn_component(1) == q2
    assert q2.zn_component(0) == VirtualCharacter.zero(n)
    # charge(u_alpha q1^{a-1} q2^{b-1}) = alpha + b - 1 mod N
    for alpha in (1, 2, 3):
        for a in (1, 2):
            for b in (1, 2, 3):
                w = Weight.a(n, alpha) + Weight.e1(n, a - 1) + Weight.e2(n, b - 1)
                assert w.charge() % n == (alpha + b - 1) % n


def test_zn_partition_of_unity_and_idempotence():
    rng = np.random.default_rng(13)
    n = 3
    V = random_character(n, rng, 8)
    total = VirtualCharacter.zero(n)
    for om in range(n):
        comp = V.zn_component(om)
        assert comp.zn_component(om) == comp
        total += comp
    assert total == V


def test_charge_additive_under_multiply():
    n = 3
    w1 = Weight.a(n, 2) + Weight.e2(n, 1)
    w2 = Weight.a(n, 1) + Weight.e2(n, 2)
    assert (w1 + w2).charge() % n == (w1.charge() + w2.charge()) % n


def test_tangent_plain_single_box():
    Lam = TupleOfPartitions([Partition((1,))])
    T = tangent_character(Lam, 1)
    expected = VirtualCharacter.monomial(Weight.e1(1)) + VirtualCharacter.monomial(Weight.e2(1))
    assert T == expected


def test_tangent_orbifold_reduces_at_n1():
    for rows in [(), (1,), (2, 1)]:
        Lam = TupleOfPartitions([Partition(rows)])
        assert orbifold_tangent_character(Lam, 1) == tangent_character(Lam, 1)


def test_tangent_dimension_counts():
    # plain: rank 2N|Lambda|; chainsaw: rank sum_w (d_w + d_{w-1}) = 2|Lambda|
    for total in range(4):
        for Lam in enumerate_tuples(2, total):
            assert tangent_character(Lam, 2).rank() == 2 * 2 * total
            assert orbifold_tangent_character(Lam, 2).rank() == 2 * total


def test_s24_and_v12():
    mu = Partition((1,))
    n = 2
    assert n24_character(n) == VirtualCharacter.one(n)
    assert s24_character(Partition(()), n) == VirtualCharacter.one(n)
    k = k24_character(mu, n)
    assert k == VirtualCharacter.one(n)
    Lam = TupleOfPartitions([Partition((1,)), Partition(())])
    assert v12_character(Lam, n) == VirtualCharacter.monomial(Weight.a(n, 1))


def test_localization_dispatcher():
    n = 2
    Lam = TupleOfPartitions([Partition((1,)), Partition(())])
    assert localization_characters("V12", Lam, n) == v12_character(Lam, n)
    assert localization_characters("W12", None, n) == w12_character(n)
    with pytest.raises(InvalidData):
        localization_characters("nope", None, n)


def test_divide_one_minus():
    n = 1
    w = Weight.e2(n, 2)
    rng = np.random.default_rng(3)
    D = random_character(n, rng, 5)
    V = D * (VirtualCharacter.one(n) - VirtualCharacter.monomial(w))
    assert divide_one_minus(V, w) == D
    with pytest.raises(InvalidData):
        divide_one_minus(VirtualCharacter.one(n), w)
