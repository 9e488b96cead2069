import numpy as np
import pytest

from qqlax.characters import ParamAssignment
from qqlax.elliptic import FIVE_D, FOUR_D, EllipticParams
from qqlax.errors import NonGenericX
from qqlax.instanton import (
    InstantonConfig,
    check_pole_cancellation,
    measure,
    measure_weight,
    observable_average,
    partition_function,
    qq_char_term,
    s_factor,
    y_fixed_point,
    y_orbifold_fixed_point,
    y_orbifold_product,
    y_unorbifolded_reference,
)
from qqlax.partitions import Partition, TupleOfPartitions, enumerate_tuples, partition_count
from tests.test_partitions import euler_counts


def make_params(n, kernel=FOUR_D, m=0.61 + 0.07j, beta=0.9):
    return ParamAssignment(
        x=0.0,
        a=tuple(1.13 + 0.47 * k - 0.089j * (k + 1) for k in range(n)),
        e1=0.371 + 0.051j,
        e2=0.233 - 0.027j,
        m=m,
        elliptic=EllipticParams(kernel=kernel, beta=beta),
    )


def make_cfg(n, order, kernel=FOUR_D, m=0.61 + 0.07j, fugacity=0.1):
    return InstantonConfig(n, order, make_params(n, kernel, m), fugacity=fugacity)


def test_measure_empty_tuple():
    cfg = make_cfg(1, 2)
    empty = TupleOfPartitions([Partition(())])
    assert measure(empty, cfg) == 1


def test_measure_single_box_closed_form():
    # oracle: E[(1 - e^{bm})(q1 + q2)] = (m+e1)(m+e2)/(e1 e2) in 4d
    cfg = make_cfg(1, 1)
    p = cfg.params
    lam1 = TupleOfPartitions([Partition((1,))])
    expected = cfg.fugacity * (p.m + p.e1) * (p.m + p.e2) / (p.e1 * p.e2)
    got = measure(lam1, cfg)
    assert abs(got - expected) < 1e-12 * abs(expected)


def test_measure_at_zero_mass_is_fugacity_power():
    cfg = make_cfg(2, 3, m=0.0)
    for total in range(4):
        for Lam in enumerate_tuples(2, total):
            assert abs(measure(Lam, cfg) - cfg.fugacity**total) < 1e-14


def test_partition_function_counts_at_zero_mass():
    for n in (1, 2, 3):
        order = 6 if n < 3 else 4
        cfg = make_cfg(n, order, m=0.0)
        Z = partition_function(cfg)
        expected = euler_counts(order, colors=n)
        for k in range(order + 1):
            assert abs(Z[(k,)] - expected[k]) < 1e-9


def test_partition_function_order_zero_and_k1():
    cfg = make_cfg(1, 1)
    Z = partition_function(cfg)
    assert abs(Z[(0,)] - 1) < 1e-15
    lam1 = TupleOfPartitions([Partition((1,))])
    assert abs(Z[(1,)] - measure_weight(lam1, cfg)) < 1e-14


def test_orbifold_measure_and_z():
    cfg = InstantonConfig(2, 2, make_params(2), fugacities=(0.07, 0.11))
    Z = partition_function(cfg, orbifold=True)
    assert abs(Z[(0, 0)] - 1) < 1e-15
    # every d_omega combination with total <= 2 appears
    assert any(sum(k) == 2 for k in Z.coeffs)


def test_y_average_order_zero():
    cfg = make_cfg(2, 0)
    x = 2.9 + 0.4j
    avg = observable_average("Y", x, cfg)
    expected = np.prod([x - a for a in cfg.params.a])
    assert abs(avg[(0,)] - expected) < 1e-12 * abs(expected)


def test_qq_average_order_zero_matches_shifted_y():
    cfg = make_cfg(1, 0)
    x = 2.31 + 0.21j
    eps = cfg.params.e1 + cfg.params.e2
    qq = observable_average("QQChar", x, cfg)
    y = observable_average("Y", x + eps, cfg)
    assert abs(qq[(0,)] - y[(0,)]) < 1e-12 * abs(y[(0,)])


def test_s_factor_empty_is_one():
    assert s_factor(Partition(()), make_params(1)) == 1


def test_qq_term_lambda_empty_is_shifted_y():
    p = make_params(2)
    Lam = TupleOfPartitions([Partition((1,)), Partition(())])
    x = 1.7 - 0.3j
    eps = p.e1 + p.e2
    assert abs(qq_char_term(x, Partition(()), Lam, p) - y_fixed_point(x + eps, Lam, p)) < 1e-13


def test_non_generic_x_raises():
    cfg = make_cfg(1, 1)
    with pytest.raises(NonGenericX):
        observable_average("Y", cfg.params.a[0], cfg)


def test_pole_cancellation_n1_order1():
    cfg = make_cfg(1, 1)
    rep = check_pole_cancellation(cfg, order=1, radius=1e-2)
    assert rep["max_rel_residual"] < 1e-8


def test_pole_cancellation_negative_control():
    cfg = make_cfg(1, 1)
    rep = check_pole_cancellation(cfg, order=1, radius=1e-2, drop_lambdas=((1,),))
    assert rep["max_rel_residual"] > 1e-2


def test_pole_cancellation_5d_n1():
    cfg = make_cfg(1, 1, kernel=FIVE_D)
    rep = check_pole_cancellation(cfg, order=1, radius=1e-2)
    assert rep["max_rel_residual"] < 1e-8


def test_y_rational_structure_4d():
    # order-1 coefficient of <Y> times the predicted pole factors is a
    # polynomial of bounded degree: interpolate and verify at held-out x
    cfg = make_cfg(1, 1)
    p = cfg.params
    a0 = p.a[0]
    eps = p.e1 + p.e2
    loci = [a0 + p.e1, a0 + p.e2, a0, a0 + eps]
    rng = np.random.default_rng(2)
    xs = 3.0 + rng.random(30) * 2 + 1j * rng.random(30)
    vals = []
    for x in xs:
        c1 = observable_average("Y", x, cfg)[(1,)]
        vals.append(c1 * np.prod([x - L for L in loci]))
    deg = 5  # Y|_[] is degree 1 in x; cleared coefficient has degree <= 5
    fit = np.polyfit(xs, vals, deg)
    test_x = 4.321 + 0.77j
    c1 = observable_average("Y", test_x, cfg)[(1,)]
    predicted = np.polyval(fit, test_x)
    actual = c1 * np.prod([test_x - L for L in loci])
    assert abs(predicted - actual) < 1e-7 * max(abs(actual), 1.0)


def test_y_orbifold_empty():
    p = make_params(2)
    empty = TupleOfPartitions([Partition(()), Partition(())])
    x = 1.9 + 0.5j
    for om in range(2):
        a_om = p.a[(om - 1) % 2]
        assert abs(y_orbifold_fixed_point(om, x, empty, p) - (x - a_om)) < 1e-14


def test_y_orbifold_single_box_factors():
    # box (alpha=1,a=1,b=1): ratio factor 1 lands in Y_1, factor 2 in Y_2=Y_0
    p = make_params(2)
    Lam = TupleOfPartitions([Partition((1,)), Partition(())])
    x = 2.4 + 0.3j
    y1 = y_orbifold_fixed_point(1, x, Lam, p)
    expected1 = (x - p.a[0]) * (x - p.a[0] - p.e1) / (x - p.a[0])
    assert abs(y1 - expected1) < 1e-13
    y0 = y_orbifold_fixed_point(0, x, Lam, p)
    expected0 = (x - p.a[1]) * (x - p.a[0] - p.e2) / (x - p.a[0] - p.e1 - p.e2)
    assert abs(y0 - expected0) < 1e-12


@pytest.mark.parametrize("n", [2, 3])
def test_y_orbifold_product_relation(n):
    # prod_w Y_w(x + w e2) = Y(x) in the N e2 convention (decimated rows,
    # a_al -> a_al - (al mod N) e2)
    p = make_params(n)
    x = 3.1 + 0.83j
    for total in range(5 - n % 2):
        for Lam in enumerate_tuples(n, total):
            lhs = y_orbifold_product(x, Lam, p)
            rhs = y_unorbifolded_reference(x, Lam, p)
            assert abs(lhs - rhs) <= 1e-10 * max(abs(rhs), 1.0)
