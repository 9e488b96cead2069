import cmath

import numpy as np
import pytest

from qqlax.elliptic import (
    FIVE_D,
    FOUR_D,
    SIX_D,
    EllipticParams,
    e1,
    euler_product,
    theta,
    theta_prime_at_one,
    vartheta,
)
from qqlax.errors import DomainError, PoleError


def test_theta_at_zero_nome_is_one_minus_z():
    for z in (0.3 + 0.1j, -1.2, 2.0 + 0j):
        assert abs(theta(z, 0, "series", 8) - (1 - z)) < 1e-15


def test_theta_product_vanishes_at_z_one():
    assert abs(theta(1.0, 0.1, "product", 64)) < 1e-14


def test_series_equals_product():
    zs = [0.3 + 0.1j, 1.7 - 0.4j, -0.8 + 0.2j, 0.05 - 1.1j]
    for q in (0.2, 0.3j, -0.25 + 0.1j):
        for z in zs:
            s = theta(z, q, "series", 64)
            p = theta(z, q, "product", 64)
            assert abs(s - p) <= 1e-12 * max(abs(s), 1.0)


def test_series_product_agree_on_grid():
    # 20-point grid, |q| <= 0.3 (acceptance criterion 1 granularity)
    rng = np.random.default_rng(11)
    for _ in range(20):
        q = 0.3 * rng.random() * cmath.exp(2j * cmath.pi * rng.random())
        z = (0.5 + rng.random()) * cmath.exp(2j * cmath.pi * rng.random())
        s = theta(z, q, "series")
        p = theta(z, q, "product")
        assert abs(s - p) <= 1e-12 * max(abs(s), 1.0)


def test_quasi_periodicity():
    rng = np.random.default_rng(3)
    for _ in range(10):
        q = 0.25 * cmath.exp(2j * cmath.pi * rng.random())
        z = (abs(q) + (1 - abs(q)) * rng.random()) * cmath.exp(2j * cmath.pi * rng.random())
        lhs = theta(q * z, q, "product")
        rhs = -theta(z, q, "product") / z
        assert abs(lhs - rhs) <= 1e-10 * max(abs(rhs), 1.0)


def test_theta_domain_errors():
    with pytest.raises(DomainError):
        theta(0.5, 1.2)
    with pytest.raises(DomainError):
        theta(0, 0.1)


def test_e1_at_zero_nome():
    # theta = 1 - z at q = 0, so E1 = -z/(1-z); E1(0.5) = -1
    assert abs(e1(0.5, 0) - (-1.0)) < 1e-14


def test_e1_quasi_periodicity():
    q, z = 0.15, 0.4
    assert abs(e1(q * z, q) - e1(z, q) + 1) < 1e-10


def test_e1_matches_log_derivative_finite_difference():
    q, z, h = 0.1, 0.7, 1e-6
    fd = z * (cmath.log(theta(z + h, q, "product")) - cmath.log(theta(z - h, q, "product"))) / (2 * h)
    assert abs(e1(z, q) - fd) < 1e-6


def test_e1_pole_guard():
    with pytest.raises(PoleError):
        e1(1.0 + 1e-15, 0.1)


def test_theta_prime_at_one():
    q = 0.13
    h = 1e-6
    fd = (theta(1 + h, q, "product") - theta(1 - h, q, "product")) / (2 * h)
    assert abs(theta_prime_at_one(q) - fd) < 1e-7
    assert abs(theta_prime_at_one(q) + euler_product(q) ** 3) == 0.0


def test_vartheta_kernels():
    p4 = EllipticParams(kernel=FOUR_D)
    p5 = EllipticParams(kernel=FIVE_D, beta=0.7)
    p6_zero = EllipticParams(kernel=SIX_D, beta=0.7, nome6d=0)
    x = 0.3 + 0.2j
    assert vartheta(x, p4) == x
    assert abs(vartheta(x, p6_zero) - vartheta(x, p5)) == 0.0
    # small-beta limit: (1 - e^{-beta x})/beta -> x
    p5s = EllipticParams(kernel=FIVE_D, beta=1e-4)
    assert abs(vartheta(0.3, p5s) / 1e-4 - 0.3) < 1e-4


def test_elliptic_params_validation():
    with pytest.raises(DomainError):
        EllipticParams(kernel=SIX_D, nome6d=1.5, beta=1.0)
    with pytest.raises(DomainError):
        EllipticParams(kernel=FIVE_D, beta=0)
    with pytest.raises(DomainError):
        EllipticParams(kernel="7d")
