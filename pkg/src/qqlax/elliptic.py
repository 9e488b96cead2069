"""Theta functions, their logarithmic derivative, and the plethystic kernel.

Conventions (multiplicative variable z, nome q with |q| < 1):

    theta_q(z) = sum_{n in Z} (-z)^n q^{n(n-1)/2}
               = prod_{n>=0} (1 - q^{n+1}) (1 - q^n z) (1 - q^{n+1}/z)

    E1(z) = z theta'(z) / theta(z),   E1(q z) = E1(z) - 1

The kernel vartheta(x) is x in equivariant cohomology ("4d"),
1 - e^{-beta x} in K-theory ("5d") and theta_{p6d}(e^{-beta x}) in
elliptic cohomology ("6d").
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field

from .errors import DomainError, PoleError

FOUR_D = "4d"
FIVE_D = "5d"
SIX_D = "6d"
KERNELS = (FOUR_D, FIVE_D, SIX_D)

DEFAULT_TERMS = 64
POLE_GUARD = 1e-12


def theta(z: complex, nome: complex, form: str = "series", terms: int = DEFAULT_TERMS) -> complex:
    """Truncated evaluation of theta_q(z).

    form="series" keeps |n| <= terms of the bilateral sum, form="product"
    keeps n < terms factors of the triple product.  The relative truncation
    error is O(|q|^terms) in both cases.
    """
    if abs(nome) >= 1:
        raise DomainError(f"|nome| = {abs(nome)} >= 1")
    if z == 0:
        raise DomainError("theta requires z != 0")
    if terms < 1:
        raise DomainError("terms must be >= 1")
    if form == "series":
        total = 0j
        for n in range(-terms, terms + 1):
            e = n * (n - 1) // 2
            if nome == 0 and e > 0:
                continue
            total += (-z) ** n * nome**e
        return total
    if form == "product":
        total = 1 + 0j
        for n in range(terms):
            total *= (1 - nome ** (n + 1)) * (1 - nome**n * z) * (1 - nome ** (n + 1) / z)
            if nome == 0 and n == 0:
                break
        return total
    raise DomainError(f"unknown form {form!r}")


def log_deriv_sum(z: complex, nome: complex, terms: int = DEFAULT_TERMS) -> complex:
    """z d/dz log theta(z) from the term-wise differentiated product."""
    total = 0j
    guard = 0.0
    for n in range(terms):
        a = 1 - nome**n * z
        b = 1 - nome ** (n + 1) / z
        guard = max(guard, abs(a), abs(b))
        if abs(a) < POLE_GUARD * max(guard, 1.0) or abs(b) < POLE_GUARD * max(guard, 1.0):
            raise PoleError(f"theta factor ~ 0 near z = {z}")
        total += -(nome**n) * z / a + nome ** (n + 1) / z / b
        if nome == 0:
            break
    return total


def e1(z: complex, nome: complex, terms: int = DEFAULT_TERMS) -> complex:
    """E1(z) = z theta'(z)/theta(z); raises PoleError on the zero lattice q^Z."""
    if abs(nome) >= 1:
        raise DomainError(f"|nome| = {abs(nome)} >= 1")
    return log_deriv_sum(z, nome, terms)


def theta_prime_at_one(nome: complex, terms: int = DEFAULT_TERMS) -> complex:
    """theta'(1) = -prod_{n>=1}(1-q^n)^3 (simple zero of the factor (1-z))."""
    return -euler_product(nome, terms) ** 3


def euler_product(nome: complex, terms: int = DEFAULT_TERMS) -> complex:
    """prod_{n=1..terms} (1 - q^n)."""
    total = 1 + 0j
    for n in range(1, terms + 1):
        total *= 1 - nome**n
    return total


@dataclass(frozen=True)
class EllipticParams:
    """Kernel selector plus the nomes and 5d circle size it needs."""

    kernel: str = FOUR_D
    nome: complex = 0j          # q of the z-elliptic curve (Lax spectral side)
    nome6d: complex = 0j        # p_6d of the 6d torus
    beta: complex = 1.0 + 0j
    terms: int = DEFAULT_TERMS

    def __post_init__(self):
        if self.kernel not in KERNELS:
            raise DomainError(f"unknown kernel {self.kernel!r}")
        if abs(self.nome) >= 1:
            raise DomainError("|nome| must be < 1")
        if self.kernel == SIX_D and abs(self.nome6d) >= 1:
            raise DomainError("|nome6d| must be < 1 for the 6d kernel")
        if self.kernel in (FIVE_D, SIX_D) and self.beta == 0:
            raise DomainError("beta must be nonzero for 5d/6d kernels")


def vartheta(x: complex, params: EllipticParams) -> complex:
    """The plethystic kernel: x (4d), 1-e^{-beta x} (5d), theta_{p6d}(e^{-beta x}) (6d)."""
    if params.kernel == FOUR_D:
        return x
    w = cmath.exp(-params.beta * x)
    if params.kernel == FIVE_D:
        return 1 - w
    return theta(w, params.nome6d, "product", params.terms)
