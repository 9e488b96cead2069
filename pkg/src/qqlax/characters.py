"""Exact virtual-character algebra on the integer weight lattice.

A Weight is an integer vector over the generators (x, a_1..a_N, eps_1,
eps_2, m); eps_3 = m and eps_4 = -eps_1 - eps_2 - m are substituted at
construction, so two formulas producing the same weight collide exactly.
Evaluation to complex numbers happens only inside pleth_exp.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .elliptic import EllipticParams, vartheta
from .errors import InvalidData, PoleAtWeight

POLE_EPS = 1e-12


@dataclass(frozen=True)
class Weight:
    """Integer lattice vector c_x*x + sum_a c_a[i]*a_i + c_1*e1 + c_2*e2 + c_m*m."""

    cx: int
    ca: tuple[int, ...]
    c1: int
    c2: int
    cm: int

    @staticmethod
    def zero(n: int) -> "Weight":
        return Weight(0, (0,) * n, 0, 0, 0)

    @staticmethod
    def x(n: int, k: int = 1) -> "Weight":
        return Weight(k, (0,) * n, 0, 0, 0)

    @staticmethod
    def a(n: int, alpha: int, k: int = 1) -> "Weight":
        """Weight k*a_alpha with alpha = 1..n."""
        ca = [0] * n
        ca[(alpha - 1) % n] = k
        return Weight(0, tuple(ca), 0, 0, 0)

    @staticmethod
    def e1(n: int, k: int = 1) -> "Weight":
        return Weight(0, (0,) * n, k, 0, 0)

    @staticmethod
    def e2(n: int, k: int = 1) -> "Weight":
        return Weight(0, (0,) * n, 0, k, 0)

    @staticmethod
    def m(n: int, k: int = 1) -> "Weight":
        return Weight(0, (0,) * n, 0, 0, k)

    @staticmethod
    def e3(n: int, k: int = 1) -> "Weight":
        return Weight.m(n, k)

    @staticmethod
    def e4(n: int, k: int = 1) -> "Weight":
        """k*eps_4 with eps_4 = -eps_1 - eps_2 - m eliminated structurally."""
        return Weight(0, (0,) * n, -k, -k, -k)

    def __add__(self, other: "Weight") -> "Weight":
        return Weight(
            self.cx + other.cx,
            tuple(p + q for p, q in zip(self.ca, other.ca)),
            self.c1 + other.c1,
            self.c2 + other.c2,
            self.cm + other.cm,
        )

    def __neg__(self) -> "Weight":
        return Weight(-self.cx, tuple(-p for p in self.ca), -self.c1, -self.c2, -self.cm)

    def __sub__(self, other: "Weight") -> "Weight":
        return self + (-other)

    def charge(self) -> int:
        """Z_N charge before reduction: q2 counts 1, u_alpha counts alpha."""
        return self.c2 + sum((i + 1) * c for i, c in enumerate(self.ca))


class VirtualCharacter:
    """Finite formal sum of exponentials with integer multiplicities."""

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: dict[Weight, int] | None = None):
        self.n = n
        self.terms = {w: c for w, c in (terms or {}).items() if c != 0}

    @staticmethod
    def zero(n: int) -> "VirtualCharacter":
        return VirtualCharacter(n)

    @staticmethod
    def one(n: int) -> "VirtualCharacter":
        return VirtualCharacter(n, {Weight.zero(n): 1})

    @staticmethod
    def monomial(w: Weight, c: int = 1) -> "VirtualCharacter":
        return VirtualCharacter(len(w.ca), {w: c})

    def __eq__(self, other):
        return isinstance(other, VirtualCharacter) and self.n == other.n and self.terms == other.terms

    def __repr__(self):
        return f"VirtualCharacter(n={self.n}, {len(self.terms)} terms)"

    def __add__(self, other: "VirtualCharacter") -> "VirtualCharacter":
        if self.n != other.n:
            raise InvalidData("mixing characters of different N")
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = out.get(w, 0) + c
        return VirtualCharacter(self.n, out)

    def __neg__(self) -> "VirtualCharacter":
        return VirtualCharacter(self.n, {w: -c for w, c in self.terms.items()})

    def __sub__(self, other: "VirtualCharacter") -> "VirtualCharacter":
        return self + (-other)

    def __mul__(self, other) -> "VirtualCharacter":
        if isinstance(other, int):
            return VirtualCharacter(self.n, {w: c * other for w, c in self.terms.items()})
        if self.n != other.n:
            raise InvalidData("mixing characters of different N")
        out: dict[Weight, int] = {}
        for w1, c1 in self.terms.items():
            for w2, c2 in other.terms.items():
                w = w1 + w2
                out[w] = out.get(w, 0) + c1 * c2
        return VirtualCharacter(self.n, out)

    __rmul__ = __mul__

    def dual(self) -> "VirtualCharacter":
        """Reverse all torus weights (the * operation)."""
        return VirtualCharacter(self.n, {-w: c for w, c in self.terms.items()})

    def scale(self, w: Weight) -> "VirtualCharacter":
        """Multiply by the monomial e^{beta w}."""
        return VirtualCharacter(self.n, {u + w: c for u, c in self.terms.items()})

    def zn_component(self, omega: int) -> "VirtualCharacter":
        return VirtualCharacter(
            self.n, {w: c for w, c in self.terms.items() if w.charge() % self.n == omega % self.n}
        )

    def rank(self) -> int:
        return sum(self.terms.values())

    def num_terms(self) -> int:
        return sum(abs(c) for c in self.terms.values())

    def substitute_e1_zero(self) -> "VirtualCharacter":
        """Exact substitution eps_1 = 0 (merge weights differing only in c1)."""
        out: dict[Weight, int] = {}
        for w, c in self.terms.items():
            w0 = Weight(w.cx, w.ca, 0, w.c2, w.cm)
            out[w0] = out.get(w0, 0) + c
        return VirtualCharacter(self.n, out)


def char_algebra(op: str, lhs: VirtualCharacter, rhs=None) -> VirtualCharacter:
    """Spec surface for the ring operations: Add/Multiply/Dual/ScaleByMonomial."""
    if op == "Add":
        return lhs + rhs
    if op == "Multiply":
        return lhs * rhs
    if op == "Dual":
        return lhs.dual()
    if op == "ScaleByMonomial":
        return lhs.scale(rhs)
    raise InvalidData(f"unknown char_algebra op {op!r}")


@dataclass(frozen=True)
class ParamAssignment:
    """Numeric values for the lattice generators plus the kernel parameters."""

    x: complex
    a: tuple[complex, ...]
    e1: complex
    e2: complex
    m: complex
    elliptic: EllipticParams

    @property
    def n(self) -> int:
        return len(self.a)

    def value(self, w: Weight) -> complex:
        return (
            w.cx * self.x
            + sum(c * av for c, av in zip(w.ca, self.a))
            + w.c1 * self.e1
            + w.c2 * self.e2
            + w.cm * self.m
        )


def pleth_exp(V: VirtualCharacter, params: ParamAssignment, pole_eps: float = POLE_EPS) -> complex:
    """Plethystic exponential: prod over negative weights of vartheta divided
    by the product over positive ones, with the kernel chosen by params."""
    out = 1 + 0j
    for w, c in V.terms.items():
        v = vartheta(params.value(w), params.elliptic)
        if abs(v) < pole_eps:
            raise PoleAtWeight(w, v)
        out *= v ** (-c)
    return out


# ---------------------------------------------------------------------------
# Fixed-point localization characters
# ---------------------------------------------------------------------------


def w12_character(n: int) -> VirtualCharacter:
    out = VirtualCharacter.zero(n)
    for alpha in range(1, n + 1):
        out += VirtualCharacter.monomial(Weight.a(n, alpha))
    return out


def v12_character(Lam, n: int) -> VirtualCharacter:
    """V|_Lambda = sum over boxes of u_alpha q1^{a-1} q2^{b-1}."""
    out = VirtualCharacter.zero(n)
    for alpha, a, b in Lam.boxes():
        w = Weight.a(n, alpha) + Weight.e1(n, a - 1) + Weight.e2(n, b - 1)
        out += VirtualCharacter.monomial(w)
    return out


def v12_omega_character(Lam, n: int, omega: int) -> VirtualCharacter:
    """Chainsaw V_omega: boxes with alpha + b - 1 = omega mod N."""
    out = VirtualCharacter.zero(n)
    for alpha, a, b in Lam.boxes():
        if (alpha + b - 1) % n == omega % n:
            w = Weight.a(n, alpha) + Weight.e1(n, a - 1) + Weight.e2(n, b - 1)
            out += VirtualCharacter.monomial(w)
    return out


def w12_omega_character(n: int, omega: int) -> VirtualCharacter:
    return VirtualCharacter.monomial(Weight.a(n, omega if omega != 0 else n))


def _p(n: int, gen_weight: Weight) -> VirtualCharacter:
    return VirtualCharacter.one(n) - VirtualCharacter.monomial(gen_weight)


def tangent_character(Lam, n: int) -> VirtualCharacter:
    """T*M restricted to a fixed point: W V* + q1 q2 V W* - P1 P2 V V*."""
    V = v12_character(Lam, n)
    W = w12_character(n)
    q1q2 = VirtualCharacter.monomial(Weight.e1(n) + Weight.e2(n))
    P1 = _p(n, Weight.e1(n))
    P2 = _p(n, Weight.e2(n))
    return W * V.dual() + q1q2 * V * W.dual() - P1 * P2 * V * V.dual()


def orbifold_tangent_character(Lam, n: int) -> VirtualCharacter:
    """Chainsaw tangent: sum over omega of
    W_w V*_w + q1 q2 V_{w-1} W*_w - (1-q1) V_w V*_w + q2 (1-q1) V_{w-1} V*_w."""
    q1q2 = VirtualCharacter.monomial(Weight.e1(n) + Weight.e2(n))
    q2 = VirtualCharacter.monomial(Weight.e2(n))
    P1 = _p(n, Weight.e1(n))
    out = VirtualCharacter.zero(n)
    for omega in range(n):
        Vw = v12_omega_character(Lam, n, omega)
        Vwm1 = v12_omega_character(Lam, n, omega - 1)
        Ww = w12_omega_character(n, omega)
        out += Ww * Vw.dual()
        out += q1q2 * Vwm1 * Ww.dual()
        out -= P1 * Vw * Vw.dual()
        out += q2 * P1 * Vwm1 * Vw.dual()
    return out


def s12_character(Lam, n: int) -> VirtualCharacter:
    """S12 = e^{-beta x} (W - P1 P2 V)."""
    V = v12_character(Lam, n)
    W = w12_character(n)
    P1 = _p(n, Weight.e1(n))
    P2 = _p(n, Weight.e2(n))
    return (W - P1 * P2 * V).scale(Weight.x(n, -1))


def n24_character(n: int) -> VirtualCharacter:
    return VirtualCharacter.one(n)


def k24_character(mu, n: int) -> VirtualCharacter:
    """K24|_mu = sum_{(i,j) in mu} q2^{i-1} q4^{j-1}."""
    out = VirtualCharacter.zero(n)
    for i, j in mu.boxes():
        out += VirtualCharacter.monomial(Weight.e2(n, i - 1) + Weight.e4(n, j - 1))
    return out


def s24_character(mu, n: int) -> VirtualCharacter:
    """S24 = N24 - P2 P4 K24."""
    P2 = _p(n, Weight.e2(n))
    P4 = _p(n, Weight.e4(n))
    return n24_character(n) - P2 * P4 * k24_character(mu, n)


def s24_boundary_character(mu, n: int, omega: int | None = None) -> VirtualCharacter:
    """Boundary-box form: sum over addable (i,j) of q2^{i-1} q4^{j-1} minus
    removable (i,j) of q2^i q4^j, optionally restricted to i - j = omega mod N."""
    out = VirtualCharacter.zero(n)
    for i, j in mu.addable():
        if omega is None or (i - j) % n == omega % n:
            out += VirtualCharacter.monomial(Weight.e2(n, i - 1) + Weight.e4(n, j - 1))
    for i, j in mu.removable():
        if omega is None or (i - j) % n == omega % n:
            out -= VirtualCharacter.monomial(Weight.e2(n, i) + Weight.e4(n, j))
    return out


def localization_characters(kind: str, data=None, n: int | None = None, omega: int = 0) -> VirtualCharacter:
    """Dispatcher over the fixed-point characters used throughout."""
    table = {
        "V12": lambda: v12_character(data, n),
        "W12": lambda: w12_character(n),
        "TangentPlain": lambda: tangent_character(data, n),
        "TangentOrbifold": lambda: orbifold_tangent_character(data, n),
        "S12": lambda: s12_character(data, n),
        "S24": lambda: s24_character(data, n),
        "S24Boundary": lambda: s24_boundary_character(data, n, omega),
        "N24": lambda: n24_character(n),
        "K24": lambda: k24_character(data, n),
    }
    if kind not in table:
        raise InvalidData(f"unknown localization character {kind!r}")
    return table[kind]()


def divide_one_minus(V: VirtualCharacter, w: Weight, max_steps: int = 100000) -> VirtualCharacter:
    """Exact division V / (1 - e^w); raises InvalidData if not divisible.

    Terms are peeled in increasing order along the w direction, so the
    remainder either cancels within the finite support or the division fails.
    """

    def key(u: Weight):
        return (u.c2 * w.c2 + u.c1 * w.c1 + u.cm * w.cm + u.cx * w.cx
                + sum(p * q for p, q in zip(u.ca, w.ca)))

    rem = dict(V.terms)
    out: dict[Weight, int] = {}
    steps = 0
    while rem:
        steps += 1
        if steps > max_steps:
            raise InvalidData("division by (1 - e^w) did not terminate")
        u = min(rem, key=key)
        c = rem.pop(u)
        out[u] = out.get(u, 0) + c
        shifted = u + w
        nc = rem.get(shifted, 0) + c
        if nc == 0:
            rem.pop(shifted, None)
        else:
            rem[shifted] = nc
    return VirtualCharacter(V.n, out)
