"""Truncated fugacity series, the shift-operator matrix algebra, and the
structural matrices X, P, Q-hat, C, C_z, S_z.

Shift convention, fixed once: e^{eps d/dx} f(x) = f(x + eps).  Operator
terms compose as (A, s) o (B, t) = (x -> A(x) B(x + s eps), s + t).
Matrix coefficients are represented by callables of the integer offset
dk (argument x + dk*eps), memoized per term.
"""

from __future__ import annotations

import itertools
from typing import Callable

import numpy as np

from .errors import ChamberError, DegeneratePoint, InvalidData, WindowOverflow

Mdeg = tuple


def mdeg_zero(n_vars: int) -> Mdeg:
    return (0,) * n_vars


def mdeg_unit(n_vars: int, i: int, k: int = 1) -> Mdeg:
    out = [0] * n_vars
    out[i % n_vars] += k
    return tuple(out)


def mdeg_add(a: Mdeg, b: Mdeg) -> Mdeg:
    return tuple(p + q for p, q in zip(a, b))


class FugacitySeries:
    """Multivariate power series in the fugacities, truncated by total degree."""

    __slots__ = ("n_vars", "max_deg", "coeffs")

    def __init__(self, n_vars: int, max_deg: int, coeffs=None):
        self.n_vars = n_vars
        self.max_deg = max_deg
        self.coeffs = {}
        for k, v in (coeffs or {}).items():
            if sum(k) <= max_deg and v != 0:
                self.coeffs[tuple(k)] = v

    @staticmethod
    def constant(value, n_vars: int, max_deg: int) -> "FugacitySeries":
        return FugacitySeries(n_vars, max_deg, {mdeg_zero(n_vars): value})

    @staticmethod
    def monomial(mdeg: Mdeg, value, max_deg: int) -> "FugacitySeries":
        return FugacitySeries(len(mdeg), max_deg, {tuple(mdeg): value})

    def __getitem__(self, mdeg) -> complex:
        return self.coeffs.get(tuple(mdeg), 0j)

    def __add__(self, other: "FugacitySeries") -> "FugacitySeries":
        self._check(other)
        deg = min(self.max_deg, other.max_deg)
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0) + v
        return FugacitySeries(self.n_vars, deg, out)

    def __neg__(self) -> "FugacitySeries":
        return FugacitySeries(self.n_vars, self.max_deg, {k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other) -> "FugacitySeries":
        if not isinstance(other, FugacitySeries):
            return FugacitySeries(
                self.n_vars, self.max_deg, {k: v * other for k, v in self.coeffs.items()}
            )
        self._check(other)
        deg = min(self.max_deg, other.max_deg)
        out: dict = {}
        for k1, v1 in self.coeffs.items():
            d1 = sum(k1)
            for k2, v2 in other.coeffs.items():
                if d1 + sum(k2) > deg:
                    continue
                k = mdeg_add(k1, k2)
                out[k] = out.get(k, 0) + v1 * v2
        return FugacitySeries(self.n_vars, deg, out)

    __rmul__ = __mul__

    def divide(self, other: "FugacitySeries") -> "FugacitySeries":
        """Graded division; requires an invertible constant term in `other`."""
        self._check(other)
        deg = min(self.max_deg, other.max_deg)
        b0 = other[mdeg_zero(self.n_vars)]
        if b0 == 0:
            raise InvalidData("series division needs a unit constant term")
        out: dict = {}
        for total in range(deg + 1):
            for k in _mdegs_of_total(self.n_vars, total):
                acc = self[k]
                for kb, vb in other.coeffs.items():
                    if kb == mdeg_zero(self.n_vars):
                        continue
                    if all(kb[i] <= k[i] for i in range(self.n_vars)):
                        kc = tuple(k[i] - kb[i] for i in range(self.n_vars))
                        acc -= vb * out.get(kc, 0)
                if acc != 0:
                    out[k] = acc / b0
        return FugacitySeries(self.n_vars, deg, out)

    def norm(self) -> float:
        return max((abs(v) for v in self.coeffs.values()), default=0.0)

    def _check(self, other):
        if self.n_vars != other.n_vars:
            raise InvalidData("series over different fugacity sets")


def _mdegs_of_total(n_vars: int, total: int):
    if n_vars == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _mdegs_of_total(n_vars - 1, total - head):
            yield (head,) + rest


def series_mul(a: FugacitySeries, b: FugacitySeries) -> FugacitySeries:
    return a * b


# ---------------------------------------------------------------------------
# Shift-operator algebra with fugacity grading
# ---------------------------------------------------------------------------


class MatFn:
    """Memoized matrix-valued function of the integer eps-offset dk."""

    __slots__ = ("fn", "cache")

    def __init__(self, fn: Callable[[int], np.ndarray]):
        self.fn = fn
        self.cache: dict[int, np.ndarray] = {}

    def __call__(self, dk: int) -> np.ndarray:
        if dk not in self.cache:
            self.cache[dk] = np.asarray(self.fn(dk), dtype=complex)
        return self.cache[dk]

    @staticmethod
    def const(mat: np.ndarray) -> "MatFn":
        mat = np.asarray(mat, dtype=complex)
        return MatFn(lambda dk: mat)


class GradedOp:
    """Fugacity series whose coefficients are shift-operator matrix terms.

    terms maps (multidegree, shift) to a list of MatFn pieces, summed
    iteratively on evaluation (keeps closure depth bounded by the number of
    compose levels).  Products truncate the fugacity grading at max_deg and
    clip shifts to |s| <= max_shift, recording how many terms were clipped.
    """

    __slots__ = ("size", "n_vars", "max_deg", "max_shift", "terms", "clipped", "_flat")

    def __init__(self, size: int, n_vars: int, max_deg: int, max_shift: int = 64):
        self.size = size
        self.n_vars = n_vars
        self.max_deg = max_deg
        self.max_shift = max_shift
        self.terms: dict[tuple[Mdeg, int], list[MatFn]] = {}
        self.clipped = 0
        self._flat: dict[tuple[Mdeg, int], MatFn] = {}

    @staticmethod
    def identity(size: int, n_vars: int, max_deg: int, max_shift: int = 64) -> "GradedOp":
        op = GradedOp(size, n_vars, max_deg, max_shift)
        op.add_term(mdeg_zero(n_vars), 0, MatFn.const(np.eye(size)))
        return op

    def add_term(self, mdeg: Mdeg, shift: int, matfn: MatFn):
        if sum(mdeg) > self.max_deg:
            return
        if abs(shift) > self.max_shift:
            self.clipped += 1
            return
        self.terms.setdefault((tuple(mdeg), shift), []).append(matfn)
        self._flat.pop((tuple(mdeg), shift), None)

    def piece(self, key) -> MatFn:
        """The bucket collapsed into one lazily summed MatFn."""
        if key not in self._flat:
            fns = self.terms[key]
            if len(fns) == 1:
                self._flat[key] = fns[0]
            else:
                def fn(dk, fs=tuple(fns), sz=self.size):
                    out = np.zeros((sz, sz), dtype=complex)
                    for f in fs:
                        out = out + f(dk)
                    return out

                self._flat[key] = MatFn(fn)
        return self._flat[key]

    def __add__(self, other: "GradedOp") -> "GradedOp":
        out = GradedOp(self.size, self.n_vars, min(self.max_deg, other.max_deg), self.max_shift)
        for op in (self, other):
            for (mdeg, s), fns in op.terms.items():
                for fn in fns:
                    out.add_term(mdeg, s, fn)
        out.clipped = self.clipped + other.clipped
        return out

    def __neg__(self) -> "GradedOp":
        out = GradedOp(self.size, self.n_vars, self.max_deg, self.max_shift)
        for (mdeg, s) in self.terms:
            fn = self.piece((mdeg, s))
            out.add_term(mdeg, s, MatFn(lambda dk, f=fn: -f(dk)))
        return out

    def __sub__(self, other):
        return self + (-other)

    def compose(self, other: "GradedOp") -> "GradedOp":
        """Operator product: (A, s)(B, t) = (x -> A(x) B(x + s), s + t)."""
        out = GradedOp(self.size, self.n_vars, min(self.max_deg, other.max_deg), self.max_shift)
        for (m1, s1) in self.terms:
            f1 = self.piece((m1, s1))
            d1 = sum(m1)
            for (m2, s2) in other.terms:
                if d1 + sum(m2) > out.max_deg:
                    continue
                f2 = other.piece((m2, s2))
                fn = MatFn(lambda dk, a=f1, b=f2, s=s1: a(dk) @ b(dk + s))
                out.add_term(mdeg_add(m1, m2), s1 + s2, fn)
        return out

    def cell(self, mdeg: Mdeg, shift: int, dk: int = 0) -> np.ndarray:
        key = (tuple(mdeg), shift)
        if key in self.terms:
            return self.piece(key)(dk)
        return np.zeros((self.size, self.size), dtype=complex)

    def keys(self):
        return set(self.terms.keys())

    def check_clip(self, tol: float = 0.0):
        if self.clipped > tol:
            raise WindowOverflow(f"{self.clipped} operator terms clipped")


def shiftop_compose(a: GradedOp, b: GradedOp) -> GradedOp:
    return a.compose(b)


def compare_graded(a: GradedOp, b: GradedOp, dk: int = 0) -> dict:
    """Entrywise comparison per (multidegree, shift); returns max relative
    error, the offending cell, and per-cell records."""
    scale = 0.0
    for op in (a, b):
        for key in op.terms:
            scale = max(scale, float(np.max(np.abs(op.cell(*key, dk)))))
    scale = scale or 1.0
    worst = 0.0
    worst_key = None
    cells = []
    for key in sorted(a.keys() | b.keys()):
        diff = float(np.max(np.abs(a.cell(*key, dk) - b.cell(*key, dk))))
        rel = diff / scale
        cells.append({"mdeg": key[0], "shift": key[1], "rel_error": rel})
        if rel > worst:
            worst, worst_key = rel, key
    return {"max_rel_error": worst, "worst_cell": worst_key, "cells": cells, "scale": scale}


# ---------------------------------------------------------------------------
# Structural matrices
# ---------------------------------------------------------------------------


def cyclic_matrix(n: int) -> np.ndarray:
    """C = sum_w e_w (x) e_{w+1}^t (superdiagonal ones, corner one)."""
    C = np.zeros((n, n), dtype=complex)
    for w in range(n):
        C[w, (w + 1) % n] = 1
    return C


def cyclic_z_matrix(n: int, z: complex) -> np.ndarray:
    """C_z: like C but the wrap-around entry carries z^{-1}."""
    C = cyclic_matrix(n)
    C[n - 1, 0] = 1 / z if n > 1 else 1 / z
    if n == 1:
        C[0, 0] = 1 / z
    return C


def sz_matrix(n: int, z: complex) -> np.ndarray:
    """S_z = diag(z^{w/N}) on the principal branch."""
    return np.diag([z ** (w / n) for w in range(n)]).astype(complex)


def fugacity_ratios(x: np.ndarray, nome: complex) -> np.ndarray:
    """q_w = x_w / x_{w-1} for w >= 1 and q_0 = q x_0 / x_{N-1}."""
    x = np.asarray(x, dtype=complex)
    n = len(x)
    if np.any(x == 0):
        raise DegeneratePoint("x_w = 0")
    q = np.empty(n, dtype=complex)
    q[0] = nome * x[0] / x[n - 1]
    for w in range(1, n):
        q[w] = x[w] / x[w - 1]
    return q


def require_chamber(x: np.ndarray, nome: complex):
    """Stability chamber |x_0| > |x_1| > ... > |x_{N-1}| > |q x_0|."""
    q = fugacity_ratios(x, nome)
    if np.any(np.abs(q) >= 1):
        raise ChamberError(f"|q_w| = {np.abs(q)} not all < 1")
    return q


def structural(build: str, x=None, p=None, nome: complex = 0j, z: complex = 1.0):
    """Build one of the structural matrices; CzHat is returned as the pair
    (C_z matrix, +1) since it is the shift operator C_z e^{eps d/dx}."""
    if build == "C":
        return cyclic_matrix(len(x))
    if build == "Cz":
        return cyclic_z_matrix(len(x), z)
    if build == "Sz":
        return sz_matrix(len(x), z)
    if build == "X":
        xx = np.asarray(x, dtype=complex)
        if np.any(xx == 0) or len(set(np.round(np.log(np.abs(xx)), 12))) < len(xx):
            raise DegeneratePoint("x_w must be nonzero with distinct moduli")
        return np.diag(xx)
    if build == "P":
        return np.diag(np.asarray(p, dtype=complex))
    if build == "Qhat":
        return np.diag(fugacity_ratios(np.asarray(x, dtype=complex), nome))
    if build == "CzHat":
        return (cyclic_z_matrix(len(x), z), +1)
    raise InvalidData(f"unknown structural matrix {build!r}")
