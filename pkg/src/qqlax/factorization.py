"""The factorization identity for theta-transformed fractional qq-characters,
its scalar and classical variants, the x-shift transformation property, the
induction lemmas behind the proof, and the matrix Jacobi identity.

Everything here runs in the free-function model: the Y_w values are generic
deterministic numbers drawn per lattice key (w mod N, j, k), standing for
Y_w(x + j m + k eps).  The identity is combinatorial in those values, so
per-(multidegree, shift, entry) agreement of the two sides is the faithful
check.
"""

from __future__ import annotations

import numpy as np

from .elliptic import euler_product, theta
from .errors import ChamberError, DegeneratePoint, InvalidData
from .opalgebra import (
    FugacitySeries,
    GradedOp,
    MatFn,
    compare_graded,
    cyclic_z_matrix,
    fugacity_ratios,
    mdeg_unit,
    mdeg_zero,
)
from .partitions import Partition, enumerate_partitions


class YOracle:
    """Deterministic free Y-data: same (omega, j, k) key, same value.

    Values live in the annulus 0.5 <= |Y| <= 2 so that products and ratios
    of a few of them stay well away from overflow and underflow.
    """

    def __init__(self, n: int, seed: int = 0):
        self.n = n
        self.seed = seed
        self.table: dict[tuple[int, int, int], complex] = {}

    def value(self, omega: int, j: int, k: int = 0) -> complex:
        key = (omega % self.n, j, k)
        if key not in self.table:
            rng = np.random.default_rng(
                (self.seed, key[0], key[1] + 4096, key[2] + 4096)
            )
            r = 0.5 * 4.0 ** rng.random()
            phi = 2 * np.pi * rng.random()
            self.table[key] = r * np.exp(1j * phi)
        return self.table[key]

    def perturbed(self, omega: int, j: int, k: int, factor: complex) -> "YOracle":
        """Copy with one table entry multiplied by `factor` (mutation tests)."""
        clone = YOracle(self.n, self.seed)
        clone.table = dict(self.table)
        clone.table[(omega % self.n, j, k)] = self.value(omega, j, k) * factor
        return clone


class FormalFug:
    """Fugacities as formal variables: multidegrees carry all q-content."""

    def __init__(self, n: int):
        self.n = n
        self.n_vars = n

    def unit(self, omega: int, power: int):
        return mdeg_unit(self.n, omega % self.n, power), 1.0 + 0j

    def qlam(self, omega: int, lam: Partition):
        """Q^lam_w = prod_j q_{w+1-j}^{lam^t_j}."""
        mdeg = [0] * self.n
        for j in range(1, lam.row(1) + 1):
            mdeg[(omega + 1 - j) % self.n] += lam.col(j)
        return tuple(mdeg), 1.0 + 0j


class NumericFug:
    """Fugacities as numbers (x-ratio values); multidegrees are trivial."""

    def __init__(self, qs):
        self.qs = np.asarray(qs, dtype=complex)
        self.n = len(self.qs)
        self.n_vars = 0

    def unit(self, omega: int, power: int):
        return (), self.qs[omega % self.n] ** power

    def qlam(self, omega: int, lam: Partition):
        val = 1.0 + 0j
        for j in range(1, lam.row(1) + 1):
            val *= self.qs[(omega + 1 - j) % self.n] ** lam.col(j)
        return (), val


def chi_value(omega: int, lam: Partition, oracle: YOracle, dj: int, dk: int,
              quantum: bool = True) -> complex:
    """One lambda-summand of chi_w(x + dj*m + dk*eps), in the column-product
    form obtained by cancelling factors in the box-product formula."""
    ke = 1 if quantum else 0
    lam1 = lam.row(1)
    val = 1.0 + 0j
    for j in range(1, lam1 + 1):
        tj = lam.col(j)
        val *= oracle.value(omega + 2 - j, dj + tj - j + 1, dk + ke * (2 - j))
        val /= oracle.value(omega + 1 - j, dj + tj - j, dk + ke * (1 - j))
    val *= oracle.value(omega + 1 - lam1, dj - lam1, dk + ke * (1 - lam1))
    return val


def chi_box_value(omega: int, lam: Partition, oracle: YOracle, dj: int, dk: int,
                  quantum: bool = True) -> complex:
    """Same summand from the box-product form Y(x+eps) prod_boxes (...);
    the independent cross-check of chi_value."""
    ke = 1 if quantum else 0
    val = oracle.value(omega + 1, dj, dk + ke)
    for i, j in lam.boxes():
        sj, sk = (i - j), ke * (1 - j)  # sigma_(ij) = m(i-j) + eps(1-j)
        val *= oracle.value(omega + 2 - j, dj + sj + 1, dk + sk + ke)
        val *= oracle.value(omega + 1 - j, dj + sj - 1, dk + sk)
        val /= oracle.value(omega + 2 - j, dj + sj, dk + sk + ke)
        val /= oracle.value(omega + 1 - j, dj + sj, dk + sk)
    return val


def chi_from_y(omega: int, degree: int, oracle: YOracle, dj: int = 0,
               scalar: bool = False, quantum: bool = True) -> FugacitySeries:
    """chi_w(x + dj*m) as a fugacity series of free-Y values.

    scalar=True grades by total box count only (the non-orbifolded series).
    """
    fug = FormalFug(oracle.n)
    n_vars = 1 if scalar else oracle.n
    out = FugacitySeries(n_vars, degree)
    for k in range(degree + 1):
        for lam in enumerate_partitions(k):
            val = chi_value(omega, lam, oracle, dj, 0, quantum)
            if scalar:
                key = (k,)
            else:
                key, cf = fug.qlam(omega, lam)
                val *= cf
            out.coeffs[key] = out.coeffs.get(key, 0) + val
    return out


# ---------------------------------------------------------------------------
# Graded-operator builders for the two sides of the identity
# ---------------------------------------------------------------------------


def _diag_fn(n, entry_fn):
    return MatFn(lambda dk: np.diag([entry_fn(om, dk) for om in range(n)]))


def _row_split(op: GradedOp, matfn: MatFn, fug, power: int, shift: int, sign: complex):
    """Add sign * Qhat^power * matfn to op, splitting rows so each carries its
    own fugacity multidegree q_w^power."""
    n = op.size
    for omega in range(n):
        mdeg, coef = fug.unit(omega, power)

        def fn(dk, om=omega, c=sign * coef, base=matfn):
            out = np.zeros((n, n), dtype=complex)
            out[om, :] = c * base(dk)[om, :]
            return out

        op.add_term(mdeg, shift, MatFn(fn))


def _left_factor(nn: int, n: int, oracle: YOracle, fug, z: complex, degree: int,
                 dj: int, quantum: bool, max_shift: int) -> GradedOp:
    """1 - Qhat^n Yhat(x+nm+eps) Chat_z^{-1} Yhat(x+(n-1)m+eps)^{-1}."""
    ke = 1 if quantum else 0
    step = -1 if quantum else 0
    czi = np.linalg.inv(cyclic_z_matrix(n, z))
    op = GradedOp.identity(n, fug.n_vars, degree, max_shift)

    def mat(dk):
        d1 = np.diag([oracle.value(om + 1, dj + nn, dk + ke) for om in range(n)])
        d2 = np.diag([1 / oracle.value(om + 1, dj + nn - 1, dk + step + ke) for om in range(n)])
        return d1 @ czi @ d2

    _row_split(op, MatFn(mat), fug, nn, step, -1.0)
    return op


def _q_czi_op(n, fug, z, degree, max_shift, quantum) -> GradedOp:
    """Qhat Chat_z^{-1} as a graded operator."""
    czi = np.linalg.inv(cyclic_z_matrix(n, z))
    op = GradedOp(n, fug.n_vars, degree, max_shift)
    _row_split(op, MatFn.const(czi), fug, 1, -1 if quantum else 0, +1.0)
    return op


def _right_factor(nn: int, n: int, oracle: YOracle, fug, z: complex, degree: int,
                  dj: int, quantum: bool, max_shift: int) -> GradedOp:
    """1 - (Qhat Chat_z^{-1})^n [Yhat(x-(n+1)m+eps)/Yhat(x-nm+eps)] Chat_z^{n+1}."""
    ke = 1 if quantum else 0
    op = GradedOp.identity(n, fug.n_vars, degree, max_shift)
    g = _q_czi_op(n, fug, z, degree, max_shift, quantum)
    acc = GradedOp.identity(n, fug.n_vars, degree, max_shift)
    for _ in range(nn):
        acc = acc.compose(g)
    # the ratio diagonal, evaluated at the running offset
    ratio = GradedOp(n, fug.n_vars, degree, max_shift)
    ratio.add_term(
        mdeg_zero(fug.n_vars), 0,
        _diag_fn(n, lambda om, dk: oracle.value(om + 1, dj - nn - 1, dk + ke)
                 / oracle.value(om + 1, dj - nn, dk + ke)),
    )
    cz_pow = GradedOp(n, fug.n_vars, degree, max_shift)
    cz_pow.add_term(
        mdeg_zero(fug.n_vars), (nn + 1) if quantum else 0,
        MatFn.const(np.linalg.matrix_power(cyclic_z_matrix(n, z), nn + 1)),
    )
    tail = acc.compose(ratio).compose(cz_pow)
    return op - tail


def build_lhs(n: int, degree: int, oracle: YOracle, z: complex, fug=None,
              dj: int = 0, quantum: bool = True, n_factors: int | None = None) -> GradedOp:
    """Left-hand side of the factorization identity, truncated at `degree`.

    n_factors overrides how many left/right factors are kept (needed in the
    numeric-fugacity mode where factor n is not graded away automatically).
    """
    fug = fug or FormalFug(n)
    max_shift = degree + 2 if n_factors is None else n_factors + 2
    kept = n_factors if n_factors is not None else degree
    lhs = GradedOp.identity(n, fug.n_vars, degree, max_shift)
    for nn in range(1, kept + 1):
        lhs = _left_factor(nn, n, oracle, fug, z, degree, dj, quantum, max_shift).compose(lhs)
    mid = GradedOp(n, fug.n_vars, degree, max_shift)
    ke = 1 if quantum else 0
    mid.add_term(mdeg_zero(fug.n_vars), 0,
                 _diag_fn(n, lambda om, dk: oracle.value(om + 1, dj, dk + ke)))
    lhs = lhs.compose(mid)
    for nn in range(0, kept + 1):
        lhs = lhs.compose(_right_factor(nn, n, oracle, fug, z, degree, dj, quantum, max_shift))
    return lhs


def chi_hat_op(n: int, degree: int, oracle: YOracle, fug, dj: int,
               quantum: bool, max_shift: int, lam_cap: int | None = None) -> GradedOp:
    """diag(chi_w(x + dj*m)) as a graded operator."""
    op = GradedOp(n, fug.n_vars, degree, max_shift)
    for k in range((degree if lam_cap is None else lam_cap) + 1):
        for lam in enumerate_partitions(k):
            for omega in range(n):
                mdeg, coef = fug.qlam(omega, lam)
                if sum(mdeg) > degree:
                    continue

                def fn(dk, om=omega, lm=lam, c=coef):
                    out = np.zeros((n, n), dtype=complex)
                    out[om, om] = c * chi_value(om, lm, oracle, dj, dk, quantum)
                    return out

                op.add_term(mdeg, 0, MatFn(fn))
    return op


def build_rhs(n: int, degree: int, oracle: YOracle, z: complex, fug=None,
              dj: int = 0, quantum: bool = True, n_terms: int | None = None) -> GradedOp:
    """Right-hand side: sum over n of (-1)^n chi-hat(x+nm) times the downward
    or upward monomial operator products."""
    fug = fug or FormalFug(n)
    max_shift = degree + 2 if n_terms is None else n_terms + 2
    lam_cap = degree if n_terms is None else n_terms
    out = GradedOp(n, fug.n_vars, degree, max_shift)
    czi_op = _q_czi_op(n, fug, z, degree, max_shift, quantum)
    czmat = cyclic_z_matrix(n, z)

    def keep(n_used, min_deg):
        if n_terms is not None:
            return n_used <= n_terms
        return min_deg <= degree

    # n >= 0: chi(x + nm) prod_{k=0}^{n-1} (Qhat^{n-k} Chat_z^{-1})
    nn = 0
    while keep(nn, nn * (nn + 1) // 2):
        chi = chi_hat_op(n, degree, oracle, fug, dj + nn, quantum, max_shift, lam_cap)
        tail = GradedOp.identity(n, fug.n_vars, degree, max_shift)
        for k in range(nn):
            fac = GradedOp(n, fug.n_vars, degree, max_shift)
            _row_split(fac, MatFn.const(np.linalg.inv(czmat)), fug, nn - k,
                       -1 if quantum else 0, +1.0)
            tail = tail.compose(fac)
        term = chi.compose(tail)
        out = out + (term if nn % 2 == 0 else -term)
        nn += 1

    # n >= 1: chi(x - nm) prod_{k=1}^{n-1} Chat_z^k (Qhat Chat_z^{-1})^k, then Chat_z^n
    nn = 1
    while keep(nn, nn * (nn - 1) // 2):
        chi = chi_hat_op(n, degree, oracle, fug, dj - nn, quantum, max_shift, lam_cap)
        tail = GradedOp.identity(n, fug.n_vars, degree, max_shift)
        for k in range(1, nn):
            czk = GradedOp(n, fug.n_vars, degree, max_shift)
            czk.add_term(mdeg_zero(fug.n_vars), k if quantum else 0,
                         MatFn.const(np.linalg.matrix_power(czmat, k)))
            tail = tail.compose(czk)
            for _ in range(k):
                tail = tail.compose(czi_op)
        czn = GradedOp(n, fug.n_vars, degree, max_shift)
        czn.add_term(mdeg_zero(fug.n_vars), nn if quantum else 0,
                     MatFn.const(np.linalg.matrix_power(czmat, nn)))
        tail = tail.compose(czn)
        term = chi.compose(tail)
        out = out + (term if nn % 2 == 0 else -term)
        nn += 1
    return out


# ---------------------------------------------------------------------------
# Scalar variant, implemented independently of the matrix machinery
# ---------------------------------------------------------------------------


def _scalar_chi(oracle: YOracle, degree: int, dj: int, dk: int) -> dict[int, complex]:
    """Scalar chi(x + dj*m + dk*eps) per power of q, from the box-product form."""
    out: dict[int, complex] = {}
    for k in range(degree + 1):
        total = 0j
        for lam in enumerate_partitions(k):
            total += chi_box_value(0, lam, oracle, dj, dk, quantum=True)
        out[k] = total
    return out


def scalar_lhs(oracle: YOracle, degree: int, z: complex) -> dict[tuple[int, int], complex]:
    """LHS of the scalar identity as {(q-power, shift): coefficient}."""

    def compose(a, b):
        out: dict[tuple[int, int], complex] = {}
        for (d1, s1), v1 in a.items():
            for (d2, s2), v2 in b.items():
                if d1 + d2 > degree:
                    continue
                # b's Y-content was built relative to offset 0; shifting by s1
                # is handled by building factors with explicit dk below, so
                # plain composition only tracks (degree, shift).
                key = (d1 + d2, s1 + s2)
                out[key] = out.get(key, 0) + v1 * v2
        return out

    # Because scalar factors do not commute with the shift, expand the product
    # directly: choose for each factor its 1 or its tail, tracking the running
    # shift so every Y is evaluated at the correct offset.
    factors = []
    for nn in range(degree, 0, -1):  # left product, leftmost factor first
        factors.append(("L", nn))
    factors.append(("Y", 0))
    for nn in range(0, degree + 1):
        factors.append(("R", nn))

    results: dict[tuple[int, int], complex] = {}

    def walk(idx, deg, shift, value):
        if deg > degree:
            return
        if idx == len(factors):
            key = (deg, shift)
            results[key] = results.get(key, 0) + value
            return
        kind, nn = factors[idx]
        if kind == "Y":
            walk(idx + 1, deg, shift, value * oracle.value(1, 0, shift + 1))
            return
        # identity branch
        walk(idx + 1, deg, shift, value)
        # tail branch
        if kind == "L":
            # -z q^n Y(x+nm+eps) e^{-eps dx} / Y(x+(n-1)m+eps)
            v = -z * oracle.value(1, nn, shift + 1) / oracle.value(1, nn - 1, shift)
            walk(idx + 1, deg + nn, shift - 1, value * v)
        else:
            # -z^{-1} q^n [Y(x-(n+1)m+(1-n)eps)/Y(x-nm+(1-n)eps)] e^{eps dx};
            # the -n eps in the ratio is the Chat_z normal form of the identity
            # (the two displayed epsilon conventions coincide only there)
            v = -(1 / z) * oracle.value(1, -nn - 1, shift + 1 - nn) / oracle.value(1, -nn, shift + 1 - nn)
            walk(idx + 1, deg + nn, shift + 1, value * v)

    walk(0, 0, 0, 1.0 + 0j)
    return results


def scalar_rhs(oracle: YOracle, degree: int, z: complex) -> dict[tuple[int, int], complex]:
    """RHS: sum over n of (-z)^n q^{n(n+1)/2} chi(x+nm) e^{-n eps dx}."""
    out: dict[tuple[int, int], complex] = {}
    for nn in range(-(degree + 1), degree + 2):
        base = nn * (nn + 1) // 2
        if base > degree:
            continue
        chi = _scalar_chi(oracle, degree - base, nn, 0)
        for k, v in chi.items():
            key = (base + k, -nn)
            out[key] = out.get(key, 0) + (-1) ** nn * z**nn * v
    return out


# ---------------------------------------------------------------------------
# Checkers
# ---------------------------------------------------------------------------


def check_factorization(n: int, degree: int, seed: int = 0, variant: str = "Matrix",
                        z: complex = 0.83 + 0.41j) -> dict:
    """Compare the two sides of the factorization identity.

    Matrix: quantum identity in Mat_N, per (multidegree, shift, entry).
    Scalar: independent N=1 expansion against the N=1 matrix build.
    Classical: eps = 0 variant (no shift operators).
    """
    oracle = YOracle(n if variant != "Scalar" else 1, seed)
    if variant == "Matrix":
        lhs = build_lhs(n, degree, oracle, z)
        rhs = build_rhs(n, degree, oracle, z)
        rep = compare_graded(lhs, rhs)
    elif variant == "Classical":
        lhs = build_lhs(n, degree, oracle, z, quantum=False)
        rhs = build_rhs(n, degree, oracle, z, quantum=False)
        rep = compare_graded(lhs, rhs)
    elif variant == "Scalar":
        s_lhs = scalar_lhs(oracle, degree, z)
        s_rhs = scalar_rhs(oracle, degree, z)
        scale = max([abs(v) for v in list(s_lhs.values()) + list(s_rhs.values())] or [1.0])
        worst = 0.0
        worst_key = None
        cells = []
        for key in sorted(set(s_lhs) | set(s_rhs)):
            rel = abs(s_lhs.get(key, 0) - s_rhs.get(key, 0)) / scale
            cells.append({"mdeg": (key[0],), "shift": key[1], "rel_error": rel})
            if rel > worst:
                worst, worst_key = rel, key
        rep = {"max_rel_error": worst, "worst_cell": worst_key, "cells": cells, "scale": scale}
        # cross-check the scalar expansion against the N=1 matrix build,
        # cell for cell
        m_lhs = build_lhs(1, degree, oracle, z)
        cross = 0.0
        for (d, s), v in s_lhs.items():
            cross = max(cross, abs(m_lhs.cell((d,), s, 0)[0, 0] - v) / max(scale, 1.0))
        rep["scalar_vs_matrix"] = cross
    else:
        raise InvalidData(f"unknown variant {variant!r}")
    rep["variant"] = variant
    rep["n"] = n
    rep["degree"] = degree
    rep["seed"] = seed
    return rep


def chamber_point(n: int, nome: complex, seed: int = 0, depth: float = 1.0) -> np.ndarray:
    """Random x_w in the stability chamber with balanced ratios: every |q_w|
    (including q_0 = q x_0/x_{N-1}) lands near |nome|^{1/N}, which is the
    evenly convergent regime for all the infinite products."""
    rng = np.random.default_rng(seed + 17)
    decay = abs(nome) ** (1.0 / n) * depth
    ratios = decay * (0.95 + 0.10 * rng.random(max(n - 1, 0)))
    xs = [1.0 + 0.35 * rng.random()]
    for r in ratios:
        xs.append(xs[-1] * r)
    xs = np.array(xs, dtype=complex)
    xs *= np.exp(1j * 2 * np.pi * rng.random(n) * 0.1)
    return xs


def product_terms(qmax: float, tol: float = 1e-16, cap: int = 400) -> int:
    """Factors needed so the dropped product tail is below tol."""
    if qmax >= 1:
        raise ChamberError(f"|q_w| = {qmax} >= 1")
    import math

    return min(cap, max(24, int(math.log(tol) / math.log(qmax)) + 4))


def check_transformation(n: int, seed: int = 0, z: complex = 0.77 + 0.31j,
                         x0: complex | None = None, nome: complex = 0.1,
                         n_factors: int = 56, quantum: bool = True) -> dict:
    """X Dhat(x+m, qz) = -Dhat(x, z) X Chat_{qz} in the numeric-fugacity model.

    The x_w enter only through the ratios q_w and the diagonal matrix X; the
    Y-data stays free, which is exactly the generality of the proof.  Both
    the infinite-product form and the bilateral-sum form of the operator are
    transformed; truncation mismatch decays like q_max^n_factors.
    """
    xs = chamber_point(n, nome, seed)
    qs = fugacity_ratios(xs, nome)
    if np.any(np.abs(qs) >= 1):
        raise DegeneratePoint("generated point left the stability chamber")
    oracle = YOracle(n, seed)
    fug = NumericFug(qs)
    deg = 0  # trivial grading in numeric mode
    X = GradedOp(n, 0, deg, n_factors + 2)
    X.add_term((), 0, MatFn.const(np.diag(xs)))
    Xi = GradedOp(n, 0, deg, n_factors + 2)
    Xi.add_term((), 0, MatFn.const(np.diag(1 / xs)))

    c_qz = GradedOp(n, 0, deg, n_factors + 2)
    c_qz.add_term((), 1 if quantum else 0, MatFn.const(cyclic_z_matrix(n, nome * z)))

    reports = {}
    for form in ("product", "sum"):
        if form == "product":
            d_shift = build_lhs(n, deg, oracle, nome * z, fug, dj=1, quantum=quantum,
                                n_factors=n_factors)
            d_base = build_lhs(n, deg, oracle, z, fug, dj=0, quantum=quantum,
                               n_factors=n_factors)
        else:
            terms = _sum_terms(np.max(np.abs(qs)), n_factors)
            d_shift = build_rhs(n, deg, oracle, nome * z, fug, dj=1, quantum=quantum,
                                n_terms=terms)
            d_base = build_rhs(n, deg, oracle, z, fug, dj=0, quantum=quantum,
                               n_terms=terms)
        lhs = X.compose(d_shift)
        rhs = -(d_base.compose(X).compose(c_qz))
        reports[form] = compare_graded(lhs, rhs)
    rep = {
        "max_rel_error": max(r["max_rel_error"] for r in reports.values()),
        "product_form": reports["product"]["max_rel_error"],
        "sum_form": reports["sum"]["max_rel_error"],
        "n": n,
        "seed": seed,
    }
    return rep


def _sum_terms(qmax: float, n_factors: int) -> int:
    """Terms to keep in the RHS sums so the tail is below double precision."""
    nn = 2
    while qmax ** (nn * (nn - 1) / 2) > 1e-17 and nn < n_factors:
        nn += 1
    return nn


# ---------------------------------------------------------------------------
# Induction lemmas of the proof
# ---------------------------------------------------------------------------


def lemma_bijection(lam: Partition, p: int):
    """(lambda, p) -> (r, s, n-list, k-list): n_j = lam^t_{j+1} - j + p while
    positive, k_{s-i} = lam_i - i - p while nonnegative."""
    r = 0
    while lam.col(r + 1) - r + p >= 1:
        r += 1
    s = 0
    while lam.row(s + 1) - (s + 1) - p >= 0:
        s += 1
    n_list = [lam.col(j + 1) - j + p for j in range(r)]
    k_list = [lam.row(i) - i - p for i in range(s, 0, -1)]
    return r, s, n_list, k_list


def lemma_bijection_inverse(r: int, s: int, n_list, k_list):
    """Rebuild (lambda, p) from the strictly monotone data; InvalidData if the
    sequences are not admissible."""
    if any(n_list[i] <= n_list[i + 1] for i in range(len(n_list) - 1)) or (
        n_list and n_list[-1] < 1
    ):
        raise InvalidData("n-list must be strictly decreasing and >= 1")
    if any(k_list[i] >= k_list[i + 1] for i in range(len(k_list) - 1)) or (
        k_list and k_list[0] < 0
    ):
        raise InvalidData("k-list must be strictly increasing and >= 0")
    p = r - s
    cols = [n_list[j] + j - p for j in range(r)]
    rows = [k_list[s - i] + i + p for i in range(1, s + 1)]
    # assemble: cell (i, j) present if given by the first s rows or first r columns
    height = max([s] + [c for c in cols]) if (cols or s) else 0
    out_rows = []
    for i in range(1, height + 1):
        if i <= s:
            out_rows.append(rows[i - 1])
        else:
            out_rows.append(sum(1 for j in range(r) if cols[j] >= i))
    lam = Partition(out_rows)
    return lam, p


def lemma_lhs_value(lam: Partition, p: int, omega: int, oracle: YOracle) -> complex:
    """LHS(lambda, p): the product over the expanded-bracket data."""
    r, s, _n, _k = lemma_bijection(lam, p)
    val = 1.0 + 0j
    for j in range(r):
        tj = lam.col(j + 1)
        val *= oracle.value(omega + 1 - j, tj - j + p, -(j - 1))
        val /= oracle.value(omega - j, tj - j + p - 1, -j)
    val *= oracle.value(omega + 1 - r, 0, -(r - 1))
    for i in range(1, s + 1):
        li = lam.row(i)
        val *= oracle.value(omega + 1 - li, -(li - i - p + 1), -(li - 1))
        val /= oracle.value(omega + 1 - li, -(li - i - p), -(li - 1))
    return val


def lemma_rhs_value(lam: Partition, p: int, omega: int, oracle: YOracle) -> complex:
    """RHS(lambda, p): the lambda-summand of chi_w(x + pm), Y-factors only."""
    return chi_value(omega, lam, oracle, p, 0, quantum=True)


def lemma_lhs_rhs(lam: Partition, p: int, omega: int, oracle: YOracle) -> dict:
    lhs = lemma_lhs_value(lam, p, omega, oracle)
    rhs = lemma_rhs_value(lam, p, omega, oracle)
    rel = abs(lhs - rhs) / max(abs(rhs), 1e-30)
    return {"lhs": lhs, "rhs": rhs, "rel_error": rel}


def _dn_exponents(n: int, omega: int, p: int) -> dict[int, int]:
    """Multidegree of D^(p)_w: q_{w-k}^{p-k} (p >= 0) or q_{w+k}^{-p-k} (p < 0)."""
    out: dict[int, int] = {}
    if p >= 0:
        for k in range(p):
            idx = (omega - k) % n
            out[idx] = out.get(idx, 0) + (p - k)
    else:
        for k in range(1, -p):
            idx = (omega + k) % n
            out[idx] = out.get(idx, 0) + (-p - k)
    return {k: v for k, v in out.items() if v}


def lemma_fugacity(lam: Partition, p: int, omega: int, n: int) -> dict:
    """Exact multidegree equality of q(lambda, p) and q'(lambda, p)."""
    r, s, n_list, _ = lemma_bijection(lam, p)
    left: dict[int, int] = {}
    for j in range(r):
        idx = (omega - j) % n
        left[idx] = left.get(idx, 0) + n_list[j]
    for i in range(1, s + 1):
        for j in range(lam.row(i) - i - p):
            idx = (omega - i - j - p) % n
            left[idx] = left.get(idx, 0) + 1
    left = {k: v for k, v in left.items() if v}

    right: dict[int, int] = {}
    for j in range(1, lam.row(1) + 1):
        idx = (omega + 1 - j) % n
        right[idx] = right.get(idx, 0) + lam.col(j)
    for idx, e in _dn_exponents(n, omega, p).items():
        right[idx] = right.get(idx, 0) + e
    right = {k: v for k, v in right.items() if v}
    return {"lhs": left, "rhs": right, "equal": left == right}


# ---------------------------------------------------------------------------
# Matrix Jacobi identity (Appendix-B object)
# ---------------------------------------------------------------------------


def b_factor(x, nome: complex, omega: int, tol: float = 1e-16, max_l: int = 400) -> complex:
    """B_w = prod_{l>=1} 1/(1 - x_w/x_{w-l}) with x_{w+N} = q x_w."""
    x = np.asarray(x, dtype=complex)
    n = len(x)
    out = 1.0 + 0j
    for l in range(1, max_l + 1):
        idx = omega - l
        shift, base = divmod(idx, n)
        # x_{w-l} = x_base * nome^shift with shift <= 0, so the ratio carries
        # nome^{-shift} upstairs (stays finite at nome = 0)
        ratio = x[omega] * nome ** (-shift) / x[base]
        if abs(ratio) < tol:
            break
        f = 1 - ratio
        if f == 0:
            raise DegeneratePoint(f"B_{omega} factor vanished at l={l}")
        out /= f
    return out


def d1_product(x, nome: complex, z: complex, n_terms: int = 64) -> np.ndarray:
    """D1(z) from the two-sided factor product."""
    x = np.asarray(x, dtype=complex)
    n = len(x)
    qs = fugacity_ratios(x, nome)
    czi = np.linalg.inv(cyclic_z_matrix(n, z))
    cz = cyclic_z_matrix(n, z)
    left = np.eye(n, dtype=complex)
    for nn in range(1, n_terms + 1):
        left = (np.eye(n) - np.diag(qs**nn) @ czi) @ left
    right = np.eye(n, dtype=complex)
    for nn in range(n_terms):
        fac = np.eye(n) - np.linalg.matrix_power(np.diag(qs) @ czi, nn) @ np.linalg.matrix_power(cz, nn + 1)
        right = right @ fac
    return left @ right


def d1_sum(x, nome: complex, z: complex, n_terms: int = 48) -> np.ndarray:
    """D1(z) from the bilateral sum with the B-weights."""
    x = np.asarray(x, dtype=complex)
    n = len(x)
    qs = fugacity_ratios(x, nome)
    czi = np.linalg.inv(cyclic_z_matrix(n, z))
    cz = cyclic_z_matrix(n, z)
    bhat = np.diag([b_factor(x, nome, om) for om in range(n)])
    out = np.zeros((n, n), dtype=complex)
    for nn in range(n_terms):
        tail = np.eye(n, dtype=complex)
        for k in range(nn):
            tail = tail @ (np.diag(qs ** (nn - k)) @ czi)
        term = (-1) ** nn * bhat @ tail
        out += term
        if nn > 1 and np.max(np.abs(term)) < 1e-18 * max(np.max(np.abs(out)), 1.0):
            break
    for nn in range(1, n_terms):
        tail = np.eye(n, dtype=complex)
        for k in range(1, nn):
            tail = tail @ np.linalg.matrix_power(cz, k)
            tail = tail @ np.linalg.matrix_power(np.diag(qs) @ czi, k)
        tail = tail @ np.linalg.matrix_power(cz, nn)
        term = (-1) ** nn * bhat @ tail
        out += term
        if nn > 1 and np.max(np.abs(term)) < 1e-18 * max(np.max(np.abs(out)), 1.0):
            break
    return out


def jacobi_identity(x, nome: complex, z: complex, n_terms: int | None = None) -> dict:
    """Product vs sum forms of D1(z), the determinant identity, and the N=1
    reduction to the classical triple product."""
    x = np.asarray(x, dtype=complex)
    n = len(x)
    if n_terms is None:
        n_terms = product_terms(float(np.max(np.abs(fugacity_ratios(x, nome)))))
    prod = d1_product(x, nome, z, n_terms)
    summ = d1_sum(x, nome, z)
    scale = max(np.max(np.abs(prod)), np.max(np.abs(summ)))
    ent = float(np.max(np.abs(prod - summ))) / scale
    det = np.linalg.det(prod)
    det_ref = theta(1 / z, nome, "product", n_terms) / euler_product(nome, n_terms)
    det_rel = abs(det - det_ref) / max(abs(det_ref), 1e-30)
    rep = {"entry_rel_error": ent, "det_rel_error": det_rel, "n": n}
    if n == 1:
        lhs = 1.0 + 0j
        for k in range(1, n_terms + 1):
            lhs *= 1 - nome**k * z
        for k in range(0, n_terms):
            lhs *= 1 - nome**k / z
        rhs = 0j
        for k in range(-n_terms, n_terms + 1):
            rhs += (-z) ** k * nome ** (k * (k + 1) // 2)
        rhs /= euler_product(nome, n_terms)
        rep["triple_product_rel_error"] = abs(lhs - rhs) / max(abs(rhs), 1e-30)
    return rep
