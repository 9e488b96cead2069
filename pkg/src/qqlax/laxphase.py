"""Classical phase-space model: fractional qq-characters chi_w, the matrix
D(x,z), its components D0/D1/Dinf, the U gauge matrix, elliptic Calogero-Moser
and Ruijsenaars-Schneider Lax matrices built several independent ways, the
spectral-curve determinant structure, and an isospectral flow test."""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field

import numpy as np

from .elliptic import (
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
from .errors import ChamberError, ChamberExit, ConvergenceWarning, DegeneratePoint
from .factorization import b_factor, d1_product, product_terms
from .opalgebra import cyclic_z_matrix, fugacity_ratios


@dataclass
class PhaseSpacePoint:
    x: np.ndarray            # multiplicative positions x_0..x_{N-1}
    p: np.ndarray            # conjugate momenta (additive)
    m: complex               # adjoint mass / coupling
    nome: complex            # q of the z-curve
    beta: complex = 1.0
    nome6d: complex = 0.0
    kernel: str = FOUR_D

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=complex)
        self.p = np.asarray(self.p, dtype=complex)
        qs = fugacity_ratios(self.x, self.nome)
        if np.any(np.abs(qs) >= 1):
            raise ChamberError(f"|q_w| = {np.abs(qs)} not all < 1")

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def qs(self) -> np.ndarray:
        return fugacity_ratios(self.x, self.nome)

    @property
    def elliptic(self) -> EllipticParams:
        return EllipticParams(kernel=self.kernel, nome=self.nome,
                              nome6d=self.nome6d, beta=self.beta)

    def qmax(self) -> float:
        return float(np.max(np.abs(self.qs)))


def chi_classical(omega: int, x: complex, pt: PhaseSpacePoint) -> complex:
    """chi_w(x) = vartheta(x - p_w) B_w, B_w the quasi-periodic product."""
    return vartheta(x - pt.p[omega % pt.n], pt.elliptic) * b_factor(pt.x, pt.nome, omega % pt.n)


def _plus_tail(n: int, qs, z: complex, nn: int) -> np.ndarray:
    """prod_{k=0}^{n-1} (Qhat^{n-k} C_z^{-1})."""
    czi = np.linalg.inv(cyclic_z_matrix(n, z))
    out = np.eye(n, dtype=complex)
    for k in range(nn):
        out = out @ (np.diag(qs ** (nn - k)) @ czi)
    return out


def _minus_tail(n: int, qs, z: complex, nn: int) -> np.ndarray:
    """prod_{k=1}^{n-1} C_z^k (Qhat C_z^{-1})^k, then C_z^n."""
    cz = cyclic_z_matrix(n, z)
    czi = np.linalg.inv(cz)
    out = np.eye(n, dtype=complex)
    for k in range(1, nn):
        out = out @ np.linalg.matrix_power(cz, k)
        out = out @ np.linalg.matrix_power(np.diag(qs) @ czi, k)
    return out @ np.linalg.matrix_power(cz, nn)


def build_d_classical(x: complex, z: complex, pt: PhaseSpacePoint,
                      tail_tol: float = 1e-12, max_n: int = 64) -> np.ndarray:
    """D(x,z) from the bilateral chi-sum (the RHS of the classical identity)."""
    n = pt.n
    qs = pt.qs
    out = np.zeros((n, n), dtype=complex)
    last_ratio = 0.0
    for sign in (+1, -1):
        nn = 0 if sign > 0 else 1
        while nn <= max_n:
            chi = np.diag([chi_classical(om, x + sign * nn * pt.m, pt) for om in range(n)])
            tail = _plus_tail(n, qs, z, nn) if sign > 0 else _minus_tail(n, qs, z, nn)
            term = (-1) ** nn * chi @ tail
            out += term
            tnorm = float(np.max(np.abs(term)))
            onorm = float(np.max(np.abs(out))) or 1.0
            if nn > 1 and tnorm < 1e-17 * onorm:
                last_ratio = tnorm / onorm
                break
            last_ratio = tnorm / onorm
            nn += 1
        else:
            if last_ratio > tail_tol:
                raise ConvergenceWarning(
                    f"last |n|={max_n} term still at {last_ratio:.2e} of the sum")
    return out


def extract_components(pt: PhaseSpacePoint, z: complex) -> dict:
    """D0/D1 (4d: D = D0 + x D1) or D1/Dinf (5d/6d: D = D1 - Dinf e^{-beta x}).

    D1 always comes from the z-only infinite product; the finite-difference
    value is kept as a cross-check.
    """
    n_terms = product_terms(pt.qmax())
    d1 = d1_product(pt.x, pt.nome, z, n_terms)
    if pt.kernel == FOUR_D:
        d0 = build_d_classical(0.0, z, pt)
        d1_fd = build_d_classical(1.0, z, pt) - d0
        return {"D0": d0, "D1": d1, "D1_fd": d1_fd}
    # affine in w = e^{-beta x}: D = D1 - Dinf * w
    x_a = 0.31 + 0.11j
    w_a = cmath.exp(-pt.beta * x_a)
    d_a = build_d_classical(x_a, z, pt)
    dinf = (d1 - d_a) / w_a
    return {"D1": d1, "Dinf": dinf}


def check_d_linearity(pt: PhaseSpacePoint, z: complex) -> float:
    """4d: D(x,z) - D(0,z) - x [D(1,z) - D(0,z)] = 0; 5d/6d: three-point
    collinearity in e^{-beta x}."""
    if pt.kernel == FOUR_D:
        d0 = build_d_classical(0.0, z, pt)
        d1 = build_d_classical(1.0, z, pt) - d0
        x = 1.7 - 0.4j
        resid = build_d_classical(x, z, pt) - d0 - x * d1
        scale = max(np.max(np.abs(d0)), np.max(np.abs(d1)))
        return float(np.max(np.abs(resid))) / scale
    comps = extract_components(pt, z)
    x = 0.9 + 0.2j
    w = cmath.exp(-pt.beta * x)
    resid = build_d_classical(x, z, pt) - comps["D1"] + w * comps["Dinf"]
    scale = float(np.max(np.abs(comps["D1"])))
    return float(np.max(np.abs(resid))) / scale


# ---------------------------------------------------------------------------
# U matrix
# ---------------------------------------------------------------------------


def _pi_k(n: int, qs, z: complex, k: int, n_terms: int) -> np.ndarray:
    """Pi_k = left-ordered prod_{n=k+1}^{inf} (1 - Qhat^n C_z^{-1})."""
    czi = np.linalg.inv(cyclic_z_matrix(n, z))
    out = np.eye(n, dtype=complex)
    for nn in range(k + 1, n_terms + 1):
        out = (np.eye(n) - np.diag(qs**nn) @ czi) @ out
    return out


def _right_pi(n: int, qs, z: complex, n_terms: int, start: int = 0) -> np.ndarray:
    """Rightward prod_{n=start}^{n_terms} (1 - (Qhat C_z^{-1})^n C_z^{n+1})."""
    cz = cyclic_z_matrix(n, z)
    czi = np.linalg.inv(cz)
    out = np.eye(n, dtype=complex)
    for nn in range(start, n_terms + 1):
        fac = np.eye(n) - np.linalg.matrix_power(np.diag(qs) @ czi, nn) @ np.linalg.matrix_power(cz, nn + 1)
        out = out @ fac
    return out


def cokernel_vector(pt: PhaseSpacePoint, n_terms: int | None = None) -> np.ndarray:
    """v with v^t D1(1) = 0: v = e^t Pi_0(1)^{-1} (e^t kills the 1 - C_1
    factor of the right product, so this is structural)."""
    if n_terms is None:
        n_terms = product_terms(pt.qmax())
    return np.ones(pt.n, dtype=complex) @ np.linalg.inv(_pi_k(pt.n, pt.qs, 1.0, 0, n_terms))


def kernel_vector(pt: PhaseSpacePoint, n_terms: int | None = None) -> np.ndarray:
    """k with D1(1) k = 0: k = [rightward prod_{n>=1}]^{-1} e (then the
    leading 1 - C_1 factor annihilates it)."""
    if n_terms is None:
        n_terms = product_terms(pt.qmax())
    return np.linalg.solve(_right_pi(pt.n, pt.qs, 1.0, n_terms, start=1),
                           np.ones(pt.n, dtype=complex))


def u_matrix(pt: PhaseSpacePoint, n_terms: int | None = None) -> dict:
    """Diagonal gauge data.

    `u` is the left product acting on the all-ones vector, cross-checked
    against the explicit nested alternating sum (`explicit`); the two agree
    by construction of the sum.  The gauge that actually brings the Lax
    matrix to the standard residue -m e e^t is U_lax = diag(1/v_i) with v
    the cokernel vector of D1(1); u_i v_i = 1 fails at N >= 2 for the
    printed left product, and `paper_gauge_mismatch` records by how much.
    """
    n = pt.n
    qs = pt.qs
    if n_terms is None:
        n_terms = product_terms(pt.qmax())
    ue = _pi_k(n, qs, 1.0, 0, n_terms) @ np.ones(n, dtype=complex)
    U = np.diag(ue)

    cache: dict[tuple[int, int], complex] = {}

    def nested(om: int, cap: int) -> complex:
        if cap <= 0:
            return 1.0 + 0j
        key = (om % n, cap)
        if key not in cache:
            total = 1.0 + 0j
            for t in range(1, cap + 1):
                total -= qs[om % n] ** t * nested(om - 1, t - 1)
            cache[key] = total
        return cache[key]

    explicit = np.array([nested(om, n_terms) for om in range(n)])
    resid = float(np.max(np.abs(ue - explicit))) / max(float(np.max(np.abs(ue))), 1e-30)
    v = cokernel_vector(pt, n_terms)
    u_lax = 1 / v
    return {
        "U": U,
        "u": ue,
        "explicit": explicit,
        "rel_mismatch": resid,
        "v": v,
        "u_lax": u_lax,
        "U_lax": np.diag(u_lax),
        "paper_gauge_mismatch": float(np.max(np.abs(ue * v - 1))),
    }


# ---------------------------------------------------------------------------
# Calogero-Moser Lax matrix
# ---------------------------------------------------------------------------


def cm_momentum_shift(pt: PhaseSpacePoint, terms: int = 64) -> np.ndarray:
    """Dictionary between the chi-model momenta and the meromorphic-gauge
    ones: the diagonal of -D0 D1^{-1} is p_i + d_i - m E1(z) with

        d_i = m (1 + sum_{l != i} E1(x_l / x_i) - i).

    The shift is z-independent (forced by ellipticity), sums to N m, and its
    q -> 0 limit reproduces the rational-function offsets directly.
    """
    n = pt.n
    d = np.zeros(n, dtype=complex)
    for i in range(n):
        acc = 1.0 + 0j - i
        for l in range(n):
            if l != i:
                acc += e1(pt.x[l] / pt.x[i], pt.nome, terms)
        d[i] = pt.m * acc
    return d


def krichever_lax(pt: PhaseSpacePoint, z: complex, terms: int = 64) -> np.ndarray:
    """(p~_i - m E1(z)) delta_ij - m (1-delta_ij) theta'(1) theta(z x_i/x_j)
    / (theta(z) theta(x_i/x_j)), with p~ the shifted momenta of
    cm_momentum_shift (the canonical frame the D-construction lands in)."""
    n = pt.n
    q = pt.nome
    tp1 = theta_prime_at_one(q, terms)
    tz = theta(z, q, "product", terms)
    ptilde = pt.p + cm_momentum_shift(pt, terms)
    L = np.zeros((n, n), dtype=complex)
    for i in range(n):
        L[i, i] = ptilde[i] - pt.m * e1(z, q, terms)
        for j in range(n):
            if i != j:
                L[i, j] = -pt.m * tp1 * theta(z * pt.x[i] / pt.x[j], q, "product", terms) / (
                    tz * theta(pt.x[i] / pt.x[j], q, "product", terms)
                )
    return L


def lax_cm(pt: PhaseSpacePoint, z: complex, source: str = "FromD") -> np.ndarray:
    """The eCM Lax matrix from the factorized operator (FromD), from the
    infinite-product formula (ProductFormula), or in the theta form
    (Explicit).  The gauge is U_lax = diag(1/v), which pins the z=1 residue
    to -m e e^t exactly."""
    if pt.kernel != FOUR_D:
        raise DegeneratePoint("lax_cm needs the 4d kernel")
    if source == "Explicit":
        return krichever_lax(pt, z)
    U = u_matrix(pt)["U_lax"]
    Ui = np.linalg.inv(U)
    if source == "FromD":
        comps = extract_components(pt, z)
        return -Ui @ comps["D0"] @ np.linalg.inv(comps["D1"]) @ U
    if source == "ProductFormula":
        return Ui @ _lax_cm_product(pt, z) @ U
    raise DegeneratePoint(f"unknown source {source!r}")


def _lax_cm_product(pt: PhaseSpacePoint, z: complex) -> np.ndarray:
    """Ltilde = P + m sum_k Pi_k Qhat^k C_z^{-1} Pi_{k-1}^{-1}
    - m sum_k Pi_0 R^k (Qhat C_z^{-1})^k C_z^{k+1} (R^{k+1})^{-1} Pi_0^{-1}."""
    n = pt.n
    qs = pt.qs
    n_terms = product_terms(pt.qmax())
    cz = cyclic_z_matrix(n, z)
    czi = np.linalg.inv(cz)
    P = np.diag(pt.p)
    out = P.astype(complex).copy()
    pi0 = _pi_k(n, qs, z, 0, n_terms)
    pi0_inv = np.linalg.inv(pi0)

    def r_prod(k):
        # rightward prod_{n=0}^{k-1} (1 - (Qhat C_z^{-1})^n C_z^{n+1})
        acc = np.eye(n, dtype=complex)
        for nn in range(k):
            fac = np.eye(n) - np.linalg.matrix_power(np.diag(qs) @ czi, nn) @ np.linalg.matrix_power(cz, nn + 1)
            acc = acc @ fac
        return acc

    for k in range(1, n_terms + 1):
        term = _pi_k(n, qs, z, k, n_terms) @ (np.diag(qs**k) @ czi) @ np.linalg.inv(_pi_k(n, qs, z, k - 1, n_terms))
        out += pt.m * term
        if np.max(np.abs(np.diag(qs**k))) < 1e-17:
            break
    for k in range(0, n_terms + 1):
        mono = np.linalg.matrix_power(np.diag(qs) @ czi, k) @ np.linalg.matrix_power(cz, k + 1)
        term = pi0 @ r_prod(k) @ mono @ np.linalg.inv(r_prod(k + 1)) @ pi0_inv
        out -= pt.m * term
        if k > 0 and np.max(np.abs(np.diag(qs**k))) < 1e-17:
            break
    return out


def residue_at_one(matfun, radius: float = 1e-3, points: int = 32) -> np.ndarray:
    """Circle average of (z-1) M(z) around z = 1."""
    acc = None
    for k in range(points):
        zk = 1 + radius * cmath.exp(2j * cmath.pi * k / points)
        val = (zk - 1) * matfun(zk)
        acc = val if acc is None else acc + val
    return acc / points


def lax_quasi_periodicity(pt: PhaseSpacePoint, z: complex, rs: bool = False) -> float:
    """CM: X L(qz) X^{-1} - m = L(z); RS: X L(qz) X^{-1} = e^{beta m} L(z)."""
    X = np.diag(pt.x)
    Xi = np.linalg.inv(X)
    if rs:
        Lq = lax_rs(pt, pt.nome * z, source="Matching")
        L = lax_rs(pt, z, source="Matching")
        resid = X @ Lq @ Xi - cmath.exp(pt.beta * pt.m) * L
    else:
        Lq = lax_cm(pt, pt.nome * z)
        L = lax_cm(pt, z)
        resid = X @ Lq @ Xi - pt.m * np.eye(pt.n) - L
    return float(np.max(np.abs(resid))) / max(float(np.max(np.abs(L))), 1e-30)


# ---------------------------------------------------------------------------
# Ruijsenaars-Schneider Lax matrix
# ---------------------------------------------------------------------------


def u_rs_vector(pt: PhaseSpacePoint) -> np.ndarray:
    """The printed u^RS = prod (1 - Qhat^n C_1^{-1}) e^{beta P} e (kept for
    the display-fidelity report; the working residue uses residue_closed_form)."""
    n_terms = product_terms(pt.qmax())
    return _pi_k(pt.n, pt.qs, 1.0, 0, n_terms) @ np.exp(pt.beta * pt.p)


def _d1_prime_at_one(pt: PhaseSpacePoint, h: float = 1e-5) -> np.ndarray:
    n_terms = product_terms(pt.qmax())
    return (d1_product(pt.x, pt.nome, 1 + h, n_terms)
            - d1_product(pt.x, pt.nome, 1 - h, n_terms)) / (2 * h)


def residue_closed_form(pt: PhaseSpacePoint, numerator: np.ndarray) -> np.ndarray:
    """res_{z=1} [numerator D1(z)^{-1}] = numerator k v^t / (v^t D1'(1) k):
    k and v span kernel and cokernel of D1(1)."""
    k = kernel_vector(pt)
    v = cokernel_vector(pt)
    denom = v @ _d1_prime_at_one(pt) @ k
    return numerator @ np.outer(k, v) / denom


def rs_explicit(pt: PhaseSpacePoint, z: complex, terms: int = 64) -> np.ndarray:
    """Theta form of Ltilde^RS in the U_lax gauge: quasi-periodicity forces

        L^RS_ij = c_ij theta'(1) theta(e^{-bm} z x_i/x_j)
                  / (theta(z) theta(e^{-bm} x_i/x_j)),

    and c is the z=1 residue, taken in closed form from the kernel/cokernel
    of D1(1) (the printed (1-e^{bm}) u^RS (x) v reproduces it only at N=1)."""
    n = pt.n
    q = pt.nome
    w = cmath.exp(-pt.beta * pt.m)
    comps = extract_components(pt, 1.0)
    c = residue_closed_form(pt, comps["Dinf"])
    U = u_matrix(pt)["U_lax"]
    c = np.linalg.inv(U) @ c @ U
    tp1 = theta_prime_at_one(q, terms)
    tz = theta(z, q, "product", terms)
    L = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            L[i, j] = (
                c[i, j] * tp1 * theta(w * z * pt.x[i] / pt.x[j], q, "product", terms)
                / (tz * theta(w * pt.x[i] / pt.x[j], q, "product", terms))
            )
    return L


def dinf_sum_form(pt: PhaseSpacePoint, z: complex, max_n: int = 48) -> np.ndarray:
    """Dinf(z) from the bilateral chi-sum directly: the e^{-beta x}
    coefficient of chi_w(y) = (1 - e^{-beta y} e^{beta p_w}) B_w gives

        Dinf = sum_n (-1)^n e^{-beta m n} E Bhat T+_n
             + sum_n (-1)^n e^{+beta m n} E Bhat T-_n,

    an exact route independent of the affine-differencing extraction."""
    n = pt.n
    qs = pt.qs
    E = np.diag(np.exp(pt.beta * pt.p))
    bh = np.diag([b_factor(pt.x, pt.nome, om) for om in range(n)])
    out = np.zeros((n, n), dtype=complex)
    for sign in (+1, -1):
        nn = 0 if sign > 0 else 1
        while nn <= max_n:
            tail = _plus_tail(n, qs, z, nn) if sign > 0 else _minus_tail(n, qs, z, nn)
            term = (-1) ** nn * cmath.exp(-sign * pt.beta * pt.m * nn) * E @ bh @ tail
            out += term
            if nn > 2 and np.max(np.abs(term)) < 1e-18 * np.max(np.abs(out)):
                break
            nn += 1
    return out


def rs_product_display(pt: PhaseSpacePoint, z: complex) -> np.ndarray:
    """Verbatim transcription of the printed product formula for Ltilde^RS.

    Kept for the fidelity report only: with either momentum-index reading it
    deviates from Dinf D1^{-1} at N >= 2 (its Dinf decomposition already
    disagrees with the affine extraction), so it is not used as a Lax source."""
    n = pt.n
    qs = pt.qs
    n_terms = product_terms(pt.qmax())
    cz = cyclic_z_matrix(n, z)
    czi = np.linalg.inv(cz)
    ebp = np.diag(np.exp(pt.beta * pt.p))
    ebm = cmath.exp(pt.beta * pt.m)
    out = ebp.astype(complex).copy()
    pi0 = _pi_k(n, qs, z, 0, n_terms)
    pi0_inv = np.linalg.inv(pi0)

    def r_prod(k):
        acc = np.eye(n, dtype=complex)
        for nn in range(k):
            fac = np.eye(n) - np.linalg.matrix_power(np.diag(qs) @ czi, nn) @ np.linalg.matrix_power(cz, nn + 1)
            acc = acc @ fac
        return acc

    for k in range(1, n_terms + 1):
        bracket = ebp @ czi * (1 - ebm ** (-k)) - (1 - ebm ** (1 - k)) * czi @ ebp
        term = _pi_k(n, qs, z, k, n_terms) @ np.diag(qs**k) @ bracket @ np.linalg.inv(_pi_k(n, qs, z, k - 1, n_terms))
        out += term
        if np.max(np.abs(np.diag(qs**k))) < 1e-17:
            break
    for k in range(0, n_terms + 1):
        mono = np.linalg.matrix_power(np.diag(qs) @ czi, k) @ np.linalg.matrix_power(cz, k + 1)
        term = pi0 @ r_prod(k) @ (ebp * ebm**k) @ mono @ np.linalg.inv(r_prod(k + 1)) @ pi0_inv
        out -= (ebm - 1) * term
        if k > 0 and np.max(np.abs(np.diag(qs**k))) < 1e-17:
            break
    return out


_RS_ORIENTATION: dict[tuple, dict] = {}


def resolve_rs_orientation(pt: PhaseSpacePoint, z: complex = 0.73 + 0.21j) -> dict:
    """Pin the orientation ambiguity (theorem: D1 Dinf^{-1}; proof:
    Dinf D1^{-1}) by the quasi-periodicity exponent: the eRS Lax satisfies
    X L(qz) X^{-1} = e^{+beta m} L(z), which selects Dinf D1^{-1}."""
    key = (pt.kernel, pt.n)
    if key in _RS_ORIENTATION:
        return _RS_ORIENTATION[key]
    X = np.diag(pt.x)
    Xi = np.linalg.inv(X)
    ebm = cmath.exp(pt.beta * pt.m)

    def ltilde(zz, orient):
        comps = extract_components(pt, zz)
        if orient == "A":
            return comps["D1"] @ np.linalg.inv(comps["Dinf"])
        return comps["Dinf"] @ np.linalg.inv(comps["D1"])

    report = {}
    for orient in ("A", "B"):
        base = ltilde(z, orient)
        shifted = X @ ltilde(pt.nome * z, orient) @ Xi
        scale = float(np.max(np.abs(base)))
        report[orient] = float(np.max(np.abs(shifted - ebm * base))) / scale
    choice = "FromD_orientA" if report["A"] < report["B"] else "FromD_orientB"
    out = {"orientation": choice, "qp_error_A": report["A"], "qp_error_B": report["B"]}
    _RS_ORIENTATION[key] = out
    return out


def lax_rs(pt: PhaseSpacePoint, z: complex, source: str = "Matching") -> np.ndarray:
    """The eRS Lax matrix; `Matching` uses the D-orientation selected by the
    e^{+beta m} quasi-periodicity (recorded by resolve_rs_orientation)."""
    if pt.kernel != FIVE_D:
        raise DegeneratePoint("lax_rs needs the 5d kernel")
    if source == "Explicit":
        return rs_explicit(pt, z)
    U = u_matrix(pt)["U_lax"]
    Ui = np.linalg.inv(U)
    if source == "ProductFormula":
        # product-form D1 with the sum-form Dinf: independent of the
        # affine-differencing route used by Matching/FromD
        n_terms = product_terms(pt.qmax())
        d1 = d1_product(pt.x, pt.nome, z, n_terms)
        return Ui @ dinf_sum_form(pt, z) @ np.linalg.inv(d1) @ U
    if source == "Matching":
        source = resolve_rs_orientation(pt)["orientation"]
    comps = extract_components(pt, z)
    if source == "FromD_orientA":
        return Ui @ comps["D1"] @ np.linalg.inv(comps["Dinf"]) @ U
    if source == "FromD_orientB":
        return Ui @ comps["Dinf"] @ np.linalg.inv(comps["D1"]) @ U
    raise DegeneratePoint(f"unknown source {source!r}")


def rs_residue_check(pt: PhaseSpacePoint) -> dict:
    """Contour residue of Ltilde^RS at z=1 against the closed kernel/cokernel
    form; also reports how far the printed (1-e^{bm}) u^RS (x) v is (exact at
    N=1, display-only beyond)."""
    n = pt.n
    orientation = resolve_rs_orientation(pt)["orientation"]

    def ltilde(z):
        comps = extract_components(pt, z)
        if orientation == "FromD_orientA":
            return comps["D1"] @ np.linalg.inv(comps["Dinf"])
        return comps["Dinf"] @ np.linalg.inv(comps["D1"])

    res = residue_at_one(ltilde)
    comps1 = extract_components(pt, 1.0)
    num = comps1["D1"] if orientation == "FromD_orientA" else comps1["Dinf"]
    if orientation == "FromD_orientA":
        # residue of D1 Dinf^{-1} sits at zeros of det Dinf instead; not used
        closed = res
    else:
        closed = residue_closed_form(pt, num)
    scale = max(float(np.max(np.abs(closed))), 1e-30)
    rel = float(np.max(np.abs(res - closed))) / scale
    urs = u_rs_vector(pt)
    v = cokernel_vector(pt)
    printed = (1 - cmath.exp(pt.beta * pt.m)) * np.outer(urs, v)
    printed_rel = float(np.max(np.abs(res - printed))) / scale
    # factored comparison: columns of the residue are proportional to v, and
    # the rank-1 weights u_i v_i come out constant in the matched gauge
    rank1 = np.linalg.svd(res)[1]
    return {
        "rel_error": rel,
        "printed_display_rel_error": printed_rel,
        "rank1_gap": float(rank1[1] / rank1[0]) if n > 1 else 0.0,
        "orientation": orientation,
    }


def rs_to_cm_limit(pt: PhaseSpacePoint, z: complex, beta: float = 1e-3) -> float:
    """(L^RS - 1)/beta -> L^CM as beta -> 0, Richardson-extrapolated.

    The relativistic momenta enter only through e^{beta p}, so the additive
    p stays fixed in the limit (that is the p -> beta p rescaling of the
    exponentiated variables)."""
    cm_pt = PhaseSpacePoint(pt.x, pt.p, pt.m, pt.nome, kernel=FOUR_D)
    ref = lax_cm(cm_pt, z, "FromD")

    def at(b):
        rs_pt = PhaseSpacePoint(pt.x, pt.p, pt.m, pt.nome, beta=b, kernel=FIVE_D)
        return (lax_rs(rs_pt, z, "Matching") - np.eye(pt.n)) / b

    rich = 2 * at(beta / 2) - at(beta)
    return float(np.max(np.abs(rich - ref))) / float(np.max(np.abs(ref)))


# ---------------------------------------------------------------------------
# Spectral curve structure
# ---------------------------------------------------------------------------


def spectral_closure_check(pt: PhaseSpacePoint, x: complex, z: complex) -> float:
    """theta(1/z) det(x - L(z)) / prod(1-q^n) = det D(x,z) in 4d."""
    L = lax_cm(pt, z)
    n_terms = product_terms(pt.qmax())
    lhs = theta(1 / z, pt.nome, "product", n_terms) * np.linalg.det(
        x * np.eye(pt.n) - L
    ) / euler_product(pt.nome, n_terms)
    rhs = np.linalg.det(build_d_classical(x, z, pt))
    return abs(lhs - rhs) / max(abs(rhs), 1e-30)


def det_ratio_transformation_check(pt: PhaseSpacePoint, x: complex, z: complex) -> float:
    """det D(x+m, qz)/det D(x,z) = (-1)^N det C_{qz} (determinant corollary of
    the x-shift transformation)."""
    num = np.linalg.det(build_d_classical(x + pt.m, pt.nome * z, pt))
    den = np.linalg.det(build_d_classical(x, z, pt))
    expected = (-1) ** pt.n * np.linalg.det(cyclic_z_matrix(pt.n, pt.nome * z))
    return abs(num / den - expected) / abs(expected)


def trace_identity_check(pt: PhaseSpacePoint, z: complex) -> float:
    """tr L(z) = sum_w p~_w - N m E1(z) in the meromorphic frame; since the
    momentum dictionary sums to N m this equals sum p_w - N m (E1(z) - 1)."""
    L = lax_cm(pt, z, "Explicit")
    expected = np.sum(pt.p) + pt.n * pt.m - pt.n * pt.m * e1(z, pt.nome)
    return abs(np.trace(L) - expected) / max(abs(expected), 1e-30)


def spectral_fourier_check(pt: PhaseSpacePoint, x: complex, radius: float = 0.9,
                           n_range: int = 3, points: int = 64) -> dict:
    """Fourier modes f_n(x) of det D(x,z) in z satisfy
    f_n(x) = (-1)^n q^{(n^2+n)/2} f_0(x + n m)."""
    nodes = [radius * cmath.exp(2j * cmath.pi * k / points) for k in range(points)]
    dets = np.array([np.linalg.det(build_d_classical(x, zk, pt)) for zk in nodes])

    def mode(nn, values):
        return np.mean(values * np.array([zk ** (-nn) for zk in nodes]))

    records = []
    worst = 0.0
    for nn in range(-n_range, n_range + 1):
        f_n = mode(nn, dets)
        shifted = np.array(
            [np.linalg.det(build_d_classical(x + nn * pt.m, zk, pt)) for zk in nodes]
        )
        f0_shift = mode(0, shifted)
        predicted = (-1) ** nn * pt.nome ** ((nn * nn + nn) // 2)
        rel = abs(f_n / f0_shift - predicted) / max(abs(predicted), 1e-30)
        records.append({"n": nn, "ratio": f_n / f0_shift, "predicted": predicted, "rel_error": rel})
        worst = max(worst, rel)
    return {"max_rel_error": worst, "records": records}


def scalar_bilateral_det_check(nome: complex = 0.01, z: complex = 0.9 + 0.4j,
                               seed: int = 0, lam_cap: int = 10) -> float:
    """N=1 closed form: the two sides of the classical scalar identity,
    resummed numerically at a numeric fugacity in the free-Y model
    (the Y-data is generic, so this is the bilateral-product determinant)."""
    from .factorization import YOracle, chi_value
    from .partitions import enumerate_partitions

    oracle = YOracle(1, seed)
    q = nome
    n_terms = product_terms(abs(q) * 4.1)  # Y-ratios bounded by ~4
    lhs = oracle.value(0, 0, 0)
    for nn in range(1, n_terms):
        lhs *= 1 - z * q**nn * oracle.value(0, nn, 0) / oracle.value(0, nn - 1, 0)
    for nn in range(0, n_terms):
        lhs *= 1 - q**nn / z * oracle.value(0, -nn - 1, 0) / oracle.value(0, -nn, 0)

    def chi(dj):
        total = 0j
        for k in range(lam_cap + 1):
            for lam in enumerate_partitions(k):
                total += q**k * chi_value(0, lam, oracle, dj, 0, quantum=False)
        return total

    rhs = 0j
    nn = 0
    while (abs(q) * 4.1) ** (nn * (nn + 1) / 2) > 1e-18 or nn < 2:
        for sign in (1,) if nn == 0 else (1, -1):
            kk = sign * nn
            rhs += (-z) ** kk * q ** ((kk * kk + kk) // 2) * chi(kk)
        nn += 1
    return abs(lhs - rhs) / max(abs(lhs), 1e-30)


# ---------------------------------------------------------------------------
# 6d transformation and the Dell generating function
# ---------------------------------------------------------------------------


def check_sixd_transformation(pt: PhaseSpacePoint, x: complex, z: complex) -> dict:
    """S_w D(x + Delta, w z) = -p6d^{-1} e^{-beta(x - P)} D(x, z) S_w with
    Delta the 6d torus period; the sign of the z-rescaling exponent is pinned
    empirically and reported."""
    if pt.kernel != SIX_D:
        raise DegeneratePoint("needs the 6d kernel")
    n = pt.n
    beta = pt.beta
    delta = cmath.log(pt.nome6d) / beta
    base = build_d_classical(x, z, pt)
    pref = np.diag(np.exp(-beta * (x - pt.p))) / pt.nome6d
    best = None
    for sign in (+1, -1):
        w = cmath.exp(sign * beta * pt.m * n)
        sw = np.diag([cmath.exp(sign * beta * pt.m * om) for om in range(n)])
        lhs = sw @ build_d_classical(x + delta, w * z, pt)
        rhs = -pref @ base @ sw
        rel = float(np.max(np.abs(lhs - rhs))) / float(np.max(np.abs(rhs)))
        if best is None or rel < best[1]:
            best = (sign, rel)
    return {"exponent_sign": best[0], "max_rel_error": best[1]}


def dell_generating(pt: PhaseSpacePoint, u: complex, cap: int = 12) -> complex:
    """O(u): the bilateral multi-sum over n-vectors with theta-ratio weights."""
    n = pt.n
    q = pt.nome
    p6 = pt.nome6d
    beta = pt.beta
    total = 0j
    n_terms = product_terms(max(abs(q), 1e-4))

    def rec(idx, vec):
        nonlocal total
        if idx == n:
            weight = p6 ** (sum(k * (k - 1) // 2 for k in vec)) * (-u) ** sum(vec)
            if weight == 0:
                return
            for i in range(n):
                for j in range(i + 1, n):
                    # ratio orientation pinned by the N=2 determinant check:
                    # theta(e^{beta m (n_i - n_j)} x_j / x_i) / theta(x_j / x_i)
                    xr = pt.x[j] / pt.x[i]
                    weight *= theta(cmath.exp(beta * pt.m * (vec[i] - vec[j])) * xr,
                                    q, "product", n_terms)
                    weight /= theta(xr, q, "product", n_terms)
            weight *= cmath.exp(beta * np.dot(vec, pt.p))
            total += weight
            return
        for k in range(-cap, cap + 1):
            if p6 == 0 and k not in (0, 1):
                continue
            rec(idx + 1, vec + [k])

    rec(0, [])
    return total


def dell_n2_checks(p6d: complex, beta: complex, m: complex,
                   x_ratio: complex, p0: complex, p1: complex,
                   x_probe: complex, z: complex) -> dict:
    """Appendix-level N=2 trigonometric identities:
    det D^trig(x,z) = D(x) - z^{-1} D(x-m), D(x) from the chi's equals the
    Dell double sum at u = e^{-beta x}, and p6d -> 0 reduces D to the 5d
    (tRS) generating function."""

    def chi0(x):
        return theta(cmath.exp(beta * (p0 - x)), p6d, "product") if p6d != 0 else 1 - cmath.exp(beta * (p0 - x))

    def chi1(x):
        num = theta(cmath.exp(beta * (p1 - x)), p6d, "product") if p6d != 0 else 1 - cmath.exp(beta * (p1 - x))
        return num / (1 - x_ratio)

    def D(x):
        return chi0(x) * chi1(x) - x_ratio * chi0(x - m) * chi1(x + m)

    # trig matrix displayed for N=2
    def d_trig(x, zz):
        return np.array([
            [chi0(x) + x_ratio * chi0(x - 2 * m) / zz, chi0(x - m)],
            [x_ratio * chi1(x + m) + chi1(x - m) / zz, chi1(x)],
        ])

    det_resid = abs(np.linalg.det(d_trig(x_probe, z)) - (D(x_probe) - D(x_probe - m * 1.0) / z))

    # Dell double sum at q -> 0 (theta_q ratios -> rational factors); the
    # mass exponent follows the generating-function ordering n_i - n_j for
    # i < j, which is the one the determinant construction reproduces
    cap = 14 if p6d != 0 else 1
    total = 0j
    for n0 in range(-cap, cap + 1):
        for n1 in range(-cap, cap + 1):
            w = p6d ** (n0 * (n0 - 1) // 2 + n1 * (n1 - 1) // 2) if p6d != 0 else (
                1 if (n0 in (0, 1) and n1 in (0, 1)) else 0)
            if w == 0:
                continue
            w *= (-cmath.exp(-beta * x_probe)) ** (n0 + n1)
            w *= (1 - cmath.exp(beta * m * (n0 - n1)) * x_ratio) / (1 - x_ratio)
            w *= cmath.exp(beta * (n0 * p0 + n1 * p1))
            total += w
    dell_resid = abs(total - D(x_probe)) / max(abs(total), 1e-30)

    # p6d -> 0 reduction to the tRS generating function (same mass-exponent
    # convention as above, i.e. the displayed bracket with p0 <-> p1 restored)
    ebx = cmath.exp(-beta * x_probe)
    d5 = (
        1
        - ebx * (
            (1 - cmath.exp(beta * m) * x_ratio) / (1 - x_ratio) * cmath.exp(beta * p0)
            + (1 - cmath.exp(-beta * m) * x_ratio) / (1 - x_ratio) * cmath.exp(beta * p1)
        )
        + ebx**2 * cmath.exp(beta * (p0 + p1))
    )

    def D_at(p6):
        def c0(x):
            return theta(cmath.exp(beta * (p0 - x)), p6, "product") if p6 != 0 else 1 - cmath.exp(beta * (p0 - x))

        def c1(x):
            v = theta(cmath.exp(beta * (p1 - x)), p6, "product") if p6 != 0 else 1 - cmath.exp(beta * (p1 - x))
            return v / (1 - x_ratio)

        return c0(x_probe) * c1(x_probe) - x_ratio * c0(x_probe - m) * c1(x_probe + m)

    five_d_resid = abs(D_at(0) - d5) / max(abs(d5), 1e-30)
    scale = max(abs(D(x_probe)), 1e-30)
    return {
        "det_rel_error": det_resid / scale,
        "dell_rel_error": dell_resid,
        "five_d_rel_error": five_d_resid,
    }


# ---------------------------------------------------------------------------
# Isospectral flow
# ---------------------------------------------------------------------------


def flow_conservation(pt: PhaseSpacePoint, z0: complex, z1: complex,
                      t_end: float, dt: float, grad_step: float = 1e-6) -> dict:
    """Integrate the tr L(z0)^2/2 flow with RK4 and report the drift of the
    eigenvalues of L(z1); {p_i, x_j} = delta_ij x_j means q = ln x is
    canonical."""

    def hamiltonian(q, p):
        point = PhaseSpacePoint(np.exp(q), p, pt.m, pt.nome, kernel=pt.kernel)
        L = krichever_lax(point, z0)
        return 0.5 * np.trace(L @ L).real

    def rhs(state):
        n = pt.n
        q, p = state[:n], state[n:]
        dq = np.zeros(n)
        dp = np.zeros(n)
        for i in range(n):
            ep = np.zeros(n)
            ep[i] = grad_step
            dq[i] = (hamiltonian(q, p + ep) - hamiltonian(q, p - ep)) / (2 * grad_step)
            dp[i] = -(hamiltonian(q + ep, p) - hamiltonian(q - ep, p)) / (2 * grad_step)
        return np.concatenate([dq, dp])

    def eigs(q, p):
        point = PhaseSpacePoint(np.exp(q), p, pt.m, pt.nome, kernel=pt.kernel)
        return np.sort_complex(np.linalg.eigvals(krichever_lax(point, z1)))

    q = np.log(pt.x.real.astype(float))
    p = pt.p.real.astype(float)
    state = np.concatenate([q, p])
    ref = eigs(q, p)
    scale = np.max(np.abs(ref))
    steps = int(round(t_end / dt)) if t_end > 0 else 0
    drift = 0.0
    for _ in range(steps):
        k1 = rhs(state)
        k2 = rhs(state + 0.5 * dt * k1)
        k3 = rhs(state + 0.5 * dt * k2)
        k4 = rhs(state + dt * k3)
        state = state + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        xs = np.exp(state[: pt.n])
        if np.any(np.abs(fugacity_ratios(xs.astype(complex), pt.nome)) >= 1):
            raise ChamberExit("flow left the stability chamber")
    now = eigs(state[: pt.n], state[pt.n:])
    drift = float(np.max(np.abs(now - ref))) / scale
    return {"eig_drift": drift, "final_state": state, "steps": steps}
