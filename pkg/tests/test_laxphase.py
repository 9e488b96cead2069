import cmath

import numpy as np
import pytest

from qqlax.elliptic import e1
from qqlax.errors import ChamberError, DegeneratePoint
from qqlax.factorization import chamber_point
from qqlax.laxphase import (
    PhaseSpacePoint,
    build_d_classical,
    check_d_linearity,
    check_sixd_transformation,
    chi_classical,
    cm_momentum_shift,
    dell_generating,
    dell_n2_checks,
    det_ratio_transformation_check,
    dinf_sum_form,
    extract_components,
    flow_conservation,
    lax_cm,
    lax_quasi_periodicity,
    lax_rs,
    residue_at_one,
    resolve_rs_orientation,
    rs_residue_check,
    rs_to_cm_limit,
    scalar_bilateral_det_check,
    spectral_closure_check,
    spectral_fourier_check,
    trace_identity_check,
    u_matrix,
)

Q = 0.1
Z = 0.73 + 0.29j
P3 = np.array([0.31 - 0.12j, -0.22 + 0.4j, 0.17 + 0.05j])


def cm_point(n=3, seed=2, m=0.37 + 0.11j):
    return PhaseSpacePoint(chamber_point(n, Q, seed=seed), P3[:n], m=m, nome=Q, kernel="4d")


def rs_point(n=2, seed=5, m=0.23 + 0.07j, beta=0.9):
    return PhaseSpacePoint(chamber_point(n, Q, seed=seed), P3[:n], m=m, nome=Q,
                           beta=beta, kernel="5d")


def test_chamber_validation():
    with pytest.raises(ChamberError):
        PhaseSpacePoint(np.array([1.0, 2.0]), np.zeros(2), m=0.1, nome=0.1)


def test_chi_classical_linear_in_x_4d():
    pt = cm_point()
    vals = [chi_classical(1, x, pt) for x in (0.0, 1.0, 2.7 - 0.4j)]
    slope = vals[1] - vals[0]
    assert abs(vals[2] - vals[0] - (2.7 - 0.4j) * slope) < 1e-13


def test_b_factor_trivial_at_zero_nome():
    # q = 0, omega = 0: empty product
    pt = PhaseSpacePoint(np.array([1.0, 0.4]), np.zeros(2), m=0.1, nome=0.0)
    assert abs(chi_classical(0, 1.3, pt) - (1.3 - 0)) < 1e-14


def test_d_linearity_4d_and_affine_5d():
    assert check_d_linearity(cm_point(), Z) < 1e-10
    assert check_d_linearity(rs_point(), Z) < 1e-10


def test_d1_from_difference_matches_product():
    pt = cm_point()
    comps = extract_components(pt, Z)
    scale = np.max(np.abs(comps["D1"]))
    assert np.max(np.abs(comps["D1"] - comps["D1_fd"])) / scale < 1e-9


def test_dinf_two_routes():
    pt = rs_point()
    comps = extract_components(pt, Z)
    alt = dinf_sum_form(pt, Z)
    assert np.max(np.abs(alt - comps["Dinf"])) / np.max(np.abs(alt)) < 1e-12


def test_u_matrix_defining_vs_nested():
    for n, seed in ((1, 1), (2, 4), (3, 2)):
        pt = cm_point(n=n, seed=seed)
        um = u_matrix(pt)
        assert um["rel_mismatch"] < 1e-12
        resid = np.max(np.abs(np.diag(um["U"]) - um["u"]))
        assert resid == 0.0


def test_u_matrix_n1_euler():
    from qqlax.elliptic import euler_product

    pt = cm_point(n=1, seed=1)
    um = u_matrix(pt)
    assert abs(um["u"][0] - euler_product(Q, 64)) < 1e-12


def test_u_lax_trig_limit_n2():
    # q -> 0: the residue-normalized gauge is proportional to (1 - x1/x0, 1)
    x = np.array([1.0, 0.37 + 0.05j])
    pt = PhaseSpacePoint(x, np.zeros(2), m=0.1, nome=1e-8)
    u = u_matrix(pt)["u_lax"]
    ratio = u[0] / u[1]
    assert abs(ratio - (1 - x[1] / x[0])) < 1e-6


def test_cm_three_constructions_agree():
    for n, seed in ((2, 7), (3, 2)):
        pt = cm_point(n=n, seed=seed)
        L1 = lax_cm(pt, Z, "FromD")
        L2 = lax_cm(pt, Z, "ProductFormula")
        L3 = lax_cm(pt, Z, "Explicit")
        scale = np.max(np.abs(L3))
        assert np.max(np.abs(L1 - L3)) / scale < 1e-7
        assert np.max(np.abs(L2 - L3)) / scale < 1e-7


def test_cm_residue_is_rank_one_mass():
    pt = cm_point()
    res = residue_at_one(lambda zz: lax_cm(pt, zz, "FromD"))
    assert np.max(np.abs(res + pt.m * np.ones((3, 3)))) / abs(pt.m) < 1e-7


def test_cm_quasi_periodicity():
    assert lax_quasi_periodicity(cm_point(), Z) < 1e-8


def test_cm_m_zero_is_free():
    pt = cm_point(m=0.0)
    L = lax_cm(pt, Z, "FromD")
    assert np.max(np.abs(L - np.diag(pt.p))) < 1e-10


def test_momentum_shift_properties():
    pt = cm_point()
    d = cm_momentum_shift(pt)
    assert abs(np.sum(d) - pt.n * pt.m) < 1e-12


def test_trace_identity():
    assert trace_identity_check(cm_point(), Z) < 1e-9


def test_spectral_closure():
    assert spectral_closure_check(cm_point(), 1.9 + 0.3j, Z) < 1e-7


def test_det_ratio_transformation():
    assert det_ratio_transformation_check(cm_point(), 0.9 + 0.2j, Z) < 1e-9


def test_scalar_bilateral():
    assert scalar_bilateral_det_check() < 1e-10


def test_spectral_fourier_modes():
    pt = cm_point(n=2, seed=7)
    rep = spectral_fourier_check(pt, 1.3 + 0.21j, n_range=3)
    assert rep["max_rel_error"] < 1e-6
    base = [r for r in rep["records"] if r["n"] == 0][0]
    assert abs(base["ratio"] - 1) < 1e-10
    one = [r for r in rep["records"] if r["n"] == 1][0]
    assert abs(one["ratio"] + Q) < 1e-7


def test_rs_orientation_and_quasi_periodicity():
    pt = rs_point()
    rep = resolve_rs_orientation(pt)
    assert rep["orientation"] == "FromD_orientB"
    assert rep["qp_error_B"] < 1e-8
    assert rep["qp_error_A"] > 1e-3
    assert lax_quasi_periodicity(pt, Z, rs=True) < 1e-8


def test_rs_constructions_agree():
    pt = rs_point()
    R1 = lax_rs(pt, Z, "Matching")
    R2 = lax_rs(pt, Z, "ProductFormula")
    R3 = lax_rs(pt, Z, "Explicit")
    scale = np.max(np.abs(R3))
    assert np.max(np.abs(R1 - R3)) / scale < 1e-7
    assert np.max(np.abs(R2 - R3)) / scale < 1e-7


def test_rs_residue():
    rep = rs_residue_check(rs_point())
    assert rep["rel_error"] < 1e-7
    assert rep["rank1_gap"] < 1e-10


def test_rs_m_zero_is_free():
    pt = rs_point(m=0.0)
    L = lax_rs(pt, Z, "Matching")
    assert np.max(np.abs(L - np.diag(np.exp(pt.beta * pt.p)))) < 1e-9


def test_rs_to_cm_limit():
    pt = PhaseSpacePoint(np.abs(chamber_point(2, 0.05, seed=8)), np.array([0.4, -0.3]),
                         m=0.21, nome=0.05, beta=1.0, kernel="5d")
    assert rs_to_cm_limit(pt, 1.3) < 1e-6


def test_sixd_transformation():
    pt6 = PhaseSpacePoint(chamber_point(2, 0.08, seed=11), P3[:2], m=0.19 + 0.04j,
                          nome=0.08, beta=0.7, nome6d=0.1 + 0.02j, kernel="6d")
    rep = check_sixd_transformation(pt6, 0.4 + 0.1j, Z)
    assert rep["max_rel_error"] < 1e-8
    assert rep["exponent_sign"] == 1


def test_dell_n2():
    rep = dell_n2_checks(p6d=0.09 + 0.01j, beta=0.8, m=0.23, x_ratio=0.45 + 0.1j,
                         p0=0.3, p1=-0.2, x_probe=0.9 + 0.3j, z=1.4 - 0.5j)
    assert rep["det_rel_error"] < 1e-9
    assert rep["dell_rel_error"] < 1e-9
    assert rep["five_d_rel_error"] < 1e-9


def test_dell_generating_matches_n2_product():
    beta, m, r, p0, p1 = 0.8, 0.23, 0.45 + 0.1j, 0.3, -0.2
    p6d = 0.09 + 0.01j
    pt = PhaseSpacePoint(np.array([1.0, r]), np.array([p0, p1]), m=m, nome=0.0,
                         beta=beta, nome6d=p6d, kernel="6d")
    xp = 0.9 + 0.3j
    from qqlax.elliptic import theta

    def chi0(y):
        return theta(cmath.exp(beta * (p0 - y)), p6d, "product")

    def chi1(y):
        return theta(cmath.exp(beta * (p1 - y)), p6d, "product") / (1 - r)

    D = chi0(xp) * chi1(xp) - r * chi0(xp - m) * chi1(xp + m)
    O = dell_generating(pt, cmath.exp(-beta * xp))
    assert abs(O - D) / abs(D) < 1e-9


def test_flow_conservation():
    pt = PhaseSpacePoint(np.array([1.5, 0.6]), np.array([0.35, -0.15]), m=0.3,
                         nome=0.05, kernel="4d")
    rep = flow_conservation(pt, z0=1.7, z1=2.3, t_end=0.1, dt=1e-3)
    assert rep["eig_drift"] < 1e-6
    zero = flow_conservation(pt, z0=1.7, z1=2.3, t_end=0.0, dt=1e-3)
    assert zero["eig_drift"] == 0.0


def test_flow_free_at_zero_mass():
    pt = PhaseSpacePoint(np.array([1.5, 0.6]), np.array([0.35, -0.15]), m=0.0,
                         nome=0.05, kernel="4d")
    rep = flow_conservation(pt, z0=1.7, z1=2.3, t_end=0.05, dt=1e-3)
    assert rep["eig_drift"] < 1e-10


def test_flow_rk4_convergence_order():
    # step halving should shrink the defect against a fine reference like h^4;
    # steps large enough that truncation dominates the gradient noise floor
    pt = PhaseSpacePoint(np.array([1.5, 0.6]), np.array([0.35, -0.15]), m=0.5,
                         nome=0.05, kernel="4d")
    ref = flow_conservation(pt, 1.7, 2.3, t_end=0.4, dt=0.005)["final_state"]
    e1_ = np.max(np.abs(flow_conservation(pt, 1.7, 2.3, 0.4, 0.1)["final_state"] - ref))
    e2_ = np.max(np.abs(flow_conservation(pt, 1.7, 2.3, 0.4, 0.05)["final_state"] - ref))
    ratio = e1_ / e2_
    assert 8 < ratio < 40  # ~16 for 4th order


def test_lax_kernel_guards():
    with pytest.raises(DegeneratePoint):
        lax_cm(rs_point(), Z)
    with pytest.raises(DegeneratePoint):
        lax_rs(cm_point(), Z)
