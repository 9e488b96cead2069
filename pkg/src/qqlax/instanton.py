"""Fixed-point localization sums: measures, partition functions, Y and
qq-character averages, pole-cancellation checks, and the orbifolded Y's."""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .characters import (
    ParamAssignment,
    VirtualCharacter,
    Weight,
    orbifold_tangent_character,
    pleth_exp,
    tangent_character,
)
from .elliptic import vartheta
from .errors import InvalidData, NonGenericX
from .opalgebra import FugacitySeries, mdeg_unit, mdeg_zero
from .partitions import Partition, TupleOfPartitions, enumerate_partitions, enumerate_tuples


@dataclass
class InstantonConfig:
    n_colors: int
    order: int
    params: ParamAssignment
    fugacity: complex = 0.1 + 0j
    fugacities: tuple | None = None  # orbifold couplings q_0..q_{N-1}

    def __post_init__(self):
        if self.order < 0:
            raise InvalidData("order must be >= 0")
        if self.fugacities is not None and len(self.fugacities) != self.n_colors:
            raise InvalidData("need one fugacity per color")


def _adjoint_factor(n: int) -> VirtualCharacter:
    return VirtualCharacter.one(n) - VirtualCharacter.monomial(Weight.m(n))


def measure_weight(Lam: TupleOfPartitions, cfg: InstantonConfig, orbifold: bool = False) -> complex:
    """E[(1 - e^{beta m}) T*M|_Lambda] without the fugacity monomial."""
    n = cfg.n_colors
    tangent = orbifold_tangent_character(Lam, n) if orbifold else tangent_character(Lam, n)
    return pleth_exp(_adjoint_factor(n) * tangent, cfg.params)


def measure(Lam: TupleOfPartitions, cfg: InstantonConfig, orbifold: bool = False) -> complex:
    """Unnormalized fixed-point weight including its fugacity monomial."""
    w = measure_weight(Lam, cfg, orbifold)
    if orbifold:
        qs = cfg.fugacities or (cfg.fugacity,) * cfg.n_colors
        for omega in range(cfg.n_colors):
            w *= qs[omega] ** Lam.d_omega(omega)
        return w
    return w * cfg.fugacity**Lam.size


def partition_function(cfg: InstantonConfig, orbifold: bool = False) -> FugacitySeries:
    """Z as a truncated series in the fugacity (or the N orbifold fugacities)."""
    n_vars = cfg.n_colors if orbifold else 1
    out = FugacitySeries(n_vars, cfg.order)
    for total in range(cfg.order + 1):
        for Lam in enumerate_tuples(cfg.n_colors, total):
            w = measure_weight(Lam, cfg, orbifold)
            if orbifold:
                key = tuple(Lam.d_omega(om) for om in range(cfg.n_colors))
            else:
                key = (total,)
            out.coeffs[key] = out.coeffs.get(key, 0) + w
    return out


# ---------------------------------------------------------------------------
# Y-observable and qq-character at fixed points
# ---------------------------------------------------------------------------


def y_fixed_point(x: complex, Lam: TupleOfPartitions, params: ParamAssignment) -> complex:
    """Y(x)|_Lambda as the explicit product of kernel factors."""
    ell = params.elliptic
    e1, e2 = params.e1, params.e2
    eps = e1 + e2
    out = 1 + 0j
    for alpha in range(1, params.n + 1):
        out *= vartheta(x - params.a[alpha - 1], ell)
    for alpha, a, b in Lam.boxes():
        c = e1 * (a - 1) + e2 * (b - 1)
        y = x - params.a[alpha - 1] - c
        out *= vartheta(y - e1, ell) * vartheta(y - e2, ell)
        out /= vartheta(y, ell) * vartheta(y - eps, ell)
    return out


def s_kernel(y: complex, params: ParamAssignment) -> complex:
    """S(y) = theta(y+e1) theta(y+e2) / (theta(y) theta(y+e1+e2))."""
    ell = params.elliptic
    return (
        vartheta(y + params.e1, ell)
        * vartheta(y + params.e2, ell)
        / (vartheta(y, ell) * vartheta(y + params.e1 + params.e2, ell))
    )


def s_factor(lam: Partition, params: ParamAssignment) -> complex:
    """S_lambda = prod over boxes of S(m h + eps a), hook and arm lengths."""
    eps = params.e1 + params.e2
    out = 1 + 0j
    for i, j in lam.boxes():
        out *= s_kernel(params.m * lam.hook(i, j) + eps * lam.arm(i, j), params)
    return out


def sigma_box(i: int, j: int, params: ParamAssignment) -> complex:
    """sigma_(ij) = e3 (i-1) + e4 (j-1) = m (i-j) + eps (1-j)."""
    eps = params.e1 + params.e2
    return params.m * (i - j) + eps * (1 - j)


def fugacity_dressing(params: ParamAssignment) -> complex:
    """Per-box dressing of the qq-character fugacity relative to the measure.

    Pole cancellation fixes it to e^{-N beta m} for the K-theoretic kernels
    (residue pairing between (lam, Lam+box) and (lam+box, Lam) terms); it
    degenerates to 1 in the 4d limit, where the uniform formula needs none.
    """
    if params.elliptic.kernel == "4d":
        return 1.0 + 0j
    return cmath.exp(-params.n * params.elliptic.beta * params.m)


def qq_char_term(x: complex, lam: Partition, Lam: TupleOfPartitions, params: ParamAssignment) -> complex:
    """The lambda-summand of the qq-character at a fixed point (sans q^|lam|)."""
    eps = params.e1 + params.e2
    out = y_fixed_point(x + eps, Lam, params) * s_factor(lam, params)
    out *= fugacity_dressing(params) ** lam.size
    for i, j in lam.boxes():
        s = sigma_box(i, j, params)
        out *= y_fixed_point(x + s + params.m + eps, Lam, params)
        out *= y_fixed_point(x + s - params.m, Lam, params)
        out /= y_fixed_point(x + s + eps, Lam, params)
        out /= y_fixed_point(x + s, Lam, params)
    return out


def observable_average(obs: str, x: complex, cfg: InstantonConfig,
                       drop_lambdas: tuple = ()) -> FugacitySeries:
    """<Y(x)> or <X(x)> as a truncated series in the instanton fugacity.

    drop_lambdas removes chosen lambda-summands from the qq-character; this
    is only used by the deliberate-mutation negative control.
    """
    if obs not in ("Y", "QQChar"):
        raise InvalidData(f"unknown observable {obs!r}")
    loci = candidate_pole_loci(cfg, cfg.order)
    shifts = _probe_shifts(cfg) if obs == "QQChar" else (0j,)
    for x0, _w in loci:
        for sh in shifts:
            if abs(x + sh - x0) < 1e-8:
                raise NonGenericX(f"x = {x} within 1e-8 of pole locus {x0}")
    num = FugacitySeries(1, cfg.order)
    den = FugacitySeries(1, cfg.order)
    for total in range(cfg.order + 1):
        for Lam in enumerate_tuples(cfg.n_colors, total):
            w = measure_weight(Lam, cfg)
            den.coeffs[(total,)] = den.coeffs.get((total,), 0) + w
            if obs == "Y":
                num.coeffs[(total,)] = num.coeffs.get((total,), 0) + w * y_fixed_point(x, Lam, cfg.params)
            else:
                for k in range(cfg.order - total + 1):
                    for lam in enumerate_partitions(k):
                        if lam.rows in drop_lambdas:
                            continue
                        val = w * qq_char_term(x, lam, Lam, cfg.params)
                        key = (total + k,)
                        num.coeffs[key] = num.coeffs.get(key, 0) + val
    return num.divide(den)


def _probe_shifts(cfg: InstantonConfig):
    """x-shifts at which Y enters the qq-character up to the working order."""
    eps = cfg.params.e1 + cfg.params.e2
    shifts = {eps}
    for k in range(cfg.order + 1):
        for lam in enumerate_partitions(k):
            for i, j in lam.boxes():
                s = sigma_box(i, j, cfg.params)
                shifts.update({s + cfg.params.m + eps, s - cfg.params.m, s + eps, s})
    return tuple(shifts)


def candidate_pole_loci(cfg: InstantonConfig, order: int) -> list[tuple[complex, Weight]]:
    """Every x-value at which some denominator theta factor of <X(x)> can
    vanish, up to the given fugacity order; deduped on the exact weight."""
    p = cfg.params
    n = cfg.n_colors
    eps = p.e1 + p.e2
    shifts = _probe_shifts(cfg)
    seen: dict[tuple, complex] = {}
    out = []
    for total in range(order + 1):
        for Lam in enumerate_tuples(n, total):
            # Denominator factors of Y(x + shift)|_Lambda: theta(x+s-a-c) and
            # theta(x+s-a-c-eps); Y's in ratio denominators also put their
            # numerator factors downstairs: theta(x+s-a) and the box numerators.
            for alpha, a, b in Lam.boxes():
                base = p.a[alpha - 1] + p.e1 * (a - 1) + p.e2 * (b - 1)
                wkey_c = (alpha, a - 1, b - 1)
                for sh in shifts:
                    for extra, tag in ((0j, "c"), (eps, "ce"), (p.e1, "n1"), (p.e2, "n2")):
                        key = (wkey_c, tag, round((sh).real, 12), round((sh).imag, 12))
                        x0 = base + extra - sh
                        if key not in seen:
                            seen[key] = x0
                            out.append((x0, key))
            for alpha in range(1, n + 1):
                for sh in shifts:
                    key = ((alpha,), "w", round(sh.real, 12), round(sh.imag, 12))
                    if key not in seen:
                        x0 = p.a[alpha - 1] - sh
                        seen[key] = x0
                        out.append((x0, key))
    # dedupe numerically coincident loci
    uniq: list[tuple[complex, object]] = []
    for x0, key in out:
        if all(abs(x0 - y0) > 1e-9 for y0, _ in uniq):
            uniq.append((x0, key))
    return uniq


def check_pole_cancellation(cfg: InstantonConfig, order: int, radius: float = 1e-2,
                            n_points: int = 32, drop_lambdas: tuple = ()) -> dict:
    """Contour-integrate each fugacity coefficient of <X(x)> around every
    candidate pole; reports the worst |integral| over the typical scale."""
    loci = candidate_pole_loci(cfg, order)
    worst = 0.0
    worst_at = None
    records = []
    run_cfg = InstantonConfig(cfg.n_colors, order, cfg.params, cfg.fugacity, cfg.fugacities)
    for x0, key in loci:
        nodes = [x0 + radius * cmath.exp(2j * cmath.pi * k / n_points) for k in range(n_points)]
        vals = []
        for xp in nodes:
            vals.append(observable_average("QQChar", xp, run_cfg, drop_lambdas=drop_lambdas))
        for k in range(order + 1):
            coefs = np.array([v[(k,)] for v in vals])
            integral = np.mean(coefs * (np.array(nodes) - x0))
            scale = radius * float(np.max(np.abs(coefs))) + 1e-300
            rel = abs(integral) / scale
            records.append({"locus": x0, "order": k, "rel_residual": rel})
            if rel > worst:
                worst, worst_at = rel, (x0, k)
    return {"max_rel_residual": worst, "worst": worst_at, "records": records,
            "n_loci": len(loci)}


# ---------------------------------------------------------------------------
# Orbifolded Y-observables
# ---------------------------------------------------------------------------


def y_orbifold_fixed_point(omega: int, x: complex, Lam: TupleOfPartitions,
                           params: ParamAssignment) -> complex:
    """Y_w(x)|_Lambda: theta(x - a_w) times the two delta_N-selected ratio
    factors per box."""
    n = params.n
    ell = params.elliptic
    e1, e2 = params.e1, params.e2
    eps = e1 + e2
    a_om = params.a[(omega - 1) % n]  # u_omega with u_0 = u_N
    out = vartheta(x - a_om, ell)
    for alpha, a, b in Lam.boxes():
        c = e1 * (a - 1) + e2 * (b - 1)
        y = x - params.a[alpha - 1] - c
        if (alpha + b - 1 - omega) % n == 0:
            out *= vartheta(y - e1, ell) / vartheta(y, ell)
        if (alpha + b - omega) % n == 0:
            out *= vartheta(y - e2, ell) / vartheta(y - eps, ell)
    return out


def y_orbifold_product(x: complex, Lam: TupleOfPartitions, params: ParamAssignment) -> complex:
    """prod_w Y_w(x + w eps_2)|_Lambda."""
    return np.prod([
        y_orbifold_fixed_point(om, x + om * params.e2, Lam, params)
        for om in range(params.n)
    ])


def y_unorbifolded_reference(x: complex, Lam: TupleOfPartitions, params: ParamAssignment) -> complex:
    """Y(x) at the fixed point matching Lambda in the N eps_2 convention.

    Telescoping the chainsaw characters in prod_w Y_w(x + w eps_2) leaves
    only the V_{N-1} component, so on the unorbifolded side eps_2 -> N eps_2,
    a_alpha -> a_alpha - (alpha mod N) eps_2, and each diagram keeps every
    N-th row starting from row N - (alpha mod N).
    """
    n = params.n
    big = ParamAssignment(
        x=params.x,
        a=tuple(params.a[al - 1] - (al % n) * params.e2 for al in range(1, n + 1)),
        e1=params.e1,
        e2=n * params.e2,
        m=params.m,
        elliptic=params.elliptic,
    )
    decimated = []
    for al in range(1, n + 1):
        lam = Lam[al - 1]
        r = al % n
        rows = []
        s = 1
        while True:
            b = s * n - r if r else s * n
            if lam.row(b) == 0:
                break
            rows.append(lam.row(b))
            s += 1
        decimated.append(Partition(rows))
    return y_fixed_point(x, TupleOfPartitions(decimated), big)
