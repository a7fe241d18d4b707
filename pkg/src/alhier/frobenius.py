"""The generalized Frobenius manifold underlying the lattice hierarchy.

Flat coordinates (v1, v2), potential F = v1^2 v2 / 2 + v1 e^{v2}
+ v1^2 log(v1) / 2, antidiagonal flat metric, non-flat unity
e = (v1 d_{v1} - d_{v2}) / (v1 - e^{v2}), Euler field E = v1 d_{v1} + d_{v2}.

The deformed flat coordinates theta_{alpha,k} are produced two independent
ways: by integrating the gradient recursion with quasi-homogeneity fixing the
constants, and by exact residues of the superpotential
lambda(p) = p + v1 + v1 e^{v2} (p - e^{v2})^{-1} in its three charts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .ring import (
    EV2,
    LOGV1,
    LOG_EV2_M_V1,
    ONE,
    SQRT_V1EV2,
    UINV,
    V1,
    V2,
    ZERO,
    RingElem,
    binom_frac,
    diff,
    integrate_v1,
    integrate_v2,
    jet,
    total_x_derivative,
)

Label = tuple[int, int]


def potential() -> RingElem:
    return (
        V1 ** 2 * V2 * Fraction(1, 2)
        + V1 * EV2
        + V1 ** 2 * LOGV1 * Fraction(1, 2)
    )


def euler(e: RingElem) -> RingElem:
    """Action of the Euler field E = v1 d_{v1} + d_{v2}."""
    return V1 * diff(e, "v1") + diff(e, "v2")


def unity_components() -> tuple[RingElem, RingElem]:
    """e = (v1 d_{v1} - d_{v2}) / (v1 - e^{v2})."""
    return V1 * UINV, -UINV


def c_tensor() -> dict[int, dict[tuple[int, int], RingElem]]:
    """Structure constants with the first index raised: c[gamma][(a,b)].

    The metric is antidiagonal, so raising swaps 1 <-> 2.
    """
    F = potential()
    vnames = {1: "v1", 2: "v2"}
    lowered: dict[tuple[int, int, int], RingElem] = {}
    for a in (1, 2):
        da = diff(F, vnames[a])
        for b in (1, 2):
            dab = diff(da, vnames[b])
            for g in (1, 2):
                lowered[(a, b, g)] = diff(dab, vnames[g])
    return {
        1: {(a, b): lowered[(a, b, 2)] for a in (1, 2) for b in (1, 2)},
        2: {(a, b): lowered[(a, b, 1)] for a in (1, 2) for b in (1, 2)},
    }


def inner_grad(f: RingElem, g: RingElem) -> RingElem:
    """<grad f, grad g> with the antidiagonal metric."""
    return diff(f, "v1") * diff(g, "v2") + diff(f, "v2") * diff(g, "v1")


@dataclass(frozen=True)
class FrobeniusData:
    """Constant structure data of the manifold (charge d = 1)."""

    eta: tuple[tuple[int, int], tuple[int, int]] = ((0, 1), (1, 0))
    mu: tuple[Fraction, Fraction] = (Fraction(-1, 2), Fraction(1, 2))
    r1: tuple[tuple[int, int], tuple[int, int]] = ((0, 0), (2, 0))
    charge: int = 1

    @property
    def phi(self) -> RingElem:
        return V2 - LOG_EV2_M_V1

    @property
    def intersection_form(self) -> tuple[tuple[RingElem, RingElem], tuple[RingElem, RingElem]]:
        s = V1 + EV2
        return ((2 * V1 * EV2, s), (s, RingElem.const(2)))


class IntegrabilityError(ArithmeticError):
    """The gradient system failed a mixed-partials or homogeneity check."""


class ThetaTable:
    """Deformed flat coordinates theta_{alpha,k}, computed on demand.

    alpha in {1, 2} for k >= 0 via the gradient recursion; alpha = 0 for all
    integer k (positive levels by recursion from phi, negative by exact
    residue of the superpotential at p = 0).
    """

    def __init__(self) -> None:
        self._c = c_tensor()
        self._entries: dict[Label, RingElem] = {
            (1, 0): V2,
            (2, 0): V1,
            (0, 0): FrobeniusData().phi,
        }

    def get(self, alpha: int, k: int) -> RingElem:
        if alpha in (1, 2) and k < 0:
            return ZERO
        key = (alpha, k)
        if key not in self._entries:
            if alpha == 0 and k < 0:
                self._entries[key] = theta_negative_residue(-k)
            else:
                prev = self.get(alpha, k - 1)
                extra = ZERO
                if alpha == 1:
                    extra = 2 * self.get(2, k - 1)
                elif alpha == 0:
                    extra = self.get(2, k - 1)
                weight = k + 1 if alpha == 2 else k
                self._entries[key] = self._integrate_step(prev, weight, extra)
        return self._entries[key]

    def grad(self, alpha: int, k: int) -> tuple[RingElem, RingElem]:
        th = self.get(alpha, k)
        return diff(th, "v1"), diff(th, "v2")

    def _integrate_step(self, prev: RingElem, weight: int, extra: RingElem) -> RingElem:
        c = self._c
        hess = {
            (a, b): c[1][(a, b)] * diff(prev, "v1") + c[2][(a, b)] * diff(prev, "v2")
            for a in (1, 2)
            for b in (1, 2)
        }
        grad1 = integrate_v1(hess[(1, 1)])
        resid1 = hess[(1, 2)] - diff(grad1, "v2")
        if not diff(resid1, "v1").is_zero():
            raise IntegrabilityError("v1-dependent residual in grad_1 integration")
        grad1 = grad1 + integrate_v2(resid1)

        grad2 = integrate_v1(hess[(2, 1)])
        resid2 = hess[(2, 2)] - diff(grad2, "v2")
        if not diff(resid2, "v1").is_zero():
            raise IntegrabilityError("v1-dependent residual in grad_2 integration")
        grad2 = grad2 + integrate_v2(resid2)

        x = integrate_v1(grad1)
        resid = grad2 - diff(x, "v2")
        if not diff(resid, "v1").is_zero():
            raise IntegrabilityError("mixed partials disagree in potential integration")
        x = x + integrate_v2(resid)

        # fix the global constant by the quasi-homogeneity relation
        # euler(theta) = weight * theta + extra with theta = x + C
        gap = euler(x) - weight * x - extra
        if not gap.is_constant():
            raise IntegrabilityError(f"non-constant homogeneity defect: {gap}")
        return x + RingElem.const(gap.constant_value() / weight)


# -- residue representations ---------------------------------------------------


def _series_mul(a: dict[int, RingElem], b: dict[int, RingElem], order: int) -> dict[int, RingElem]:
    out: dict[int, RingElem] = {}
    for i, ci in a.items():
        for j, cj in b.items():
            if i + j <= order:
                out[i + j] = out.get(i + j, ZERO) + ci * cj
    return {n: c for n, c in out.items() if not c.is_zero()}


def _series_pow_binom(d: dict[int, RingElem], exp: int, order: int) -> dict[int, RingElem]:
    """(1 + d)^exp truncated, d with strictly positive valuation."""
    out: dict[int, RingElem] = {0: ONE}
    power: dict[int, RingElem] = {0: ONE}
    for j in range(1, order + 1):
        power = _series_mul(power, d, order)
        if not power:
            break
        for n, c in power.items():
            out[n] = out.get(n, ZERO) + binom_frac(exp, j) * c
    return out


def theta_negative_residue(k: int) -> RingElem:
    """theta_{0,-k} = (-1)^k (k-1)! Res_{p=0} lambda^{-k} dp / p.

    In the chart at p = 0, lambda = p (1 - v1 e^{-v2}) - v1 sum_{j>=2} p^j
    e^{-j v2}; the residue is the coefficient of p^k in the inverted series.
    """
    if k < 1:
        raise ValueError("k >= 1")
    c1_inv = -EV2 * UINV
    d = {j: V1 * EV2 ** (-j) * UINV for j in range(1, k + 1)}
    inv = _series_pow_binom(d, -k, k)
    res = inv.get(k, ZERO) * c1_inv ** k
    return Fraction((-1) ** k * _fact(k - 1)) * res


def theta2_residue(k: int) -> RingElem:
    """theta_{2,k} from the residue of lambda^{k+1} dp/p at p = infinity."""
    if k < 0:
        raise ValueError("k >= 0")
    base: dict[int, RingElem] = {0: ONE, 1: V1}
    for j in range(1, k + 1):
        base[j + 1] = V1 * EV2 ** j
    power: dict[int, RingElem] = {0: ONE}
    for _ in range(k + 1):
        power = _series_mul(power, base, k + 1)
    return power.get(k + 1, ZERO) * Fraction(1, _fact(k + 1))


def _lambda_pow_over_p(k: int) -> dict[int, RingElem]:
    """Laurent coefficients of lambda^k / p = t^{-k} (v1+t)^k (e^{v2}+t)^{k-1}
    in the chart t = p - e^{v2}."""
    poly1 = {j: V1 ** (k - j) * Fraction(_binom(k, j)) for j in range(k + 1)}
    poly2 = {j: EV2 ** (k - 1 - j) * Fraction(_binom(k - 1, j)) for j in range(k)}
    prod: dict[int, RingElem] = {}
    for i, ci in poly1.items():
        for j, cj in poly2.items():
            prod[i + j] = prod.get(i + j, ZERO) + ci * cj
    return {n - k: c for n, c in prod.items()}


def _harmonic(k: int) -> Fraction:
    return sum((Fraction(1, j) for j in range(1, k + 1)), Fraction(0))


def theta01_residue(alpha: int, k: int) -> RingElem:
    """theta_{0,k} or theta_{1,k} (k >= 1) by residue at p = e^{v2}.

    Uses the log^+ expansion (and additionally log^- for alpha = 1) together
    with the harmonic-number subtraction.
    """
    if k < 1:
        raise ValueError("k >= 1")
    lp = _lambda_pow_over_p(k)
    hk = _harmonic(k)
    if alpha == 0:
        s0 = V2 - RingElem.const(hk)
    elif alpha == 1:
        s0 = V2 + LOGV1 - RingElem.const(2 * hk)
    else:
        raise ValueError("alpha in {0, 1}")

    def s_coeff(n: int) -> RingElem:
        if n == 0:
            return s0
        j = abs(n)
        sign = Fraction((-1) ** (j + 1), j)
        if n > 0:
            out = EV2 ** (-j) * sign
            if alpha == 1:
                out = out + V1 ** (-j) * sign
        else:
            out = V1 ** j * sign
            if alpha == 1:
                out = out + EV2 ** j * sign
        return out

    res = ZERO
    for m, c in lp.items():
        res = res + c * s_coeff(-1 - m)
    return res * Fraction(1, _fact(k))


def theta_by_residue(alpha: int, k: int) -> RingElem:
    """Any theta from its superpotential-residue representation."""
    if alpha == 2:
        return theta2_residue(k)
    if alpha == 1:
        if k == 0:
            return V2
        return theta01_residue(1, k)
    if alpha == 0:
        if k == 0:
            return FrobeniusData().phi
        if k > 0:
            return theta01_residue(0, k)
        return theta_negative_residue(-k)
    raise ValueError("alpha in {0, 1, 2}")


# -- Principal Hierarchy flows and two-point functions ---------------------------


def principal_flow(table: ThetaTable, label: Label) -> tuple[RingElem, RingElem]:
    """(dv1/dt, dv2/dt) for the flow labelled (beta, q): eta-raised x-gradient
    of theta_{beta,q+1}."""
    beta, q = label
    th = table.get(beta, q + 1)
    return total_x_derivative(diff(th, "v2")), total_x_derivative(diff(th, "v1"))


def prolong_v(e: RingElem, flow: tuple[RingElem, RingElem]) -> RingElem:
    """d(e)/dt by evolutionary prolongation over the v-jets."""
    out = ZERO
    dv = {"v1": flow[0], "v2": flow[1]}
    orders = {}
    for g in e.generators():
        if g[0] == "D" and g[1] in ("v1", "v2") and g[2] >= 1:
            orders[g] = True
    # order-0 dependence enters through diff; jets of order >= 1 by x-derivatives
    out = diff(e, "v1") * dv["v1"] + diff(e, "v2") * dv["v2"]
    for g in orders:
        var, s = g[1], g[2]
        pd = e.part_gen(g)
        if not pd.is_zero():
            d = dv[var]
            for _ in range(s):
                d = total_x_derivative(d)
            out = out + pd * d
    return out


def omega0(table: ThetaTable, la: Label, lb: Label) -> RingElem:
    """Two-point function Omega^0_{la; lb} of the Principal Hierarchy."""
    (a, k), (b, l) = la, lb
    if b == 0 and a != 0:
        return omega0(table, lb, la)
    if b in (1, 2) or (a == 0 and b == 0 and l >= 0):
        if b in (1, 2) and l < 0:
            raise ValueError(f"label {lb} outside the index set")
        out = ZERO
        top = l if b in (1, 2) else l - 1
        for m in range(0, top + 1):
            s = Fraction((-1) ** (m % 2))
            out = out + s * inner_grad(table.get(a, k + 1 + m), table.get(b, l - m))
        if a == 0 and b == 0:
            out = out + Fraction((-1) ** (l % 2)) * table.get(0, k + l)
        return out
    # both in the 0-family with l < 0: downward telescoping of the same sum
    out = ZERO
    for m in range(0, -l):
        s = Fraction((-1) ** (m % 2))
        out = out + s * inner_grad(table.get(0, k - m), table.get(0, l + 1 + m))
    return out + Fraction((-1) ** (l % 2)) * table.get(0, k + l)


# -- canonical coordinates ---------------------------------------------------------


def canonical_coords() -> tuple[RingElem, RingElem]:
    """u1, u2 = e^{v2} + v1 +/- 2 sqrt(v1 e^{v2})."""
    s = V1 + EV2
    return s + 2 * SQRT_V1EV2, s - 2 * SQRT_V1EV2


def flat_coords(u1: RingElem, u2: RingElem, sqrt_u1u2: RingElem) -> tuple[RingElem, RingElem]:
    """Invert the canonical-coordinate map given an exact square-root witness.

    v1 = ((sqrt(u1) - sqrt(u2)) / 2)^2 = (u1 + u2 - 2 sqrt(u1 u2)) / 4 and
    e^{v2} = (u1 + u2 + 2 sqrt(u1 u2)) / 4; the witness must square to u1*u2.
    Returns (v1, e^{v2}).
    """
    if sqrt_u1u2 * sqrt_u1u2 != u1 * u2:
        raise ValueError("square-root witness does not square to u1*u2")
    quarter = Fraction(1, 4)
    return (u1 + u2 - 2 * sqrt_u1u2) * quarter, (u1 + u2 + 2 * sqrt_u1u2) * quarter


def _fact(n: int) -> int:
    out = 1
    for i in range(2, n + 1):
        out *= i
    return out


def _binom(n: int, j: int) -> int:
    if j < 0 or j > n:
        return 0
    out = 1
    for i in range(j):
        out = out * (n - i) // (i + 1)
    return out
