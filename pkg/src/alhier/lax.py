"""Lax operators of the lattice hierarchy and everything derived from them.

``L = (1 - Q Lambda^{-1})^{-1} (Lambda - P)`` is expanded downward,
``M = (Lambda - P)^{-1} (1 - Q Lambda^{-1})`` upward (M is the formal inverse
of L, which is why the two truncation directions differ).  Hamiltonian
densities come from residues of powers; the evolution of P and Q under each
flow is read off the Lax equation applied to the factored form of L.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .diffop import LaurentOp, commutator, geometric_inverse, minus_part, op_mul, plus_part, residue
from .ring import (
    LOG_Q_OVER_P,
    P,
    Q,
    RingElem,
    ZERO,
    EpsSeries,
    exact_div,
    shift,
    total_x_derivative,
)

FlowLabel = tuple[int, int]


@dataclass(frozen=True)
class Density:
    """Hamiltonian density h_{alpha,level} in the shift picture."""

    alpha: int
    level: int
    value: RingElem


@dataclass(frozen=True)
class FlowRHS:
    """eps-scaled right-hand side of one hierarchy flow: eps dP/dt, eps dQ/dt."""

    label: FlowLabel
    dP: RingElem
    dQ: RingElem


def build_L(depth: int) -> LaurentOp:
    """L exact on [-depth, +inf); upper power 1 with unit coefficient."""
    if depth < 1:
        raise ValueError("depth >= 1")
    binv = geometric_inverse("one_minus_q_laminv", depth + 1)
    return op_mul(binv, LaurentOp.lam(1) - LaurentOp.of(P()))


def build_M(height: int) -> LaurentOp:
    """M exact on (-inf, height]; lowest power -1 with coefficient Q/P."""
    if height < 1:
        raise ValueError("height >= 1")
    ainv = geometric_inverse("lam_minus_p", height + 2, direction="up")
    return op_mul(ainv, LaurentOp.identity() - LaurentOp.lam(-1, Q()))


def b_factor() -> LaurentOp:
    """B = 1 - Q Lambda^{-1} (the left factor of L)."""
    return LaurentOp.identity() - LaurentOp.lam(-1, Q())


def density_positive(p: int) -> Density:
    """h_{2,p} = Res L^{p+1} / (p+1)!"""
    if p < 0:
        raise ValueError("p >= 0")
    L = build_L(p + 2)
    val = residue(L ** (p + 1)) * Fraction(1, _fact(p + 1))
    return Density(2, p, val)


def density_negative(q: int) -> Density:
    """h_{0,-q} = (-1)^q (q-1)! Res M^q"""
    if q < 1:
        raise ValueError("q >= 1")
    M = build_M(q + 1)
    val = residue(M ** q) * Fraction((-1) ** q * _fact(q - 1))
    return Density(0, -q, val)


def h00_series_coeffs(order: int) -> list[Fraction]:
    """Taylor coefficients b_n of x / (1 - exp(-x)) (b_0=1, b_1=1/2, ...)."""
    b = [Fraction(1)]
    for n in range(2, order + 2):
        # sum_{k=1..n} (-1)^{k+1} b_{n-k} / k! = [n == 1]
        acc = Fraction(0)
        for k in range(2, n + 1):
            acc += Fraction((-1) ** (k + 1), _fact(k)) * b[n - k]
        b.append(-acc)
    return b[: order + 1]


def density_h00(order: int) -> EpsSeries:
    """h_{0,0} as an eps-series: (eps d/dx)/(1 - Lambda^{-1}) (log Q - log P)."""
    coeffs = h00_series_coeffs(order)
    out: dict[int, RingElem] = {}
    d = LOG_Q_OVER_P
    for s in range(order + 1):
        out[s] = coeffs[s] * d
        if s < order:
            d = total_x_derivative(d)
    return EpsSeries(out, order)


def lax_flow(label: FlowLabel) -> FlowRHS:
    """Derive (eps dP/dt, eps dQ/dt) from the Lax equation for the flow.

    Valid labels: (2, q) with q >= 0 and (0, -q) with q >= 1.  The two lowest
    Lambda-coefficient equations determine dQ and dP; the remaining retained
    coefficients are checked and an inconsistency raises ArithmeticError.
    """
    beta, q = label
    if beta == 2 and q >= 0:
        depth = q + 6
        L = build_L(depth)
        G = plus_part(L ** (q + 1)) * Fraction(1, _fact(q + 1))
    elif beta == 0 and q <= -1:
        n = -q
        depth = n + 6
        L = build_L(depth)
        M = build_M(n + 2)
        G = minus_part(M ** n) * Fraction((-1) ** (n - 1) * _fact(n - 1))
    else:
        raise ValueError(f"no Lax flow with label {label}")

    W = op_mul(b_factor(), commutator(G, L))
    dQ = exact_div(W.coeff(-1), Q(-1) - P(-1))
    dP = dQ - W.coeff(0)
    # remaining retained coefficients of W must equal dQ * shift(l_{n+1}, -1)
    for n in range(-2, max(-4, (W.lo_exact or -4)) - 1, -1):
        try:
            lhs = W.coeff(n)
            lcoef = L.coeff(n + 1)
        except Exception:
            break
        if lhs != dQ * shift(lcoef, -1):
            raise ArithmeticError(f"inconsistent Lax coefficient system at Lambda^{n} for {label}")
    return FlowRHS(label, dP, dQ)


def prolong(e: RingElem, flow: FlowRHS) -> RingElem:
    """eps d(e)/dt along the flow: evolutionary prolongation over shift jets."""
    e.require_shift_picture()
    offsets = sorted(set(e.shift_offsets()))
    out = ZERO
    for j in offsets:
        for var, rhs in (("P", flow.dP), ("Q", flow.dQ)):
            pd = e.part_gen(("S", var, j))
            if not pd.is_zero():
                out = out + pd * shift(rhs, j)
    return out


def flows_commute(f1: FlowRHS, f2: FlowRHS) -> bool:
    """Prolonged cross-derivatives of P and Q agree for the two flows."""
    return (
        prolong(f2.dP, f1) == prolong(f1.dP, f2)
        and prolong(f2.dQ, f1) == prolong(f1.dQ, f2)
    )


def tau_symmetry_pair(da: Density, fa: FlowRHS, db: Density, fb: FlowRHS) -> tuple[RingElem, RingElem]:
    """(d h_a / d t_b, d h_b / d t_a) -- equal iff the pair is tau-symmetric."""
    return prolong(da.value, fb), prolong(db.value, fa)


def standard_flows(pmax: int = 2, qmax: int = 2) -> dict[FlowLabel, FlowRHS]:
    flows: dict[FlowLabel, FlowRHS] = {}
    for p in range(pmax + 1):
        flows[(2, p)] = lax_flow((2, p))
    for q in range(1, qmax + 1):
        flows[(0, -q)] = lax_flow((0, -q))
    return flows


def standard_densities(pmax: int = 2, qmax: int = 2) -> dict[FlowLabel, Density]:
    dens: dict[FlowLabel, Density] = {}
    for p in range(pmax + 1):
        dens[(2, p)] = density_positive(p)
    for q in range(1, qmax + 1):
        dens[(0, -q)] = density_negative(q)
    return dens


def _fact(n: int) -> int:
    out = 1
    for i in range(2, n + 1):
        out *= i
    return out
