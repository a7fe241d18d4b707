"""Discrete variational calculus and the bihamiltonian pair.

Everything is computed over the (P, Q) lattice variables, where all rational
expressions have monomial denominators; the w-coordinate operators are
expressed through w1 = Q - P and e^{w2} = Q.  All Hamiltonian operators are
stored with the overall 1/eps cleared, matching the convention that flow
right-hand sides carry one power of eps.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .diffop import LaurentOp
from .frobenius import ThetaTable
from .lax import Density, density_negative, density_positive
from .ring import (
    EV2,
    LOG_Q_OVER_P,
    ONE,
    V1,
    ZERO,
    P,
    Q,
    RingElem,
    eps_expand,
    is_total_difference,
    shift,
    substitute_jets,
    x_derivative,
)

Grad = tuple[RingElem, RingElem]


def variational_derivative(h: RingElem, var: str) -> RingElem:
    """Discrete Euler operator: sum_k shift(dh/d var[k], -k)."""
    if var not in ("P", "Q"):
        raise ValueError("var is P or Q")
    h.require_shift_picture()
    out = ZERO
    for j in sorted(set(h.shift_offsets())):
        pd = h.part_gen(("S", var, j))
        if not pd.is_zero():
            out = out + shift(pd, -j)
    return out


def grad_pq(h: RingElem) -> Grad:
    return variational_derivative(h, "P"), variational_derivative(h, "Q")


def grad_w_from_pq(g: Grad) -> Grad:
    """Ultralocal change of variational gradients to w1 = Q - P, w2 = log Q."""
    gp, gq = g
    return -gp, Q() * (gp + gq)


class CoordinateMismatch(ValueError):
    pass


@dataclass(frozen=True)
class HamOp:
    """2x2 matrix of shift operators acting on column vectors of RingElems."""

    entries: tuple[tuple[LaurentOp, LaurentOp], tuple[LaurentOp, LaurentOp]]
    tag: str  # "PQ" or "W"

    def apply(self, grad: Grad, tag: str | None = None) -> Grad:
        if tag is not None and tag != self.tag:
            raise CoordinateMismatch(f"operator is {self.tag}, gradient is {tag}")
        (a, b), (c, d) = self.entries
        return (a.apply(grad[0]) + b.apply(grad[1]), c.apply(grad[0]) + d.apply(grad[1]))

    def is_skew_adjoint(self) -> bool:
        (a, b), (c, d) = self.entries
        return (
            a.adjoint() == -a
            and d.adjoint() == -d
            and b.adjoint() == -c
        )


def p0_pq() -> HamOp:
    e11 = LaurentOp({-1: Q(), 1: -Q(1)})
    e12 = LaurentOp({0: Q(), 1: -Q(1)})
    e21 = LaurentOp({-1: Q(), 0: -Q()})
    return HamOp(((e11, e12), (e21, LaurentOp.zero())), "PQ")


def p1_pq() -> HamOp:
    e12 = LaurentOp({1: P() * Q(1), 0: -P() * Q()})
    e21 = LaurentOp({0: Q() * P(), -1: -Q() * P(-1)})
    e22 = LaurentOp({1: Q() * Q(1), -1: -Q() * Q(-1)})
    return HamOp(((LaurentOp.zero(), e12), (e21, e22)), "PQ")


def p0_w() -> HamOp:
    e12 = LaurentOp({1: ONE, 0: -ONE})
    e21 = LaurentOp({0: ONE, -1: -ONE})
    return HamOp(((LaurentOp.zero(), e12), (e21, LaurentOp.zero())), "W")


def p1_w() -> HamOp:
    w = Q() - P()
    e11 = LaurentOp({-1: -Q() * shift(w, -1), 1: w * Q(1)})
    e12 = LaurentOp({1: w, 0: Q() - w, -1: -Q()})
    e21 = LaurentOp({0: w - Q(), -1: -shift(w, -1), 1: Q(1)})
    e22 = LaurentOp({1: ONE, -1: -ONE})
    return HamOp(((e11, e12), (e21, e22)), "W")


# -- Hamiltonians of the hierarchy -------------------------------------------


def hamiltonian_density(label: tuple[int, int]) -> RingElem:
    """Density whose lattice sum is H_label; H_{2,p} sums h_{2,p+1} and
    H_{0,-q} sums h_{0,-q+1}.  H_{0,-1} uses the integrated form of h_{0,0},
    which reduces to log Q - log P under the sum."""
    beta, k = label
    if beta == 2 and k >= -1:
        return density_positive(k + 1).value
    if beta == 0 and k <= -1:
        if k == -1:
            return LOG_Q_OVER_P
        return density_negative(-k - 1).value
    raise ValueError(f"no constructive Hamiltonian with label {label}")


def hamiltonian_grad_w(label: tuple[int, int]) -> Grad:
    return grad_w_from_pq(grad_pq(hamiltonian_density(label)))


@dataclass(frozen=True)
class RecursionReport:
    label: str
    lhs: Grad
    rhs: Grad

    @property
    def ok(self) -> bool:
        return self.lhs[0] == self.rhs[0] and self.lhs[1] == self.rhs[1]


def bihamiltonian_recursion_check(p: int, negative: bool = False) -> RecursionReport:
    """P1 dH_{2,p-1} = (p+1) P0 dH_{2,p}, or the negative chain
    P1 dH_{0,-p-1} = -p P0 dH_{0,-p} (constant read as -p)."""
    if p < 1:
        raise ValueError("p >= 1")
    op0, op1 = p0_w(), p1_w()
    if not negative:
        lhs = op1.apply(hamiltonian_grad_w((2, p - 1)))
        r = op0.apply(hamiltonian_grad_w((2, p)))
        rhs = ((p + 1) * r[0], (p + 1) * r[1])
        return RecursionReport(f"P1 dH(2,{p-1}) = {p+1} P0 dH(2,{p})", lhs, rhs)
    lhs = op1.apply(hamiltonian_grad_w((0, -p - 1)))
    r = op0.apply(hamiltonian_grad_w((0, -p)))
    rhs = (-p * r[0], -p * r[1])
    return RecursionReport(f"P1 dH(0,{-p-1}) = {-p} P0 dH(0,{-p})", lhs, rhs)


def involution_check() -> bool:
    """{H_{2,0}, H_{0,-1}}_0 vanishes: the pairing is a total difference."""
    g1 = grad_pq(hamiltonian_density((2, 0)))
    g2 = grad_pq(hamiltonian_density((0, -1)))
    flow = p0_pq().apply(g2)
    pairing = g1[0] * flow[0] + g1[1] * flow[1]
    return is_total_difference(pairing)


# -- dispersionless limit -------------------------------------------------------


class DiffOp:
    """Operator sum_k c_k d_x^k with derivative-picture coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: dict[int, RingElem]):
        self.coeffs = {k: c for k, c in coeffs.items() if not c.is_zero()}

    def apply(self, f: RingElem) -> RingElem:
        out = ZERO
        for k, c in self.coeffs.items():
            out = out + c * x_derivative(f, k)
        return out

    def __add__(self, other: "DiffOp") -> "DiffOp":
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, ZERO) + c
        return DiffOp(out)

    def __neg__(self) -> "DiffOp":
        return DiffOp({k: -c for k, c in self.coeffs.items()})

    def __eq__(self, other) -> bool:
        if not isinstance(other, DiffOp):
            return NotImplemented
        return self.coeffs == other.coeffs

    def adjoint(self) -> "DiffOp":
        """(c d^k)* = (-d)^k c, expanded by Leibniz."""
        out: dict[int, RingElem] = {}
        for k, c in self.coeffs.items():
            for j in range(k + 1):
                term = Fraction((-1) ** k * _binom(k, j)) * x_derivative(c, k - j)
                out[j] = out.get(j, ZERO) + term
        return DiffOp(out)

    def __repr__(self):
        return " + ".join(f"({c})*d^{k}" for k, c in sorted(self.coeffs.items())) or "0"


DiffOpMat = tuple[tuple[DiffOp, DiffOp], tuple[DiffOp, DiffOp]]


def dispersionless_hamops() -> tuple[DiffOpMat, DiffOpMat]:
    """The dispersionless pair in flat coordinates.

    P0 is off-diagonal d_x; P1 is g d_x + Gamma-terms with g the intersection
    form (the (1,1) entry carries 2 v1 e^{v2} d_x alongside (v1 e^{v2})_x,
    as skew-adjointness requires).
    """
    zero = DiffOp({})
    dx = DiffOp({1: ONE})
    p0 = ((zero, dx), (dx, zero))
    s = V1 + EV2
    p1 = (
        (DiffOp({0: x_derivative(V1 * EV2, 1), 1: 2 * V1 * EV2}), DiffOp({1: s})),
        (DiffOp({0: x_derivative(s, 1), 1: s}), DiffOp({1: RingElem.const(2)})),
    )
    return p0, p1


def hamop_dispersionless_limit(op: HamOp) -> DiffOpMat:
    """Order-eps^0 limit of a lattice Hamiltonian operator after w -> v.

    Each entry sum_i c_i Lambda^i contracts to sum_i (c_i^[1] + i c_i^[0] d_x)
    with P, Q replaced by e^{v2} - v1 and e^{v2}; the eps^0 part must cancel.
    """
    images = {"P": EV2 - V1, "Q": EV2}

    def entry_limit(e: LaurentOp) -> DiffOp:
        const_part = ZERO
        out: dict[int, RingElem] = {}
        for i, c in e.coeffs.items():
            s = eps_expand(c, 1)
            const_part = const_part + s.coeff(0)
            out[0] = out.get(0, ZERO) + s.coeff(1)
            out[1] = out.get(1, ZERO) + i * s.coeff(0)
        if not const_part.is_zero():
            raise ArithmeticError("operator entry does not vanish at eps^0")
        return DiffOp({k: substitute_jets(c, images) for k, c in out.items()})

    (a, b), (c, d) = op.entries
    return ((entry_limit(a), entry_limit(b)), (entry_limit(c), entry_limit(d)))


def apply_diffop_mat(m: DiffOpMat, grad: Grad) -> Grad:
    (a, b), (c, d) = m
    return (a.apply(grad[0]) + b.apply(grad[1]), c.apply(grad[0]) + d.apply(grad[1]))


def dispersionless_recursion_check(table: ThetaTable, pmax: int = 2) -> list[tuple[str, bool]]:
    """The four printed hydrodynamic recursion chains, checked exactly."""
    p0, p1 = dispersionless_hamops()
    out: list[tuple[str, bool]] = []

    def flow0(alpha: int, k: int) -> Grad:
        return apply_diffop_mat(p0, table.grad(alpha, k + 1))

    def flow1(alpha: int, k: int) -> Grad:
        return apply_diffop_mat(p1, table.grad(alpha, k + 1))

    for p in range(1, pmax + 1):
        lhs = flow1(2, p - 1)
        rhs = flow0(2, p)
        ok = lhs[0] == (p + 1) * rhs[0] and lhs[1] == (p + 1) * rhs[1]
        out.append((f"2-chain p={p}", ok))

        lhs = flow1(1, p - 1)
        r1, r2 = flow0(1, p)
        s1, s2 = flow0(2, p - 1)
        ok = lhs[0] == p * r1 + 2 * s1 and lhs[1] == p * r2 + 2 * s2
        out.append((f"1-chain p={p}", ok))

        lhs = flow1(0, p - 1)
        r1, r2 = flow0(0, p)
        s1, s2 = flow0(2, p - 1)
        ok = lhs[0] == p * r1 + s1 and lhs[1] == p * r2 + s2
        out.append((f"0-chain p={p}", ok))

        lhs = flow1(0, -p - 1)
        r1, r2 = flow0(0, -p)
        ok = lhs[0] == -p * r1 and lhs[1] == -p * r2
        out.append((f"0-negative-chain p={p}", ok))
    return out


def _binom(n: int, j: int) -> int:
    if j < 0 or j > n:
        return 0
    out = 1
    for i in range(j):
        out = out * (n - i) // (i + 1)
    return out
