import random
from fractions import Fraction

import pytest

from alhier.frobenius import ThetaTable
from alhier.hamiltonian import (
    DiffOp,
    apply_diffop_mat,
    bihamiltonian_recursion_check,
    dispersionless_hamops,
    dispersionless_recursion_check,
    grad_pq,
    grad_w_from_pq,
    hamiltonian_density,
    hamiltonian_grad_w,
    hamop_dispersionless_limit,
    involution_check,
    p0_pq,
    p0_w,
    p1_pq,
    p1_w,
    variational_derivative,
)
from alhier.lax import lax_flow
from alhier.ring import ONE, P, Q, RingElem, ZERO, shift


def test_variational_derivative_kills_differences():
    assert variational_derivative(Q(1) - Q(), "Q").is_zero()
    rng = random.Random(17)
    from tests.test_ring import rand_shift_elem

    for _ in range(10):
        e = rand_shift_elem(rng)
        diff = shift(e, 1) - e
        assert variational_derivative(diff, "P").is_zero()
        assert variational_derivative(diff, "Q").is_zero()


def test_variational_derivative_h20():
    # h_{2,0} = Q - P: dH/dP = -1
    assert variational_derivative(hamiltonian_density((2, -1)), "P") == RingElem.const(-1)


def test_variational_derivative_matches_resolvent_formula():
    # dH_{2,q}/dP = -Res(L^{q+1} B^{-1}) / (q+1)! where H_{2,q} sums h_{2,q+1}
    from alhier.diffop import geometric_inverse, op_mul, residue
    from alhier.lax import build_L

    L = build_L(6)
    binv = geometric_inverse("one_minus_q_laminv", 6)
    for q, fac in ((0, 1), (1, 2)):
        got = variational_derivative(hamiltonian_density((2, q)), "P")
        want = -Fraction(1, fac) * residue(op_mul(L ** (q + 1), binv))
        assert got == want, q


def test_skew_adjointness():
    for op in (p0_pq(), p1_pq(), p0_w(), p1_w()):
        assert op.is_skew_adjoint()


def test_apply_p0_gives_t20_flow():
    flow = lax_flow((2, 0))
    got = p0_pq().apply(grad_pq(hamiltonian_density((2, 0))))
    assert got == (flow.dP, flow.dQ)


def test_apply_p0_gives_t0m1_flow():
    flow = lax_flow((0, -1))
    got = p0_pq().apply(grad_pq(hamiltonian_density((0, -1))))
    assert got == (flow.dP, flow.dQ)


def test_w_operators_reproduce_flows():
    # P0^W dH = (d w1/dt, d w2/dt) = (dQ - dP, dQ/Q)
    for label in [(2, 0), (2, 1), (0, -1), (0, -2)]:
        flow = lax_flow(label)
        got = p0_w().apply(hamiltonian_grad_w(label))
        want = (flow.dQ - flow.dP, flow.dQ * Q() ** -1)
        assert got == want, label


def test_apply_p0w_zero():
    assert p0_w().apply((ZERO, ZERO)) == (ZERO, ZERO)


def test_bihamiltonian_recursion():
    for p in (1, 2):
        rep = bihamiltonian_recursion_check(p)
        assert rep.ok, rep.label
    rep = bihamiltonian_recursion_check(1, negative=True)
    assert rep.ok, rep.label


def test_involution_spot_check():
    assert involution_check()


def test_dispersionless_hamops_skew():
    p0, p1 = dispersionless_hamops()
    for m in (p0, p1):
        (a, b), (c, d) = m
        assert a.adjoint() == -a
        assert d.adjoint() == -d
        assert b.adjoint() == -c


def test_dispersionless_limit_matches():
    got0 = hamop_dispersionless_limit(p0_w())
    got1 = hamop_dispersionless_limit(p1_w())
    want0, want1 = dispersionless_hamops()
    assert got0 == want0
    assert got1 == want1


def test_dispersionless_recursions():
    table = ThetaTable()
    for name, ok in dispersionless_recursion_check(table, 2):
        assert ok, name
