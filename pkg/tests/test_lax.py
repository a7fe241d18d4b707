from fractions import Fraction

import pytest

from alhier.diffop import residue
from alhier.lax import (
    build_L,
    build_M,
    density_h00,
    density_negative,
    density_positive,
    flows_commute,
    h00_series_coeffs,
    lax_flow,
    prolong,
    standard_densities,
    standard_flows,
    tau_symmetry_pair,
)
from alhier.ring import (
    LOG_Q_OVER_P,
    P,
    Q,
    RingElem,
    eps0,
    jet,
    total_x_derivative,
)


def test_build_L_printed_coefficients():
    L = build_L(3)
    assert L.coeff(1) == RingElem.const(1)
    assert L.coeff(0) == Q() - P()
    assert L.coeff(-1) == Q() * (Q(-1) - P(-1))


def test_build_M_printed_coefficients():
    M = build_M(3)
    assert M.coeff(-1) == Q() * P() ** -1
    assert M.coeff(0) == Q(1) * (P() * P(1)) ** -1 - P() ** -1
    want1 = Q(2) * (P() * P(1) * P(2)) ** -1 - (P() * P(1)) ** -1
    assert M.coeff(1) == want1


def test_factored_forms():
    # B L = Lambda - P and (Lambda - P) M = 1 - Q Lambda^{-1} on their windows
    from alhier.diffop import LaurentOp
    from alhier.lax import b_factor

    L = build_L(4)
    lhs = b_factor() * L
    assert lhs.coeff(1) == RingElem.const(1)
    assert lhs.coeff(0) == -P()
    for n in (-1, -2, -3):
        assert lhs.coeff(n).is_zero()

    M = build_M(4)
    a = LaurentOp.lam(1) - LaurentOp.of(P())
    rhs = a * M
    assert rhs.coeff(0) == RingElem.const(1)
    assert rhs.coeff(-1) == -Q()
    for n in (1, 2, 3):
        assert rhs.coeff(n).is_zero()


def test_density_positive():
    assert density_positive(0).value == Q() - P()
    h21 = density_positive(1).value
    want = ((Q() - P()) ** 2 + Q(1) * (Q() - P()) + Q() * (Q(-1) - P(-1))) * Fraction(1, 2)
    assert h21 == want
    # dispersionless limit = theta_{2,1} under w-substitution
    assert eps0(h21) == (jet("Q") - jet("P")) * jet("Q") + (jet("Q") - jet("P")) ** 2 * Fraction(1, 2)


def test_density_negative():
    h0m1 = density_negative(1).value
    assert h0m1 == P() ** -1 - Q(1) * (P() * P(1)) ** -1
    assert eps0(h0m1) == jet("P") ** -1 - jet("Q") * jet("P") ** -2


def test_h00_series_coeffs():
    assert h00_series_coeffs(4) == [1, Fraction(1, 2), Fraction(1, 12), 0, Fraction(-1, 720)]


def test_density_h00():
    s = density_h00(1)
    assert s.coeff(0) == LOG_Q_OVER_P
    assert s.coeff(1) == total_x_derivative(LOG_Q_OVER_P) * Fraction(1, 2)


def test_lax_flow_t20():
    f = lax_flow((2, 0))
    assert f.dP == P() * (Q(1) - Q())
    assert f.dQ == Q() * (Q(1) - Q(-1) - P() + P(-1))


def test_lax_flow_t0m1():
    f = lax_flow((0, -1))
    assert f.dP == Q(1) * P(1) ** -1 - Q() * P(-1) ** -1
    assert f.dQ == Q() * P() ** -1 - Q() * P(-1) ** -1


def test_flow_commutativity():
    f20 = lax_flow((2, 0))
    f21 = lax_flow((2, 1))
    f0m1 = lax_flow((0, -1))
    assert flows_commute(f20, f21)
    assert flows_commute(f20, f0m1)
    assert flows_commute(f21, f0m1)


def test_tau_symmetry_small():
    dens = standard_densities(1, 1)
    flows = standard_flows(1, 1)
    for a in dens:
        for b in dens:
            lhs, rhs = tau_symmetry_pair(dens[a], flows[a], dens[b], flows[b])
            assert lhs == rhs, f"tau symmetry failed for {a}, {b}"


def test_prolongation_is_derivation():
    f = lax_flow((2, 0))
    a, b = Q(1) * P(), Q() - P(-1)
    assert prolong(a * b, f) == prolong(a, f) * b + a * prolong(b, f)
