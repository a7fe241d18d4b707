from fractions import Fraction

from alhier.backlund import (
    Rational,
    backlund,
    backlund_frechet_invariance_check,
    backlund_identity_check,
    backlund_order_eps_check,
)
from alhier.ring import P, Q, RingElem


def test_rational_arithmetic():
    a = Rational(Q() - P(), P())
    b = Rational(Q(), P() ** 2)
    assert a * b == Rational(Q() * (Q() - P()), P() ** 3)
    assert a / a == Rational.of(RingElem.const(1))
    assert (a - a).is_zero()
    # cross-multiplied equality ignores common factors
    assert Rational((Q() - P()) * Q(), (Q() - P()) * P()) == Rational(Q(), P())


def test_backlund_printed_forms():
    bp = backlund()
    assert bp.ptilde == Rational(P(-1) * (Q(1) - P()), Q() - P(-1))
    assert bp.qtilde == Rational(Q() * (Q(1) - P()), Q() - P(-1))


def test_identity_check():
    for rep in backlund_identity_check():
        assert rep.ok, rep.name


def test_order_eps_check():
    for rep in backlund_order_eps_check():
        assert rep.ok, rep.name


def test_frechet_invariance():
    reports = backlund_frechet_invariance_check()
    assert len(reports) == 8
    for rep in reports:
        assert rep.ok, rep.name
