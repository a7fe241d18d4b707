import random
from fractions import Fraction

import pytest

from alhier import ring
from alhier.ring import (
    EV2,
    LOGV1,
    LOG_Q_OVER_P,
    ONE,
    SQRT_V1EV2,
    UINV,
    V1,
    V2,
    NotTotalDifference,
    P,
    PictureError,
    Q,
    RingElem,
    diff,
    eps0,
    eps_expand,
    exact_div,
    integrate_v1,
    integrate_v2,
    jet,
    render,
    shift,
    solve_total_difference,
    total_x_derivative,
)


def rand_shift_elem(rng, nterms=4, span=2, maxdeg=2):
    out = ring.ZERO
    for _ in range(rng.randint(1, nterms)):
        term = RingElem.const(Fraction(rng.randint(-4, 4), rng.randint(1, 3)))
        for _ in range(rng.randint(0, maxdeg)):
            var = rng.choice(["P", "Q"])
            k = rng.randint(-span, span)
            term = term * RingElem.gen(ring.sgen(var, k), rng.choice([-1, 1, 1, 2]))
        out = out + term
    return out


# -- shift -------------------------------------------------------------------


def test_shift_examples():
    e = Q() * P() ** -1
    assert shift(e, 1) == Q(1) * P(1) ** -1
    assert shift(Q() - P(), 0) == Q() - P()
    assert shift(Q() * (Q(-1) - P(-1)), 1) == Q(1) * (Q() - P())


def test_shift_composes():
    rng = random.Random(7)
    for _ in range(25):
        e = rand_shift_elem(rng)
        k, m = rng.randint(-3, 3), rng.randint(-3, 3)
        assert shift(shift(e, k), m) == shift(e, k + m)


def test_shift_rejects_derivative_picture():
    with pytest.raises(PictureError):
        shift(jet("P", 1), 1)


# -- total x derivative --------------------------------------------------------


def test_total_x_derivative_leibniz():
    p, q = jet("P"), jet("Q")
    assert total_x_derivative(p * q) == jet("P", 1) * q + p * jet("Q", 1)
    assert total_x_derivative(V1 ** 2) == 2 * V1 * jet("v1", 1)
    assert total_x_derivative(EV2) == EV2 * jet("v2", 1)


def test_total_x_derivative_trans_rules():
    assert total_x_derivative(LOGV1) == V1 ** -1 * jet("v1", 1)
    assert total_x_derivative(LOG_Q_OVER_P) == jet("Q") ** -1 * jet("Q", 1) - jet("P") ** -1 * jet("P", 1)
    # d/dx of sqrt(v1 e^{v2}) = sqrt * (v1_x / 2 v1 + v2_x / 2)
    got = total_x_derivative(SQRT_V1EV2)
    want = SQRT_V1EV2 * (jet("v1", 1) * V1 ** -1 + jet("v2", 1)) * Fraction(1, 2)
    assert got == want


def test_total_x_derivative_rejects_shift_picture():
    with pytest.raises(PictureError):
        total_x_derivative(P())


# -- eps expansion ---------------------------------------------------------------


def test_eps_expand_single_shift():
    s = eps_expand(P(1), 2)
    assert s.coeff(0) == jet("P")
    assert s.coeff(1) == jet("P", 1)
    assert s.coeff(2) == jet("P", 2) * Fraction(1, 2)


def test_eps_expand_no_shift_present():
    s = eps_expand(Q() - P(), 1)
    assert s.coeff(0) == jet("Q") - jet("P")
    assert s.coeff(1).is_zero()


def test_eps_expand_product():
    s = eps_expand(Q(1) * (Q() - P()), 1)
    q, p = jet("Q"), jet("P")
    assert s.coeff(0) == q * (q - p)
    assert s.coeff(1) == jet("Q", 1) * (q - p)


def test_eps_expand_negative_power():
    # 1/P[1] = 1/P - eps P_x/P^2 + O(eps^2)
    s = eps_expand(P(1) ** -1, 1)
    assert s.coeff(0) == jet("P") ** -1
    assert s.coeff(1) == -jet("P", 1) * jet("P") ** -2


def test_eps_expand_matches_exp_eps_dx():
    # eps_expand(shift(e,1),N) equals the formal exp(eps d/dx) series applied
    # to eps_expand(e,N), coefficient-wise.
    rng = random.Random(3)
    n = 3
    for _ in range(10):
        e = rand_shift_elem(rng, nterms=3, span=1)
        lhs = eps_expand(shift(e, 1), n)
        base = eps_expand(e, n)
        for s in range(n + 1):
            want = ring.ZERO
            for j in range(s + 1):
                want = want + ring.x_derivative(base.coeff(s - j), j) * Fraction(1, ring._fact(j))
            assert lhs.coeff(s) == want, f"eps^{s} mismatch"


def test_eps0_drops_offsets():
    assert eps0(Q(3) * P(-2) ** -1) == jet("Q") * jet("P") ** -1


# -- solve_total_difference -------------------------------------------------------


def test_solve_total_difference_examples():
    assert solve_total_difference(Q(1) - Q()) == Q()
    with pytest.raises(NotTotalDifference):
        solve_total_difference(Q())
    e = Q(1) * P(1) - Q() * P() + Q(1) - Q()
    assert solve_total_difference(e) == Q() * P() + Q()


def test_solve_total_difference_roundtrip():
    rng = random.Random(11)
    for _ in range(30):
        g = rand_shift_elem(rng)
        e = shift(g, 1) - g
        sol = solve_total_difference(e)
        assert shift(sol, 1) - sol == e


def test_solve_total_difference_rejects_constants():
    with pytest.raises(NotTotalDifference):
        solve_total_difference(RingElem.const(3))
    # mixed-offset single monomial with nonzero class sum
    with pytest.raises(NotTotalDifference):
        solve_total_difference(Q() * P(-1) - Q(-1) * P())


# -- ring axioms -------------------------------------------------------------------


def test_ring_axioms_randomized():
    rng = random.Random(5)
    for _ in range(20):
        a, b, c = (rand_shift_elem(rng, 3) for _ in range(3))
        assert a + b == b + a
        assert a * b == b * a
        assert (a + b) + c == a + (b + c)
        assert (a * b) * c == a * (b * c)
        assert a * (b + c) == a * b + a * c


# -- canonical normalization --------------------------------------------------------


def test_sqrt_square_reduces():
    assert SQRT_V1EV2 * SQRT_V1EV2 == V1 * EV2
    assert SQRT_V1EV2 ** 3 == V1 * EV2 * SQRT_V1EV2


def test_uinv_partial_fractions():
    # (v1 - exp(v2)) * U == 1
    assert (V1 - EV2) * UINV == ONE
    # 1/v1 * U == e^{-v2} U - e^{-v2}/v1
    lhs = V1 ** -1 * UINV
    rhs = EV2 ** -1 * UINV - EV2 ** -1 * V1 ** -1
    assert lhs == rhs
    # higher power sanity: (v1-exp(v2))^2 * U^2 == 1
    assert ((V1 - EV2) ** 2) * UINV ** 2 == ONE


def test_uinv_inverse_power_expands():
    assert RingElem.gen(ring.tgen("uinv"), -1) == V1 - EV2
    assert RingElem.gen(ring.tgen("uinv"), -2) == (V1 - EV2) ** 2


# -- partial derivatives ----------------------------------------------------------


def test_diff_basic():
    assert diff(V1 * V2, "v1") == V2
    assert diff(EV2 ** 2, "v2") == 2 * EV2 ** 2
    assert diff(LOGV1, "v1") == V1 ** -1
    assert diff(UINV, "v1") == -(UINV ** 2)
    assert diff(UINV, "v2") == EV2 * UINV ** 2
    phi = V2 - ring.LOG_EV2_M_V1
    assert diff(phi, "v1") == -UINV
    # v1*U reduces to 1 + e^{v2} U, both forms equal
    assert diff(phi, "v2") == V1 * UINV


def test_part_gen_chain_through_logqp():
    e = LOG_Q_OVER_P
    assert e.part_gen(ring.sgen("Q", 0)) == Q() ** -1
    assert e.part_gen(ring.sgen("P", 0)) == -(P() ** -1)
    assert e.part_gen(ring.sgen("Q", 1)).is_zero()


# -- division -----------------------------------------------------------------------


def test_exact_div():
    a = (Q() - P()) * (Q(1) + P() ** 2)
    assert exact_div(a, Q() - P()) == Q(1) + P() ** 2
    with pytest.raises(ring.ExactDivisionError):
        exact_div(Q() + ONE, Q() - P())


def test_exact_div_randomized():
    rng = random.Random(13)
    for _ in range(15):
        q = rand_shift_elem(rng, 3)
        d = rand_shift_elem(rng, 2) + RingElem.const(1)
        if d.is_zero():
            continue
        assert exact_div(q * d, d) == q


# -- integration helpers ---------------------------------------------------------


def test_integrate_v1():
    assert integrate_v1(V1) == V1 ** 2 * Fraction(1, 2)
    assert integrate_v1(V1 ** -1) == LOGV1
    assert integrate_v1(LOGV1) == V1 * LOGV1 - V1
    assert diff(integrate_v1(V1 ** 2 * LOGV1), "v1") == V1 ** 2 * LOGV1
    assert diff(integrate_v1(UINV ** 3), "v1") == UINV ** 3


def test_integrate_v2():
    assert integrate_v2(ONE) == V2
    assert integrate_v2(EV2) == EV2
    assert diff(integrate_v2(V2 * EV2 ** 2), "v2") == V2 * EV2 ** 2
    assert diff(integrate_v2(V2 ** 2), "v2") == V2 ** 2


# -- rendering ---------------------------------------------------------------------


def test_render_deterministic():
    e = Q(1) * (Q() - P()) - RingElem.const(Fraction(1, 2)) * P() ** -2
    s1 = render(e)
    s2 = render(Q(1) * Q() - Q(1) * P() - RingElem.const(Fraction(1, 2)) * P() ** -2)
    assert s1 == s2
    assert "Q[+1]" in s1


def test_substitute_w():
    # theta_{2,1} = v1 e^{v2} + v1^2/2 -> (Q-P)Q + (Q-P)^2/2
    th = V1 * EV2 + V1 ** 2 * Fraction(1, 2)
    got = ring.substitute_w(th)
    want = (Q() - P()) * Q() + (Q() - P()) ** 2 * Fraction(1, 2)
    assert got == want
    # U -> -1/P
    assert ring.substitute_w(UINV) == -(P() ** -1)
