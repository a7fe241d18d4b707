from fractions import Fraction

import pytest

from alhier.frobenius import (
    FrobeniusData,
    ThetaTable,
    c_tensor,
    canonical_coords,
    euler,
    flat_coords,
    inner_grad,
    omega0,
    principal_flow,
    prolong_v,
    theta_by_residue,
    unity_components,
)
from alhier.ring import (
    EV2,
    LOGV1,
    UINV,
    V1,
    V2,
    ZERO,
    RingElem,
    diff,
    jet,
    total_x_derivative,
)


@pytest.fixture(scope="module")
def table():
    return ThetaTable()


def test_c_tensor_entries():
    c = c_tensor()
    assert c[1][(1, 1)] == RingElem.const(1)
    assert c[1][(1, 2)] == EV2
    assert c[1][(2, 2)] == V1 * EV2
    assert c[2][(1, 1)] == V1 ** -1
    assert c[2][(1, 2)] == RingElem.const(1)
    assert c[2][(2, 2)] == EV2
    # total symmetry of the lowered tensor: c^1 = c_2.., c^2 = c_1..
    for g in (1, 2):
        assert c[g][(1, 2)] == c[g][(2, 1)]


def test_associativity():
    c = c_tensor()
    # c^m_{ab} c^n_{mg} = c^m_{bg} c^n_{ma}
    for a in (1, 2):
        for b in (1, 2):
            for g in (1, 2):
                for n in (1, 2):
                    lhs = sum((c[m][(a, b)] * c[n][(m, g)] for m in (1, 2)), ZERO)
                    rhs = sum((c[m][(b, g)] * c[n][(m, a)] for m in (1, 2)), ZERO)
                    assert lhs == rhs


def test_unity_axiom():
    c = c_tensor()
    e1, e2 = unity_components()
    for b in (1, 2):
        for g in (1, 2):
            val = e1 * c[b][(1, g)] + e2 * c[b][(2, g)]
            want = RingElem.const(1) if b == g else ZERO
            assert val == want


def test_theta_golden_positive(table):
    th11 = (V2 + LOGV1) * V1 + (EV2 - V1)
    assert table.get(1, 1) == th11
    th21 = V1 * EV2 + V1 ** 2 * Fraction(1, 2)
    assert table.get(2, 1) == th21
    th12 = (V2 + LOGV1) * th21 + (EV2 ** 2 - 4 * V1 * EV2 - V1 ** 2) * Fraction(1, 4)
    assert table.get(1, 2) == th12
    th22 = V1 * EV2 ** 2 * Fraction(1, 2) + V1 ** 2 * EV2 + V1 ** 3 * Fraction(1, 6)
    assert table.get(2, 2) == th22
    assert table.get(0, 1) == V1 * V2
    th02 = (V2 + 1) * V1 ** 2 * Fraction(1, 2) + (V2 - 1) * EV2 * V1
    assert table.get(0, 2) == th02


def test_theta_golden_negative(table):
    assert table.get(0, -1) == -V1 * UINV ** 2
    th21 = table.get(2, 1)
    assert table.get(0, -2) == 2 * th21 * UINV ** 4


def test_theta_residue_cross_check(table):
    for alpha in (0, 1, 2):
        for k in range(0, 3):
            assert theta_by_residue(alpha, k) == table.get(alpha, k), (alpha, k)
    for k in (-1, -2, -3):
        assert theta_by_residue(0, k) == table.get(0, k), (0, k)


def test_quasi_homogeneity(table):
    for k in range(1, 4):
        assert euler(table.get(1, k)) == k * table.get(1, k) + 2 * table.get(2, k - 1)
        assert euler(table.get(2, k)) == (k + 1) * table.get(2, k)
        assert euler(table.get(0, k)) == k * table.get(0, k) + table.get(2, k - 1)
        assert euler(table.get(0, -k)) == -k * table.get(0, -k)
    assert euler(table.get(0, 0)).is_zero()


def test_recursion_relation_negative_chain(table):
    # re0-2 at level -1: d_a d_b theta_{0,-1} = c^g_{ab} d_g theta_{0,-2}
    c = c_tensor()
    names = {1: "v1", 2: "v2"}
    for a in (1, 2):
        for b in (1, 2):
            lhs = diff(diff(table.get(0, -1), names[a]), names[b])
            rhs = c[1][(a, b)] * diff(table.get(0, -2), "v1") + c[2][(a, b)] * diff(table.get(0, -2), "v2")
            assert lhs == rhs


def test_principal_flow_x_translation(table):
    d1, d2 = principal_flow(table, (0, -1))
    # t^{0,-1} is not x; the x-translation flow is (0,0)
    f = principal_flow(table, (0, 0))
    assert f == (jet("v1", 1), jet("v2", 1))
    assert (d1, d2) != f


def test_principal_flow_t20(table):
    d1, d2 = principal_flow(table, (2, 0))
    assert d1 == total_x_derivative(V1 * EV2)
    assert d2 == total_x_derivative(V1 + EV2)


def test_omega_special_cases(table):
    for (a, k) in [(1, 1), (2, 0), (2, 2), (0, 1), (0, -1), (0, -2)]:
        assert omega0(table, (0, 0), (a, k)) == table.get(a, k), (a, k)


def test_omega_symmetry(table):
    labels = [(1, 0), (1, 1), (2, 0), (2, 1), (0, 0), (0, 1), (0, -1), (0, -2)]
    for la in labels:
        for lb in labels:
            assert omega0(table, la, lb) == omega0(table, lb, la), (la, lb)


def test_omega_x_compatibility(table):
    # d/dx Omega_{a,k;b,l} = d theta_{a,k} / d t^{b,l}
    labels = [(2, 0), (2, 1), (1, 1), (0, 1), (0, -1)]
    for la in labels:
        for lb in labels:
            om = omega0(table, la, lb)
            flow = principal_flow(table, lb)
            lhs = total_x_derivative(om)
            rhs = prolong_v(table.get(*la), flow)
            assert lhs == rhs, (la, lb)


def test_canonical_coords_roundtrip():
    u1, u2 = canonical_coords()
    assert u1 * u2 == (EV2 - V1) ** 2
    v1_back, ev2_back = flat_coords(u1, u2, EV2 - V1)
    assert v1_back == V1
    assert ev2_back == EV2
    with pytest.raises(ValueError):
        flat_coords(u1, u2, EV2 + V1)


def test_intersection_form_vs_euler():
    # E is the g-gradient of phi: g^{ab} d_b phi = E^a
    data = FrobeniusData()
    g = data.intersection_form
    dphi = (diff(data.phi, "v1"), diff(data.phi, "v2"))
    e_field = (V1, RingElem.const(1))
    for a in (0, 1):
        got = g[a][0] * dphi[0] + g[a][1] * dphi[1]
        assert got == e_field[a]
