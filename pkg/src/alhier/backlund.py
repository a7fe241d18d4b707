"""The auto-Backlund transformation and its exact consistency checks.

P~ = P^- (Q^+ - P) / (Q - P^-),  Q~ = Q (Q^+ - P) / (Q - P^-).

Rational expressions are stored as numerator/denominator pairs normalized by
rational content only; every identity is checked by cross-multiplication, so
no multivariate gcd is ever needed.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .ring import ONE, P, Q, RingElem, ZERO, eps_expand, jet, shift


class Rational:
    """num/den pair of shift-picture RingElems, content-normalized."""

    __slots__ = ("num", "den")

    def __init__(self, num: RingElem, den: RingElem = ONE):
        if den.is_zero():
            raise ZeroDivisionError("rational with zero denominator")
        if not num.is_zero():
            ratio = num.content() / den.content()
            num = num * (1 / num.content()) * ratio.numerator
            den = den * (1 / den.content()) * ratio.denominator
        self.num = num
        self.den = den

    @staticmethod
    def of(e: RingElem) -> "Rational":
        return Rational(e, ONE)

    def __mul__(self, other: "Rational") -> "Rational":
        other = _coerce(other)
        return Rational(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other: "Rational") -> "Rational":
        other = _coerce(other)
        if other.num.is_zero():
            raise ZeroDivisionError
        return Rational(self.num * other.den, self.den * other.num)

    def __add__(self, other: "Rational") -> "Rational":
        other = _coerce(other)
        return Rational(self.num * other.den + other.num * self.den, self.den * other.den)

    def __neg__(self) -> "Rational":
        return Rational(-self.num, self.den)

    def __sub__(self, other: "Rational") -> "Rational":
        return self + (-_coerce(other))

    def __eq__(self, other) -> bool:
        other = _coerce(other)
        return self.num * other.den == other.num * self.den

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def shifted(self, k: int) -> "Rational":
        return Rational(shift(self.num, k), shift(self.den, k))

    def part_gen(self, gen) -> "Rational":
        """Quotient-rule partial derivative with respect to one generator."""
        return Rational(
            self.num.part_gen(gen) * self.den - self.num * self.den.part_gen(gen),
            self.den * self.den,
        )

    def __repr__(self):
        return f"({self.num}) / ({self.den})"


def _coerce(x) -> Rational:
    if isinstance(x, Rational):
        return x
    if isinstance(x, RingElem):
        return Rational.of(x)
    if isinstance(x, (int, Fraction)):
        return Rational.of(RingElem.const(x))
    raise TypeError(type(x))


@dataclass(frozen=True)
class BacklundPair:
    ptilde: Rational
    qtilde: Rational


def backlund() -> BacklundPair:
    num_factor = Q(1) - P()
    den = Q() - P(-1)
    return BacklundPair(Rational(P(-1) * num_factor, den), Rational(Q() * num_factor, den))


@dataclass(frozen=True)
class CheckReport:
    name: str
    ok: bool
    detail: str = ""


def backlund_identity_check() -> list[CheckReport]:
    """tau-free corollary of the shift identity: multiplicatively,
    (Q~ / P~) (P^- / Q^-) = Q / Q^-, i.e. Q~ / P~ = Q / P^-."""
    bp = backlund()
    out = []
    ratio = bp.qtilde / bp.ptilde
    out.append(CheckReport("Qtilde/Ptilde = Q/P^-", ratio == Rational(Q(), P(-1))))
    lhs = ratio * Rational(P(-1), Q(-1))
    out.append(CheckReport("(Qtilde/Ptilde)(P^-/Q^-) = Q/Q^-", lhs == Rational(Q(), Q(-1))))
    # fixed point at constant fields: the eps^0 limit is the identity map
    p0 = eps_expand(bp.ptilde.num, 0).coeff(0)
    q0 = eps_expand(bp.qtilde.num, 0).coeff(0)
    d0 = eps_expand(bp.ptilde.den, 0).coeff(0)
    out.append(CheckReport("constant fields are fixed", p0 == jet("P") * d0 and q0 == jet("Q") * d0))
    return out


def backlund_order_eps_check() -> list[CheckReport]:
    """eps^1 coefficients equal A0 = (Q_x P - P_x Q)/(Q - P) and
    B0 = (Q_x - P_x) Q / (Q - P), checked after clearing (Q - P)."""
    bp = backlund()
    p, q = jet("P"), jet("Q")
    px, qx = jet("P", 1), jet("Q", 1)
    w = q - p
    out = []
    for name, rat, base, lead_num in (
        ("Ptilde", bp.ptilde, p, qx * p - px * q),
        ("Qtilde", bp.qtilde, q, (qx - px) * q),
    ):
        nser = eps_expand(rat.num, 1)
        dser = eps_expand(rat.den, 1)
        # claim: num = den * (base + eps * lead_num / w); multiply through by w
        ok0 = nser.coeff(0) * w == dser.coeff(0) * base * w
        lhs1 = nser.coeff(1) * w
        rhs1 = dser.coeff(1) * base * w + dser.coeff(0) * lead_num
        out.append(CheckReport(f"{name} eps^0", ok0))
        out.append(CheckReport(f"{name} eps^1", lhs1 == rhs1))
    return out


# -- Frechet-derivative invariance of the Hamiltonian pair ------------------------


class RatOp:
    """Shift operator with Rational coefficients (enough for 2x2 products)."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: dict[int, Rational]):
        self.coeffs = {n: c for n, c in coeffs.items() if not c.is_zero()}

    def __mul__(self, other: "RatOp") -> "RatOp":
        out: dict[int, Rational] = {}
        for i, ci in self.coeffs.items():
            for j, cj in other.coeffs.items():
                t = ci * cj.shifted(i)
                out[i + j] = out[i + j] + t if i + j in out else t
        return RatOp(out)

    def __add__(self, other: "RatOp") -> "RatOp":
        out = dict(self.coeffs)
        for n, c in other.coeffs.items():
            out[n] = out[n] + c if n in out else c
        return RatOp(out)

    def __neg__(self) -> "RatOp":
        return RatOp({n: -c for n, c in self.coeffs.items()})

    def __eq__(self, other) -> bool:
        if not isinstance(other, RatOp):
            return NotImplemented
        keys = set(self.coeffs) | set(other.coeffs)
        zero = Rational.of(ZERO)
        return all(self.coeffs.get(n, zero) == other.coeffs.get(n, zero) for n in keys)

    def __repr__(self):
        return " + ".join(f"[{c}]*L^{n}" for n, c in sorted(self.coeffs.items())) or "0"


Mat = tuple[tuple[RatOp, RatOp], tuple[RatOp, RatOp]]


def _mat_mul(a: Mat, b: Mat) -> Mat:
    return tuple(
        tuple(a[i][0] * b[0][j] + a[i][1] * b[1][j] for j in (0, 1)) for i in (0, 1)
    )  # type: ignore[return-value]


def _frechet_matrices() -> tuple[Mat, Mat]:
    """J and its displayed adjoint J*, from the partials of the transform."""
    bp = backlund()
    gens = {"P": ("S", "P", 0), "Pm": ("S", "P", -1), "Q": ("S", "Q", 0), "Qp": ("S", "Q", 1)}

    def row(r: Rational) -> dict[str, Rational]:
        return {k: r.part_gen(g) for k, g in gens.items()}

    dp = row(bp.ptilde)
    dq = row(bp.qtilde)
    j = (
        (RatOp({0: dp["P"], -1: dp["Pm"]}), RatOp({0: dp["Q"], 1: dp["Qp"]})),
        (RatOp({0: dq["P"], -1: dq["Pm"]}), RatOp({0: dq["Q"], 1: dq["Qp"]})),
    )
    jstar = (
        (RatOp({0: dp["P"], 1: dp["Pm"].shifted(1)}), RatOp({0: dq["P"], 1: dq["Pm"].shifted(1)})),
        (RatOp({0: dp["Q"], -1: dp["Qp"].shifted(-1)}), RatOp({0: dq["Q"], -1: dq["Qp"].shifted(-1)})),
    )
    return j, jstar


def _p0_mat(pv: Rational, qv: Rational) -> Mat:
    qp = qv.shifted(1)
    zero = RatOp({})
    return (
        (RatOp({-1: qv, 1: -qp}), RatOp({0: qv, 1: -qp})),
        (RatOp({-1: qv, 0: -qv}), zero),
    )


def _p1_mat(pv: Rational, qv: Rational) -> Mat:
    qp, qm, pm = qv.shifted(1), qv.shifted(-1), pv.shifted(-1)
    zero = RatOp({})
    return (
        (zero, RatOp({1: pv * qp, 0: -(pv * qv)})),
        (RatOp({0: qv * pv, -1: -(qv * pm)}), RatOp({1: qv * qp, -1: -(qv * qm)})),
    )


def backlund_frechet_invariance_check() -> list[CheckReport]:
    """J P_i J* equals P_i evaluated at (P~, Q~), entry by entry, i = 0, 1."""
    j, jstar = _frechet_matrices()
    bp = backlund()
    pq = (Rational.of(P()), Rational.of(Q()))
    out = []
    for name, builder in (("P0", _p0_mat), ("P1", _p1_mat)):
        lhs = _mat_mul(_mat_mul(j, builder(*pq)), jstar)
        rhs = builder(bp.ptilde, bp.qtilde)
        for r in (0, 1):
            for c in (0, 1):
                ok = lhs[r][c] == rhs[r][c]
                out.append(CheckReport(f"J {name} J* entry ({r+1},{c+1})", ok))
    return out
