"""Exact coefficient arithmetic for the lattice hierarchy engine.

Elements are sparse Laurent polynomials over exact rationals in three kinds of
generators:

* shift jets ``P[k]``, ``Q[k]`` (the field at lattice offset ``k``) -- the
  "shift picture" used by the operator algebra,
* derivative jets ``P_x``, ``v1_xx``, ... -- the "derivative picture" produced
  by epsilon expansion and used by the dispersionless calculus,
* transcendental generators ``exp(v2)``, ``log(v1)``, ``sqrt(v1*exp(v2))``,
  ``inv(v1-exp(v2))``, ``log(exp(v2)-v1)`` and ``log(Q/P)``, each carrying an
  exact derivation rule.

Monomials are kept in a canonical form: ``sqrt(v1*exp(v2))`` squares are
rewritten to ``v1*exp(v2)``, and any monomial containing both a power of
``v1`` and ``inv(v1-exp(v2))`` is rewritten by partial fractions so that ring
equality is decidable by dictionary comparison.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Iterable, Iterator

Gen = tuple[str, str, int]
Monomial = tuple[tuple[Gen, int], ...]

SHIFT_VARS = ("P", "Q")
DERIV_VARS = ("P", "Q", "v1", "v2", "w1", "w2")
TRANS_TAGS = ("ev2", "logv1", "sqrt", "uinv", "logE", "logQP")

# transcendental tags that depend on (v1, v2); logQP depends on (P, Q) instead
_V_TAGS = frozenset({"ev2", "logv1", "sqrt", "uinv", "logE"})


class PictureError(ValueError):
    """Raised when an operation receives an element from the wrong picture."""


class NotTotalDifference(ValueError):
    """Raised by :func:`solve_total_difference` on inexact input."""

    def __init__(self, residual: "RingElem"):
        super().__init__(f"not a total difference; residual {residual}")
        self.residual = residual


class ExactDivisionError(ArithmeticError):
    pass


def sgen(var: str, offset: int = 0) -> Gen:
    if var not in SHIFT_VARS:
        raise ValueError(f"no shift jet for {var!r}")
    return ("S", var, offset)


def dgen(var: str, order: int = 0) -> Gen:
    if var not in DERIV_VARS or order < 0:
        raise ValueError(f"bad derivative jet ({var!r}, {order})")
    return ("D", var, order)


def tgen(tag: str, offset: int = 0) -> Gen:
    if tag not in TRANS_TAGS:
        raise ValueError(f"unknown transcendental {tag!r}")
    return ("T", tag, offset)


def _gen_key(g: Gen) -> tuple:
    kind, name, idx = g
    return ({"D": 0, "S": 1, "T": 2}[kind], name, idx)


def _mono_key(m: Monomial) -> tuple:
    return (sum(abs(e) for _, e in m), tuple((_gen_key(g), -e) for g, e in m))


def binom_frac(e: int, j: int) -> Fraction:
    """Generalized binomial coefficient C(e, j) for integer e of any sign."""
    out = Fraction(1)
    for i in range(j):
        out *= Fraction(e - i, i + 1)
    return out


def _normalize(gens: dict[Gen, int], coeff: Fraction) -> Iterator[tuple[Monomial, Fraction]]:
    """Canonicalize one monomial, possibly splitting it into several.

    Rules applied: drop zero exponents; reduce sqrt^2 -> v1*exp(v2); expand
    negative powers of inv(v1-exp(v2)) as (v1-exp(v2))^k; partial-fraction any
    v1^a * inv(...)^b mixture so canonical monomials never contain both.
    """
    gens = {g: e for g, e in gens.items() if e != 0}
    sq = tgen("sqrt")
    if sq in gens:
        e = gens.pop(sq)
        carry, rem = divmod(e, 2)
        if rem:
            gens[sq] = rem
        if carry:
            for g in (dgen("v1"), tgen("ev2")):
                gens[g] = gens.get(g, 0) + carry
                if gens[g] == 0:
                    del gens[g]

    u = tgen("uinv")
    b = gens.get(u, 0)
    if b < 0:
        # (v1 - exp(v2))^(-b), binomially expanded
        del gens[u]
        n = -b
        base = tuple(sorted(gens.items(), key=lambda kv: _gen_key(kv[0])))
        for j in range(n + 1):
            extra = {dgen("v1"): n - j, tgen("ev2"): j}
            merged = dict(base)
            for g, e in extra.items():
                merged[g] = merged.get(g, 0) + e
            c = coeff * binom_frac(n, j) * (-1) ** j
            yield from _normalize(merged, c)
        return

    a = gens.get(dgen("v1"), 0)
    if b >= 1 and a != 0:
        rest = {g: e for g, e in gens.items() if g not in (u, dgen("v1"))}
        if a > 0:
            # v1*U = 1 + exp(v2)*U
            m1 = dict(rest)
            m1[dgen("v1")] = a - 1
            m1[u] = b - 1
            yield from _normalize(m1, coeff)
            m2 = dict(rest)
            m2[dgen("v1")] = a - 1
            m2[u] = b
            m2[tgen("ev2")] = m2.get(tgen("ev2"), 0) + 1
            yield from _normalize(m2, coeff)
        else:
            # v1^-1*U = exp(-v2)*U - exp(-v2)*v1^-1
            m1 = dict(rest)
            m1[dgen("v1")] = a + 1
            m1[u] = b
            m1[tgen("ev2")] = m1.get(tgen("ev2"), 0) - 1
            yield from _normalize(m1, coeff)
            m2 = dict(rest)
            m2[dgen("v1")] = a
            m2[u] = b - 1
            m2[tgen("ev2")] = m2.get(tgen("ev2"), 0) - 1
            yield from _normalize(m2, -coeff)
        return

    yield tuple(sorted(gens.items(), key=lambda kv: _gen_key(kv[0]))), coeff


class RingElem:
    """Immutable sparse sum of canonical monomials with Fraction coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict[Monomial, Fraction] | None = None, *, _canonical: bool = False):
        if terms is None:
            terms = {}
        if _canonical:
            self.terms = terms
            return
        acc: dict[Monomial, Fraction] = {}
        for mono, c in terms.items():
            if c == 0:
                continue
            for m2, c2 in _normalize(dict(mono), Fraction(c)):
                nc = acc.get(m2, Fraction(0)) + c2
                if nc:
                    acc[m2] = nc
                else:
                    acc.pop(m2, None)
        self.terms = acc

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero() -> "RingElem":
        return RingElem({}, _canonical=True)

    @staticmethod
    def const(c) -> "RingElem":
        c = Fraction(c)
        if c == 0:
            return RingElem.zero()
        return RingElem({(): c}, _canonical=True)

    @staticmethod
    def gen(g: Gen, exp: int = 1, coeff=1) -> "RingElem":
        return RingElem({((g, exp),): Fraction(coeff)})

    @staticmethod
    def monomial(gens: dict[Gen, int], coeff=1) -> "RingElem":
        return RingElem({tuple(sorted(gens.items(), key=lambda kv: _gen_key(kv[0]))): Fraction(coeff)})

    # -- predicates --------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(m == () for m in self.terms)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError("not a constant")
        return self.terms.get((), Fraction(0))

    def generators(self) -> set[Gen]:
        return {g for m in self.terms for g, _ in m}

    def has_kind(self, kind: str) -> bool:
        return any(g[0] == kind for g in self.generators())

    def require_shift_picture(self) -> None:
        if self.has_kind("D"):
            raise PictureError("derivative-picture generator in shift-picture element")

    def require_deriv_picture(self) -> None:
        if self.has_kind("S"):
            raise PictureError("shift-picture generator in derivative-picture element")

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other) -> "RingElem":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        acc = dict(self.terms)
        for m, c in other.terms.items():
            nc = acc.get(m, Fraction(0)) + c
            if nc:
                acc[m] = nc
            else:
                acc.pop(m, None)
        return RingElem(acc, _canonical=True)

    __radd__ = __add__

    def __neg__(self) -> "RingElem":
        return RingElem({m: -c for m, c in self.terms.items()}, _canonical=True)

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return _coerce(other) + (-self)

    def __mul__(self, other) -> "RingElem":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        acc: dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms.items():
            d1 = dict(m1)
            for m2, c2 in other.terms.items():
                merged = dict(d1)
                for g, e in m2:
                    ne = merged.get(g, 0) + e
                    if ne:
                        merged[g] = ne
                    else:
                        merged.pop(g, None)
                for m3, c3 in _normalize(merged, c1 * c2):
                    nc = acc.get(m3, Fraction(0)) + c3
                    if nc:
                        acc[m3] = nc
                    else:
                        acc.pop(m3, None)
        return RingElem(acc, _canonical=True)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "RingElem":
        if not isinstance(n, int):
            raise TypeError("integer powers only")
        if n < 0:
            return self.inverse() ** (-n)
        out = RingElem.const(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base if n > 1 else base
            n >>= 1
        return out

    def inverse(self) -> "RingElem":
        """Inverse of a single-monomial element (Laurent unit)."""
        if len(self.terms) != 1:
            raise ExactDivisionError("only monomials are invertible")
        (mono, c), = self.terms.items()
        for g, _ in mono:
            if g[1:] == ("logv1", 0) or g[1] in ("logE", "logQP"):
                raise ExactDivisionError(f"{g} is not invertible")
        return RingElem({tuple((g, -e) for g, e in mono): 1 / c})

    def __truediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if len(other.terms) == 1:
            return self * other.inverse()
        return exact_div(self, other)

    def __eq__(self, other) -> bool:
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    # -- calculus ----------------------------------------------------------

    def shifted(self, k: int) -> "RingElem":
        return shift(self, k)

    def part_gen(self, gen: Gen) -> "RingElem":
        """Formal partial derivative with respect to one generator.

        Chains through log(Q/P), whose arguments are shift jets.
        """
        out = RingElem.zero()
        for mono, c in self.terms.items():
            d = dict(mono)
            e = d.get(gen, 0)
            if e:
                d2 = dict(d)
                if e == 1:
                    del d2[gen]
                else:
                    d2[gen] = e - 1
                out = out + RingElem.monomial(d2, c * e)
            if gen[0] == "S":
                for g, eg in mono:
                    if g[0] == "T" and g[1] == "logQP" and g[2] == gen[2] and gen[1] in ("P", "Q"):
                        d2 = dict(d)
                        if eg == 1:
                            del d2[g]
                        else:
                            d2[g] = eg - 1
                        sign = 1 if gen[1] == "Q" else -1
                        d2[gen] = d2.get(gen, 0) - 1
                        out = out + RingElem.monomial(d2, c * eg * sign)
        return out

    def max_jet_order(self, var: str) -> int:
        orders = [g[2] for g in self.generators() if g[0] == "D" and g[1] == var]
        return max(orders, default=-1)

    def shift_offsets(self) -> list[int]:
        return [g[2] for g in self.generators() if g[0] == "S" or (g[0] == "T" and g[1] == "logQP")]

    def content(self) -> Fraction:
        """Positive rational content (gcd of coefficients)."""
        import math

        if not self.terms:
            return Fraction(1)
        num = 0
        den = 1
        for c in self.terms.values():
            num = math.gcd(num, c.numerator)
            den = den * c.denominator // math.gcd(den, c.denominator)
        return Fraction(num, den) if num else Fraction(1)

    # -- output ------------------------------------------------------------

    def __repr__(self) -> str:
        return f"RingElem({self})"

    def __str__(self) -> str:
        return render(self)


def _coerce(x) -> RingElem:
    if isinstance(x, RingElem):
        return x
    if isinstance(x, (int, Fraction)):
        return RingElem.const(x)
    return NotImplemented


ZERO = RingElem.zero()
ONE = RingElem.const(1)


# -- named symbols ----------------------------------------------------------

def P(k: int = 0) -> RingElem:
    return RingElem.gen(sgen("P", k))


def Q(k: int = 0) -> RingElem:
    return RingElem.gen(sgen("Q", k))


def jet(var: str, order: int = 0) -> RingElem:
    return RingElem.gen(dgen(var, order))


V1 = RingElem.gen(dgen("v1"))
V2 = RingElem.gen(dgen("v2"))
EV2 = RingElem.gen(tgen("ev2"))
LOGV1 = RingElem.gen(tgen("logv1"))
SQRT_V1EV2 = RingElem.gen(tgen("sqrt"))
UINV = RingElem.gen(tgen("uinv"))          # 1/(v1 - exp(v2))
LOG_EV2_M_V1 = RingElem.gen(tgen("logE"))  # log(exp(v2) - v1)
LOG_Q_OVER_P = RingElem.gen(tgen("logQP"))


# -- shift action ------------------------------------------------------------

def shift(e: RingElem, k: int) -> RingElem:
    """Lattice translation by k sites (the action of Lambda^k)."""
    e.require_shift_picture()
    if k == 0:
        return e
    out: dict[Monomial, Fraction] = {}
    for mono, c in e.terms.items():
        shifted = tuple(
            ((g[0], g[1], g[2] + k) if g[0] == "S" or (g[0] == "T" and g[1] == "logQP") else g, ex)
            for g, ex in mono
        )
        out[tuple(sorted(shifted, key=lambda kv: _gen_key(kv[0])))] = c
    return RingElem(out, _canonical=True)


# -- derivations -------------------------------------------------------------

def _trans_partial(tag: str, var: str) -> RingElem:
    """d(tag)/d(var) for var in {v1, v2}, from the derivation table."""
    table = {
        ("ev2", "v2"): EV2,
        ("logv1", "v1"): jet("v1") ** -1,
        ("sqrt", "v1"): SQRT_V1EV2 * jet("v1") ** -1 * Fraction(1, 2),
        ("sqrt", "v2"): SQRT_V1EV2 * Fraction(1, 2),
        ("uinv", "v1"): -(UINV ** 2),
        ("uinv", "v2"): EV2 * UINV ** 2,
        ("logE", "v1"): UINV,
        ("logE", "v2"): -EV2 * UINV,
    }
    return table.get((tag, var), ZERO)


def diff(e: RingElem, var: str) -> RingElem:
    """Partial derivative with respect to the base field var in {v1, v2}.

    Jets of order >= 1 are treated as independent symbols.
    """
    if var not in ("v1", "v2"):
        raise ValueError("diff is defined for v1, v2")
    out = ZERO
    base = dgen(var, 0)
    for mono, c in e.terms.items():
        d = dict(mono)
        for g, ex in mono:
            rest = dict(d)
            if ex == 1:
                del rest[g]
            else:
                rest[g] = ex - 1
            if g == base:
                out = out + RingElem.monomial(rest, c * ex)
            elif g[0] == "T" and g[1] in _V_TAGS:
                dg = _trans_partial(g[1], var)
                if not dg.is_zero():
                    out = out + RingElem.monomial(rest, c * ex) * dg
    return out


def _dx_of_gen(g: Gen) -> RingElem:
    kind, name, idx = g
    if kind == "D":
        return RingElem.gen(dgen(name, idx + 1))
    if kind == "T":
        if name == "logQP":
            if idx != 0:
                raise PictureError("total_x_derivative on shifted log(Q/P)")
            return jet("Q") ** -1 * jet("Q", 1) - jet("P") ** -1 * jet("P", 1)
        return _trans_partial(name, "v1") * jet("v1", 1) + _trans_partial(name, "v2") * jet("v2", 1)
    raise PictureError("shift-picture generator in total_x_derivative")


def total_x_derivative(e: RingElem) -> RingElem:
    """Total x-derivative in the derivative picture (Leibniz over all jets)."""
    e.require_deriv_picture()
    out = ZERO
    for mono, c in e.terms.items():
        d = dict(mono)
        for g, ex in mono:
            rest = dict(d)
            if ex == 1:
                del rest[g]
            else:
                rest[g] = ex - 1
            out = out + RingElem.monomial(rest, c * ex) * _dx_of_gen(g)
    return out


def x_derivative(e: RingElem, times: int) -> RingElem:
    for _ in range(times):
        e = total_x_derivative(e)
    return e


# -- epsilon expansion --------------------------------------------------------

class EpsSeries:
    """Truncated power series in epsilon with RingElem coefficients."""

    __slots__ = ("coeffs", "order")

    def __init__(self, coeffs: dict[int, RingElem], order: int):
        self.order = order
        self.coeffs = {s: c for s, c in coeffs.items() if 0 <= s <= order and not c.is_zero()}

    @staticmethod
    def const(e: RingElem, order: int) -> "EpsSeries":
        return EpsSeries({0: e}, order)

    def coeff(self, s: int) -> RingElem:
        return self.coeffs.get(s, ZERO)

    def __add__(self, other: "EpsSeries") -> "EpsSeries":
        order = min(self.order, other.order)
        out = dict(self.coeffs)
        for s, c in other.coeffs.items():
            out[s] = out.get(s, ZERO) + c
        return EpsSeries(out, order)

    def __neg__(self) -> "EpsSeries":
        return EpsSeries({s: -c for s, c in self.coeffs.items()}, self.order)

    def __sub__(self, other: "EpsSeries") -> "EpsSeries":
        return self + (-other)

    def __mul__(self, other) -> "EpsSeries":
        if isinstance(other, (int, Fraction, RingElem)):
            other = EpsSeries.const(_coerce(other), self.order)
        order = min(self.order, other.order)
        out: dict[int, RingElem] = {}
        for s1, c1 in self.coeffs.items():
            for s2, c2 in other.coeffs.items():
                if s1 + s2 <= order:
                    out[s1 + s2] = out.get(s1 + s2, ZERO) + c1 * c2
        return EpsSeries(out, order)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "EpsSeries":
        out = EpsSeries.const(ONE, self.order)
        for _ in range(n):
            out = out * self
        return out

    def is_zero(self) -> bool:
        return not self.coeffs

    def __eq__(self, other) -> bool:
        if not isinstance(other, EpsSeries):
            return NotImplemented
        order = min(self.order, other.order)
        return all(self.coeff(s) == other.coeff(s) for s in range(order + 1))

    def __repr__(self):
        parts = [f"eps^{s}*({c})" for s, c in sorted(self.coeffs.items())] or ["0"]
        return " + ".join(parts) + f" + O(eps^{self.order + 1})"


def _eps_factor(g: Gen, exp: int, order: int) -> EpsSeries:
    """Series of one shifted generator power under Lambda = exp(eps d/dx)."""
    kind, name, k = g
    if kind == "S":
        base = RingElem.gen(dgen(name, 0))
        if k == 0 or order == 0:
            return EpsSeries.const(base ** exp, order)
        u: dict[int, RingElem] = {}
        for s in range(1, order + 1):
            u[s] = RingElem.gen(dgen(name, s), coeff=Fraction(k ** s, _fact(s))) * base ** -1
        useries = EpsSeries(u, order)
        out = EpsSeries.const(ZERO, order)
        upow = EpsSeries.const(ONE, order)
        for j in range(order + 1):
            out = out + binom_frac(exp, j) * upow
            upow = upow * useries
        return out * (base ** exp)
    if kind == "T" and name == "logQP":
        base = LOG_Q_OVER_P
        series: dict[int, RingElem] = {}
        d = base
        series[0] = base
        for s in range(1, order + 1):
            d = total_x_derivative(d)
            series[s] = d * Fraction(k ** s, _fact(s))
        if exp < 0:
            raise PictureError("negative power of log(Q/P)")
        return EpsSeries(series, order) ** exp
    # v-picture transcendental or constant: passes through unchanged
    return EpsSeries.const(RingElem.gen(g, exp), order)


def _fact(n: int) -> int:
    out = 1
    for i in range(2, n + 1):
        out *= i
    return out


def eps_expand(e: RingElem, order: int) -> EpsSeries:
    """Replace every lattice shift by its exp(eps d/dx) jet series.

    Order 0 is the dispersionless limit: all offsets are dropped.
    """
    e.require_shift_picture()
    total = EpsSeries.const(ZERO, order)
    for mono, c in e.terms.items():
        term = EpsSeries.const(RingElem.const(c), order)
        for g, exp in mono:
            term = term * _eps_factor(g, exp, order)
        total = total + term
    return total


def eps0(e: RingElem) -> RingElem:
    """Dispersionless limit (coefficient of eps^0 with all shifts dropped)."""
    return eps_expand(e, 0).coeff(0)


# -- total-difference equation ------------------------------------------------

def solve_total_difference(e: RingElem) -> RingElem:
    """Solve shift(g, 1) - g = e exactly.

    Monomials are grouped into shift-equivalence classes; within each class the
    telescoping solution exists iff the class coefficients sum to zero.
    Raises :class:`NotTotalDifference` (with the irreducible residual) if any
    class sum is nonzero, e.g. for shift-invariant terms such as constants.
    """
    e.require_shift_picture()
    classes: dict[Monomial, dict[int, Fraction]] = {}
    residual = ZERO
    for mono, c in e.terms.items():
        offs = [g[2] for g, _ in mono if g[0] == "S" or (g[0] == "T" and g[1] == "logQP")]
        if not offs:
            residual = residual + RingElem({mono: c}, _canonical=True)
            continue
        top = max(offs)
        rep_elem = shift(RingElem({mono: Fraction(1)}, _canonical=True), -top)
        (rep,) = rep_elem.terms.keys()
        cls = classes.setdefault(rep, {})
        cls[top] = cls.get(top, Fraction(0)) + c

    g_total = ZERO
    for rep, coeffs in classes.items():
        total = sum(coeffs.values(), Fraction(0))
        if total != 0:
            residual = residual + RingElem({rep: total}, _canonical=True)
            continue
        rep_elem = RingElem({rep: Fraction(1)}, _canonical=True)
        hi = max(coeffs)
        lo = min(coeffs)
        d = Fraction(0)
        for j in range(hi, lo - 1, -1):
            d = coeffs.get(j, Fraction(0)) + d
            if j - 1 >= lo - 1 and d:
                g_total = g_total + shift(rep_elem, j - 1) * d
        # after the descent d == total == 0 by construction
    if not residual.is_zero():
        raise NotTotalDifference(residual)
    return g_total


def is_total_difference(e: RingElem) -> bool:
    try:
        solve_total_difference(e)
        return True
    except NotTotalDifference:
        return False


# -- exact division ------------------------------------------------------------

def _lead(e: RingElem) -> tuple[Monomial, Fraction]:
    m = max(e.terms, key=_mono_key)
    return m, e.terms[m]


def exact_div(num: RingElem, den: RingElem) -> RingElem:
    """Exact polynomial division in the Laurent ring; raises if inexact."""
    if den.is_zero():
        raise ZeroDivisionError("division by zero element")
    if num.is_zero():
        return ZERO
    if len(den.terms) == 1:
        return num * den.inverse()
    quotient = ZERO
    rem = num
    cap = 16 + 8 * len(num.terms) * len(den.terms)
    dm, dc = _lead(den)
    dinv = RingElem({tuple((g, -e) for g, e in dm): 1 / dc})
    steps = 0
    while not rem.is_zero():
        steps += 1
        if steps > cap:
            raise ExactDivisionError("division does not terminate; not exactly divisible")
        nm, nc = _lead(rem)
        t = RingElem({nm: nc}, _canonical=True) * dinv
        quotient = quotient + t
        rem = rem - t * den
    return quotient


# -- substitution ---------------------------------------------------------------

def substitute_jets(e: RingElem, images: dict[str, RingElem]) -> RingElem:
    """Replace the jets of derivative-picture fields by jets of given images.

    ``images`` maps a field name (e.g. "P") to its replacement expressed in
    other derivative-picture fields; order-s jets map to the s-th total
    x-derivative of the image.  log(Q/P) maps to log-image difference when both
    P and Q images are supplied as exp-type expressions via ``log_images``.
    """
    cache: dict[tuple[str, int], RingElem] = {}

    def image_jet(var: str, order: int) -> RingElem:
        keyed = (var, order)
        if keyed not in cache:
            if order == 0:
                cache[keyed] = images[var]
            else:
                cache[keyed] = total_x_derivative(image_jet(var, order - 1))
        return cache[keyed]

    out = ZERO
    for mono, c in e.terms.items():
        term = RingElem.const(c)
        for g, exp in mono:
            kind, name, idx = g
            if kind == "D" and name in images:
                term = term * image_jet(name, idx) ** exp
            elif kind == "T" and name == "logQP":
                raise ValueError("substitute_jets cannot rewrite log(Q/P); handle separately")
            else:
                term = term * RingElem.gen(g, exp)
        out = out + term
    return out


def substitute_w(e: RingElem) -> RingElem:
    """Apply w1 = Q - P, exp(w2) = Q to a theta-type element in v-generators.

    Produces a shift-picture element at offset zero: v1 -> Q - P,
    exp(v2) -> Q, inv(v1-exp(v2)) -> -1/P, log(exp(v2)-v1) -> log P (rejected),
    bare v2 / log v1 (rejected: no closed lattice image).
    """
    pq = {"v1": Q() - P(), "ev2": Q()}
    out = ZERO
    for mono, c in e.terms.items():
        term = RingElem.const(c)
        for g, exp in mono:
            kind, name, idx = g
            if kind == "D" and name == "v1" and idx == 0:
                term = term * pq["v1"] ** exp
            elif kind == "T" and name == "ev2":
                term = term * Q() ** exp
            elif kind == "T" and name == "uinv":
                term = term * (-(P() ** -1)) ** exp
            else:
                raise ValueError(f"no w-substitution image for generator {g}")
        out = out + term
    return out


# -- symbolic integration (for the theta recursion) -----------------------------

class NotIntegrable(ValueError):
    pass


def integrate_v1(e: RingElem) -> RingElem:
    """Antiderivative in v1, exact on the monomial classes the recursion emits."""
    out = ZERO
    for mono, c in e.terms.items():
        d = dict(mono)
        a = d.pop(dgen("v1"), 0)
        logs = d.pop(tgen("logv1"), 0)
        b = d.pop(tgen("uinv"), 0)
        for g in d:
            if g[0] == "T" and g[1] in ("sqrt", "logE"):
                raise NotIntegrable(f"cannot integrate {g} in v1")
        rest = RingElem.monomial(d, c)
        if b:
            if a != 0 or logs != 0:
                raise NotIntegrable("mixed v1 and inv(v1-exp(v2)) monomial")
            if b == 1:
                raise NotIntegrable("antiderivative of inv(v1-exp(v2)) is a new log")
            out = out + rest * RingElem.gen(tgen("uinv"), b - 1, Fraction(-1, b - 1))
            continue
        out = out + rest * _int_pow_log(a, logs)
    return out


def _int_pow_log(a: int, logs: int) -> RingElem:
    """integral of v1^a * log(v1)^logs dv1."""
    v1 = jet("v1")
    if logs == 0:
        if a == -1:
            return LOGV1
        return v1 ** (a + 1) * Fraction(1, a + 1)
    if a == -1:
        return RingElem.gen(tgen("logv1"), logs + 1, Fraction(1, logs + 1))
    lead = v1 ** (a + 1) * RingElem.gen(tgen("logv1"), logs, Fraction(1, a + 1))
    return lead - Fraction(logs, a + 1) * _int_pow_log(a, logs - 1)


def integrate_v2(e: RingElem) -> RingElem:
    """Antiderivative in v2 for monomials free of v1-dependent generators."""
    out = ZERO
    for mono, c in e.terms.items():
        d = dict(mono)
        m = d.pop(dgen("v2"), 0)
        k = d.pop(tgen("ev2"), 0)
        for g in d:
            if g[0] == "T" and g[1] in ("sqrt", "logE", "uinv"):
                raise NotIntegrable(f"cannot integrate {g} in v2")
            if g == dgen("v1") or g == tgen("logv1"):
                raise NotIntegrable("v1-dependent residual in v2 integration")
        rest = RingElem.monomial(d, c)
        out = out + rest * _int_v2_pow_exp(m, k)
    return out


def _int_v2_pow_exp(m: int, k: int) -> RingElem:
    """integral of v2^m * exp(k v2) dv2."""
    v2 = jet("v2")
    if k == 0:
        return v2 ** (m + 1) * Fraction(1, m + 1)
    lead = v2 ** m * RingElem.gen(tgen("ev2"), k, Fraction(1, k))
    if m == 0:
        return lead
    return lead - Fraction(m, k) * _int_v2_pow_exp(m - 1, k)


# -- canonical text rendering ----------------------------------------------------

def _gen_str(g: Gen) -> str:
    kind, name, idx = g
    if kind == "S":
        return name if idx == 0 else f"{name}[{idx:+d}]"
    if kind == "D":
        if idx == 0:
            return name
        if idx <= 3:
            return f"{name}_{'x' * idx}"
        return f"{name}_x{idx}"
    if name == "logQP":
        return "log(Q/P)" if idx == 0 else f"log(Q/P)[{idx:+d}]"
    return {
        "ev2": "exp(v2)",
        "logv1": "log(v1)",
        "sqrt": "sqrt(v1*exp(v2))",
        "uinv": "inv(v1-exp(v2))",
        "logE": "log(exp(v2)-v1)",
    }[name]


def render(e: RingElem) -> str:
    """Deterministic text form: graded-lex term order, leading term first."""
    if e.is_zero():
        return "0"
    parts: list[str] = []
    for mono in sorted(e.terms, key=_mono_key, reverse=True):
        c = e.terms[mono]
        factors = [f"{_gen_str(g)}^{ex}" if ex != 1 else _gen_str(g) for g, ex in mono]
        body = "*".join(factors)
        mag = abs(c)
        if not factors:
            chunk = str(mag)
        elif mag == 1:
            chunk = body
        else:
            chunk = f"{mag}*{body}"
        if not parts:
            parts.append(chunk if c > 0 else f"-{chunk}")
        else:
            parts.append(f"+ {chunk}" if c > 0 else f"- {chunk}")
    return " ".join(parts)
