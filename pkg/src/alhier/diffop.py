"""Laurent algebra of shift operators sum_i a_i Lambda^i.

Coefficients are RingElems (or any ring-like object with ``shifted``,
``is_zero`` and arithmetic).  The multiplication realizes the exchange rule
``Lambda^k a = shift(a, k) Lambda^k``.

Built operators are truncations of infinite Laurent series, so every operator
carries an *exact window* ``[lo_exact, hi_exact]`` (``None`` meaning
unbounded): inside the window the stored coefficients are the truth, outside
nothing is claimed.  Windows are propagated through sums and products, and
:func:`residue` refuses to read a coefficient that truncation could have
corrupted.  An operator with a bounded window reports ``truncated == True``.
"""

from __future__ import annotations

from typing import Callable, Iterable

from .ring import ONE, RingElem, ZERO, shift

NEG_INF = float("-inf")
POS_INF = float("inf")


class TruncationError(ArithmeticError):
    """A coefficient inside the requested range is not exactly known."""


def _lo(v):
    return NEG_INF if v is None else v


def _hi(v):
    return POS_INF if v is None else v


class LaurentOp:
    __slots__ = ("coeffs", "lo_exact", "hi_exact")

    def __init__(self, coeffs: dict[int, RingElem] | None = None,
                 lo_exact: int | None = None, hi_exact: int | None = None):
        coeffs = coeffs or {}
        self.lo_exact = lo_exact
        self.hi_exact = hi_exact
        lo, hi = _lo(lo_exact), _hi(hi_exact)
        self.coeffs = {n: c for n, c in coeffs.items() if not c.is_zero() and lo <= n <= hi}

    # -- constructors --------------------------------------------------------

    @staticmethod
    def zero() -> "LaurentOp":
        return LaurentOp({})

    @staticmethod
    def identity() -> "LaurentOp":
        return LaurentOp({0: ONE})

    @staticmethod
    def lam(k: int, coeff: RingElem = ONE) -> "LaurentOp":
        return LaurentOp({k: coeff})

    @staticmethod
    def of(coeff: RingElem) -> "LaurentOp":
        return LaurentOp({0: coeff})

    # -- inspection -----------------------------------------------------------

    @property
    def truncated(self) -> bool:
        return self.lo_exact is not None or self.hi_exact is not None

    @property
    def upper(self) -> int | None:
        return max(self.coeffs) if self.coeffs else None

    @property
    def floor(self) -> int | None:
        return self.lo_exact if self.lo_exact is not None else (min(self.coeffs) if self.coeffs else None)

    def coeff(self, n: int) -> RingElem:
        if not (_lo(self.lo_exact) <= n <= _hi(self.hi_exact)):
            raise TruncationError(f"coefficient of Lambda^{n} lies outside exact window "
                                  f"[{self.lo_exact}, {self.hi_exact}]")
        return self.coeffs.get(n, ZERO)

    def window(self) -> tuple[int | None, int | None]:
        return (self.lo_exact, self.hi_exact)

    def support(self) -> list[int]:
        return sorted(self.coeffs)

    def _max_nonzero(self):
        if self.hi_exact is not None:
            return self.hi_exact
        return max(self.coeffs) if self.coeffs else NEG_INF

    def _min_nonzero(self):
        if self.lo_exact is not None:
            return self.lo_exact
        return min(self.coeffs) if self.coeffs else POS_INF

    # -- arithmetic -------------------------------------------------------------

    def __add__(self, other: "LaurentOp") -> "LaurentOp":
        lo = None if self.lo_exact is None and other.lo_exact is None else int(max(_lo(self.lo_exact), _lo(other.lo_exact)))
        hi = None if self.hi_exact is None and other.hi_exact is None else int(min(_hi(self.hi_exact), _hi(other.hi_exact)))
        out = dict(self.coeffs)
        for n, c in other.coeffs.items():
            out[n] = out.get(n, ZERO) + c if n in out else c
        return LaurentOp(out, lo, hi)

    def __neg__(self) -> "LaurentOp":
        return LaurentOp({n: -c for n, c in self.coeffs.items()}, self.lo_exact, self.hi_exact)

    def __sub__(self, other: "LaurentOp") -> "LaurentOp":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, LaurentOp):
            return op_mul(self, other)
        return LaurentOp({n: c * other for n, c in self.coeffs.items()}, self.lo_exact, self.hi_exact)

    def __rmul__(self, other):
        # scalar * op (scalar acts on coefficients from the left, no exchange)
        return LaurentOp({n: other * c for n, c in self.coeffs.items()}, self.lo_exact, self.hi_exact)

    def __pow__(self, n: int) -> "LaurentOp":
        if n < 0:
            raise ValueError("no generic operator inverses; use geometric_inverse")
        out = LaurentOp.identity()
        for _ in range(n):
            out = op_mul(out, self)
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, LaurentOp):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __repr__(self) -> str:
        parts = [f"({c})*L^{n}" for n, c in sorted(self.coeffs.items(), reverse=True)] or ["0"]
        w = f" window[{self.lo_exact},{self.hi_exact}]" if self.truncated else ""
        return " + ".join(parts) + w

    def apply(self, f):
        """Act on a lattice function: (sum c_i Lambda^i) f = sum c_i shift(f, i)."""
        out = None
        for n, c in sorted(self.coeffs.items()):
            term = c * f.shifted(n)
            out = term if out is None else out + term
        if out is None:
            return ZERO
        return out

    def adjoint(self) -> "LaurentOp":
        """Formal adjoint: Lambda^i c  ->  shift(c, -i) Lambda^{-i}."""
        lo = None if self.hi_exact is None else -self.hi_exact
        hi = None if self.lo_exact is None else -self.lo_exact
        return LaurentOp({-n: c.shifted(-n) for n, c in self.coeffs.items()}, lo, hi)


def op_mul(a: LaurentOp, b: LaurentOp) -> LaurentOp:
    """Product with the exchange rule; exact window propagated conservatively."""
    out: dict[int, RingElem] = {}
    for i, ci in a.coeffs.items():
        for j, cj in b.coeffs.items():
            n = i + j
            term = ci * cj.shifted(i)
            out[n] = out.get(n, ZERO) + term if n in out else term

    lo_bounds = []
    if a.lo_exact is not None:
        lo_bounds.append(a.lo_exact + b._max_nonzero())
    if b.lo_exact is not None:
        lo_bounds.append(b.lo_exact + a._max_nonzero())
    hi_bounds = []
    if a.hi_exact is not None:
        hi_bounds.append(a.hi_exact + b._min_nonzero())
    if b.hi_exact is not None:
        hi_bounds.append(b.hi_exact + a._min_nonzero())

    lo = max(lo_bounds) if lo_bounds else None
    hi = min(hi_bounds) if hi_bounds else None
    if lo == NEG_INF:
        lo = None
    if hi == POS_INF:
        hi = None
    if lo is not None and lo == POS_INF or hi is not None and hi == NEG_INF:
        raise TruncationError("product has empty exact window")
    lo = int(lo) if lo is not None else None
    hi = int(hi) if hi is not None else None
    return LaurentOp(out, lo, hi)


def commutator(a: LaurentOp, b: LaurentOp) -> LaurentOp:
    return op_mul(a, b) - op_mul(b, a)


def plus_part(a: LaurentOp) -> LaurentOp:
    """Projection onto powers >= 0 (known-zero below, so the floor clears)."""
    lo = a.lo_exact if (a.lo_exact is not None and a.lo_exact > 0) else None
    return LaurentOp({n: c for n, c in a.coeffs.items() if n >= 0}, lo, a.hi_exact)


def minus_part(a: LaurentOp) -> LaurentOp:
    """Projection onto powers < 0."""
    hi = a.hi_exact if (a.hi_exact is not None and a.hi_exact < -1) else None
    return LaurentOp({n: c for n, c in a.coeffs.items() if n < 0}, a.lo_exact, hi)


def residue(a: LaurentOp) -> RingElem:
    """Coefficient of Lambda^0; error if truncation could have corrupted it."""
    if not (_lo(a.lo_exact) <= 0 <= _hi(a.hi_exact)):
        raise TruncationError(f"residue outside exact window [{a.lo_exact}, {a.hi_exact}]")
    return a.coeffs.get(0, ZERO)


def geometric_inverse(kind: str, depth: int, direction: str = "down") -> LaurentOp:
    """Truncated Neumann inverse of 1 - Q Lambda^{-1} or Lambda - P.

    ``one_minus_q_laminv``: sum_{k=0..depth} (Q Lambda^{-1})^k, exact down to
    Lambda^{-depth}.

    ``lam_minus_p``: for direction "down", sum_{k=0..depth-1}
    Lambda^{-1} (P Lambda^{-1})^k (exact down to Lambda^{-depth}); for
    direction "up", -sum_{k=0..depth-1} (P^{-1} Lambda)^k P^{-1} (exact up to
    Lambda^{depth-1}).  The printed expansion of the second Lax operator fixes
    the "up" direction; both one-sided compositions reproduce 1 on the
    retained window.
    """
    from .ring import P as Psym, Q as Qsym

    if depth < 1:
        raise ValueError("depth >= 1 required")
    if kind == "one_minus_q_laminv":
        step = LaurentOp.lam(-1, Qsym())
        out = LaurentOp.identity()
        acc = LaurentOp.identity()
        for _ in range(depth):
            acc = op_mul(acc, step)
            out = out + acc
        return LaurentOp(out.coeffs, -depth, None)
    if kind == "lam_minus_p":
        if direction == "down":
            acc = LaurentOp.lam(-1)
            out = acc
            for _ in range(depth - 1):
                acc = op_mul(LaurentOp.lam(-1), op_mul(LaurentOp.of(Psym()), acc))
                out = out + acc
            return LaurentOp(out.coeffs, -depth, None)
        if direction == "up":
            pinv = Psym() ** -1
            step = LaurentOp.lam(1, pinv)
            acc = LaurentOp.of(pinv)
            out = acc
            for _ in range(depth - 1):
                acc = op_mul(step, acc)
                out = out + acc
            return LaurentOp({n: -c for n, c in out.coeffs.items()}, None, depth - 1)
        raise ValueError(f"unknown direction {direction!r}")
    raise ValueError(f"unknown kind {kind!r}")
