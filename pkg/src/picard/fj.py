"""Truncated Fourier-Jacobi series with section-valued coefficients.

A series f = sum_n f_n w^n stores f_0..f_V where V = valid_to and f_n lies
in the degree-n piece of A (or its prime extension).  Every operation keeps
track of how far its result can be trusted.

The bracket of two scalar forms uses the normalized pair (delta, N) in place
of the analytic gradients: N multiplies f_n by n and delta is the formal
derivation of the section algebra.  Vector forms of weight Sym^j built from
symmetric powers keep a presentation (sum of s_t Sym^j(U_t)) / den, which
is what the Vandermonde wedge works from.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .eisenstein import CyclotomicRational, EisensteinInteger
from .sections import (
    DiffSectionElement,
    Divider,
    NotDivisible,
    NotReducible,
    SectionElement,
    derivation,
    pretty_section,
    wronskian_reduce,
)

__all__ = [
    "FJSeries",
    "VectorFormFJ",
    "Presentation",
    "QSeries",
    "ShapeMismatch",
    "NotDivisible",
    "NotReducible",
    "bracket",
    "divide",
    "wedge",
    "pair_wedge",
    "restrict_to_curve",
    "n_operator",
]


class TruncationTooShallow(ValueError):
    pass


class ShapeMismatch(ValueError):
    pass


def _is_diff(c) -> bool:
    return isinstance(c, DiffSectionElement)


def _add(a, b):
    if _is_diff(b) and not _is_diff(a):
        return b + a
    return a + b


class FJSeries:
    """sum_{n <= valid_to} c_n w^n with deg(c_n) = n."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence):
        cs = list(coeffs)
        for n, c in enumerate(cs):
            if c.degree != n:
                raise ValueError(f"coefficient of w^{n} has degree {c.degree}")
        self.coeffs = cs

    @classmethod
    def zero(cls, valid_to: int) -> FJSeries:
        return cls([SectionElement.zero(n) for n in range(valid_to + 1)])

    @classmethod
    def one(cls, valid_to: int) -> FJSeries:
        return cls([SectionElement.one()] + [SectionElement.zero(n) for n in range(1, valid_to + 1)])

    @classmethod
    def constant(cls, c, valid_to: int) -> FJSeries:
        return cls.one(valid_to).scale(c)

    @property
    def valid_to(self) -> int:
        return len(self.coeffs) - 1

    order = valid_to

    def __getitem__(self, n: int):
        if n > self.valid_to:
            raise IndexError(f"coefficient {n} beyond valid_to={self.valid_to}")
        return self.coeffs[n]

    def __len__(self):
        return len(self.coeffs)

    def truncate(self, W: int) -> FJSeries:
        if W > self.valid_to:
            raise ValueError(f"cannot extend a series valid to {self.valid_to} up to {W}")
        return FJSeries(self.coeffs[: W + 1])

    def is_prime_free(self) -> bool:
        return all(not _is_diff(c) or c.is_prime_free() for c in self.coeffs)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)

    def first_nonzero(self) -> Optional[int]:
        for n, c in enumerate(self.coeffs):
            if not c.is_zero():
                return n
        return None

    def __add__(self, other):
        if not isinstance(other, FJSeries):
            return self + FJSeries.constant(other, self.valid_to)
        V = min(self.valid_to, other.valid_to)
        return FJSeries([_add(a, b) for a, b in zip(self.coeffs[: V + 1], other.coeffs[: V + 1])])

    __radd__ = __add__

    def __neg__(self):
        return FJSeries([-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> FJSeries:
        if isinstance(c, int) and c == 1:
            return self
        return FJSeries([x * c if _is_diff(x) else x.scale(c) for x in self.coeffs])

    def __mul__(self, other):
        if not isinstance(other, FJSeries):
            return self.scale(other)
        V = min(self.valid_to, other.valid_to)
        a = [(i, c) for i, c in enumerate(self.coeffs[: V + 1]) if not c.is_zero()]
        b = [(i, c) for i, c in enumerate(other.coeffs[: V + 1]) if not c.is_zero()]
        acc: list = [None] * (V + 1)
        for i, ci in a:
            for j, cj in b:
                n = i + j
                if n > V:
                    break
                t = ci * cj
                acc[n] = t if acc[n] is None else _add(acc[n], t)
        return FJSeries([acc[n] if acc[n] is not None else SectionElement.zero(n) for n in range(V + 1)])

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, e: int) -> FJSeries:
        out = FJSeries.one(self.valid_to)
        for _ in range(e):
            out = out * self
        return out

    def __truediv__(self, other):
        if isinstance(other, FJSeries):
            return divide(self, other)
        return self.scale(CyclotomicRational.coerce(other).inverse())

    def __eq__(self, other):
        if not isinstance(other, FJSeries):
            return NotImplemented
        V = min(self.valid_to, other.valid_to)
        return all(_coeff_eq(a, b) for a, b in zip(self.coeffs[: V + 1], other.coeffs[: V + 1]))

    __hash__ = None

    def map(self, fn: Callable) -> FJSeries:
        return FJSeries([fn(c) for c in self.coeffs])

    def n_operator(self) -> FJSeries:
        return FJSeries([c * n if _is_diff(c) else c.scale(n) for n, c in enumerate(self.coeffs)])

    def derivation(self) -> FJSeries:
        return FJSeries([derivation(c) for c in self.coeffs])

    def apply_r2(self) -> FJSeries:
        return self.map(lambda c: c.apply_r2())

    def apply_r3(self) -> FJSeries:
        return self.map(lambda c: c.apply_r3())

    def reduce_primes(self) -> FJSeries:
        return FJSeries([wronskian_reduce(c) for c in self.coeffs])

    def is_proportional(self, other: FJSeries) -> Optional[CyclotomicRational]:
        """The ratio lambda with self = lambda * other, or None."""
        lam = None
        V = min(self.valid_to, other.valid_to)
        for a, b in zip(self.coeffs[: V + 1], other.coeffs[: V + 1]):
            if b.is_zero():
                if not a.is_zero():
                    return None
                continue
            if lam is None:
                (mono, cb), = [next(iter(b.terms()))]
                lam = a.coefficient(*mono) / cb
            if a != b.scale(lam):
                return None
        return lam

    def pretty(self, upto: Optional[int] = None) -> str:
        V = self.valid_to if upto is None else min(upto, self.valid_to)
        parts = []
        for n in range(V + 1):
            c = self.coeffs[n]
            if c.is_zero():
                continue
            body = pretty_section(c) if not _is_diff(c) else c.pretty()
            single = _is_single(c)
            wpow = "" if n == 0 else ("w" if n == 1 else "w" + _sup(n))
            if n == 0:
                txt = body
            elif single:
                if body in ("1", "-1"):
                    body = body[:-1]
                txt = body + wpow
            else:
                txt = f"({body}){wpow}"
            parts.append(txt)
        if not parts:
            s = "0"
        else:
            s = parts[0]
            for t in parts[1:]:
                s += (" - " + t[1:]) if t.startswith("-") else (" + " + t)
        return s + f" + O(w{_sup(V + 1)})"

    def __repr__(self):
        return f"FJSeries({self.pretty()})"

    def serialize(self) -> list[str]:
        lines = []
        for n, c in enumerate(self.coeffs):
            if _is_diff(c):
                raise ValueError("serialization of prime-linear series is not supported")
            for (a, b, cc), v in sorted(c.terms(), reverse=True):
                lines.append(f"{n} {a} {b} {cc} {v}")
        return lines


def _sup(n: int) -> str:
    return str(n).translate(str.maketrans("0123456789", "⁰¹²³⁴⁵⁶⁷⁸⁹"))


def _is_single(c) -> bool:
    if _is_diff(c):
        return False
    terms = list(c.terms())
    return len(terms) == 1 and (terms[0][1].a == 0 or terms[0][1].b == 0)


def _coeff_eq(a, b) -> bool:
    if _is_diff(a) or _is_diff(b):
        d = _add(a, -b) if not _is_diff(a) else a - b
        return d.is_zero()
    return a == b


def n_operator(f: FJSeries) -> FJSeries:
    return f.n_operator()


# ---------------------------------------------------------------------------
# division


def _divide_coeff(c, dv: Divider):
    if _is_diff(c):
        if c.is_prime_free():
            return DiffSectionElement(dv.divide(c.base))
        # divide the presentation-free pair (e, f) with c = (e X' + f) / X
        e, f = c.invariants()
        return DiffSectionElement.from_invariants(dv.divide(e), dv.divide(f))
    return dv.divide(c)


def divide(f, g: FJSeries):
    """Exact quotient f / g of series (f may be a VectorFormFJ)."""
    if isinstance(f, VectorFormFJ):
        return f.divide(g)
    n0 = g.first_nonzero()
    if n0 is None:
        raise ZeroDivisionError("division by the zero series")
    V = min(f.valid_to, g.valid_to)
    for k in range(min(n0, V + 1)):
        if not f.coeffs[k].is_zero():
            raise NotDivisible(f"coefficient w^{k} of the numerator must vanish")
    dv = Divider(g.coeffs[n0])
    q: list = []
    for n in range(V - n0 + 1):
        r = f.coeffs[n + n0]
        for i in range(n):
            gi = g.coeffs[n0 + n - i]
            if not gi.is_zero() and not q[i].is_zero():
                r = _add(r, -(q[i] * gi))
        try:
            q.append(_divide_coeff(r, dv))
        except NotDivisible as exc:
            raise NotDivisible(f"step w^{n}: {exc}") from None
    return FJSeries(q)


# ---------------------------------------------------------------------------
# vector forms


@dataclass
class Presentation:
    """(sum_t s_t * Sym^j(U_t)) / den with U_t = (first, last) weight-(1, .) vectors."""

    j: int
    terms: list  # list of (FJSeries scalar, (FJSeries first, FJSeries last))
    den: Optional[FJSeries] = None

    def last(self) -> FJSeries:
        tot = None
        for s, (_, b) in self.terms:
            t = s * (b ** self.j if self.j != 1 else b)
            tot = t if tot is None else tot + t
        return tot if self.den is None else divide(tot, self.den)

    def first(self) -> FJSeries:
        if self.j != 1:
            raise ValueError("only j = 1 presentations carry a first component")
        tot = None
        for s, (a, _) in self.terms:
            t = s * a
            tot = t if tot is None else tot + t
        return tot if self.den is None else divide(tot, self.den)

    def scaled(self, s) -> Presentation:
        if isinstance(s, FJSeries):
            return Presentation(self.j, [(t * s, u) for t, u in self.terms], self.den)
        return Presentation(self.j, [(t.scale(s), u) for t, u in self.terms], self.den)

    def divided(self, g: FJSeries) -> Presentation:
        return Presentation(self.j, list(self.terms), g if self.den is None else self.den * g)

    def __add__(self, other: Presentation) -> Presentation:
        if self.j != other.j:
            raise ShapeMismatch("presentations with different j")
        if self.den is other.den:
            return Presentation(self.j, self.terms + other.terms, self.den)
        a = self.scaled(other.den) if other.den is not None else self
        b = other.scaled(self.den) if self.den is not None else other
        den = None
        if self.den is not None and other.den is not None:
            den = self.den * other.den
        else:
            den = self.den if self.den is not None else other.den
        return Presentation(self.j, a.terms + b.terms, den)


@dataclass
class VectorFormFJ:
    """A named form of weight (j, k) and character det^ell."""

    name: str
    j: int
    k: int
    ell: int
    last: FJSeries
    firsts: Optional[list] = None
    presentation: Optional[Presentation] = None
    provenance: str = ""
    scale_note: str = ""

    @property
    def valid_to(self) -> int:
        return self.last.valid_to

    @property
    def first(self) -> Optional[FJSeries]:
        return self.firsts[0] if self.firsts else None

    def is_cusp_form_expected(self) -> bool:
        return (self.ell - self.j) % 3 != 0

    def check_metadata(self) -> list[str]:
        problems = []
        if not self.last.is_zero() and (self.j - self.k) % 3:
            problems.append("j and k differ mod 3 for a nonzero form")
        if self.is_cusp_form_expected() and not self.last.coeffs[0].is_zero():
            problems.append("constant term of a cusp form is nonzero")
        return problems

    def _with(self, **kw) -> VectorFormFJ:
        return replace(self, **kw)

    def scale(self, c, name: Optional[str] = None) -> VectorFormFJ:
        return self._with(
            name=name or self.name,
            last=self.last.scale(c),
            firsts=None if self.firsts is None else [f.scale(c) for f in self.firsts],
            presentation=None if self.presentation is None else self.presentation.scaled(c),
        )

    def times(self, f: FJSeries, k: int, ell: int, name: str = "") -> VectorFormFJ:
        return VectorFormFJ(
            name or self.name, self.j, self.k + k, (self.ell + ell) % 3, self.last * f,
            None if self.firsts is None else [x * f for x in self.firsts],
            None if self.presentation is None else self.presentation.scaled(f),
        )

    def __add__(self, other: VectorFormFJ) -> VectorFormFJ:
        if (self.j, self.k, self.ell) != (other.j, other.k, other.ell):
            raise ShapeMismatch("adding forms of different weight or character")
        firsts = None
        if self.firsts is not None and other.firsts is not None:
            firsts = [a + b for a, b in zip(self.firsts, other.firsts)]
        pres = None
        if self.presentation is not None and other.presentation is not None:
            pres = self.presentation + other.presentation
        return VectorFormFJ(f"({self.name}+{other.name})", self.j, self.k, self.ell,
                            self.last + other.last, firsts, pres)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def divide(self, g: FJSeries, k: int = 0, ell: int = 0, name: str = "") -> VectorFormFJ:
        return VectorFormFJ(
            name or self.name, self.j, self.k - k, (self.ell - ell) % 3, divide(self.last, g),
            None if self.firsts is None else [divide(x, g) for x in self.firsts],
            None if self.presentation is None else self.presentation.divided(g),
        )

    def apply_r2(self) -> VectorFormFJ:
        return self._with(last=self.last.apply_r2(),
                          firsts=None if self.firsts is None else [f.apply_r2() for f in self.firsts],
                          presentation=None)

    def apply_r3(self) -> VectorFormFJ:
        return self._with(last=self.last.apply_r3(),
                          firsts=None if self.firsts is None else [f.apply_r3() for f in self.firsts],
                          presentation=None)

    def as_vector(self):
        """(first, last) pair for a j = 1 form."""
        if self.j != 1 or not self.firsts:
            raise ShapeMismatch(f"{self.name} is not a j=1 form with a first component")
        return (self.firsts[0], self.last)


def bracket(f: FJSeries, k: int, h: FJSeries, l: int, ell: int = 0, name: str = "") -> VectorFormFJ:
    """Normalized first-order bracket of scalar forms of weights k and l."""
    if k < 1 or l < 1:
        raise ValueError("weights must be positive")
    a, b = Fraction(1, l), Fraction(1, k)
    last = (f * h.n_operator()).scale(a) - (h * f.n_operator()).scale(b)
    first = (h.derivation() * f).scale(a) - (f.derivation() * h).scale(b)
    return VectorFormFJ(name or "bracket", 1, k + l + 1, ell % 3, last, [first])


# ---------------------------------------------------------------------------
# wedges


_pair_cache: dict = {}


def pair_wedge(u, v) -> FJSeries:
    """a_u b_v - b_u a_v for j = 1 vectors (a first, b last), reduced to sections."""
    key = (id(u[0]), id(u[1]), id(v[0]), id(v[1]))
    hit = _pair_cache.get(key)
    if hit is not None and hit[0] is u and hit[1] is v:
        return hit[2]
    raw = u[0] * v[1] - v[0] * u[1]
    try:
        out = raw.reduce_primes()
    except NotReducible as exc:
        raise NotReducible(f"pairwise wedge is not reducible: {exc}") from None
    _pair_cache[key] = (u, v, out)
    return out


def wedge(forms: Sequence[VectorFormFJ]) -> FJSeries:
    """Determinant of j+1 forms of weight Sym^j through their presentations."""
    if not forms:
        raise ShapeMismatch("empty wedge")
    j = forms[0].j
    if any(f.j != j for f in forms) or len(forms) != j + 1:
        raise ShapeMismatch("wedge needs j+1 forms sharing j")
    pres = []
    for f in forms:
        if f.presentation is not None:
            pres.append(f.presentation)
        elif j == 1 and f.firsts:
            pres.append(Presentation(1, [(FJSeries.one(f.valid_to), (f.firsts[0], f.last))]))
        else:
            raise ShapeMismatch(f"{f.name} has no symmetric-power presentation")
    total = None
    for choice in itertools.product(*[p.terms for p in pres]):
        vecs = [u for _, u in choice]
        t = None
        for s, _ in choice:
            t = s if t is None else t * s
        for a in range(len(vecs)):
            for b in range(a + 1, len(vecs)):
                t = t * pair_wedge(vecs[a], vecs[b])
        total = t if total is None else total + t
    den = None
    for p in pres:
        if p.den is not None:
            den = p.den if den is None else den * p.den
    return total if den is None else divide(total, den)


# ---------------------------------------------------------------------------
# restriction to the modular curve


@dataclass
class QSeries:
    coeffs: list

    def __getitem__(self, n):
        return self.coeffs[n]

    def __len__(self):
        return len(self.coeffs)

    def __eq__(self, other):
        if isinstance(other, QSeries):
            other = other.coeffs
        n = min(len(self.coeffs), len(other))
        return all(CyclotomicRational.coerce(a) == CyclotomicRational.coerce(b)
                   for a, b in zip(self.coeffs[:n], other[:n]))

    def proportional_to(self, other) -> Optional[CyclotomicRational]:
        other = [CyclotomicRational.coerce(x) for x in (other.coeffs if isinstance(other, QSeries) else other)]
        lam = None
        for a, b in zip(self.coeffs, other):
            if not b:
                if a:
                    return None
                continue
            if lam is None:
                lam = a / b
            if a != lam * b:
                return None
        return lam

    def __str__(self):
        out = []
        for n, c in enumerate(self.coeffs):
            if not c:
                continue
            q = "" if n == 0 else ("q" if n == 1 else "q" + _sup(n))
            cs = str(c)
            if c.a and c.b:
                cs = f"({cs})"
            if q and cs in ("1", "-1"):
                cs = cs[:-1]
            out.append(cs + q)
        s = " + ".join(out).replace("+ -", "- ") if out else "0"
        return s + f" + O(q{_sup(len(self.coeffs))})"


def restrict_to_curve(f: FJSeries) -> QSeries:
    if not f.is_prime_free():
        raise ValueError("restriction needs prime-free coefficients")
    return QSeries([c.ev_zero() for c in f.coeffs])
