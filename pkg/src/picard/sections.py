"""The graded section algebra A = Q(rho)[X,Y,Z]/(X^3 - rho(Y^3 - Z^3)).

The degree-n piece models the global sections of L^n on the CM elliptic
curve C/sqrt(-3)O_F and has the reduced monomial basis X^a Y^b Z^c with
a <= 2.  Internally an element of degree n is stored as three binary forms
in (Y, Z), one per power of X, each a pair of integer lists (rational part,
rho part) indexed by the power of Y, sharing one positive denominator.

DiffSectionElement adds one formal derivative X', Y', Z'.  Its reduction
uses the normalized Wronskians

    YZ' - Y'Z = X^2,   ZX' - Z'X = -rho Y^2,   XY' - X'Y = rho Z^2

together with the derived cubic relation X^2 X' = rho Y^2 Y' - rho Z^2 Z'.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Iterator, Optional, Sequence

from .eisenstein import CyclotomicRational, EisensteinInteger, format_qr, parse_qr

__all__ = [
    "SectionElement",
    "DiffSectionElement",
    "NotDivisible",
    "NotReducible",
    "RelationViolated",
    "monomials",
    "dimension",
    "X",
    "Y",
    "Z",
    "R2_IMAGES",
    "R3_IMAGES",
    "MU6_IMAGES",
    "exact_divide",
    "substitute",
    "derivation",
    "wronskian_reduce",
    "ev_zero",
    "Divider",
]


class NotDivisible(ArithmeticError):
    pass


class NotReducible(ArithmeticError):
    pass


class RelationViolated(ValueError):
    pass


def monomials(n: int) -> list[tuple[int, int, int]]:
    """Reduced monomials of degree n, ordered by (a, b) ascending."""
    return [(a, b, n - a - b) for a in range(min(2, n) + 1) for b in range(n - a + 1)]


def dimension(n: int) -> int:
    return 1 if n == 0 else 3 * n


# ---------------------------------------------------------------------------
# integer list kernels.  A "part" is a pair (re, rh) of equal-length int
# lists or None for zero.


def _conv(x: Sequence[int], y: Sequence[int]) -> list[int]:
    lx, ly = len(x), len(y)
    out = [0] * (lx + ly - 1)
    if lx > ly:
        x, y, lx, ly = y, x, ly, lx
    for i in range(lx):
        xi = x[i]
        if xi:
            for j in range(ly):
                out[i + j] += xi * y[j]
    return out


def _nz(v: Sequence[int]) -> bool:
    for t in v:
        if t:
            return True
    return False


def _pmul(p, q):
    if p is None or q is None:
        return None
    a, b = p
    c, d = q
    if not _nz(b):
        if not _nz(d):
            ac = _conv(a, c)
            return ac, [0] * len(ac)
        return _conv(a, c), _conv(a, d)
    if not _nz(d):
        return _conv(a, c), _conv(b, c)
    ac = _conv(a, c)
    bd = _conv(b, d)
    s = _conv([u + v for u, v in zip(a, b)], [u + v for u, v in zip(c, d)])
    return [u - v for u, v in zip(ac, bd)], [u - v - 2 * w for u, v, w in zip(s, ac, bd)]


def _padd(p, q):
    if p is None:
        return q
    if q is None:
        return p
    return [u + v for u, v in zip(p[0], q[0])], [u + v for u, v in zip(p[1], q[1])]


def _psub(p, q):
    if q is None:
        return p
    if p is None:
        return [-u for u in q[0]], [-u for u in q[1]]
    return [u - v for u, v in zip(p[0], q[0])], [u - v for u, v in zip(p[1], q[1])]


def _pscale_int(p, k: int):
    if p is None or k == 0:
        return None
    if k == 1:
        return p
    return [k * u for u in p[0]], [k * u for u in p[1]]


def _pscale_qr(p, c: int, d: int):
    """Multiply a part by the Eisenstein integer c + d*rho."""
    if p is None or (c == 0 and d == 0):
        return None
    a, b = p
    if d == 0:
        return [c * u for u in a], [c * u for u in b]
    return ([c * u - d * v for u, v in zip(a, b)],
            [d * u + c * v - d * v for u, v in zip(a, b)])


def _prho(p):
    if p is None:
        return None
    a, b = p
    return [-v for v in b], [u - v for u, v in zip(a, b)]


def _pcubic(p):
    """Multiply a binary form by X^3 = rho(Y^3 - Z^3)."""
    if p is None:
        return None
    out = []
    for v in p:
        m = len(v)
        t = [0] * (m + 3)
        for i in range(m):
            t[i + 3] += v[i]
            t[i] -= v[i]
        out.append(t)
    return _prho(out)


def _pzero(p) -> bool:
    return p is None or (not _nz(p[0]) and not _nz(p[1]))


def _plen(n: int, a: int) -> int:
    return n - a + 1 if n >= a else 0


def _pscale_y(p, m: int, sh: int):
    """Multiply by Y^sh (m = current length)."""
    if p is None:
        return None
    return [0] * sh + list(p[0]), [0] * sh + list(p[1])


def _pscale_z(p, sh: int):
    if p is None:
        return None
    return list(p[0]) + [0] * sh, list(p[1]) + [0] * sh


class SectionElement:
    """An element of the degree-n piece of A."""

    __slots__ = ("degree", "_parts", "_den", "_hash")

    def __init__(self, degree: int, parts, den: int = 1, _normalized: bool = False):
        self.degree = degree
        ps = []
        for a in range(3):
            p = parts[a] if a < len(parts) else None
            L = _plen(degree, a)
            if L == 0 or _pzero(p):
                ps.append(None)
            else:
                if len(p[0]) != L or len(p[1]) != L:
                    raise ValueError(f"part {a} has wrong length for degree {degree}")
                ps.append((list(p[0]), list(p[1])))
        self._parts = ps
        self._den = den
        self._hash = None
        if not _normalized:
            self._normalize()

    def _normalize(self):
        if self._den == 0:
            raise ZeroDivisionError("zero denominator")
        g = self._den
        for p in self._parts:
            if p is not None:
                g = math.gcd(g, *p[0], *p[1])
                if g == 1:
                    break
        if self._den < 0:
            g = -g
        if all(p is None for p in self._parts):
            self._den = 1
            return
        if g != 1:
            self._parts = [None if p is None else ([u // g for u in p[0]], [u // g for u in p[1]])
                           for p in self._parts]
            self._den //= g

    # -- constructors --------------------------------------------------------
    @classmethod
    def zero(cls, n: int) -> SectionElement:
        return cls(n, [None, None, None], 1, True)

    @classmethod
    def one(cls) -> SectionElement:
        return cls(0, [([1], [0])], 1, True)

    @classmethod
    def constant(cls, c) -> SectionElement:
        return cls.one() * c

    @classmethod
    def monomial(cls, a: int, b: int, c: int, coeff=1) -> SectionElement:
        n = a + b + c
        if a > 2:
            out = cls.monomial(a - 3, b, c) * X_CUBED_TIMES(cls)
            return out.scale(coeff)
        L = _plen(n, a)
        re, rh = [0] * L, [0] * L
        re[b] = 1
        parts = [None, None, None]
        parts[a] = (re, rh)
        out = cls(n, parts, 1, True)
        return out if isinstance(coeff, int) and coeff == 1 else out.scale(coeff)

    @classmethod
    def from_dict(cls, n: int, coeffs: dict) -> SectionElement:
        items = {k: CyclotomicRational.coerce(v) for k, v in coeffs.items()}
        den = 1
        for v in items.values():
            den = math.lcm(den, v.a.denominator, v.b.denominator)
        parts = [None, None, None]
        for (a, b, c), v in items.items():
            if a + b + c != n:
                raise ValueError(f"monomial {(a, b, c)} not of degree {n}")
            if a > 2:
                raise ValueError("only reduced monomials allowed in from_dict")
            if parts[a] is None:
                L = _plen(n, a)
                parts[a] = ([0] * L, [0] * L)
            parts[a][0][b] += int(v.a * den)
            parts[a][1][b] += int(v.b * den)
        return cls(n, parts, den)

    @classmethod
    def from_vector(cls, n: int, vec: Sequence) -> SectionElement:
        return cls.from_dict(n, {m: v for m, v in zip(monomials(n), vec) if v})

    # -- access --------------------------------------------------------------
    @property
    def den(self) -> int:
        return self._den

    def parts(self):
        return self._parts

    def is_zero(self) -> bool:
        return all(p is None for p in self._parts)

    def __bool__(self):
        return not self.is_zero()

    def terms(self) -> Iterator[tuple[tuple[int, int, int], CyclotomicRational]]:
        n = self.degree
        for a, p in enumerate(self._parts):
            if p is None:
                continue
            for b, (u, v) in enumerate(zip(*p)):
                if u or v:
                    yield (a, b, n - a - b), CyclotomicRational(Fraction(u, self._den), Fraction(v, self._den))

    @property
    def coeffs(self) -> dict:
        return dict(self.terms())

    def coefficient(self, a: int, b: int, c: int) -> CyclotomicRational:
        p = self._parts[a] if a < 3 else None
        if p is None or a + b + c != self.degree:
            return CyclotomicRational(0)
        return CyclotomicRational(Fraction(p[0][b], self._den), Fraction(p[1][b], self._den))

    def to_vector(self) -> list[CyclotomicRational]:
        return [self.coefficient(*m) for m in monomials(self.degree)]

    def x_degrees(self) -> set[int]:
        return {a for a, p in enumerate(self._parts) if p is not None}

    # -- arithmetic ----------------------------------------------------------
    def _aligned(self, other: SectionElement):
        if other.degree != self.degree:
            raise ValueError(f"degree mismatch {self.degree} vs {other.degree}")
        d1, d2 = self._den, other._den
        if d1 == d2:
            return self._parts, other._parts, d1
        L = d1 // math.gcd(d1, d2) * d2
        return ([_pscale_int(p, L // d1) for p in self._parts],
                [_pscale_int(p, L // d2) for p in other._parts], L)

    def __add__(self, other):
        if not isinstance(other, SectionElement):
            if other == 0:
                return self
            other = SectionElement.constant(other) if self.degree == 0 else _bad(other)
        if other.is_zero():
            return self
        if self.is_zero():
            if other.degree != self.degree:
                raise ValueError("degree mismatch")
            return other
        p, q, L = self._aligned(other)
        return SectionElement(self.degree, [_padd(x, y) for x, y in zip(p, q)], L)

    def __radd__(self, other):
        return self + other

    def __neg__(self):
        return SectionElement(self.degree, [_pscale_int(p, -1) for p in self._parts], self._den, True)

    def __sub__(self, other):
        if not isinstance(other, SectionElement):
            return self + (-CyclotomicRational.coerce(other))
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> SectionElement:
        if isinstance(c, int):
            return SectionElement(self.degree, [_pscale_int(p, c) for p in self._parts], self._den)
        c = CyclotomicRational.coerce(c)
        if not c:
            return SectionElement.zero(self.degree)
        den = math.lcm(c.a.denominator, c.b.denominator)
        ca, cb = int(c.a * den), int(c.b * den)
        return SectionElement(self.degree, [_pscale_qr(p, ca, cb) for p in self._parts], self._den * den)

    def __mul__(self, other):
        if not isinstance(other, SectionElement):
            if isinstance(other, DiffSectionElement):
                return other * self
            return self.scale(other)
        if self.is_zero() or other.is_zero():
            return SectionElement.zero(self.degree + other.degree)
        P0, P1, P2 = self._parts
        Q0, Q1, Q2 = other._parts
        r0 = _padd(_pmul(P0, Q0), _pcubic(_padd(_pmul(P1, Q2), _pmul(P2, Q1))))
        r1 = _padd(_padd(_pmul(P0, Q1), _pmul(P1, Q0)), _pcubic(_pmul(P2, Q2)))
        r2 = _padd(_padd(_pmul(P0, Q2), _pmul(P1, Q1)), _pmul(P2, Q0))
        return SectionElement(self.degree + other.degree, [r0, r1, r2], self._den * other._den)

    def __rmul__(self, other):
        return self.scale(other)

    def __truediv__(self, other):
        if isinstance(other, SectionElement):
            return exact_divide(self, other)
        return self.scale(CyclotomicRational.coerce(other).inverse())

    def __pow__(self, e: int) -> SectionElement:
        out = SectionElement.one()
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def __eq__(self, other):
        if not isinstance(other, SectionElement):
            if isinstance(other, (int, Fraction, CyclotomicRational, EisensteinInteger)):
                if self.degree != 0:
                    return self.is_zero() and other == 0
                return self.coefficient(0, 0, 0) == other
            return NotImplemented
        if self.degree != other.degree:
            return self.is_zero() and other.is_zero()
        return self._den == other._den and self._parts == other._parts

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.degree, self._den,
                               tuple(None if p is None else (tuple(p[0]), tuple(p[1])) for p in self._parts)))
        return self._hash

    # -- group actions and evaluations --------------------------------------
    def twist_x(self, c) -> SectionElement:
        """Substitute X -> cX, Y, Z fixed (c an Eisenstein integer)."""
        c = EisensteinInteger.coerce(c)
        parts = []
        pw = EisensteinInteger(1)
        for p in self._parts:
            parts.append(_pscale_qr(p, pw.a, pw.b))
            pw = pw * c
        return SectionElement(self.degree, parts, self._den)

    def swap_yz(self) -> SectionElement:
        parts = [None if p is None else (p[0][::-1], p[1][::-1]) for p in self._parts]
        return SectionElement(self.degree, parts, self._den, True)

    def apply_r2(self) -> SectionElement:
        """(X, Y, Z) -> (-X, Z, Y)."""
        return self.swap_yz().twist_x(-1)

    def apply_r3(self) -> SectionElement:
        """(X, Y, Z) -> (X, rho Y, rho^2 Z); X^aY^bZ^c picks up rho^(b+2c)."""
        n = self.degree
        parts = []
        for a, p in enumerate(self._parts):
            if p is None:
                parts.append(None)
                continue
            re, rh = [], []
            for b, (u, v) in enumerate(zip(*p)):
                e = (b + 2 * (n - a - b)) % 3
                for _ in range(e):
                    u, v = -v, u - v
                re.append(u)
                rh.append(v)
            parts.append((re, rh))
        return SectionElement(n, parts, self._den, True)

    def apply_unit(self, eps) -> SectionElement:
        """The Shintani operator of a unit: X -> eps X, Y -> Y or Z."""
        eps = EisensteinInteger.coerce(eps)
        out = self.twist_x(eps)
        if unit_swaps(eps):
            out = out.swap_yz()
        return out

    def ev_zero(self) -> CyclotomicRational:
        p = self._parts[0]
        if p is None:
            return CyclotomicRational(0)
        return CyclotomicRational(Fraction(sum(p[0]), self._den), Fraction(sum(p[1]), self._den))

    def binary_part(self, a: int):
        """The coefficient of X^a as a list of CyclotomicRational indexed by the power of Y."""
        p = self._parts[a]
        L = _plen(self.degree, a)
        if p is None:
            return [CyclotomicRational(0)] * L
        return [CyclotomicRational(Fraction(u, self._den), Fraction(v, self._den)) for u, v in zip(*p)]

    # -- text ----------------------------------------------------------------
    def to_text(self) -> str:
        items = sorted(self.terms(), key=lambda t: t[0], reverse=True)
        if not items:
            return "0"
        return " + ".join(f"({c})*X^{a}*Y^{b}*Z^{cc}" for (a, b, cc), c in items)

    @classmethod
    def from_text(cls, text: str, degree: Optional[int] = None) -> SectionElement:
        text = text.strip()
        if text == "0":
            if degree is None:
                raise ValueError("degree needed to parse 0")
            return cls.zero(degree)
        coeffs = {}
        n = None
        for term in text.split(" + "):
            head, _, rest = term.rpartition(")*")
            c = parse_qr(head.lstrip("("))
            ex = [int(f.split("^")[1]) for f in rest.split("*")]
            key = tuple(ex)
            n = sum(key)
            coeffs[key] = coeffs.get(key, CyclotomicRational(0)) + c
        if degree is not None and n != degree:
            raise ValueError("degree mismatch in text")
        return cls.from_dict(n, coeffs)

    def pretty(self) -> str:
        return pretty_section(self)

    def __repr__(self):
        return f"SectionElement({self.degree}, {self.pretty()})"

    def __str__(self):
        return self.pretty()


def _bad(other):
    raise TypeError(f"cannot add {other!r} to a section of positive degree")


def X_CUBED_TIMES(cls):
    return cls.from_dict(3, {(0, 3, 0): (0, 1), (0, 0, 3): (0, -1)})


def unit_swaps(eps: EisensteinInteger) -> bool:
    """Units -1, -rho, -rho^2 swap Y and Z; 1, rho, rho^2 fix them."""
    if not eps.is_unit():
        raise ValueError(f"{eps} is not a unit")
    return eps in (EisensteinInteger(-1), EisensteinInteger(0, -1), EisensteinInteger(1, 1))


X = SectionElement.monomial(1, 0, 0)
Y = SectionElement.monomial(0, 1, 0)
Z = SectionElement.monomial(0, 0, 1)
_RHO = CyclotomicRational(0, 1)
R2_IMAGES = (-X, Z, Y)
R3_IMAGES = (X, Y.scale(_RHO), Z.scale(_RHO * _RHO))
MU6_IMAGES = (X.scale(CyclotomicRational(1, 1)), Z, Y)


# ---------------------------------------------------------------------------
# pretty printing

_SUP = str.maketrans("0123456789-", "⁰¹²³⁴⁵⁶⁷⁸⁹⁻")


def _mono_str(a, b, c) -> str:
    s = ""
    for v, e in (("X", a), ("Y", b), ("Z", c)):
        if e == 1:
            s += v
        elif e > 1:
            s += v + str(e).translate(_SUP)
    return s


def _coef_str(c: CyclotomicRational, mono: str, first: bool) -> str:
    txt = str(c)
    simple = c.b == 0 or c.a == 0
    if simple:
        neg = txt.startswith("-")
        body = txt[1:] if neg else txt
        if mono and body == "1":
            body = ""
        elif mono and body == "r" or (mono and c.a == 0 and body.endswith("*r")):
            body = body.replace("*r", "r")
        sign = "-" if neg else ("" if first else "+")
        return sign + body + mono
    return ("" if first else "+") + "(" + txt + ")" + mono


def pretty_section(s: SectionElement) -> str:
    items = sorted(s.terms(), key=lambda t: t[0], reverse=True)
    if not items:
        return "0"
    out = ""
    for i, ((a, b, c), v) in enumerate(items):
        out += _coef_str(v, _mono_str(a, b, c), i == 0)
    return out


# ---------------------------------------------------------------------------
# division


def _div_binary(f: list[CyclotomicRational], h: list[CyclotomicRational], dq: int):
    """Exact division of binary forms (lists indexed by the power of Y)."""
    top = max(i for i, c in enumerate(h) if c)
    inv = h[top].inverse()
    rem = list(f)
    nq = len(f) - top
    q = [CyclotomicRational(0)] * max(nq, 0)
    for i in range(nq - 1, -1, -1):
        c = rem[i + top]
        if not c:
            continue
        c = c * inv
        q[i] = c
        for k, hk in enumerate(h[: top + 1]):
            if hk:
                rem[i + k] = rem[i + k] - c * hk
    if any(rem):
        return None
    if any(q[dq + 1:]):
        return None
    q = q[: dq + 1] + [CyclotomicRational(0)] * (dq + 1 - len(q))
    return q


class Divider:
    """Precomputed data for repeated exact division by a fixed section g.

    Uses the norm N(g) = g * g(rhoX) * g(rho^2 X), which has no X terms,
    so f/g = f * g(rhoX) g(rho^2 X) / N(g) reduces to binary-form division.
    """

    def __init__(self, g: SectionElement):
        if g.is_zero():
            raise ZeroDivisionError("division by the zero section")
        self.g = g
        if g.x_degrees() == {0}:
            self.cofactor = None
            self.norm_form = g.binary_part(0)
            self.norm_degree = g.degree
        else:
            c = g.twist_x(EisensteinInteger(0, 1)) * g.twist_x(EisensteinInteger(-1, -1))
            nm = g * c
            if nm.x_degrees() - {0}:
                raise AssertionError("norm of a section must be free of X")
            self.cofactor = c
            self.norm_form = nm.binary_part(0)
            self.norm_degree = nm.degree

    def divide(self, f: SectionElement) -> SectionElement:
        g = self.g
        if f.is_zero():
            if f.degree < g.degree:
                raise NotDivisible("degree too small")
            return SectionElement.zero(f.degree - g.degree)
        dq = f.degree - g.degree
        if dq < 0:
            raise NotDivisible(f"degree {f.degree} below divisor degree {g.degree}")
        num = f if self.cofactor is None else f * self.cofactor
        coeffs = {}
        for a in range(3):
            if a > num.degree or num._parts[a] is None:
                continue
            qa = _div_binary(num.binary_part(a), self.norm_form, dq - a)
            if qa is None or (a > dq and any(qa)):
                raise NotDivisible("binary-form division leaves a remainder")
            for b, c in enumerate(qa):
                if c:
                    coeffs[(a, b, dq - a - b)] = c
        q = SectionElement.from_dict(dq, coeffs)
        if q * g != f:
            raise NotDivisible("back-multiplication check failed")
        return q


def exact_divide(f: SectionElement, g: SectionElement) -> SectionElement:
    return Divider(g).divide(f)


# ---------------------------------------------------------------------------
# substitution


_checked_images: dict = {}


def check_images(images) -> int:
    key = tuple(images)
    d = _checked_images.get(key)
    if d is not None:
        return d
    x, y, z = images
    if not (x.degree == y.degree == z.degree) or x.degree < 1:
        raise RelationViolated("images must share a positive degree")
    if x * x * x != (y * y * y - z * z * z) * _RHO:
        raise RelationViolated("images fail X^3 = rho(Y^3 - Z^3)")
    _checked_images[key] = x.degree
    return x.degree


def substitute(s: SectionElement, images) -> SectionElement:
    """Ring homomorphism X, Y, Z -> images (common degree d)."""
    images = tuple(images)
    if images == (X, Y, Z):
        return s
    if images == R2_IMAGES:
        return s.apply_r2()
    if images == R3_IMAGES:
        return s.apply_r3()
    d = check_images(images)
    xi, yi, zi = images
    n = s.degree
    if s.is_zero():
        return SectionElement.zero(n * d)
    zp = [SectionElement.one()]
    for _ in range(n):
        zp.append(zp[-1] * zi)
    total = SectionElement.zero(n * d)
    xp = SectionElement.one()
    for a in range(min(2, n) + 1):
        if a:
            xp = xp * xi
        p = s._parts[a]
        if p is None:
            continue
        m = n - a
        # Horner in Y: acc <- acc * Y + c_b Z^(m-b)
        acc = SectionElement.constant(CyclotomicRational(p[0][m], p[1][m]))
        for b in range(m - 1, -1, -1):
            acc = acc * yi
            if p[0][b] or p[1][b]:
                acc = acc + zp[m - b].scale(CyclotomicRational(p[0][b], p[1][b]))
        total = total + xp * acc
    return total.scale(Fraction(1, s._den))


def ev_zero(s: SectionElement) -> CyclotomicRational:
    return s.ev_zero()


# ---------------------------------------------------------------------------
# the prime extension


class DiffSectionElement:
    """base + PX' + QY' + RZ' with base of degree n and P, Q, R of degree n - 1."""

    __slots__ = ("base", "primes")

    def __init__(self, base: SectionElement, primes=None):
        self.base = base
        n = base.degree
        if primes is None or n == 0:
            primes = None if n == 0 else tuple(SectionElement.zero(n - 1) for _ in range(3))
        else:
            primes = tuple(primes)
            if any(p.degree != n - 1 for p in primes):
                raise ValueError("prime coefficients must have degree n - 1")
        self.primes = primes

    @property
    def degree(self) -> int:
        return self.base.degree

    @classmethod
    def zero(cls, n: int) -> DiffSectionElement:
        return cls(SectionElement.zero(n))

    def is_prime_free(self) -> bool:
        return self.primes is None or all(p.is_zero() for p in self.primes)

    def is_zero(self) -> bool:
        if self.is_prime_free():
            return self.base.is_zero()
        e, f = self.invariants()
        return e.is_zero() and f.is_zero()

    def invariants(self):
        """(e, f) with self = (e X' + f) / X, independent of the presentation.

        From the Wronskians, Y' = (X'Y + rho Z^2)/X and Z' = (X'Z + rho Y^2)/X,
        so PX' + QY' + RZ' = ((PX + QY + RZ) X' + rho(QZ^2 + RY^2)) / X.
        """
        n = self.degree
        if self.primes is None:
            return SectionElement.zero(n), X * self.base
        p, q, r = self.primes
        e = p * X + q * Y + r * Z
        f = X * self.base + (q * Z * Z + r * Y * Y).scale(_RHO)
        return e, f

    @classmethod
    def from_invariants(cls, e: SectionElement, f: SectionElement) -> DiffSectionElement:
        """Inverse of invariants(); NotDivisible if (e, f) is not a valid pair."""
        n = e.degree
        if f.degree != n + 1:
            raise ValueError("invariant pair has inconsistent degrees")
        if n == 0:
            if not e.is_zero():
                raise NotDivisible("degree-0 element with a prime part")
            return cls(exact_divide(f, X))
        cp, cq, cr = {}, {}, {}
        for (a, b, c), v in e.terms():
            if b:
                cq[(a, b - 1, c)] = v
            elif c:
                cr[(a, b, c - 1)] = v
            else:
                cp[(a - 1, b, c)] = v
        p = SectionElement.from_dict(n - 1, cp)
        q = SectionElement.from_dict(n - 1, cq)
        r = SectionElement.from_dict(n - 1, cr)
        rest = f - (q * Z * Z + r * Y * Y).scale(_RHO)
        return cls(exact_divide(rest, X), [p, q, r])

    def _lift(self, other):
        if isinstance(other, SectionElement):
            return DiffSectionElement(other)
        return other

    def __add__(self, other):
        other = self._lift(other)
        if self.primes is None or other.primes is None:
            pr = self.primes if other.primes is None else other.primes
            if self.primes is not None and other.primes is None:
                pr = self.primes
            return DiffSectionElement(self.base + other.base, pr)
        return DiffSectionElement(self.base + other.base,
                                  [a + b for a, b in zip(self.primes, other.primes)])

    __radd__ = __add__

    def __neg__(self):
        return DiffSectionElement(-self.base, None if self.primes is None else [-p for p in self.primes])

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, DiffSectionElement):
            if other.is_prime_free():
                other = other.base
            elif self.is_prime_free():
                return other * self.base
            else:
                raise ValueError("product of two prime-linear elements has prime degree 2")
        if isinstance(other, SectionElement):
            if self.primes is None:
                if other.degree == 0:
                    return DiffSectionElement(self.base * other)
                zero = SectionElement.zero(other.degree - 1)
                return DiffSectionElement(self.base * other, [zero, zero, zero])
            return DiffSectionElement(self.base * other, [p * other for p in self.primes])
        return DiffSectionElement(self.base.scale(other),
                                  None if self.primes is None else [p.scale(other) for p in self.primes])

    __rmul__ = __mul__

    def scale(self, c):
        return self * CyclotomicRational.coerce(c)

    def __eq__(self, other):
        other = self._lift(other)
        if not isinstance(other, DiffSectionElement):
            return NotImplemented
        if self.is_prime_free() and other.is_prime_free():
            return self.base == other.base
        return (self - other).is_zero()

    def __hash__(self):
        return hash((self.base, self.primes))

    def apply_r2(self):
        # X' -> -X', Y' -> Z', Z' -> Y'
        if self.primes is None:
            return DiffSectionElement(self.base.apply_r2())
        p, q, r = (t.apply_r2() for t in self.primes)
        return DiffSectionElement(self.base.apply_r2(), [-p, r, q])

    def apply_r3(self):
        if self.primes is None:
            return DiffSectionElement(self.base.apply_r3())
        p, q, r = (t.apply_r3() for t in self.primes)
        return DiffSectionElement(self.base.apply_r3(), [p, q.scale(_RHO), r.scale(_RHO * _RHO)])

    def pretty(self) -> str:
        out = self.base.pretty() if not self.base.is_zero() else ""
        if self.primes is not None:
            for p, name in zip(self.primes, ("X′", "Y′", "Z′")):
                if not p.is_zero():
                    t = f"({p.pretty()}){name}"
                    out = t if not out else out + "+" + t
        return out or "0"

    def __repr__(self):
        return f"DiffSectionElement({self.degree}, {self.pretty()})"


def derivation(s: SectionElement) -> DiffSectionElement:
    """Formal derivation X -> X', Y -> Y', Z -> Z' (Leibniz)."""
    if isinstance(s, DiffSectionElement):
        if not s.is_prime_free():
            raise ValueError("derivation of a prime-linear element")
        s = s.base
    n = s.degree
    if n == 0:
        return DiffSectionElement(SectionElement.zero(0))
    px, py, pz = [None] * 3, [None] * 3, [None] * 3
    for a, p in enumerate(s._parts):
        if p is None:
            continue
        m = n - a
        if a >= 1:
            px[a - 1] = ([a * u for u in p[0]], [a * u for u in p[1]])
        if m >= 1:
            if a <= n - 1:
                py[a] = ([b * p[0][b] for b in range(1, m + 1)], [b * p[1][b] for b in range(1, m + 1)])
                pz[a] = ([(m - b) * p[0][b] for b in range(m)], [(m - b) * p[1][b] for b in range(m)])
    mk = lambda parts: SectionElement(n - 1, parts, s._den)
    return DiffSectionElement(SectionElement.zero(n), [mk(px), mk(py), mk(pz)])


_G = None


def _gvec():
    global _G
    if _G is None:
        _G = (X * X, (Y * Y).scale(-_RHO), (Z * Z).scale(_RHO))
    return _G


def wronskian_reduce(e) -> SectionElement:
    """Prime-free section congruent to e modulo the Wronskian relations.

    For e = base + PX' + QY' + RZ' the prime part is reducible exactly when
    PX + QY + RZ = 0 in A.  Then V x G = s (X, Y, Z) for G = (X^2, -rho Y^2,
    rho Z^2), V = (P, Q, R), and PX' + QY' + RZ' = s.
    """
    if isinstance(e, SectionElement):
        return e
    if e.is_prime_free():
        return e.base
    p, q, r = e.primes
    if (p * X + q * Y + r * Z).is_zero() is False:
        raise NotReducible("prime part is not a Wronskian combination")
    gx, gy, gz = _gvec()
    cy = r * gx - p * gz
    cz = p * gy - q * gx
    if not cy.is_zero():
        s = exact_divide(cy, Y)
    else:
        s = exact_divide(cz, Z)
    cx = q * gz - r * gy
    if s * X != cx or s * Y != cy or s * Z != cz:
        raise NotReducible("cross product is not a multiple of (X, Y, Z)")
    return e.base + s
