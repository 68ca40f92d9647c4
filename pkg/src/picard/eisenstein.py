"""Exact arithmetic in Z[rho] and Q(rho), rho a primitive cube root of unity.

Elements are written a + b*rho with rho^2 = -1 - rho.  The text form is
"a+b*r" and is used by every file format and by the CLI.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Union

__all__ = [
    "EisensteinInteger",
    "CyclotomicRational",
    "NotSplit",
    "norm",
    "units",
    "split_prime",
    "factor",
    "enumerate_norm",
    "is_prime",
    "format_qr",
    "parse_qr",
]


class NotSplit(ValueError):
    pass


def _fmt_pair(a, b) -> str:
    if b == 0:
        return str(a)
    if b == 1:
        tail = "r"
    elif b == -1:
        tail = "-r"
    else:
        tail = f"{b}*r"
    if a == 0:
        return tail
    if tail.startswith("-"):
        return f"{a}{tail}"
    return f"{a}+{tail}"


_NUM = r"[+-]?\d+(?:/\d+)?"
_QR_RE = re.compile(
    rf"^\s*(?:(?P<a>{_NUM})(?=[+-]|\s*$))?\s*"
    rf"(?:(?P<b>[+-]?(?:\d+(?:/\d+)?)?)\*?r)?\s*$"
)


def parse_qr(text: str) -> CyclotomicRational:
    """Parse "a+b*r" (also "a", "b*r", "r", "-r", "3+27r", "1/3-2/9*r")."""
    t = text.strip().replace(" ", "").replace("−", "-").replace("ρ", "r")
    if t.startswith("(") and t.endswith(")"):
        t = t[1:-1]
    m = _QR_RE.match(t)
    if not m or t == "":
        raise ValueError(f"cannot parse {text!r} as a+b*r")
    a = Fraction(m.group("a")) if m.group("a") else Fraction(0)
    bs = m.group("b")
    if bs is None:
        b = Fraction(0)
    elif bs in ("", "+"):
        b = Fraction(1)
    elif bs == "-":
        b = Fraction(-1)
    else:
        b = Fraction(bs)
    return CyclotomicRational(a, b)


def format_qr(a, b) -> str:
    return _fmt_pair(a, b)


class EisensteinInteger:
    """a + b*rho with integer a, b."""

    __slots__ = ("a", "b")

    def __init__(self, a: int = 0, b: int = 0):
        self.a = int(a)
        self.b = int(b)

    @classmethod
    def coerce(cls, x) -> EisensteinInteger:
        if isinstance(x, EisensteinInteger):
            return x
        if isinstance(x, int):
            return cls(x, 0)
        if isinstance(x, CyclotomicRational):
            if x.a.denominator != 1 or x.b.denominator != 1:
                raise ValueError(f"{x} is not integral")
            return cls(x.a.numerator, x.b.numerator)
        if isinstance(x, str):
            return cls.coerce(parse_qr(x))
        if isinstance(x, tuple):
            return cls(*x)
        raise TypeError(f"cannot coerce {x!r}")

    def __add__(self, o):
        if isinstance(o, CyclotomicRational):
            return CyclotomicRational.coerce(self) + o
        o = EisensteinInteger.coerce(o)
        return EisensteinInteger(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self):
        return EisensteinInteger(-self.a, -self.b)

    def __sub__(self, o):
        return self + (-o)

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        if isinstance(o, CyclotomicRational):
            return CyclotomicRational.coerce(self) * o
        o = EisensteinInteger.coerce(o)
        a, b, c, d = self.a, self.b, o.a, o.b
        return EisensteinInteger(a * c - b * d, a * d + b * c - b * d)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("negative power of an Eisenstein integer")
        out = EisensteinInteger(1)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def __eq__(self, o):
        if isinstance(o, (int, EisensteinInteger)):
            o = EisensteinInteger.coerce(o)
            return self.a == o.a and self.b == o.b
        if isinstance(o, CyclotomicRational):
            return o == self
        return NotImplemented

    def __hash__(self):
        return hash((self.a, self.b, "Z[r]"))

    def __repr__(self):
        return f"EisensteinInteger({self.a}, {self.b})"

    def __str__(self):
        return _fmt_pair(self.a, self.b)

    def __bool__(self):
        return bool(self.a or self.b)

    def conjugate(self) -> EisensteinInteger:
        return EisensteinInteger(self.a - self.b, -self.b)

    def norm(self) -> int:
        return self.a * self.a - self.a * self.b + self.b * self.b

    def trace(self) -> int:
        return 2 * self.a - self.b

    def is_unit(self) -> bool:
        return self.norm() == 1

    def divides(self, o) -> bool:
        o = EisensteinInteger.coerce(o)
        n = self.norm()
        q = o * self.conjugate()
        return q.a % n == 0 and q.b % n == 0

    def exact_div(self, o) -> EisensteinInteger:
        """self / o, which must be exact."""
        o = EisensteinInteger.coerce(o)
        n = o.norm()
        q = self * o.conjugate()
        if q.a % n or q.b % n:
            raise ValueError(f"{o} does not divide {self}")
        return EisensteinInteger(q.a // n, q.b // n)

    def is_primary(self) -> bool:
        return self.a % 3 == 1 and self.b % 3 == 0

    def __complex__(self):
        return complex(self.a - self.b / 2, self.b * math.sqrt(3) / 2)


class CyclotomicRational:
    """a + b*rho with rational a, b; the coefficient field Q(rho)."""

    __slots__ = ("a", "b")

    def __init__(self, a=0, b=0):
        self.a = a if isinstance(a, Fraction) else Fraction(a)
        self.b = b if isinstance(b, Fraction) else Fraction(b)

    @classmethod
    def coerce(cls, x) -> CyclotomicRational:
        if isinstance(x, CyclotomicRational):
            return x
        if isinstance(x, EisensteinInteger):
            return cls(x.a, x.b)
        if isinstance(x, (int, Fraction)):
            return cls(x, 0)
        if isinstance(x, str):
            return parse_qr(x)
        if isinstance(x, tuple):
            return cls(*x)
        raise TypeError(f"cannot coerce {x!r}")

    def __add__(self, o):
        o = CyclotomicRational.coerce(o)
        return CyclotomicRational(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self):
        return CyclotomicRational(-self.a, -self.b)

    def __sub__(self, o):
        return self + (-CyclotomicRational.coerce(o))

    def __rsub__(self, o):
        return CyclotomicRational.coerce(o) - self

    def __mul__(self, o):
        o = CyclotomicRational.coerce(o)
        a, b, c, d = self.a, self.b, o.a, o.b
        bd = b * d
        return CyclotomicRational(a * c - bd, a * d + b * c - bd)

    __rmul__ = __mul__

    def conjugate(self) -> CyclotomicRational:
        return CyclotomicRational(self.a - self.b, -self.b)

    def norm(self) -> Fraction:
        return self.a * self.a - self.a * self.b + self.b * self.b

    def inverse(self) -> CyclotomicRational:
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero in Q(rho)")
        c = self.conjugate()
        return CyclotomicRational(c.a / n, c.b / n)

    def __truediv__(self, o):
        return self * CyclotomicRational.coerce(o).inverse()

    def __rtruediv__(self, o):
        return CyclotomicRational.coerce(o) * self.inverse()

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        out = CyclotomicRational(1)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def __eq__(self, o):
        try:
            o = CyclotomicRational.coerce(o)
        except TypeError:
            return NotImplemented
        return self.a == o.a and self.b == o.b

    def __hash__(self):
        if self.a.denominator == 1 and self.b.denominator == 1:
            return hash((int(self.a), int(self.b), "Z[r]"))
        return hash((self.a, self.b))

    def __bool__(self):
        return bool(self.a or self.b)

    def __repr__(self):
        return f"CyclotomicRational({str(self)!r})"

    def __str__(self):
        return _fmt_pair(self.a, self.b)

    def is_integral(self) -> bool:
        return self.a.denominator == 1 and self.b.denominator == 1

    def denominator(self) -> int:
        return math.lcm(self.a.denominator, self.b.denominator)

    def __complex__(self):
        return complex(float(self.a) - float(self.b) / 2, float(self.b) * math.sqrt(3) / 2)


Number = Union[int, Fraction, EisensteinInteger, CyclotomicRational]

RHO = EisensteinInteger(0, 1)
SQRT_M3 = EisensteinInteger(1, 2)


def norm(alpha) -> int:
    return EisensteinInteger.coerce(alpha).norm()


def units() -> list[EisensteinInteger]:
    eps = EisensteinInteger(-1, -1)  # -rho^2 = 1 + rho
    out = [EisensteinInteger(1)]
    for _ in range(5):
        out.append(out[-1] * eps)
    return out


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    i = 3
    while i * i <= p:
        if p % i == 0:
            return False
        i += 2
    return True


def _primary_key(x: EisensteinInteger):
    return (abs(x.a), abs(x.b), x.a, x.b)


def split_prime(p: int) -> EisensteinInteger:
    """Primary nu with N(nu) = p; the conjugate pair is ordered by (|a|, |b|, a, b)."""
    if p % 3 != 1 or not is_prime(p):
        raise NotSplit(f"{p} is not a prime congruent to 1 mod 3")
    bound = math.isqrt(4 * p // 3) + 1
    found = []
    for a in range(-bound, bound + 1):
        if a % 3 != 1:
            continue
        for b in range(-bound, bound + 1, 1):
            if b % 3 == 0 and a * a - a * b + b * b == p:
                found.append(EisensteinInteger(a, b))
    return min(found, key=_primary_key)


def _primary_associate(pi: EisensteinInteger) -> EisensteinInteger:
    for u in units():
        cand = pi * u
        if cand.is_primary():
            return cand
    raise ValueError(f"{pi} has no primary associate")


def _int_factor(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def factor(alpha) -> tuple[EisensteinInteger, list[tuple[EisensteinInteger, int]]]:
    """alpha = unit * prod(pi**e), primes in canonical normal form."""
    alpha = EisensteinInteger.coerce(alpha)
    if not alpha:
        raise ValueError("cannot factor zero")
    rest = alpha
    primes: list[tuple[EisensteinInteger, int]] = []
    for q, _ in sorted(_int_factor(alpha.norm()).items()):
        if q == 3:
            cands = [SQRT_M3]
        elif q % 3 == 2:
            cands = [EisensteinInteger(q)]
        else:
            nu = split_prime(q)
            cands = [nu, _primary_associate(nu.conjugate())]
        for pi in cands:
            e = 0
            while pi.divides(rest):
                rest = rest.exact_div(pi)
                e += 1
            if e:
                primes.append((pi, e))
    assert rest.is_unit()
    return rest, primes


def enumerate_norm(n: int) -> list[EisensteinInteger]:
    if n < 0:
        return []
    if n == 0:
        return [EisensteinInteger(0)]
    bound = math.isqrt(4 * n // 3) + 1
    out = []
    for a in range(-bound, bound + 1):
        for b in range(-bound, bound + 1):
            if a * a - a * b + b * b == n:
                out.append(EisensteinInteger(a, b))
    return out
