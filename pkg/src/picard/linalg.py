"""Dense linear algebra over Q(rho), exact and modulo a split prime.

Vectors and matrices are plain lists of CyclotomicRational.  The modular
variant maps rho to a cube root of unity mod a prime q = 1 (mod 3); its
rank is a lower bound for the rank over Q(rho).
"""
from __future__ import annotations

from fractions import Fraction
from typing import Optional, Sequence

import mpmath

from .eisenstein import CyclotomicRational, EisensteinInteger

CR = CyclotomicRational
_ZERO = CR(0)
_ONE = CR(1)

# 2^61 - 1 is 1 mod 3
MOD_PRIME = 2305843009213693951


def _cube_root_of_unity(q: int) -> int:
    for g in range(2, 100):
        r = pow(g, (q - 1) // 3, q)
        if r != 1:
            return r
    raise ValueError(f"no primitive cube root of unity mod {q}")


_MOD_RHO = _cube_root_of_unity(MOD_PRIME)


def _frac_mod(x: Fraction, q: int) -> int:
    return x.numerator % q * pow(x.denominator, -1, q) % q


def to_mod(c, q: int = MOD_PRIME, r: int = None) -> int:
    r = _MOD_RHO if r is None else r
    c = CR.coerce(c)
    return (_frac_mod(c.a, q) + _frac_mod(c.b, q) * r) % q


def rref(rows: Sequence[Sequence], ncols: Optional[int] = None):
    """Row echelon form.  Returns (reduced rows, pivot columns, row origin).

    origin[i] maps input row indices to the coefficients that produce
    reduced row i, so relations among the inputs can be read off.
    """
    rows = [[CR.coerce(x) for x in r] for r in rows]
    ncols = ncols if ncols is not None else (len(rows[0]) if rows else 0)
    m = len(rows)
    comb = [{i: _ONE} for i in range(m)]
    pivots = []
    r = 0
    for col in range(ncols):
        piv = next((i for i in range(r, m) if rows[i][col]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        comb[r], comb[piv] = comb[piv], comb[r]
        inv = rows[r][col].inverse()
        rows[r] = [x * inv for x in rows[r]]
        comb[r] = {k: v * inv for k, v in comb[r].items()}
        for i in range(m):
            if i != r and rows[i][col]:
                f = rows[i][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
                ci = dict(comb[i])
                for k, v in comb[r].items():
                    ci[k] = ci.get(k, _ZERO) - f * v
                comb[i] = {k: v for k, v in ci.items() if v}
        pivots.append(col)
        r += 1
        if r == m:
            break
    return rows, pivots, comb


def rank(rows) -> int:
    if not rows:
        return 0
    return len(rref(rows)[1])


def left_kernel(rows) -> list[list[CyclotomicRational]]:
    """Basis of {c : sum c_i rows[i] = 0}."""
    if not rows:
        return []
    red, piv, comb = rref(rows)
    out = []
    for i in range(len(piv), len(rows)):
        vec = [comb[i].get(k, _ZERO) for k in range(len(rows))]
        out.append(vec)
    return out


def rank_mod(rows, q: int = MOD_PRIME) -> int:
    """Rank of the reduction mod q (a lower bound for the exact rank)."""
    r = _MOD_RHO if q == MOD_PRIME else _cube_root_of_unity(q)
    mat = [[to_mod(x, q, r) for x in row] for row in rows]
    if not mat:
        return 0
    ncols = len(mat[0])
    rk = 0
    for col in range(ncols):
        piv = next((i for i in range(rk, len(mat)) if mat[i][col]), None)
        if piv is None:
            continue
        mat[rk], mat[piv] = mat[piv], mat[rk]
        inv = pow(mat[rk][col], -1, q)
        mat[rk] = [x * inv % q for x in mat[rk]]
        for i in range(rk + 1, len(mat)):
            f = mat[i][col]
            if f:
                mat[i] = [(a - f * b) % q for a, b in zip(mat[i], mat[rk])]
        rk += 1
        if rk == len(mat):
            break
    return rk


class ModEchelon:
    """Incremental row echelon form mod q, for fast independence tests."""

    def __init__(self, q: int = MOD_PRIME):
        self.q = q
        self.rows: dict[int, list[int]] = {}   # pivot column -> normalized row

    def reduce(self, row: list[int]) -> list[int]:
        q = self.q
        row = list(row)
        for col, prow in self.rows.items():
            f = row[col]
            if f:
                row = [(a - f * b) % q for a, b in zip(row, prow)]
        return row

    def add(self, row: list[int]) -> bool:
        """Add a row (already reduced mod q); False if it is dependent."""
        row = self.reduce(row)
        col = next((i for i, x in enumerate(row) if x), None)
        if col is None:
            return False
        inv = pow(row[col], -1, self.q)
        row = [x * inv % self.q for x in row]
        for c, prow in self.rows.items():
            f = prow[col]
            if f:
                self.rows[c] = [(a - f * b) % self.q for a, b in zip(prow, row)]
        self.rows[col] = row
        return True

    @property
    def rank(self) -> int:
        return len(self.rows)


def rank_mod_reduced(rows, q: int = MOD_PRIME) -> int:
    ech = ModEchelon(q)
    for r in rows:
        ech.add(r)
    return ech.rank


def solve_left(basis_rows, target) -> Optional[list]:
    """Coefficients c with sum c_i basis_rows[i] = target, or None."""
    rows = list(basis_rows) + [target]
    red, piv, comb = rref(rows)
    n = len(basis_rows)
    for i in range(len(piv), len(rows)):
        c = comb[i]
        last = c.get(n)
        if last:
            return [-(c.get(k, _ZERO) / last) for k in range(n)]
    return None


def identity(n: int):
    return [[_ONE if i == j else _ZERO for j in range(n)] for i in range(n)]


def matmul(a, b):
    return [[sum((a[i][k] * b[k][j] for k in range(len(b))), _ZERO) for j in range(len(b[0]))]
            for i in range(len(a))]


def nullity(mat, lam) -> int:
    n = len(mat)
    shifted = [[mat[i][j] - (lam if i == j else _ZERO) for j in range(n)] for i in range(n)]
    return n - rank(shifted)


def charpoly(mat) -> list[CyclotomicRational]:
    """Coefficients [c_0, ..., c_n] of det(x I - mat), by Faddeev-LeVerrier."""
    n = len(mat)
    coeffs = [_ZERO] * (n + 1)
    coeffs[n] = _ONE
    M = [[_ZERO] * n for _ in range(n)]
    for k in range(1, n + 1):
        # M_k = A M_{k-1} + c_{n-k+1} I
        AM = matmul(mat, M) if k > 1 else [[_ZERO] * n for _ in range(n)]
        for i in range(n):
            AM[i][i] = AM[i][i] + coeffs[n - k + 1]
        M = AM
        AMk = matmul(mat, M)
        tr = sum((AMk[i][i] for i in range(n)), _ZERO)
        coeffs[n - k] = -tr / k
    return coeffs


def _poly_eval(coeffs, x):
    out = _ZERO
    for c in reversed(coeffs):
        out = out * x + c
    return out


def _poly_div_linear(coeffs, x):
    """Divide by (t - x); returns quotient coefficients."""
    n = len(coeffs) - 1
    q = [_ZERO] * n
    acc = _ZERO
    for i in range(n, 0, -1):
        acc = acc * x + coeffs[i]
        q[i - 1] = acc
    return q


def _poly_trim(c):
    c = list(c)
    while len(c) > 1 and not c[-1]:
        c.pop()
    return c


def _poly_divmod(a, b):
    a, b = _poly_trim(a), _poly_trim(b)
    q = [_ZERO] * max(len(a) - len(b) + 1, 1)
    r = list(a)
    inv = b[-1].inverse()
    for i in range(len(a) - len(b), -1, -1):
        f = r[i + len(b) - 1] * inv
        q[i] = f
        if f:
            for j, bj in enumerate(b):
                r[i + j] = r[i + j] - f * bj
    return q, _poly_trim(r[: max(len(b) - 1, 1)])


def _poly_gcd(a, b):
    a, b = _poly_trim(a), _poly_trim(b)
    while len(b) > 1 or b[0]:
        _, r = _poly_divmod(a, b)
        a, b = b, r
    inv = a[-1].inverse()
    return [x * inv for x in a]


def integral_roots(coeffs) -> tuple[list[tuple[EisensteinInteger, int]], int]:
    """Roots in Z[rho] with multiplicities, and the degree left unexplained."""
    coeffs = _poly_trim([CR.coerce(c) for c in coeffs])
    deriv = [c * i for i, c in enumerate(coeffs)][1:] or [_ZERO]
    g = _poly_gcd(coeffs, deriv)
    sqfree = _poly_divmod(coeffs, g)[0] if len(g) > 1 else coeffs
    found = []
    if len(sqfree) > 1:
        with mpmath.workdps(80):
            poly = [_to_mpc(c) for c in reversed(sqfree)]
            try:
                roots = mpmath.polyroots(poly, maxsteps=500, extraprec=500)
            except mpmath.libmp.NoConvergence:
                roots = []
        for z in roots:
            b = int(mpmath.nint(2 * mpmath.im(z) / mpmath.sqrt(3)))
            a = int(mpmath.nint(mpmath.re(z) + mpmath.mpf(b) / 2))
            cand = EisensteinInteger(a, b)
            if _poly_eval(sqfree, CR.coerce(cand)):
                continue
            mult, rest = 0, coeffs
            while len(rest) > 1 and not _poly_eval(rest, CR.coerce(cand)):
                rest = _poly_div_linear(rest, CR.coerce(cand))
                mult += 1
            found.append((cand, mult))
    found.sort(key=lambda t: (-t[1], t[0].norm(), t[0].a, t[0].b))
    return found, len(coeffs) - 1 - sum(m for _, m in found)


def _to_mpc(c: CyclotomicRational):
    a = mpmath.mpf(c.a.numerator) / c.a.denominator
    b = mpmath.mpf(c.b.numerator) / c.b.denominator
    return mpmath.mpc(a - b / 2, b * mpmath.sqrt(3) / 2)
