"""Hecke operators on Fourier-Jacobi expansions.

T_nu (N(nu) = p = 1 mod 3, nu = 1 mod 3) and T_{-p} (p = 2 mod 3) act on a
scalar expansion and on the last component of a Sym^j-valued one through the
Shintani operators m_alpha and t_alpha.  For T_nu, output coefficient n uses
f_{np}, so a series valid to W certifies n <= W // p; for T_{-p} the bound is
W // p^2.

The scalar T_nu formula is the j = 0 case of the last-component formula.
At j = 0 the middle coefficient nu p^{k-2} p^{1-k} equals conj(nu)^{-1}.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

from . import linalg
from .eisenstein import CyclotomicRational, EisensteinInteger, is_prime, parse_qr
from .fj import FJSeries, ShapeMismatch, TruncationTooShallow, VectorFormFJ
from .sections import SectionElement
from .theta import OperatorTable

__all__ = [
    "HeckeOperator", "EigenReport", "HeckeMatrix", "NotAnEigenform", "AllCoefficientsZero",
    "NotInvariant", "TruncationTooShallow", "apply_scalar", "apply_last", "eigenvalue",
    "eisenstein_eigenvalue", "lift_eigenvalue", "eta_product", "hecke_matrix",
    "format_value", "select_basis", "separating_top", "solve_in_span", "combine", "commute", "eigenvalues_on_pieces", "PieceEigenvalues",
    "Tabulated", "TABULATED", "TabulatedReport", "check_tabulated",
]

CR = CyclotomicRational


class NotAnEigenform(ArithmeticError):
    pass


class AllCoefficientsZero(ArithmeticError):
    pass


class NotInvariant(ArithmeticError):
    pass


def format_value(c) -> str:
    return str(CR.coerce(c))


@dataclass(frozen=True)
class HeckeOperator:
    """T_nu for kind "T", T_{-p} for kind "Tm"."""

    kind: str
    alpha: EisensteinInteger

    def __post_init__(self):
        a = EisensteinInteger.coerce(self.alpha)
        object.__setattr__(self, "alpha", a)
        if self.kind == "T":
            if not (is_prime(a.norm()) and a.norm() % 3 == 1):
                raise ValueError(f"T_nu needs N(nu) prime = 1 mod 3, got N({a}) = {a.norm()}")
            if not a.is_primary():
                raise ValueError(f"T_nu needs nu = 1 mod 3, got {a}")
        elif self.kind == "Tm":
            p = -a.a
            if a.b or not is_prime(p) or p % 3 != 2:
                raise ValueError(f"T_-p needs p prime = 2 mod 3, got {a}")
        else:
            raise ValueError(f"unknown Hecke operator kind {self.kind!r}")

    @classmethod
    def T(cls, nu) -> HeckeOperator:
        return cls("T", EisensteinInteger.coerce(nu))

    @classmethod
    def Tm(cls, p: int) -> HeckeOperator:
        return cls("Tm", EisensteinInteger(-p, 0))

    @classmethod
    def parse(cls, kind: str, arg: str) -> HeckeOperator:
        if kind == "T":
            v = parse_qr(arg)
            if not v.is_integral():
                raise ValueError(f"nu must be an Eisenstein integer, got {arg}")
            return cls.T(EisensteinInteger(int(v.a), int(v.b)))
        if kind == "Tm":
            return cls.Tm(abs(int(arg)))
        raise ValueError(f"unknown Hecke operator kind {kind!r} (use T or Tm)")

    @property
    def p(self) -> int:
        return self.alpha.norm() if self.kind == "T" else -self.alpha.a

    @property
    def step(self) -> int:
        """Index dilation: output n reads input n * step."""
        return self.p if self.kind == "T" else self.p ** 2

    def certified_to(self, valid_to: int) -> int:
        return valid_to // self.step

    def label(self) -> str:
        return f"T_{{{self.alpha}}}"

    def __str__(self):
        return self.label()


def _m(table: OperatorTable, alpha, s: SectionElement) -> SectionElement:
    if s.degree == 0:
        return s
    return table.apply_m(alpha, s)


def _t(table: OperatorTable, alpha, s: SectionElement) -> SectionElement:
    if s.degree == 0:
        return s.scale(EisensteinInteger.coerce(alpha).norm())
    return table.apply_t(alpha, s)


def _apply(T: HeckeOperator, f: FJSeries, j: int, k: int, table: OperatorTable) -> FJSeries:
    if not f.is_prime_free():
        raise ShapeMismatch("Hecke operators act on prime-free (last) components only")
    top = T.certified_to(f.valid_to)
    if top < 0:
        raise TruncationTooShallow(f"{T} needs a series valid to at least {T.step}")
    p = T.p
    out = []
    if T.kind == "T":
        nu = CR.coerce(T.alpha)
        nub = T.alpha.conjugate()
        c1 = nu * p ** (k - 2 + j) if k - 2 + j >= 0 else nu * Fraction(1, p ** (2 - k - j))
        c2 = nu / p
        c3 = nu ** (j - k + 1) * (p ** (k - 2) if k >= 2 else Fraction(1, p ** (2 - k)))
        for n in range(top + 1):
            g = _t(table, nub, f[n * p]).scale(c2)
            if n % p == 0:
                g = g + _m(table, T.alpha, f[n // p]).scale(c1)
            fn = f[n]
            if not fn.is_zero():
                g = g + _t(table, T.alpha, _m(table, nub, fn)).scale(c3)
            out.append(g)
    else:
        a = T.alpha
        e = k + j - 3
        lead = Fraction(-p) ** e
        mcoef = p ** (2 * j + 2 * k - 3) if 2 * j + 2 * k - 3 >= 0 else Fraction(1, p ** (3 - 2 * j - 2 * k))
        for n in range(top + 1):
            fn = f[n]
            g = fn.scale(lead * (p * (n % p == 0) - 1))
            g = g - _t(table, a, f[n * p * p]).scale(Fraction(1, p))
            if n % (p * p) == 0:
                g = g - _m(table, a, f[n // (p * p)]).scale(mcoef)
            out.append(g)
    return FJSeries(out)


def apply_scalar(T: HeckeOperator, f: FJSeries, k: int, table: OperatorTable) -> FJSeries:
    """T applied to a scalar expansion of weight k."""
    return _apply(T, f, 0, k, table)


def apply_last(T: HeckeOperator, v: VectorFormFJ, table: OperatorTable) -> FJSeries:
    """T applied to the last component of a Sym^j-valued expansion."""
    return _apply(T, v.last, v.j, v.k, table)


def _as_vector_form(f, k: Optional[int], name: str = "") -> VectorFormFJ:
    if isinstance(f, VectorFormFJ):
        return f
    if k is None:
        raise ValueError("a scalar series needs its weight k")
    return VectorFormFJ(name or "f", 0, k, 0, f)


@dataclass
class EigenReport:
    form: str
    operator: HeckeOperator
    eigenvalue: CyclotomicRational
    coefficients_checked: list
    residual: list = field(default_factory=list)

    @property
    def p(self) -> int:
        return self.operator.p

    def line(self) -> str:
        cs = ",".join(str(n) for n in self.coefficients_checked)
        return f"{self.form}|{self.operator}|{self.p}|{format_value(self.eigenvalue)}|{cs}"


def _ratio(g: SectionElement, f: SectionElement) -> Optional[CyclotomicRational]:
    gv, fv = g.to_vector(), f.to_vector()
    i = next((i for i, x in enumerate(fv) if x), None)
    if i is None:
        return None
    lam = gv[i] / fv[i]
    return lam if g == f.scale(lam) else None


def eigenvalue(f, T: HeckeOperator, table: OperatorTable, n_checks: int = 2,
               k: Optional[int] = None, name: str = "") -> EigenReport:
    """Eigenvalue of T on f, solved from the first nonzero coefficient and checked on all."""
    v = _as_vector_form(f, k, name)
    g = _apply(T, v.last, v.j, v.k, table)
    if g.valid_to + 1 < n_checks:
        raise TruncationTooShallow(
            f"{v.name}: {T} certifies only {g.valid_to + 1} coefficients, need {n_checks}")
    lam = None
    for n in range(g.valid_to + 1):
        if not v.last[n].is_zero():
            lam = _ratio(g[n], v.last[n])
            if lam is None:
                raise NotAnEigenform(f"{v.name}: T f is not proportional to f at w^{n}")
            break
    if lam is None:
        raise AllCoefficientsZero(f"{v.name}: no nonzero coefficient up to w^{g.valid_to}")
    checked, residual = [], []
    for n in range(g.valid_to + 1):
        ok = g[n] == v.last[n].scale(lam)
        checked.append(n)
        residual.append(not ok)
        if not ok:
            raise NotAnEigenform(f"{v.name}: eigenvalue {lam} fails at w^{n}")
    return EigenReport(v.name, T, lam, checked, residual)


# ---------------------------------------------------------------------------
# closed forms


def _qpow(x: int, e: int):
    return Fraction(x) ** e


def eisenstein_eigenvalue(j: int, k: int, T: HeckeOperator) -> CyclotomicRational:
    """Eigenvalue of the Eisenstein series of weight (j, k)."""
    p = T.p
    if T.kind == "T":
        nu = CR.coerce(T.alpha)
        nub = CR.coerce(T.alpha.conjugate())
        return (nu ** (j + 1)) * (_qpow(p, k - 2) + 1) + nub ** (j + k - 1)
    sign = -1 if j % 2 == 0 else 1
    ksign = 1 if k % 2 == 0 else -1
    val = _qpow(p, 2 * k + j - 3) + _qpow(p, j + 1) + ksign * (p - 1) * _qpow(p, k + j - 3)
    return CR(sign * val)


def lift_eigenvalue(kind: str, a_p, a: int, b: int, nu) -> CyclotomicRational:
    """T_nu eigenvalue of a Kudla or Rogawski lift of a form with eigenvalue a_p."""
    nu = CR.coerce(EisensteinInteger.coerce(nu))
    nub = nu.conjugate()
    a_p = CR.coerce(a_p)
    if kind.lower() == "kudla":
        return a_p * nu ** (a + 1) + nub ** (a + b + 2)
    if kind.lower() == "rogawski":
        return a_p + nu ** (a + 1) * nub ** (b + 1)
    raise ValueError(f"unknown lift kind {kind!r}")


def eta_product(order: int = 50) -> list[int]:
    """q-expansion coefficients a_0..a_order of (eta(3 tau) eta(tau))^6."""
    # q * prod (1 - q^n)^6 (1 - q^{3n})^6
    N = order
    poly = [0] * (N + 1)
    poly[0] = 1
    for n in range(1, N + 1):
        for step in (n, 3 * n):
            if step > N:
                continue
            for _ in range(6):
                for i in range(N, step - 1, -1):
                    poly[i] -= poly[i - step]
    return [0] + poly[:N]


# ---------------------------------------------------------------------------
# matrices on spans


def _coords(f: FJSeries, upto: int) -> list:
    out = []
    for n in range(upto + 1):
        out.extend(f[n].to_vector())
    return out


def _mod_coords(f: FJSeries, upto: int) -> list[int]:
    return [linalg.to_mod(x) for x in _coords(f, upto)]


def separating_top(forms: Sequence[VectorFormFJ], W: Optional[int] = None) -> Optional[int]:
    """Smallest top with the last components independent on w^0..w^top, or None."""
    W = min(v.valid_to for v in forms) if W is None else W
    rows = [_mod_coords(v.last, W) for v in forms]
    n = len(rows)
    if linalg.rank_mod_reduced(rows) < n:
        return None
    offset = [len(_coords(forms[0].last, t)) for t in range(W + 1)]
    lo, hi = 0, W
    while lo < hi:
        mid = (lo + hi) // 2
        if linalg.rank_mod_reduced([r[: offset[mid]] for r in rows]) == n:
            hi = mid
        else:
            lo = mid + 1
    return lo


def combine(forms: Sequence[VectorFormFJ], coeffs, name: str = "") -> FJSeries:
    """sum c_i last(forms[i])."""
    W = min(v.valid_to for v in forms)
    out = FJSeries.zero(W)
    for v, c in zip(forms, coeffs):
        if c:
            out = out + v.last.truncate(W).scale(c)
    return out


def solve_in_span(forms: Sequence[VectorFormFJ], target: FJSeries, top: int) -> Optional[list]:
    """Exact coordinates of target in the span, solved on w^0..w^top and
    verified on every coefficient the target and the span share."""
    rows = [_coords(v.last, top) for v in forms]
    sol = linalg.solve_left(rows, _coords(target, top))
    if sol is None:
        return None
    W = min(min(v.valid_to for v in forms), target.valid_to)
    if combine(forms, sol).truncate(W) != target.truncate(W):
        return None
    return sol


@dataclass
class HeckeMatrix:
    """matrix[i] holds the coordinates of T(basis[i]) in the basis."""

    operator: HeckeOperator
    basis: list
    matrix: list
    certified_to: int

    def eigenvalues(self):
        """[(lambda, multiplicity)] for roots in Z[rho], and the unexplained degree."""
        return linalg.integral_roots(linalg.charpoly(self.matrix))

    def multiplicity(self, lam) -> int:
        """Geometric multiplicity of lam."""
        return linalg.nullity(self.matrix, CR.coerce(lam))


def select_basis(span: Sequence[VectorFormFJ], upto: int) -> list[int]:
    """Indices of a maximal independent subset, greedily in input order.

    Independence is tested modulo a large split prime, which can only
    under-report it; the chosen subset is therefore independent.
    """
    ech = linalg.ModEchelon()
    return [i for i, v in enumerate(span) if ech.add(_mod_coords(v.last, upto))]


def hecke_matrix(span: Sequence[VectorFormFJ], T: HeckeOperator, table: OperatorTable,
                 basis: Optional[list[int]] = None) -> HeckeMatrix:
    """Exact matrix of T on the span of the last components."""
    if not span:
        raise ValueError("empty span")
    shape = {(v.j, v.k, v.ell) for v in span}
    if len(shape) != 1:
        raise ShapeMismatch(f"span mixes weights/characters {sorted(shape)}")
    W = min(v.valid_to for v in span)
    top = T.certified_to(W)
    if basis is None:
        basis = select_basis(span, W)
    forms = [span[i] for i in basis]
    sep = separating_top(forms, top)
    if sep is None:
        raise TruncationTooShallow(f"span is not separated by coefficients up to w^{top}")
    mat = []
    for v in forms:
        g = _apply(T, v.last.truncate(W), v.j, v.k, table).truncate(top)
        sol = solve_in_span(forms, g, sep)
        if sol is None:
            raise NotInvariant(f"{T} maps {v.name} outside the span (checked to w^{top})")
        mat.append(sol)
    return HeckeMatrix(T, [span[i].name for i in basis], mat, top)


def commute(a: HeckeMatrix, b: HeckeMatrix) -> bool:
    if a.basis != b.basis:
        raise ValueError("matrices use different bases")
    return linalg.matmul(a.matrix, b.matrix) == linalg.matmul(b.matrix, a.matrix)


@dataclass
class PieceEigenvalues:
    piece: str
    dimension: int
    operator: HeckeOperator
    eigenvalues: list          # [(lambda, multiplicity)]
    unexplained: int
    certified_to: int

    def lines(self, span_name: str) -> list[str]:
        out = []
        for lam, m in self.eigenvalues:
            out.append(f"{span_name}|{self.piece}|{self.operator}|{self.operator.p}|"
                       f"{format_value(lam)}|{m}|{self.certified_to}")
        if self.unexplained:
            out.append(f"{span_name}|{self.piece}|{self.operator}|{self.operator.p}|"
                       f"non-integral factor of degree {self.unexplained}||{self.certified_to}")
        return out


def eigenvalues_on_pieces(span: Sequence[VectorFormFJ], T: HeckeOperator,
                          table: OperatorTable, pieces: Optional[dict] = None) -> list[PieceEigenvalues]:
    """Eigenvalues of T on each S3-isotypic piece of the span.

    T commutes with the cusp stabilizer, so each piece is T-stable, and the
    pieces are separated by fewer coefficients than the whole span.
    """
    from .structure import isotypic_pieces
    out = []
    pieces = isotypic_pieces(span) if pieces is None else pieces
    for key, forms in pieces.items():
        if not forms:
            continue
        M = hecke_matrix(forms, T, table)
        ev, rest = M.eigenvalues()
        out.append(PieceEigenvalues(key, len(forms), T, ev, rest, M.certified_to))
    return out


# ---------------------------------------------------------------------------
# tabulated eigenvalues


@dataclass(frozen=True)
class Tabulated:
    """A printed eigenvalue: of a single form, or of some eigenform in a span."""

    target: str
    kind: str            # "form" or "span"
    operator: str        # "T:1+3r" style
    value: str
    min_W: int = 32

    @property
    def hecke(self) -> HeckeOperator:
        return HeckeOperator.parse(*self.operator.split(":"))

    @property
    def claim(self) -> str:
        return f"{self.target}_{self.operator.replace(':', '_')}_{self.value}"


def _tab(target, kind, op, values, min_W=32):
    return [Tabulated(target, kind, op, v, min_W) for v in values.split()]


TABULATED: list[Tabulated] = [
    *_tab("big_phi0", "form", "T:1+3r", "759+261r"),
    *_tab("big_phi0", "form", "T:1-3r", "-4137+1683r"),
    *_tab("big_phi0", "form", "Tm:2", "72"),
    *_tab("big_phi0", "form", "Tm:5", "89622"),
    *_tab("s1_10", "span", "T:1+3r", "-13515+3573r 15159+10863r 26985+20097r"),
    *_tab("s1_10", "span", "Tm:2", "36 1008 -1548"),
    *_tab("s1_7_det", "span", "T:1+3r", "-294+855r"),
    *_tab("s1_7_det", "span", "Tm:2", "180"),
    *_tab("s1_10_det", "span", "T:1+3r", "-19320-7497r", 42),
    *_tab("s1_10_det", "span", "Tm:2", "-36"),
    *_tab("psi2", "form", "T:1+3r", "-6549-17352r"),
    *_tab("psi2", "form", "Tm:2", "-684"),
    *_tab("d0", "form", "T:1+3r", "-105-297r"),
    *_tab("d0", "form", "Tm:2", "-72"),
    *_tab("d0", "form", "Tm:5", "-810"),
    *_tab("s2_8", "span", "T:1+3r", "-3039-765r", 42),
    *_tab("s2_8", "span", "Tm:2", "-288"),
    *_tab("m2_8_det2", "span", "T:1+3r", "-2175-1602r", 50),
    *_tab("m2_8_det2", "span", "Tm:2", "792"),
    *_tab("s3_6", "span", "T:1+3r", "3189-459r 273+2457r", 50),
    *_tab("s3_6", "span", "Tm:2", "-36"),
]


@dataclass
class TabulatedReport:
    entry: Tabulated
    W: int
    passed: bool
    computed: list

    def line(self) -> str:
        status = "pass" if self.passed else "FAIL"
        got = ",".join(format_value(v) for v in self.computed)
        return (f"{self.entry.claim}|{self.entry.target} {self.entry.hecke} = {self.entry.value}|"
                f"{self.W}|{status}|computed {got}")


class _SpanCache:
    def __init__(self):
        self.pieces: dict = {}
        self.values: dict = {}


def check_tabulated(entry: Tabulated, catalog, cache: Optional[_SpanCache] = None) -> TabulatedReport:
    """Compare a printed eigenvalue with the FJ pipeline on a catalog of truncation >= entry.min_W."""
    from .catalog import build_span
    T = entry.hecke
    want = CR.coerce(parse_qr(entry.value))
    cache = cache if cache is not None else _SpanCache()
    key = (entry.target, entry.operator, catalog.W)
    if key not in cache.values:
        if entry.kind == "form":
            cache.values[key] = [eigenvalue(catalog.build(entry.target), T, catalog.table, n_checks=1).eigenvalue]
        else:
            pk = (entry.target, catalog.W)
            if pk not in cache.pieces:
                from .structure import isotypic_pieces
                cache.pieces[pk] = isotypic_pieces(build_span(catalog, entry.target))
            found = []
            for piece in eigenvalues_on_pieces(None, T, catalog.table, cache.pieces[pk]):
                found.extend(lam for lam, _ in piece.eigenvalues if lam not in found)
            cache.values[key] = [CR.coerce(v) for v in found]
    got = cache.values[key]
    return TabulatedReport(entry, catalog.W, want in got, got)
