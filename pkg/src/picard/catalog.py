"""Named Picard modular forms and the identities they satisfy.

Every form is a VectorFormFJ (scalar forms have j = 0).  The builders turn
the analytic normalizations (factors of pi) into exact constants once:

* Phi_0 = -[phi_1, phi_2] / (3 sqrt(-3)) under the normalized bracket, so
  its last component is (phi_2 N phi_1 - phi_1 N phi_2) / (9 sqrt(-3));
  Phi_1, Phi_2 follow by cycling indices.
* gamma_ij = [zeta, x_i - x_j] / (x_i - x_j) with no extra constant.
* Psi_1, Psi_2, E_i, D_i are taken verbatim from their defining quotients.
  Where a reference expansion is known only up to a factor, the factor
  relating the two is recorded in ``scale_note`` but not applied, so that
  wedge ratios such as Psi_1 ^ Psi_2 / Phi_1 ^ Phi_2 keep their meaning.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .eisenstein import CyclotomicRational, EisensteinInteger, enumerate_norm, units
from .fj import (
    FJSeries,
    NotDivisible,
    NotReducible,
    TruncationTooShallow,
    Presentation,
    VectorFormFJ,
    bracket,
    divide,
    restrict_to_curve,
    wedge,
)
from .sections import SectionElement, X, Y, Z
from .theta import OperatorTable

__all__ = ["Catalog", "FormRecord", "UnknownForm", "TruncationTooShallow", "IdentityReport", "FORM_NAMES", "IDENTITY_NAMES",
           "verify_identity", "constant_of", "phi_wedge_constant", "SPANS", "SPAN_NAMES",
           "build_span", "products", "phi_monomials", "monomial_times"]

FormRecord = VectorFormFJ

RHO = CyclotomicRational(0, 1)
SQRT_M3 = CyclotomicRational(1, 2)


class UnknownForm(KeyError):
    pass


@dataclass
class IdentityReport:
    name: str
    anchor: str
    W: int
    passed: bool
    detail: str = ""
    checked: list = field(default_factory=list)
    value: Optional[object] = None

    def line(self) -> str:
        status = "pass" if self.passed else "FAIL"
        return f"{self.name}|{self.anchor}|{self.W}|{status}|{self.detail}"


def _idx(i: int) -> int:
    return i % 3


class Catalog:
    """Builds named forms to truncation W from an operator table."""

    def __init__(self, W: int = 32, table: Optional[OperatorTable] = None):
        if W < 1:
            raise ValueError("truncation must be positive")
        self.W = W
        self.table = table if table is not None else OperatorTable()
        self._memo: dict = {}
        self._lock = threading.RLock()
        self._orbit_reps = None

    # -- registry -----------------------------------------------------------
    def build(self, name: str) -> VectorFormFJ:
        with self._lock:
            if name in self._memo:
                return self._memo[name]
            fn = _BUILDERS.get(name)
            if fn is None:
                raise UnknownForm(name)
            rec = fn(self)
            if rec.name != name:
                rec = rec._with(name=name)
            self._memo[name] = rec
            return rec

    __getitem__ = build

    def series(self, name: str) -> FJSeries:
        return self.build(name).last

    # -- theta-type series ----------------------------------------------------
    def _images(self, gen: SectionElement):
        """m_xi(gen) for every xi with 1 <= N(xi) <= W, keyed by xi."""
        key = ("images", gen.to_text())
        if key in self._memo:
            return self._memo[key]
        us = units()
        out = {}
        for n in range(1, self.W + 1):
            todo = enumerate_norm(n)
            seen = set()
            for xi in todo:
                if xi in seen:
                    continue
                base = self.table.apply_m(xi, gen)
                for u in us:
                    # m_{u xi}(s)(z) = s(xi u z) = (m_xi s)(u z)
                    ux = u * xi
                    if ux in seen:
                        continue
                    seen.add(ux)
                    out[ux] = base.apply_unit(u)
        self._memo[key] = out
        return out

    def theta(self, nu: int) -> FJSeries:
        imgs = self._images(Y)
        coeffs = [SectionElement.one()] + [SectionElement.zero(n) for n in range(1, self.W + 1)]
        for xi, s in imgs.items():
            tr = 2 * xi.a - xi.b
            e = (-nu * tr) % 3
            c = s if e == 0 else s.scale(RHO ** e)
            coeffs[xi.norm()] = coeffs[xi.norm()] + c
        return FJSeries(coeffs)

    def zeta_series(self) -> FJSeries:
        imgs = self._images(X)
        coeffs = [SectionElement.zero(n) for n in range(self.W + 1)]
        for xi, s in imgs.items():
            c = CyclotomicRational(xi.a, xi.b) ** 5 * Fraction(1, 6)
            coeffs[xi.norm()] = coeffs[xi.norm()] + s.scale(c)
        return FJSeries(coeffs)


_BUILDERS: dict[str, Callable[[Catalog], VectorFormFJ]] = {}
_ANCHORS: dict[str, str] = {}


def _register(name: str, anchor: str):
    def deco(fn):
        _BUILDERS[name] = fn
        _ANCHORS[name] = anchor
        return fn
    return deco


def _scalar(name, k, ell, series, anchor, note=""):
    return VectorFormFJ(name, 0, k, ell % 3, series, None, None, anchor, note)


def _ser(c: Catalog, name: str) -> FJSeries:
    return c.build(name).last


# -- scalar forms --------------------------------------------------------------

for _nu in range(3):
    def _mk_theta(c, nu=_nu):
        return _scalar(f"theta{nu}", 1, 0, c.theta(nu), "theta_nu = sum rho^(-nu Tr xi) m_xi(Y) w^N(xi)")
    _register(f"theta{_nu}", "theta_nu lattice sum")(_mk_theta)

    def _mk_phi(c, nu=_nu):
        t = _ser(c, f"theta{nu}")
        return _scalar(f"phi{nu}", 3, 0, t * t * t, "phi_nu = theta_nu^3")
    _register(f"phi{_nu}", "phi_nu = theta_nu^3")(_mk_phi)


@_register("zeta", "zeta = (1/6) sum xi^5 m_xi(X) w^N(xi)")
def _zeta(c):
    return _scalar("zeta", 6, 1, c.zeta_series(), "zeta lattice sum")


_X_COEFFS = {1: (1, 1, 1), 2: (-3, 1, 1), 3: (1, -3, 1), 4: (1, 1, -3)}


def _phis(c):
    return [_ser(c, f"phi{i}") for i in range(3)]


for _i, (_a, _b, _c) in _X_COEFFS.items():
    def _mk_x(c, i=_i, co=(_a, _b, _c)):
        p = _phis(c)
        return _scalar(f"x{i}", 3, 0, p[0].scale(co[0]) + p[1].scale(co[1]) + p[2].scale(co[2]),
                       "x_i basis of M_3")
    _register(f"x{_i}", "x_i basis of M_3")(_mk_x)


# -- weight (1, 7): Phi_i and X_i --------------------------------------------------

_PHI_NORM = -SQRT_M3.inverse() * Fraction(1, 3)  # -1 / (3 sqrt(-3))

for _i in range(3):
    def _mk_big_phi(c, i=_i):
        p = _phis(c)
        f, h = p[_idx(i + 1)], p[_idx(i + 2)]
        v = bracket(f, 3, h, 3).scale(_PHI_NORM)
        return VectorFormFJ(f"big_phi{i}", 1, 7, 0, v.last, v.firsts, None,
                            "Phi_i = -[phi_(i+1), phi_(i+2)] / (6 pi sqrt(-1))")
    _register(f"big_phi{_i}", "Phi_i bracket")(_mk_big_phi)


def _big_phis(c):
    return [c.build(f"big_phi{i}") for i in range(3)]


@_register("big_x1", "X_1 = Phi_0 + Phi_1 + Phi_2")
def _big_x1(c):
    a, b, d = _big_phis(c)
    return (a + b + d)._with(name="big_x1", provenance="X_1 = Phi_0 + Phi_1 + Phi_2")


for _i in range(2, 5):
    def _mk_big_x(c, i=_i):
        return (-_big_phis(c)[i - 2])._with(name=f"big_x{i}", provenance="X_i = -Phi_(i-2)")
    _register(f"big_x{_i}", "X_i = -Phi_(i-2)")(_mk_big_x)


# -- weight (1, 7), det: gamma_ij, a_i, b_ij,kl --------------------------------------

_PAIRS = [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]

for _p in _PAIRS:
    def _mk_gamma(c, pair=_p):
        i, j = pair
        diff = _ser(c, f"x{i}") - _ser(c, f"x{j}")
        br = bracket(_ser(c, "zeta"), 6, diff, 3, ell=1)
        v = br.divide(diff, k=3, ell=0)
        return VectorFormFJ(f"gamma{i}{j}", 1, 7, 1, v.last, v.firsts, None,
                            "gamma_ij = [zeta, x_i - x_j] / (x_i - x_j)")
    _register(f"gamma{_p[0]}{_p[1]}", "gamma_ij")(_mk_gamma)


def _gamma(c, i, j):
    if i < j:
        return c.build(f"gamma{i}{j}")
    return -c.build(f"gamma{j}{i}")


def _sum_forms(forms, name, anchor):
    out = forms[0]
    for f in forms[1:]:
        out = out + f
    return out._with(name=name, provenance=anchor, presentation=None)


for _i in range(1, 5):
    def _mk_a(c, i=_i):
        j, k, l = [t for t in range(1, 5) if t != i]
        return _sum_forms([_gamma(c, j, k), _gamma(c, j, l), _gamma(c, k, l)], f"a{i}",
                          "a_i = gamma_jk + gamma_jl + gamma_kl")
    _register(f"a{_i}", "a_i")(_mk_a)

for _name, (_p, _q) in {"b12_34": ((1, 2), (3, 4)), "b13_24": ((1, 3), (2, 4)), "b14_23": ((1, 4), (2, 3))}.items():
    def _mk_b(c, p=_p, q=_q, name=_name):
        return _sum_forms([_gamma(c, *p), _gamma(c, *q)], name, "b_ij,kl = gamma_ij + gamma_kl")
    _register(_name, "b_ij,kl")(_mk_b)


# -- det^2: Psi_1, Psi_2 and the Eisenstein series E_11, E_14 -----------------------

_PSI1_PRINTED = "X^2 w^2 - 24 X^2YZ w^4 + 34 X^2(Y^3+Z^3) w^5 - 81 X^2Y^2Z^2 w^6"
_PSI2_PRINTED = "X^2 w^2 - 6 X^2YZ w^4 + 70 X^2(Y^3+Z^3) w^5 - 405 X^2Y^2Z^2 w^6"


def _lead_note(series: FJSeries, printed: str) -> str:
    n = series.first_nonzero()
    if n is None:
        return "zero series"
    lam = series[n].coefficient(2, 0, 0) if n == 2 else None
    return f"printed series ({printed}) = stored / ({lam})" if lam else ""


@_register("psi1", "Psi_1 = (phi_0(phi_1-phi_0)Phi_0 - phi_2(phi_2-phi_1)Phi_2) / zeta")
def _psi1(c):
    p = _phis(c)
    P0, _, P2 = _big_phis(c)
    num = P0.times(p[0] * (p[1] - p[0]), 6, 0) - P2.times(p[2] * (p[2] - p[1]), 6, 0)
    v = num.divide(_ser(c, "zeta"), k=6, ell=1)
    return VectorFormFJ("psi1", 1, 7, 2, v.last, v.firsts, None, _ANCHORS["psi1"],
                        _lead_note(v.last, _PSI1_PRINTED))


@_register("psi2", "Psi_2 = [phi_0(phi_0-phi_1)(phi_0+phi_1-3phi_2)Phi_0 - phi_2(phi_1-phi_2)(phi_1+phi_2-3phi_0)Phi_2] / zeta")
def _psi2(c):
    p = _phis(c)
    P0, _, P2 = _big_phis(c)
    f0 = p[0] * (p[0] - p[1]) * (p[0] + p[1] - p[2].scale(3))
    f2 = p[2] * (p[1] - p[2]) * (p[1] + p[2] - p[0].scale(3))
    num = P0.times(f0, 9, 0) - P2.times(f2, 9, 0)
    v = num.divide(_ser(c, "zeta"), k=6, ell=1)
    return VectorFormFJ("psi2", 1, 10, 2, v.last, v.firsts, None, _ANCHORS["psi2"],
                        _lead_note(v.last, _PSI2_PRINTED))


@_register("e11", "E_11 = Psi_1 / zeta")
def _e11(c):
    v = c.build("psi1").divide(_ser(c, "zeta"), k=6, ell=1)
    return v._with(name="e11", k=1, ell=1, provenance=_ANCHORS["e11"], scale_note="")


@_register("e14", "E_14 = Psi_2 / zeta")
def _e14(c):
    v = c.build("psi2").divide(_ser(c, "zeta"), k=6, ell=1)
    return v._with(name="e14", k=4, ell=1, provenance=_ANCHORS["e14"], scale_note="")


def _sym_pow(v: VectorFormFJ, j: int, name: str, anchor: str, scale=None, den: Optional[FJSeries] = None,
             k: Optional[int] = None, ell: Optional[int] = None) -> VectorFormFJ:
    """Sym^j of a j=1 form, optionally scaled and divided by a scalar series."""
    a, b = v.as_vector()
    one = FJSeries.one(v.valid_to)
    s = one if scale is None else one.scale(scale)
    pres = Presentation(j, [(s, (a, b))], den)
    return VectorFormFJ(name, j, k if k is not None else j * v.k, ell if ell is not None else (j * v.ell) % 3,
                        pres.last(), None, pres, anchor)


@_register("k2", "K_2 = Sym^2(E_11)")
def _k2(c):
    return _sym_pow(c.build("e11"), 2, "k2", _ANCHORS["k2"])


@_register("k8", "K_8 = Sym^2(E_14)")
def _k8(c):
    return _sym_pow(c.build("e14"), 2, "k8", _ANCHORS["k8"])


# -- weight (2, 5): D_i, D'_i, K_5 ----------------------------------------------------

for _i in range(3):
    def _mk_d(c, i=_i):
        p = _phis(c)
        a, b = p[_idx(i + 1)], p[_idx(i + 2)]
        den = a * b * (a - b)
        P = c.build(f"big_phi{i}")
        return _sym_pow(P, 2, f"d{i}", "D_i = 9 sqrt(-3) Sym^2(Phi_i) / (phi_(i+1) phi_(i+2) (phi_(i+1) - phi_(i+2)))",
                        scale=SQRT_M3 * 9, den=den, k=5, ell=0)
    _register(f"d{_i}", "D_i")(_mk_d)

    def _mk_dp(c, i=_i):
        p = _phis(c)
        d1, d2 = c.build(f"d{_idx(i + 1)}"), c.build(f"d{_idx(i + 2)}")
        den = p[i] * (p[_idx(i + 1)] - p[_idx(i + 2)])
        zeta = _ser(c, "zeta")
        num = (d1.last + d2.last) * zeta
        pres = (d1.presentation + d2.presentation).scaled(zeta).divided(den)
        return VectorFormFJ(f"d{i}p", 2, 5, 1, divide(num, den), None, pres,
                            "D'_i = zeta (D_(i+1) + D_(i+2)) / (phi_i (phi_(i+1) - phi_(i+2)))")
    _register(f"d{_i}p", "D'_i")(_mk_dp)


@_register("k5", "K_5 = sum phi_i(2phi_i - phi_0 - phi_1 - phi_2) D_i / zeta")
def _k5(c):
    p = _phis(c)
    tot = p[0] + p[1] + p[2]
    num = None
    for i in range(3):
        t = c.build(f"d{i}").last * (p[i] * (p[i].scale(2) - tot))
        num = t if num is None else num + t
    return VectorFormFJ("k5", 2, 5, 2, divide(num, _ser(c, "zeta")), None, None, _ANCHORS["k5"])


@_register("k2_alt", "K_2 = (phi_0 D_0 + phi_1 D_1 + phi_2 D_2) / zeta")
def _k2_alt(c):
    p = _phis(c)
    num = None
    for i in range(3):
        t = c.build(f"d{i}").last * p[i]
        num = t if num is None else num + t
    return VectorFormFJ("k2_alt", 2, 2, 2, divide(num, _ser(c, "zeta")), None, None, _ANCHORS["k2_alt"])


# -- weight (3, 3): E_0..E_3 and the weight (3, 6) forms ----------------------------------

for _i in range(3):
    def _mk_e(c, i=_i):
        p = _phis(c)
        a, b = p[_idx(i + 1)], p[_idx(i + 2)]
        d = a * b * (a - b)
        return _sym_pow(c.build(f"big_phi{i}"), 3, f"e33_{i}",
                        "E_i = Sym^3(Phi_i) / (phi_(i+1) phi_(i+2) (phi_(i+1) - phi_(i+2)))^2",
                        den=d * d, k=3, ell=0)
    _register(f"e33_{_i}", "E_i")(_mk_e)


@_register("e33_3", "E_3 = Sym^3(Phi_0+Phi_1+Phi_2) / ((phi_0-phi_1)(phi_0-phi_2)(phi_1-phi_2))^2")
def _e3(c):
    p = _phis(c)
    d = (p[0] - p[1]) * (p[0] - p[2]) * (p[1] - p[2])
    s = c.build("big_x1")
    return _sym_pow(s, 3, "e33_3", _ANCHORS["e33_3"], den=d * d, k=3, ell=0)


def _combo(c, name, terms, anchor):
    """sum of (scalar series) * E_i as a weight (3, 6) form (last component only)."""
    out = None
    for coeff, i in terms:
        t = c.build(f"e33_{i}").last * coeff
        out = t if out is None else out + t
    return VectorFormFJ(name, 3, 6, 0, out, None, None, anchor)


def _lin(p, *co):
    out = None
    for x, f in zip(co, p):
        if x:
            t = f.scale(x)
            out = t if out is None else out + t
    return out


@_register("g0", "G_0 = phi_2 E_1 - phi_1 E_2 + (phi_2 - phi_1) E_3")
def _g0(c):
    p = _phis(c)
    return _combo(c, "g0", [(p[2], 1), (-p[1], 2), (p[2] - p[1], 3)], _ANCHORS["g0"])


@_register("g1", "G_1 = -phi_2 E_0 + phi_0 E_2 + (phi_0 - phi_2) E_3")
def _g1(c):
    p = _phis(c)
    return _combo(c, "g1", [(-p[2], 0), (p[0], 2), (p[0] - p[2], 3)], _ANCHORS["g1"])


@_register("g2", "G_2 = phi_1 E_0 - phi_0 E_1 + (phi_1 - phi_0) E_3")
def _g2(c):
    p = _phis(c)
    return _combo(c, "g2", [(p[1], 0), (-p[0], 1), (p[1] - p[0], 3)], _ANCHORS["g2"])


@_register("h1", "H_1 = phi_1 E_0 + (phi_0 - phi_2) E_1 - phi_1 E_2 + (phi_0 - phi_2) E_3")
def _h1(c):
    p = _phis(c)
    return _combo(c, "h1", [(p[1], 0), (p[0] - p[2], 1), (-p[1], 2), (p[0] - p[2], 3)], _ANCHORS["h1"])


@_register("h2", "H_2 = phi_2 E_0 - phi_2 E_1 + (phi_0 - phi_1) E_2 + (phi_0 - phi_1) E_3")
def _h2(c):
    p = _phis(c)
    return _combo(c, "h2", [(p[2], 0), (-p[2], 1), (p[0] - p[1], 2), (p[0] - p[1], 3)], _ANCHORS["h2"])


@_register("j0", "J_0 = 3 phi_1 E_0 + (phi_0 + phi_2) E_1 + 3 phi_1 E_2 + (phi_0 - 2 phi_1 + phi_2) E_3")
def _j0(c):
    p = _phis(c)
    return _combo(c, "j0", [(p[1].scale(3), 0), (p[0] + p[2], 1), (p[1].scale(3), 2),
                            (_lin(p, 1, -2, 1), 3)], _ANCHORS["j0"])


@_register("j1", "J_1 = R_3 J_0")
def _j1(c):
    j = c.build("j0")
    return j._with(name="j1", last=j.last.apply_r3(), provenance=_ANCHORS["j1"])


@_register("j2", "J_2 = R_3 J_1")
def _j2(c):
    j = c.build("j1")
    return j._with(name="j2", last=j.last.apply_r3(), provenance=_ANCHORS["j2"])


@_register("k02", "K_02 = phi_0 E_2")
def _k02(c):
    return _combo(c, "k02", [(_phis(c)[0], 2)], _ANCHORS["k02"])


@_register("k12", "K_12 = phi_1 E_2")
def _k12(c):
    return _combo(c, "k12", [(_phis(c)[1], 2)], _ANCHORS["k12"])


@_register("k23", "K_23 = (phi_1 - phi_0) E_3")
def _k23(c):
    p = _phis(c)
    return _combo(c, "k23", [(p[1] - p[0], 3)], _ANCHORS["k23"])


@_register("k13", "K_13 = (phi_2 - phi_0) E_3")
def _k13(c):
    p = _phis(c)
    return _combo(c, "k13", [(p[2] - p[0], 3)], _ANCHORS["k13"])


FORM_NAMES = tuple(_BUILDERS)


# -- spans used for Hecke tables and rank checks ------------------------------

def phi_monomials(d: int) -> list[tuple[int, int, int]]:
    """Exponent triples of the degree-d monomials in phi_0, phi_1, phi_2."""
    if d < 0:
        return []
    return [(a, b, d - a - b) for a in range(d, -1, -1) for b in range(d - a, -1, -1)]


def _mono_name(e) -> str:
    parts = [f"phi{i}" + (f"^{x}" if x > 1 else "") for i, x in enumerate(e) if x]
    return "*".join(parts) or "1"


def monomial_times(c: Catalog, form: VectorFormFJ, e) -> VectorFormFJ:
    """phi_0^a phi_1^b phi_2^c times form."""
    if not any(e):
        return form
    p = _phis(c)
    m = None
    for i, x in enumerate(e):
        for _ in range(x):
            m = p[i] if m is None else m * p[i]
    return form.times(m, 3 * sum(e), 0, name=f"{_mono_name(e)}*{form.name}")


def products(c: Catalog, names, degree: int) -> list[VectorFormFJ]:
    return [monomial_times(c, c.build(n), e) for n in names for e in phi_monomials(degree)]


_GAMMAS = ("gamma12", "gamma13", "gamma14", "gamma23", "gamma24", "gamma34")

SPANS: dict[str, tuple[str, Callable[[Catalog], list]]] = {
    "s1_7": ("S_{1,7}: Phi_0, Phi_1, Phi_2",
             lambda c: [c.build(f"big_phi{i}") for i in range(3)]),
    "s1_10": ("S_{1,10}: phi_i Phi_j",
              lambda c: products(c, [f"big_phi{i}" for i in range(3)], 1)),
    "s1_7_det": ("S_{1,7}(det): gamma_ij", lambda c: [c.build(n) for n in _GAMMAS]),
    "s1_10_det": ("S_{1,10}(det): phi_i gamma_jk", lambda c: products(c, _GAMMAS, 1)),
    "s1_7_det2": ("S_{1,7}(det^2): Psi_1", lambda c: [c.build("psi1")]),
    "s1_10_det2": ("S_{1,10}(det^2): Psi_2, phi_i Psi_1",
                   lambda c: [c.build("psi2")] + products(c, ["psi1"], 1)),
    "s2_5": ("S_{2,5}: D_0, D_1, D_2", lambda c: [c.build(f"d{i}") for i in range(3)]),
    "s2_5_det": ("S_{2,5}(det): D'_0, D'_1, D'_2", lambda c: [c.build(f"d{i}p") for i in range(3)]),
    "s2_8": ("S_{2,8}: phi_i D_j", lambda c: products(c, [f"d{i}" for i in range(3)], 1)),
    "m2_8_det2": ("M_{2,8}(det^2): phi_i phi_j K_2, phi_i K_5, K_8",
                  lambda c: products(c, ["k2"], 2) + products(c, ["k5"], 1) + [c.build("k8")]),
    "m3_3": ("M_{3,3}: E_0, ..., E_3", lambda c: [c.build(f"e33_{i}") for i in range(4)]),
    "s3_6": ("S_{3,6}: G_i, H_1, H_2, J_0, J_1, J_2",
             lambda c: [c.build(n) for n in ("g0", "g1", "g2", "h1", "h2", "j0", "j1", "j2")]),
}

SPAN_NAMES = tuple(SPANS)


def build_span(c: Catalog, name: str) -> list[VectorFormFJ]:
    if name not in SPANS:
        raise UnknownForm(name)
    return SPANS[name][1](c)


# ---------------------------------------------------------------------------
# identities


_IDENTITIES: dict[str, tuple[str, Callable]] = {}


def _identity(name: str, anchor: str):
    def deco(fn):
        _IDENTITIES[name] = (anchor, fn)
        return fn
    return deco


def _zero_report(name, c, series: FJSeries, detail="") -> IdentityReport:
    bad = [n for n, x in enumerate(series.coeffs) if not x.is_zero()]
    checked = list(range(series.valid_to + 1))
    ok = not bad
    det = detail or ("vanishes through w^%d" % series.valid_to if ok else f"nonzero at w^{bad[0]}")
    return IdentityReport(name, _IDENTITIES[name][0], c.W, ok, det, checked)


def constant_of(series: FJSeries) -> Optional[CyclotomicRational]:
    """The constant c if series == c (through its valid_to), else None."""
    if not series.coeffs:
        raise TruncationTooShallow("no coefficients left after division")
    if any(not x.is_zero() for x in series.coeffs[1:]):
        return None
    return series.coeffs[0].ev_zero()


def _vec_zero(v: VectorFormFJ) -> FJSeries:
    out = v.last
    if v.firsts:
        fr = v.firsts[0]
        bad = [n for n, x in enumerate(fr.coeffs) if not x.is_zero()]
        if bad:
            return FJSeries([SectionElement.one()] + [SectionElement.zero(n) for n in range(1, fr.valid_to + 1)])
    return out


@_identity("zeta_cubed", "zeta^3 = -rho/(sqrt(-3) 3^7) phi_0 phi_1 phi_2 (phi_1-phi_0)(phi_2-phi_0)(phi_2-phi_1)")
def _id_zeta_cubed(c):
    p = _phis(c)
    z = _ser(c, "zeta")
    const = -RHO / (SQRT_M3 * 3 ** 7)
    rhs = (p[0] * p[1] * p[2] * (p[1] - p[0]) * (p[2] - p[0]) * (p[2] - p[1])).scale(const)
    return _zero_report("zeta_cubed", c, z * z * z - rhs)


@_identity("x_sum", "x_1 + x_2 + x_3 + x_4 = 0")
def _id_x_sum(c):
    return _zero_report("x_sum", c, sum((_ser(c, f"x{i}") for i in range(2, 5)), _ser(c, "x1")))


@_identity("big_x_sum", "X_1 + X_2 + X_3 + X_4 = 0")
def _id_big_x_sum(c):
    v = c.build("big_x1") + c.build("big_x2") + c.build("big_x3") + c.build("big_x4")
    return _zero_report("big_x_sum", c, _vec_zero(v))


@_identity("gamma_sum", "sum_{i<j} gamma_ij = 0")
def _id_gamma_sum(c):
    v = _sum_forms([c.build(f"gamma{i}{j}") for i, j in _PAIRS], "s", "")
    return _zero_report("gamma_sum", c, _vec_zero(v))


@_identity("a_sum", "sum a_i = 0")
def _id_a_sum(c):
    v = _sum_forms([c.build(f"a{i}") for i in range(1, 5)], "s", "")
    return _zero_report("a_sum", c, _vec_zero(v))


@_identity("b_sum", "sum b_ij,kl = 0")
def _id_b_sum(c):
    v = _sum_forms([c.build(n) for n in ("b12_34", "b13_24", "b14_23")], "s", "")
    return _zero_report("b_sum", c, _vec_zero(v))


@_identity("phi_g", "zeta Phi_0 / (phi_1 phi_2) = (gamma_13 - gamma_14) / (3 sqrt(-3))")
def _id_phi_g(c):
    p = _phis(c)
    lhs = c.build("big_phi0").times(_ser(c, "zeta"), 6, 1).divide(p[1] * p[2], k=6)
    rhs = (c.build("gamma13") - c.build("gamma14")).scale((SQRT_M3 * 3).inverse())
    return _zero_report("phi_g", c, _vec_zero(lhs - rhs._with(k=lhs.k, ell=lhs.ell)))


@_identity("phi_Phi_relation", "phi_0 Phi_0 + phi_1 Phi_1 + phi_2 Phi_2 = 0")
def _id_phi_phi(c):
    p = _phis(c)
    v = None
    for i in range(3):
        t = c.build(f"big_phi{i}").times(p[i], 3, 0)
        v = t if v is None else v + t
    return _zero_report("phi_Phi_relation", c, _vec_zero(v))


@_identity("r4", "phi_0 G_0 + phi_1 G_1 + phi_2 G_2 = 0")
def _id_r4(c):
    p = _phis(c)
    s = sum((c.series(f"g{i}") * p[i] for i in range(1, 3)), c.series("g0") * p[0])
    return _zero_report("r4", c, s)


@_identity("r5", "phi_1 K_02 - phi_0 K_12 - (phi_2 - phi_0) K_23 + (phi_1 - phi_0) K_13 = 0")
def _id_r5(c):
    p = _phis(c)
    s = (c.series("k02") * p[1] - c.series("k12") * p[0] - c.series("k23") * (p[2] - p[0])
         + c.series("k13") * (p[1] - p[0]))
    return _zero_report("r5", c, s)


_QUOTIENTS = ("psi1", "psi2", "e11", "e14", "d0", "d1", "d2", "d0p", "d1p", "d2p",
              "k2_alt", "k5", "k8", "e33_0", "e33_1", "e33_2", "e33_3")


@_identity("quotients_exist", "every quotient-defined form divides with zero remainder")
def _id_quotients(c):
    failed = []
    for n in _QUOTIENTS:
        try:
            c.build(n)
        except NotDivisible as exc:
            failed.append(f"{n}: {exc}")
    det = "all of " + ",".join(_QUOTIENTS) if not failed else "; ".join(failed)
    return IdentityReport("quotients_exist", _IDENTITIES["quotients_exist"][0], c.W, not failed, det,
                          list(_QUOTIENTS))


@_identity("k2_two_ways", "Sym^2(E_11) is proportional to (phi_0 D_0 + phi_1 D_1 + phi_2 D_2) / zeta")
def _id_k2(c):
    lam = c.series("k2_alt").is_proportional(c.series("k2"))
    ok = lam is not None and bool(lam)
    return IdentityReport("k2_two_ways", _IDENTITIES["k2_two_ways"][0], c.W, ok,
                          f"ratio {lam}" if ok else "not proportional", value=lam)


_ORBITS = [("phi0", "phi1"), ("phi1", "phi2"), ("big_phi0", "big_phi1"), ("big_phi1", "big_phi2"),
           ("d0", "d1"), ("d1", "d2"), ("e33_0", "e33_1"), ("e33_1", "e33_2")]


@_identity("r3_orbits", "R_3 maps phi_i, Phi_i, D_i, E_i to the next index")
def _id_r3(c):
    bad = []
    for a, b in _ORBITS:
        fa, fb = c.build(a), c.build(b)
        V = min(fa.valid_to, fb.valid_to)
        if not fa.last.truncate(V).apply_r3() == fb.last.truncate(V):
            bad.append(f"{a}->{b}")
        elif fa.firsts and fb.firsts and not fa.firsts[0].apply_r3() == fb.firsts[0]:
            bad.append(f"{a}->{b} (first)")
    return IdentityReport("r3_orbits", _IDENTITIES["r3_orbits"][0], c.W, not bad,
                          "all orbits" if not bad else ",".join(bad))


# -- wedge identities (kappa = 1) ----------------------------------------------------


def phi_wedge_constant(c) -> Optional[CyclotomicRational]:
    p = _phis(c)
    z = _ser(c, "zeta")
    w = wedge([c.build("big_phi1"), c.build("big_phi2")])
    return constant_of(divide(w, z * z * p[0]))


@_identity("phi_wedges", "Phi_1^Phi_2 = c zeta^2 phi_0, Phi_0^Phi_1 = c zeta^2 phi_2, Phi_0^Phi_2 = -c zeta^2 phi_1")
def _id_phi_wedges(c):
    p = _phis(c)
    z2 = _ser(c, "zeta") ** 2
    P = _big_phis(c)
    cc = phi_wedge_constant(c)
    if cc is None or not cc:
        return IdentityReport("phi_wedges", _IDENTITIES["phi_wedges"][0], c.W, False,
                              "Phi_1^Phi_2 / (zeta^2 phi_0) is not a nonzero constant")
    d1 = wedge([P[0], P[1]]) - (z2 * p[2]).scale(cc)
    d2 = wedge([P[0], P[2]]) + (z2 * p[1]).scale(cc)
    ok = d1.is_zero() and d2.is_zero()
    return IdentityReport("phi_wedges", _IDENTITIES["phi_wedges"][0], c.W, ok,
                          f"c = {cc}" if ok else "companion wedges differ", value=cc)


@_identity("eight_over_seven_ratio", "Psi_1^Psi_2 = 2^2 3^7 (rho - 1) c zeta^3")
def _id_8_7(c):
    cc = phi_wedge_constant(c)
    z = _ser(c, "zeta")
    w = wedge([c.build("psi1"), c.build("psi2")])
    r = constant_of(divide(w, z * z * z))
    target = CyclotomicRational(-1, 1) * (4 * 3 ** 7)
    ok = cc is not None and r is not None and r / cc == target
    det = f"ratio {r / cc if (r is not None and cc) else None}, printed value {target}"
    return IdentityReport("eight_over_seven_ratio", _IDENTITIES["eight_over_seven_ratio"][0], c.W, ok, det,
                          value=None if not ok else r / cc)


def _psi1_gamma_data(c):
    """For j = 2, 3, 4: (m, lambda) with Psi_1 ^ gamma_1j = lambda zeta^2 (phi_0+phi_1+phi_2 - 2 phi_m)."""
    p = _phis(c)
    z2 = _ser(c, "zeta") ** 2
    tot = p[0] + p[1] + p[2]
    out = {}
    for j in (2, 3, 4):
        q = divide(wedge([c.build("psi1"), c.build(f"gamma1{j}")]), z2)
        out[j] = None
        for m in range(3):
            lam = q.is_proportional(tot - p[m].scale(2))
            if lam is not None:
                out[j] = (m, lam)
                break
    return out


@_identity("psi1_gamma_shape", "Psi_1 ^ gamma_1j is a constant times zeta^2 (phi_0+phi_1+phi_2-2 phi_m)")
def _id_psi1_gamma_shape(c):
    data = _psi1_gamma_data(c)
    lams = {v[1] for v in data.values() if v is not None}
    ok = all(v is not None for v in data.values()) and len(lams) == 1
    det = "; ".join(f"j={j}: m={v[0] if v else None}" for j, v in data.items())
    if ok:
        det += f"; common constant {lams.pop()}; m = (j+1) mod 3"
    return IdentityReport("psi1_gamma_shape", _IDENTITIES["psi1_gamma_shape"][0], c.W, ok, det)


@_identity("psi1_gamma_constant", "the constant in Psi_1 ^ gamma_1j equals -c/(6 sqrt(-3))")
def _id_psi1_gamma_constant(c):
    cc = phi_wedge_constant(c)
    data = _psi1_gamma_data(c)
    target = -cc / (SQRT_M3 * 6) if cc else None
    got = data[2][1] if data.get(2) else None
    ok = got is not None and got == target
    det = f"computed {got}, printed value {target}"
    if got is not None and target:
        det += f" (ratio {got / target})"
    return IdentityReport("psi1_gamma_constant", _IDENTITIES["psi1_gamma_constant"][0], c.W, ok, det, value=got)


@_identity("d_wedge", "D_0 ^ D_1 ^ D_2 = -rho c^3 zeta^3")
def _id_d_wedge(c):
    cc = phi_wedge_constant(c)
    z = _ser(c, "zeta")
    w = wedge([c.build(f"d{i}") for i in range(3)])
    r = constant_of(divide(w, z * z * z))
    ok = cc is not None and r is not None and r == -RHO * cc ** 3
    return IdentityReport("d_wedge", _IDENTITIES["d_wedge"][0], c.W, ok,
                          f"D-wedge constant {r}, -rho c^3 = {-RHO * cc ** 3 if cc else None}", value=r)


@_identity("d_prime_wedge", "D'_0 ^ D'_1 ^ D'_2 is a nonzero multiple of zeta^3")
def _id_dp_wedge(c):
    z = _ser(c, "zeta")
    w = wedge([c.build(f"d{i}p") for i in range(3)])
    r = constant_of(divide(w, z * z * z))
    ok = r is not None and bool(r)
    return IdentityReport("d_prime_wedge", _IDENTITIES["d_prime_wedge"][0], c.W, ok, f"constant {r}", value=r)


@_identity("e_wedge", "E_0 ^ E_1 ^ E_2 ^ E_3 = c_2 zeta^3")
def _id_e_wedge(c):
    z = _ser(c, "zeta")
    w = wedge([c.build(f"e33_{i}") for i in range(4)])
    r = constant_of(divide(w, z * z * z))
    ok = r is not None and bool(r)
    return IdentityReport("e_wedge", _IDENTITIES["e_wedge"][0], c.W, ok, f"c_2 = {r}", value=r)


IDENTITY_NAMES = tuple(_IDENTITIES)


def verify_identity(name: str, catalog: Catalog) -> IdentityReport:
    if name not in _IDENTITIES:
        raise UnknownForm(name)
    anchor, fn = _IDENTITIES[name]
    try:
        return fn(catalog)
    except (NotDivisible, NotReducible, TruncationTooShallow) as exc:
        return IdentityReport(name, anchor, catalog.W, False, f"{type(exc).__name__}: {exc}")
