"""Dimension formulas, truncated rank checks and S3-isotypic analysis.

A rank computed from truncated last components is a lower bound for the
rank of the forms; a dimension formula is an upper bound.  When the two
agree the presentation is verified at that truncation.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

from . import linalg
from .catalog import Catalog, monomial_times, phi_monomials
from .eisenstein import CyclotomicRational
from .fj import FJSeries, ShapeMismatch, VectorFormFJ

__all__ = [
    "OutOfStatedRange", "FormulaUnavailable", "TruncationAmbiguous", "NotClosed",
    "dim_formula", "DIM_FAMILIES", "rank_of_span", "kernel_of_span", "isotypic_decompose",
    "isotypic_pieces", "S3_RESTRICTION", "PRESENTATIONS", "check_presentation",
    "StructureReport", "dim_cross_checks", "STRUCTURE_CHECKS", "run_structure_check",
]

CR = CyclotomicRational


class OutOfStatedRange(ValueError):
    pass


class FormulaUnavailable(LookupError):
    pass


class TruncationAmbiguous(ArithmeticError):
    pass


class NotClosed(ArithmeticError):
    pass


# ---------------------------------------------------------------------------
# dimension formulas


def _need(cond: bool, msg: str):
    if not cond:
        raise OutOfStatedRange(msg)


def _gamma1(j, k, ell):
    _need(j is not None and 0 <= j <= 3, "the constant c is known for j = 0..3 only")
    _need(j + 3 * k > 4, "stated for j + 3k > 4")
    c = (4, 2, 2, 4)[j]
    num = 9 * (k - 1) * (j + 1) * (j + k) + 2 * j * (j + 1) * (j + 2)
    return num // 6 + c


def _s1_gamma1(j, k, ell):
    _need(k >= 1, "stated for k >= 1")
    return 3 * k * k - 3


def _s1_det(j, k, ell):
    _need(k >= 1, "stated for k >= 1")
    _need(ell in (0, 1, 2), "character exponent must be 0, 1 or 2")
    return (k * k - 1, (k + 1) ** 2 - 4, (k - 1) ** 2)[ell]


def _s2(j, k, ell):
    _need(k >= 1, "stated for k >= 1")
    _need(ell in (None, 0, 1), "stated for det^0 and det^1")
    return 3 * k * (k + 1) // 2


def _m2_det2(j, k, ell):
    _need(k >= 0, "stated for k >= 0")
    return (3 * k * k + 3 * k + 2) // 2


def _m3(j, k, ell):
    _need(k >= 0, "stated for k >= 0")
    return 2 * k * k + 6 * k + 4


def _s3(j, k, ell):
    _need(k >= 0, "stated for k >= 0")
    return 2 * k * k + 6 * k


def _m0(j, k, ell):
    _need(k >= 0, "stated for k >= 0")
    return (k + 1) * (k + 2) // 2


def _per_character(j, k, ell):
    raise FormulaUnavailable("the constants c' and c'' are not tabulated")


DIM_FAMILIES: dict[str, tuple[str, Callable]] = {
    "gamma1": ("dim M_{j,j+3k}(Gamma_1[sqrt-3]) = 3(k-1)(j+1)(j+k)/2 + j(j+1)(j+2)/3 + c", _gamma1),
    "s1_gamma1": ("dim S_{1,3k+1}(Gamma_1[sqrt-3]) = 3k^2 - 3", _s1_gamma1),
    "s1_det": ("dim S_{1,3k+1}(Gamma[sqrt-3], det^l) = k^2-1, (k+1)^2-4, (k-1)^2", _s1_det),
    "s2": ("dim S_{2,3k+2}(Gamma[sqrt-3], det^l) = 3k(k+1)/2 for l = 0, 1", _s2),
    "m2_det2": ("dim M_{2,2+3k}(Gamma[sqrt-3], det^2) = (3k^2+3k+2)/2", _m2_det2),
    "m3": ("dim M_{3,3k+3}(Gamma[sqrt-3]) = 2k^2+6k+4", _m3),
    "s3": ("dim S_{3,3k+3}(Gamma[sqrt-3]) = 2k^2+6k", _s3),
    "m0": ("dim M_{3k}(Gamma[sqrt-3]) = dim of degree-k polynomials in phi_0, phi_1, phi_2", _m0),
    "per_character": ("dim M_{j,j+3k}(Gamma[sqrt-3], det^l) with c', c''", _per_character),
}


def dim_formula(family: str, j: Optional[int] = None, k: int = 0, ell: Optional[int] = None) -> int:
    if family not in DIM_FAMILIES:
        raise KeyError(f"unknown dimension family {family!r}")
    return DIM_FAMILIES[family][1](j, k, ell)


def dim_cross_checks(kmax: int = 6) -> list[tuple[str, bool]]:
    """Consistency of the Gamma_1 formula with the per-character ones."""
    out = []
    for k in range(2, kmax + 1):
        tot = sum(dim_formula("s1_det", 1, k, l) for l in range(3))
        out.append((f"S_1 on Gamma_1 = sum over characters at k={k}", tot == dim_formula("s1_gamma1", 1, k)))
        # M_{1,1+3k}(Gamma_1) is the cusp part plus the Eisenstein part of M_1^1
        eis = (k + 1) ** 2 - dim_formula("s1_det", 1, k, 1)
        out.append((f"Gamma_1 j=1 at k={k}", dim_formula("gamma1", 1, k) == dim_formula("s1_gamma1", 1, k) + eis))
        m2 = 2 * dim_formula("s2", 2, k) + dim_formula("m2_det2", 2, k)
        out.append((f"Gamma_1 j=2 at k={k}", dim_formula("gamma1", 2, k) == m2))
        out.append((f"Gamma_1 j=3 bounds det^0 part at k={k}",
                    dim_formula("gamma1", 3, k) >= dim_formula("m3", 3, k)))
    return out


# ---------------------------------------------------------------------------
# truncated ranks


def _coords(f: FJSeries, upto: int) -> list:
    out = []
    for n in range(upto + 1):
        out.extend(f[n].to_vector())
    return out


def _mod_coords(f: FJSeries, upto: int) -> list:
    return [linalg.to_mod(x) for x in _coords(f, upto)]


def _expand(c: Catalog, generators, degrees):
    """(generator index, monomial, product form) for every multiplier monomial."""
    if isinstance(degrees, int):
        degrees = [degrees] * len(generators)
    if len(degrees) != len(generators):
        raise ValueError("one multiplier degree per generator")
    rows = []
    for gi, (g, d) in enumerate(zip(generators, degrees)):
        for e in phi_monomials(d):
            rows.append((gi, e, monomial_times(c, g, e)))
    shapes = {(r[2].j, r[2].k, r[2].ell) for r in rows}
    if len(shapes) > 1:
        raise ShapeMismatch(f"products have different weights {sorted(shapes)}")
    return rows


def _safe_bound(generators, degrees) -> int:
    if isinstance(degrees, int):
        degrees = [degrees] * len(generators)
    orders = [g.last.first_nonzero() or 0 for g in generators]
    return 3 * max(degrees, default=0) + max(orders, default=0)


@dataclass
class RankResult:
    rank: int
    rows: int
    valid_to: int
    stable_from: int


def rank_of_span(c: Catalog, generators: Sequence[VectorFormFJ], multiplier_degree,
                 exact: bool = False, strict: bool = True) -> RankResult:
    """Rank of {phi-monomial * generator} from truncated last components.

    With strict=True the rank must already be reached two coefficients
    before the truncation, otherwise TruncationAmbiguous is raised.
    """
    rows = _expand(c, generators, multiplier_degree)
    if not rows:
        return RankResult(0, 0, c.W, 0)
    W = min(r[2].valid_to for r in rows)
    bound = _safe_bound(generators, multiplier_degree)
    if strict and W < bound:
        raise TruncationAmbiguous(f"valid_to {W} below the safe bound {bound}")
    if exact:
        full = [_coords(r[2].last, W) for r in rows]
        rk = linalg.rank
    else:
        full = [_mod_coords(r[2].last, W) for r in rows]
        rk = _rank_mod_rows
    offsets = [0]
    for n in range(W + 1):
        offsets.append(offsets[-1] + 3 * n if n else 1)

    def rank_at(top):
        return rk([row[: offsets[top + 1]] for row in full])

    r_full = rk(full)
    lo, hi = 0, W
    while lo < hi:
        mid = (lo + hi) // 2
        if rank_at(mid) == r_full:
            hi = mid
        else:
            lo = mid + 1
    if strict and lo > W - 2:
        raise TruncationAmbiguous(f"rank still growing at w^{lo} (valid to w^{W})")
    return RankResult(r_full, len(rows), W, lo)


def _rank_mod_rows(rows) -> int:
    """rank_mod for rows already reduced mod the prime."""
    q = linalg.MOD_PRIME
    mat = [list(r) for r in rows]
    if not mat:
        return 0
    rk = 0
    for col in range(len(mat[0])):
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


@dataclass
class Relation:
    """sum over (generator index, monomial) of coefficient * monomial * generator = 0."""

    terms: dict

    def pretty(self, names) -> str:
        out = []
        for (gi, e), v in sorted(self.terms.items()):
            mono = "*".join(f"phi{i}" + (f"^{x}" if x > 1 else "") for i, x in enumerate(e) if x) or "1"
            out.append(f"({v})*{mono}*{names[gi]}")
        return " + ".join(out) if out else "0"


def kernel_of_span(c: Catalog, generators: Sequence[VectorFormFJ], multiplier_degree) -> list[Relation]:
    """Exact basis of the relations among {phi-monomial * generator} at truncation."""
    res = rank_of_span(c, generators, multiplier_degree)  # raises when ambiguous
    rows = _expand(c, generators, multiplier_degree)
    mat = [_coords(r[2].last, res.valid_to) for r in rows]
    ker = linalg.left_kernel(mat)
    out = []
    for vec in ker:
        out.append(Relation({(rows[i][0], rows[i][1]): v for i, v in enumerate(vec) if v}))
    return out


def relation_in_kernel(kernel: list[Relation], rel: dict) -> bool:
    """Is the relation (same keying as Relation.terms) in the span of kernel?"""
    keys = sorted({k for r in kernel for k in r.terms} | set(rel))
    basis = [[r.terms.get(k, CR(0)) for k in keys] for r in kernel]
    target = [CR.coerce(rel.get(k, 0)) for k in keys]
    if not any(target):
        return True
    if not basis:
        return False
    return linalg.solve_left(basis, target) is not None


# ---------------------------------------------------------------------------
# presentations checked against the dimension formulas

@dataclass
class Presentation:
    family: str
    ell: Optional[int]
    generators: tuple
    degrees: Callable[[int], list]   # k -> multiplier degree per generator
    anchor: str


PRESENTATIONS: dict[str, Presentation] = {
    "sigma1_0": Presentation("s1_det", 0, ("big_phi0", "big_phi1", "big_phi2"),
                             lambda k: [k - 2] * 3, "Sigma_1^0 generated by Phi_i, one relation"),
    "sigma1_1": Presentation("s1_det", 1, ("gamma12", "gamma13", "gamma14", "gamma23", "gamma24", "gamma34"),
                             lambda k: [k - 2] * 6, "Sigma_1^1 generated by the gamma_ij"),
    "sigma1_2": Presentation("s1_det", 2, ("psi1", "psi2"), lambda k: [k - 2, k - 3],
                             "Sigma_1^2 free on Psi_1, Psi_2"),
    "sigma2_0": Presentation("s2", 0, ("d0", "d1", "d2"), lambda k: [k - 1] * 3,
                             "Sigma_2^0 free on D_0, D_1, D_2"),
    "sigma2_1": Presentation("s2", 1, ("d0p", "d1p", "d2p"), lambda k: [k - 1] * 3,
                             "Sigma_2^1 free on D'_0, D'_1, D'_2"),
    "m2_2": Presentation("m2_det2", 2, ("k2", "k5", "k8"), lambda k: [k, k - 1, k - 2],
                         "M_2^2 free on K_2, K_5, K_8"),
    "m3_0": Presentation("m3", 0, ("e33_0", "e33_1", "e33_2", "e33_3"), lambda k: [k] * 4,
                         "M_3^0 free on E_0, ..., E_3"),
}


@dataclass
class StructureReport:
    claim: str
    anchor: str
    W: int
    passed: bool
    detail: str

    def line(self) -> str:
        status = "verified at W" if self.passed else "FAIL"
        return f"{self.claim}|{self.anchor}|{self.W}|{status}|{self.detail}"


def check_presentation(c: Catalog, name: str, k: int) -> StructureReport:
    pres = PRESENTATIONS[name]
    claim = f"{name}_k{k}"
    j = 1 if pres.family == "s1_det" else (2 if pres.family in ("s2", "m2_det2") else 3)
    expected = dim_formula(pres.family, j, k, pres.ell)
    gens = [c.build(g) for g in pres.generators]
    degs = pres.degrees(k)
    keep = [(g, d) for g, d in zip(gens, degs) if d >= 0]
    if not keep:
        ok = expected == 0
        return StructureReport(claim, pres.anchor, c.W, ok, f"no generators in degree; formula {expected}")
    try:
        res = rank_of_span(c, [g for g, _ in keep], [d for _, d in keep], strict=False)
    except TruncationAmbiguous as exc:
        return StructureReport(claim, pres.anchor, c.W, False, f"truncation ambiguous: {exc}")
    ok = res.rank == expected
    det = f"rank {res.rank} of {res.rows} products, formula {expected}, stable from w^{res.stable_from}"
    if res.rank < expected:
        # a truncated rank is only a lower bound
        det += "; inconclusive below the formula, raise W"
    return StructureReport(claim, pres.anchor, c.W, ok, det)


# ---------------------------------------------------------------------------
# S3 action

# S4 irreducibles restricted to the cusp stabilizer S3, as (trivial, sign, standard)
S3_RESTRICTION = {
    "s[4]": (1, 0, 0),
    "s[3,1]": (1, 0, 1),
    "s[2,2]": (0, 0, 1),
    "s[2,1,1]": (0, 1, 1),
    "s[1,1,1,1]": (0, 1, 0),
}


def s3_twisted(j: int, k: int) -> bool:
    """Whether the FJ substitution action differs from the S4 action by the sign character."""
    return (j + k) % 2 == 1


def expected_s3(types: dict, j: int, k: int) -> tuple[int, int, int]:
    """S3 multiplicities predicted by S4 multiplicities {type: m} as seen on FJ data."""
    t = s = st = 0
    for name, m in types.items():
        a, b, cst = S3_RESTRICTION[name]
        t, s, st = t + m * a, s + m * b, st + m * cst
    return (s, t, st) if s3_twisted(j, k) else (t, s, st)


def _group(span):
    """Images of the span under e, R3, R3^2, R2, R2R3, R2R3^2 (substitution on last components)."""
    out = []
    for v in span:
        r3 = v.last.apply_r3()
        r33 = r3.apply_r3()
        out.append([v.last, r3, r33, v.last.apply_r2(), r3.apply_r2(), r33.apply_r2()])
    return out


def _action_matrices(span: Sequence[VectorFormFJ]):
    from .hecke import separating_top, solve_in_span
    top = separating_top(span)
    if top is None:
        raise ValueError("span members are linearly dependent; select a basis first")
    imgs = _group(span)
    mats = []
    for g in range(6):
        m = []
        for i, v in enumerate(span):
            sol = solve_in_span(span, imgs[i][g], top)
            if sol is None:
                raise NotClosed(f"S3 image {g} of {v.name} leaves the span")
            m.append(sol)
        mats.append(m)
    return mats


def _trace(m):
    return sum((m[i][i] for i in range(len(m))), CR(0))


def isotypic_decompose(span: Sequence[VectorFormFJ]) -> dict:
    """Multiplicities of the trivial, sign and standard characters of S3."""
    from .hecke import select_basis
    W = min(v.valid_to for v in span)
    span = [span[i] for i in select_basis(span, W)]
    mats = _action_matrices(span)
    tr = [_trace(m) for m in mats]
    e, r3, r2 = tr[0], tr[1], tr[3]
    triv = (e + r2 * 3 + r3 * 2) / 6
    sign = (e - r2 * 3 + r3 * 2) / 6
    std = (e * 2 - r3 * 2) / 6
    out = {}
    for key, v in (("trivial", triv), ("sign", sign), ("standard", std)):
        if not v.is_integral() or v.b != 0:
            raise NotClosed(f"non-integral character multiplicity {v}")
        out[key] = int(v.a)
    return out


def _combine(span, vec, name):
    out = None
    for v, x in zip(span, vec):
        if x:
            t = v.scale(x)
            out = t if out is None else out + t
    return out._with(name=name, presentation=None, firsts=None)


def isotypic_pieces(span: Sequence[VectorFormFJ]) -> dict:
    """T-stable pieces: trivial, sign, and the R2-fixed part of the standard isotypic component."""
    from .hecke import select_basis
    W = min(v.valid_to for v in span)
    span = [span[i] for i in select_basis(span, W)]
    mats = _action_matrices(span)
    n = len(span)
    sgn = (1, 1, 1, -1, -1, -1)
    chi_std = (2, -1, -1, 0, 0, 0)

    def proj(weights, scale):
        return [[sum((mats[g][i][j] * weights[g] for g in range(6)), CR(0)) * scale for j in range(n)]
                for i in range(n)]

    p_triv = proj((1,) * 6, Fraction(1, 6))
    p_sign = proj(sgn, Fraction(1, 6))
    p_std = proj(chi_std, Fraction(1, 3))
    half = [[(mats[0][i][j] + mats[3][i][j]) * Fraction(1, 2) for j in range(n)] for i in range(n)]
    p_std_plus = linalg.matmul(p_std, half)
    out = {}
    for key, P in (("trivial", p_triv), ("sign", p_sign), ("standard+", p_std_plus)):
        red, piv, _ = linalg.rref(P)
        vecs = red[: len(piv)]
        out[key] = [_combine(span, v, f"{key}[{i}]") for i, v in enumerate(vecs)]
    return out


# ---------------------------------------------------------------------------
# the registry of structure claims used by the CLI

def _presentation_checks():
    out = {}
    ks = {"sigma1_0": range(1, 5), "sigma1_1": range(1, 4), "sigma1_2": range(1, 4),
          "sigma2_0": range(1, 4), "sigma2_1": range(1, 4), "m2_2": range(0, 4), "m3_0": range(0, 4)}
    for name, kr in ks.items():
        for k in kr:
            out[f"{name}_k{k}"] = (lambda c, name=name, k=k: [check_presentation(c, name, k)])
    return out


def _kernel_phi(c):
    gens = [c.build(f"big_phi{i}") for i in range(3)]
    ker = kernel_of_span(c, gens, 1)
    rel = {(i, tuple(1 if t == i else 0 for t in range(3))): 1 for i in range(3)}
    ok = len(ker) == 1 and relation_in_kernel(ker, rel)
    return [StructureReport("kernel_phi", "sum phi_i Phi_i = 0 spans the degree-1 relations", c.W, ok,
                            f"kernel dimension {len(ker)}")]


def _kernel_psi(c):
    gens = [c.build("psi1"), c.build("psi2")]
    out = []
    for d in range(0, 3):
        ker = kernel_of_span(c, gens, [d + 1, d])
        out.append(StructureReport(f"kernel_psi_d{d}", "Psi_1, Psi_2 generate freely", c.W,
                                   len(ker) == 0, f"kernel dimension {len(ker)}"))
    return out


def _kernel_ghj(c):
    names = ("g0", "g1", "g2", "h1", "h2", "j0", "j1", "j2")
    gens = [c.build(n) for n in names]
    ker = kernel_of_span(c, gens, 1)
    r4 = {(i, tuple(1 if t == i else 0 for t in range(3))): 1 for i in range(3)}
    ok = relation_in_kernel(ker, r4)
    rank = len(gens) * 3 - len(ker)
    expected = dim_formula("s3", 3, 2)
    return [StructureReport("kernel_ghj", "R4 lies in the relations among G_i, H_i, J_i", c.W, ok,
                            f"kernel dimension {len(ker)}, contains R4: {ok}"),
            StructureReport("rank_ghj", "G, H, J orbit times M_3 fill S_{3,9}", c.W, rank == expected,
                            f"rank {rank}, formula {expected}")]


STRUCTURE_CHECKS: dict[str, Callable[[Catalog], list]] = {
    **_presentation_checks(),
    "kernel_phi": _kernel_phi,
    "kernel_psi": _kernel_psi,
    "kernel_ghj": _kernel_ghj,
}


def run_structure_check(c: Catalog, name: str) -> list[StructureReport]:
    if name not in STRUCTURE_CHECKS:
        raise KeyError(name)
    return STRUCTURE_CHECKS[name](c)
