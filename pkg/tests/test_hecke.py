from __future__ import annotations

import pytest

from picard import structure
from picard.catalog import build_span
from picard.eisenstein import CyclotomicRational, EisensteinInteger
from picard.fj import FJSeries
from picard.hecke import (
    HeckeOperator,
    NotAnEigenform,
    apply_last,
    apply_scalar,
    commute,
    eigenvalue,
    eisenstein_eigenvalue,
    eta_product,
    hecke_matrix,
    lift_eigenvalue,
)

E = EisensteinInteger
CR = CyclotomicRational
NU7 = HeckeOperator.T("1+3r")
NU13 = HeckeOperator.T("1-3r")
TM2 = HeckeOperator.Tm(2)
TM5 = HeckeOperator.Tm(5)


def _pentagonal(N: int) -> list[int]:
    """prod (1 - q^n) to order N by Euler's pentagonal number theorem."""
    out = [0] * (N + 1)
    k = 0
    while True:
        hit = False
        for m in ((k * (3 * k - 1)) // 2, (k * (3 * k + 1)) // 2):
            if m <= N:
                out[m] = (-1) ** k
                hit = True
        if not hit:
            break
        k += 1
    return out


def _mul(a, b, N):
    return [sum(a[i] * b[n - i] for i in range(n + 1)) for n in range(N + 1)]


def test_eta_product_against_pentagonal_oracle():
    N = 30
    e1 = _pentagonal(N)
    e3 = [e1[n // 3] if n % 3 == 0 else 0 for n in range(N + 1)]
    base = _mul(e1, e3, N)
    prod = [1] + [0] * N
    for _ in range(6):
        prod = _mul(prod, base, N)
    expected = [0] + prod[:N]
    assert eta_product(N) == expected
    assert expected[1] == 1 and expected[7] == -40


def test_operator_validation():
    for bad in (lambda: HeckeOperator.T("2+r"), lambda: HeckeOperator.T("3"),
                lambda: HeckeOperator.Tm(7), lambda: HeckeOperator.Tm(4)):
        with pytest.raises(ValueError):
            bad()
    assert NU7.p == 7 and TM2.p == 2 and TM2.step == 4
    assert NU7.certified_to(32) == 4 and TM2.certified_to(32) == 8


@pytest.mark.parametrize("T", [NU7, NU13])
def test_weight_three_split(cat32, table, T):
    nu = CR.coerce(T.alpha)
    expected = (T.p + 1) * nu + nu.conjugate() ** 2
    for name in ("phi0", "phi1", "phi2"):
        assert eigenvalue(cat32.series(name), T, table, n_checks=2, k=3).eigenvalue == expected


def test_weight_three_split_value(cat32, table):
    assert eigenvalue(cat32.series("phi0"), NU7, table, k=3).eigenvalue == CR(3, 27)


@pytest.mark.parametrize("T", [TM2, TM5])
def test_weight_three_inert(cat32, table, T):
    lam = eigenvalue(cat32.series("phi0"), T, table, n_checks=1, k=3).eigenvalue
    assert lam == -1 - T.p ** 3


def test_sum_of_phis(cat32, table):
    s = cat32.series("phi0") + cat32.series("phi1") + cat32.series("phi2")
    rep = eigenvalue(s, NU7, table, n_checks=3, k=3)
    assert rep.coefficients_checked[:3] == [0, 1, 2]
    assert rep.eigenvalue == CR(3, 27)


def test_zero_series(table):
    assert apply_scalar(NU7, FJSeries.zero(16), 3, table).is_zero()


def test_apply_last_scalar_agreement(cat32, table):
    phi = cat32.build("phi1")
    assert apply_last(NU7, phi, table) == apply_scalar(NU7, phi.last, 3, table)
    assert apply_last(TM2, phi, table) == apply_scalar(TM2, phi.last, 3, table)


@pytest.mark.parametrize("name, T, value", [
    ("big_phi0", NU7, CR(759, 261)),
    ("big_phi0", TM2, CR(72)),
    ("psi2", TM2, CR(-684)),
    ("d0", NU7, CR(-105, -297)),
    ("d0", TM5, CR(-810)),
])
def test_tabulated_single_forms(cat32, table, name, T, value):
    rep = eigenvalue(cat32.build(name), T, table, n_checks=1)
    assert rep.eigenvalue == value
    assert rep.line().split("|")[3] == str(value)


def test_not_an_eigenform(cat32, table):
    v = cat32.build("big_phi0")
    mixed = v.times(cat32.series("phi0"), 3, 0, name="phi0*big_phi0")
    with pytest.raises(NotAnEigenform):
        eigenvalue(mixed, NU7, table)


def test_eisenstein_closed_forms():
    nu = CR(1, 3)
    assert eisenstein_eigenvalue(3, 3, NU7) == 8 * nu ** 4 + nu.conjugate() ** 5
    assert eisenstein_eigenvalue(3, 3, NU7) == CR(291, 225)
    assert eisenstein_eigenvalue(3, 3, TM2) == 72
    assert eisenstein_eigenvalue(0, 3, TM2) == -9
    lam = eisenstein_eigenvalue(1, 1, NU7)
    assert not lam.is_integral()


def test_eisenstein_pipeline(cat32, table):
    for i in range(4):
        v = cat32.build(f"e33_{i}")
        for T in (NU7, TM2):
            assert eigenvalue(v, T, table, n_checks=1).eigenvalue == eisenstein_eigenvalue(3, 3, T)


def test_lift_helper():
    assert lift_eigenvalue("kudla", 0, 1, 4, E(1, 3)) == CR(-2, -3) ** 7
    assert lift_eigenvalue("rogawski", 5, 1, 4, E(1, 3)) == 5 + CR(1, 3) ** 2 * CR(-2, -3) ** 5


def test_psi1_rogawski_shape(cat32, table):
    lam = eigenvalue(cat32.build("psi1"), NU7, table).eigenvalue
    a = lam - lift_eigenvalue("rogawski", 0, 1, 4, NU7.alpha)
    assert a.b == 0 and a.a.denominator == 1


def _lift_piece(cat32):
    pieces = structure.isotypic_pieces(build_span(cat32, "s1_7_det"))
    return pieces["sign"][0]


@pytest.mark.parametrize("T", [NU7, NU13])
def test_kudla_lift_s1_7_det(cat32, table, T):
    a_p = eta_product(20)[T.p]
    lam = eigenvalue(_lift_piece(cat32), T, table, n_checks=1).eigenvalue
    assert lam == lift_eigenvalue("kudla", a_p, 1, 4, T.alpha)


def test_one_element_span(cat32, table):
    M = hecke_matrix([cat32.build("big_phi0")], NU7, table)
    assert M.matrix == [[CR(759, 261)]]


def test_commutativity(cat32, table):
    forms = structure.isotypic_pieces(build_span(cat32, "s1_10"))["standard+"]
    basis = list(range(len(forms)))
    a = hecke_matrix(forms, NU7, table, basis=basis)
    b = hecke_matrix(forms, TM2, table, basis=basis)
    assert commute(a, b)
