from __future__ import annotations

import pytest

from picard import structure as S
from picard.catalog import Catalog, build_span


@pytest.fixture(scope="module")
def cat24(table):
    return Catalog(24, table)


@pytest.mark.parametrize("family, j, k, ell, value", [
    ("s1_gamma1", 1, 2, None, 9),
    ("s1_det", 1, 2, 0, 3),
    ("s1_det", 1, 3, 1, 12),
    ("s1_det", 1, 3, 2, 4),
    ("s2", 2, 2, 0, 9),
    ("m2_det2", 2, 1, 2, 4),
    ("m3", 3, 1, 0, 12),
    ("s3", 3, 1, 0, 8),
    ("m0", None, 2, None, 6),
])
def test_dimension_values(family, j, k, ell, value):
    assert S.dim_formula(family, j, k, ell) == value


def test_gamma1_formula_small_case():
    # j = 0 reduces to the scalar count 9(k-1)k/6 + 4
    assert S.dim_formula("gamma1", 0, 2) == 7


def test_out_of_range_and_unavailable():
    with pytest.raises(S.OutOfStatedRange):
        S.dim_formula("s1_gamma1", 1, 0)
    with pytest.raises(S.OutOfStatedRange):
        S.dim_formula("gamma1", 4, 2)
    with pytest.raises(S.FormulaUnavailable):
        S.dim_formula("per_character", 1, 2, 1)
    with pytest.raises(KeyError):
        S.dim_formula("nope", 1, 2)


def test_dimension_cross_checks():
    bad = [name for name, ok in S.dim_cross_checks(6) if not ok]
    assert not bad


def test_twist_rule():
    assert not S.s3_twisted(1, 7) and S.s3_twisted(1, 10) and S.s3_twisted(3, 6)
    assert S.expected_s3({"s[1,1,1,1]": 1}, 1, 10) == (1, 0, 0)


@pytest.mark.parametrize("names, types, jk", [
    ([f"big_phi{i}" for i in range(3)], {"s[2,1,1]": 1}, (1, 7)),
    ([f"gamma{i}" for i in (12, 13, 14, 23, 24, 34)], {"s[2,2]": 1, "s[2,1,1]": 1}, (1, 7)),
    (["psi1"], {"s[4]": 1}, (1, 7)),
    (["psi2"], {"s[1,1,1,1]": 1}, (1, 10)),
    ([f"e33_{i}" for i in range(4)], {"s[1,1,1,1]": 1, "s[2,1,1]": 1}, (3, 3)),
    (["k2"], {"s[4]": 1}, (2, 2)),
])
def test_isotypic_matches_s4_types(cat16, names, types, jk):
    got = S.isotypic_decompose([cat16.build(n) for n in names])
    assert (got["trivial"], got["sign"], got["standard"]) == S.expected_s3(types, *jk)


def test_isotypic_pieces_dimensions(cat16):
    pieces = S.isotypic_pieces(build_span(cat16, "s1_7_det"))
    assert {k: len(v) for k, v in pieces.items()} == {"trivial": 0, "sign": 1, "standard+": 2}


PRESENTATION_CHECKS = [n for n in S.STRUCTURE_CHECKS if n.rsplit("_k", 1)[0] in S.PRESENTATIONS]


@pytest.mark.parametrize("name", PRESENTATION_CHECKS)
def test_presentations(cat24, name):
    for rep in S.run_structure_check(cat24, name):
        assert rep.passed, rep.line()


def test_truncated_rank_is_a_lower_bound(cat16):
    rep = S.check_presentation(cat16, "m3_0", 3)
    assert not rep.passed and "inconclusive" in rep.detail


def test_strict_rank_flags_shallow_truncation(table):
    c = Catalog(8, table)
    gens = [c.build(f"e33_{i}") for i in range(4)]
    with pytest.raises(S.TruncationAmbiguous):
        S.rank_of_span(c, gens, 2)


@pytest.mark.parametrize("name", ["kernel_phi", "kernel_psi", "kernel_ghj"])
def test_kernel_checks(cat16, name):
    for rep in S.run_structure_check(cat16, name):
        assert rep.passed, rep.line()


def test_phi_relation_is_the_kernel(cat16):
    gens = [cat16.build(f"big_phi{i}") for i in range(3)]
    ker = S.kernel_of_span(cat16, gens, 1)
    assert len(ker) == 1
    rel = {(i, tuple(int(t == i) for t in range(3))): 1 for i in range(3)}
    assert S.relation_in_kernel(ker, rel)
    assert not S.relation_in_kernel(ker, {(0, (1, 0, 0)): 1})
