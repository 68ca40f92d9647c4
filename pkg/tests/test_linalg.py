import random

from picard.eisenstein import CyclotomicRational as CR, EisensteinInteger as E
from picard.linalg import (
    MOD_PRIME, ModEchelon, charpoly, integral_roots, left_kernel, nullity,
    rank, rank_mod, rank_mod_reduced, rref, solve_left, to_mod,
)


def _poly_from_roots(roots):
    out = [CR(1)]
    for r in roots:
        r = CR.coerce(r)
        nxt = [CR(0)] * (len(out) + 1)
        for i, c in enumerate(out):
            nxt[i + 1] = nxt[i + 1] + c
            nxt[i] = nxt[i] - r * c
        out = nxt
    return out


def test_to_mod_is_a_ring_map():
    rho = to_mod(CR(0, 1))
    assert rho != 1 and pow(rho, 3, MOD_PRIME) == 1
    x, y = CR(3, -7) / 5, CR(-2, 11) / 9
    assert to_mod(x * y) == to_mod(x) * to_mod(y) % MOD_PRIME
    assert to_mod(x + y) == (to_mod(x) + to_mod(y)) % MOD_PRIME


def test_rref_and_kernel():
    rows = [[CR(1), CR(0, 1), CR(2)],
            [CR(2), CR(0, 2), CR(4)],
            [CR(0), CR(1), CR(1, 1)]]
    red, piv, comb = rref(rows)
    assert piv == [0, 1] and rank(rows) == 2
    ker = left_kernel(rows)
    assert len(ker) == 1
    combo = [sum((ker[0][i] * rows[i][j] for i in range(3)), CR(0)) for j in range(3)]
    assert all(not c for c in combo)


def test_modular_rank_agrees_and_bounds():
    rng = random.Random(7)
    for _ in range(10):
        base = [[CR(rng.randint(-5, 5), rng.randint(-5, 5)) for _ in range(6)] for _ in range(3)]
        extra = [[base[0][j] * CR(2, 1) - base[2][j] / 3 for j in range(6)]]
        rows = base + extra
        exact = rank(rows)
        assert rank_mod(rows) <= exact
        assert rank_mod(rows) == exact == 3
        assert rank_mod_reduced([[to_mod(x) for x in r] for r in rows]) == exact


def test_mod_echelon_incremental():
    ech = ModEchelon()
    assert ech.add([1, 2, 3])
    assert ech.add([0, 1, 5])
    assert not ech.add([2, 5, 11])
    assert ech.rank == 2
    assert not any(ech.reduce([3, 7, 14]))


def test_solve_left():
    basis = [[CR(1), CR(0), CR(0, 1)], [CR(0), CR(1), CR(1)]]
    c = [CR(2, -1), CR(1, 3) / 7]
    target = [c[0] * basis[0][j] + c[1] * basis[1][j] for j in range(3)]
    assert solve_left(basis, target) == c
    assert solve_left(basis, [CR(0), CR(0), CR(1)]) is None


def test_charpoly_of_companion():
    roots = [CR(2, 1), CR(-3), CR(0, 5)]
    p = _poly_from_roots(roots)
    n = len(roots)
    # companion matrix of p
    M = [[CR(0)] * n for _ in range(n)]
    for i in range(1, n):
        M[i][i - 1] = CR(1)
    for i in range(n):
        M[i][n - 1] = -p[i]
    assert charpoly(M) == p
    assert nullity(M, roots[0]) == 1


def test_integral_roots_with_multiplicity():
    roots = [36] * 3 + [1008] * 2 + [E(2, 1)]
    found, rest = integral_roots(_poly_from_roots(roots))
    assert rest == 0
    assert found == [(E(36, 0), 3), (E(1008, 0), 2), (E(2, 1), 1)]


def test_integral_roots_reports_leftover():
    # (x - (5 - 4 rho)) (x^2 - 10): one Eisenstein root, a quadratic left over
    lin = _poly_from_roots([E(5, -4)])
    quad = [CR(-10), CR(0), CR(1)]
    prod = [sum((lin[i] * quad[k - i] for i in range(len(lin)) if 0 <= k - i < 3), CR(0))
            for k in range(4)]
    found, rest = integral_roots(prod)
    assert found == [(E(5, -4), 1)] and rest == 2
