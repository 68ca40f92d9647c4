from __future__ import annotations

import itertools
import math

import pytest

from picard.eisenstein import (
    CyclotomicRational,
    EisensteinInteger,
    NotSplit,
    enumerate_norm,
    factor,
    norm,
    parse_qr,
    split_prime,
    units,
)

E = EisensteinInteger


def _brute_norm(n: int) -> set:
    r = math.isqrt(4 * n) + 2
    return {E(a, b) for a in range(-r, r + 1) for b in range(-r, r + 1) if a * a - a * b + b * b == n}


def test_norm_examples():
    assert norm(E(1, 3)) == 7
    assert norm(E(0, 0)) == 0
    assert norm(E(-2, 3)) == 19


def test_sqrt_minus_three():
    s = E(1, 2)
    assert s * s == E(-3, 0)


def test_conjugate_and_norm():
    for a, b in itertools.product(range(-4, 5), repeat=2):
        x = E(a, b)
        assert x * x.conjugate() == E(norm(x), 0)
        assert x.conjugate() == E(a - b, -b)


def test_units():
    us = units()
    assert len(us) == 6
    prod = E(1, 0)
    for u in us:
        assert norm(u) == 1
        prod = prod * u
        for v in us:
            assert u * v in us
    assert prod == E(1, 0)
    assert (-(E(0, 1) ** 2)) ** 6 == E(1, 0)


def test_norm_multiplicative():
    vals = [E(a, b) for a, b in itertools.product(range(-3, 4), repeat=2)]
    for x, y in itertools.product(vals[::3], vals[::4]):
        assert norm(x * y) == norm(x) * norm(y)
        assert (x + x.conjugate()).b == 0


@pytest.mark.parametrize("p, nu", [(7, E(1, 3)), (13, E(1, -3)), (31, E(1, 6)), (19, E(-2, 3))])
def test_split_prime(p, nu):
    got = split_prime(p)
    assert got == nu
    assert got * got.conjugate() == E(p, 0)
    assert (got - E(1, 0)).a % 3 == 0 and (got - E(1, 0)).b % 3 == 0


def test_split_prime_rejects_inert():
    with pytest.raises(NotSplit):
        split_prime(5)


def test_factor_examples():
    u, primes = factor(E(3, 0))
    assert [(p, e) for p, e in primes] == [(E(1, 2), 2)]
    assert u * E(1, 2) ** 2 == E(3, 0)
    u, primes = factor(E(7, 0))
    assert sorted(norm(p) for p, _ in primes) == [7, 7]
    u, primes = factor(E(0, 1))
    assert primes == [] and u == E(0, 1)


def test_factor_round_trip():
    for a, b in itertools.product(range(-40, 41, 3), range(-40, 41, 7)):
        x = E(a, b)
        if not x or norm(x) > 10 ** 4:
            continue
        u, primes = factor(x)
        y = u
        for p, e in primes:
            y = y * p ** e
        assert y == x


@pytest.mark.parametrize("n, size", [(1, 6), (2, 0), (7, 12), (0, 1)])
def test_enumerate_norm(n, size):
    got = enumerate_norm(n)
    assert len(got) == size == len(set(got))
    assert set(got) == _brute_norm(n)


def test_enumerate_norm_multiple_of_six():
    for n in range(1, 60):
        assert len(enumerate_norm(n)) % 6 == 0


def test_cyclotomic_field_axioms():
    xs = [CyclotomicRational(a, b) for a in (-2, 1, 3) for b in (0, 1, -5)]
    for x, y in itertools.product(xs, repeat=2):
        assert x * y == y * x
        if y:
            assert (x / y) * y == x
    rho = CyclotomicRational(0, 1)
    assert rho ** 3 == 1 and 1 + rho + rho * rho == 0


def test_text_round_trip():
    for s in ("3+27*r", "-r", "1/3-2/9*r", "0", "759+261*r"):
        assert str(parse_qr(s)) == s
