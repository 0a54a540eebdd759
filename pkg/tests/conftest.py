from functools import lru_cache

import pytest

from quditqkd.fields import make_field
from quditqkd.toperator import build_T, choose_M, equiv_classes, find_char_poly

PRIME_POWERS = [(2, 1), (3, 1), (2, 2), (5, 1), (7, 1), (2, 3), (3, 2), (2, 4)]


@lru_cache(maxsize=None)
def cached_params(p, n):
    gf = make_field(p, n)
    return gf, choose_M(gf, find_char_poly(gf))


@lru_cache(maxsize=None)
def cached_top(p, n):
    gf, params = cached_params(p, n)
    return build_T(gf, params)


@lru_cache(maxsize=None)
def cached_partition(p, n):
    gf, params = cached_params(p, n)
    return equiv_classes(gf, params)


@pytest.fixture(scope="session")
def all_prime_powers():
    return PRIME_POWERS
