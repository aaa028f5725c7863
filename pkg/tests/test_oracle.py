"""
Сверка структурированных операторов с плотным оракулом
"""
import pytest

from geometry import make_rng, preset
from identities import random_primitive_germ
from oracle import dense_oracle


@pytest.mark.parametrize("name", ['flat1', 'random2', 'almost_kahler2', 'hermitian2'])
def test_operators_match_oracle(request, name):
    s = request.getfixturevalue(name)
    for record in dense_oracle(s).compare():
        assert record.passed, record


def test_oracle_on_second_order_jets():
    s = preset('generic', 2, order=2)
    for record in dense_oracle(s).compare():
        assert record.passed, record


def test_theorem_lhs_matches_oracle(random2):
    oracle = dense_oracle(random2)
    rng = make_rng(31, 0)
    for k, j in [(0, 1), (1, 0), (1, 1), (2, 0)]:
        record = oracle.compare_theorem_lhs(random_primitive_germ(rng, random2, k), j)
        assert record.passed, record


def test_oracle_detects_wrong_operator(random2):
    oracle = dense_oracle(random2)
    oracle.star = oracle.star * -1.0
    records = {record.identity_id: record for record in oracle.compare()}
    assert not records['oracle_star'].passed
    assert records['oracle_lambda'].passed
