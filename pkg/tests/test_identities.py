"""
Тесты тождеств: основное тождество, выкладки доказательства, формы типа (0, q)
"""
from fractions import Fraction

import pytest

from errors import BidegreeError, CoefficientRangeError, NotPrimitiveError
from exterior import Form, form_norm, lefschetz_lambda
from geometry import make_rng, preset
from identities import (
    check_d_lefschetz_power, check_hodge_pairing, check_I_conjugation_component, check_lambda_delbar_adjoint,
    check_lefschetz_commutator, check_lefschetz_decomposition, check_primitive_annihilation, check_star_dL,
    check_star_lefschetz_primitive, check_taubar_closed_form, check_vanishing_terms, compare_scalars, f_coeff,
    random_primitive_germ, random_pure_germ, theorem_record, theorem_sides, uncorrected_mu_residual,
    verify_mu_identity, verify_proof_displays, verify_prop_0q, verify_prop_0q_expansions, verify_theorem,
)

STRUCTURES = ['flat2', 'hermitian2', 'almost_kahler2', 'random2']


def test_f_coeff_value():
    assert f_coeff(3, 1, 0, 2) == Fraction(20)


@pytest.mark.parametrize("n,k,j", [(2, 0, 1), (3, 1, 2), (4, 2, 1), (3, 0, 3)])
def test_f_coeff_vanishes_for_low_r(n, k, j):
    assert f_coeff(n, k, j, 0) == 0
    assert f_coeff(n, k, j, 1) == 0


@pytest.mark.parametrize("args", [(2, 1, 2, 2), (2, 0, 0, 0), (-1, 0, 0, 1)])
def test_f_coeff_out_of_range(args):
    with pytest.raises(CoefficientRangeError):
        f_coeff(*args)


def test_residual_record_thresholds(flat2):
    record = compare_scalars('sample', 1.0, 1.0 + 1e-9, flat2, tol_rel=1e-8, tol_abs=1e-12)
    assert record.passed
    assert record.residual_rel == pytest.approx(1e-9, rel=1e-3)
    record = compare_scalars('sample', 0.0, 1e-11, flat2, tol_rel=1e-8, tol_abs=1e-10)
    assert record.passed
    record = compare_scalars('sample', 1.0, 1.1, flat2, tol_rel=1e-8, tol_abs=1e-10)
    assert not record.passed


@pytest.mark.parametrize("name", STRUCTURES)
@pytest.mark.parametrize("k,j", [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (2, 0)])
def test_theorem_holds(request, name, k, j):
    s = request.getfixturevalue(name)
    alpha = random_primitive_germ(make_rng(100 + k, j), s, k)
    record = verify_theorem(alpha, j, s)
    assert record.passed, record


def test_theorem_on_generic_three_fold():
    s = preset('generic', 3)
    rng = make_rng(7, 0)
    for k, j in [(1, 1), (2, 1), (3, 0)]:
        record = verify_theorem(random_primitive_germ(rng, s, k), j, s)
        assert record.passed, record


def test_injected_bug_is_detected(random2):
    alpha = random_primitive_germ(make_rng(1, 1), random2, 1)
    assert verify_theorem(alpha, 0, random2).passed
    assert not verify_theorem(alpha, 0, random2, inject_bug=True).passed


def test_theorem_record_norms(random2):
    alpha = random_primitive_germ(make_rng(4, 2), random2, 1)
    sides = theorem_sides(alpha, 1, random2)
    record = theorem_record(sides, 1, random2)
    assert record.lhs_norm == pytest.approx(form_norm(sides.bracket.value(), random2))
    assert record.rhs_norm == pytest.approx(form_norm((sides.star_term + sides.rhs).value(), random2))
    assert record.residual_abs == pytest.approx(form_norm((sides.lhs - sides.rhs).value(), random2), abs=1e-14)


@pytest.mark.parametrize("name", ['flat2', 'almost_kahler2'])
@pytest.mark.parametrize("k,j", [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (2, 0)])
def test_extra_terms_vanish_where_omega_is_closed(request, name, k, j):
    s = request.getfixturevalue(name)
    sides = theorem_sides(random_primitive_germ(make_rng(200 + k, j), s, k), j, s)
    records = check_vanishing_terms(sides, j, s, tol_abs=1e-12)
    assert {record.identity_id for record in records} == {
        'theorem_term_dstar_lambda', 'theorem_term_lambda_dL', 'theorem_term_dL', 'theorem_term_f_sum',
        'theorem_term_dL_eta',
    }
    assert all(record.passed for record in records), records


def test_extra_terms_on_flat_three_fold():
    s = preset('flat_kahler', 3)
    rng = make_rng(9, 0)
    for k, j in [(0, 3), (1, 2), (2, 1), (3, 0)]:
        sides = theorem_sides(random_primitive_germ(rng, s, k), j, s)
        for record in check_vanishing_terms(sides, j, s, tol_abs=1e-12):
            assert record.residual_abs < 1e-12, record


def test_d_omega_term_survives_on_random_structure(random2):
    sides = theorem_sides(random_primitive_germ(make_rng(5, 0), random2, 1), 0, random2)
    records = {record.identity_id: record for record in check_vanishing_terms(sides, 0, random2)}
    assert not records['theorem_term_dL_eta'].passed


def test_lefschetz_decomposition_check_on_mixed_bidegree(flat2, rng):
    mixed = Form.random(rng, 4, 1, 1)
    records = check_lefschetz_decomposition(mixed, 1, flat2)
    assert all(record.passed for record in records)
    assert 'lefschetz_component_bidegree' not in {record.identity_id for record in records}

    pure = random_pure_germ(rng, flat2, 1, 1)
    records = check_lefschetz_decomposition(pure, 2, flat2)
    assert all(record.passed for record in records)
    assert 'lefschetz_component_bidegree' in {record.identity_id for record in records}


def test_theorem_requires_primitive_input(random2, rng):
    alpha = Form.random(rng, 4, 2, 1)
    with pytest.raises(NotPrimitiveError):
        theorem_sides(alpha, 0, random2)


def test_theorem_rejects_large_j(random2):
    alpha = random_primitive_germ(make_rng(2, 0), random2, 1)
    with pytest.raises(CoefficientRangeError):
        theorem_sides(alpha, 2, random2)


def test_zero_germ_needs_degree(random2):
    sides = theorem_sides(Form.zero(4, 1), 0, random2, degree=1)
    assert sides.lhs.max_abs() == 0
    with pytest.raises(ValueError):
        theorem_sides(Form.zero(4, 1), 0, random2)


def test_random_primitive_germ_is_primitive(random2, rng):
    alpha = random_primitive_germ(rng, random2, 2)
    assert lefschetz_lambda(alpha, random2).max_abs() < 1e-10
    with pytest.raises(NotPrimitiveError):
        random_primitive_germ(rng, random2, 3)


@pytest.mark.parametrize("name", ['almost_kahler2', 'random2'])
def test_proof_displays(request, name):
    s = request.getfixturevalue(name)
    rng = make_rng(3, 0)
    for k, j in [(0, 1), (1, 0), (1, 1), (2, 0)]:
        for record in verify_proof_displays(random_primitive_germ(rng, s, k), j, s):
            assert record.passed, record


@pytest.mark.parametrize("name", STRUCTURES)
@pytest.mark.parametrize("q", [1, 2])
def test_prop_0q(request, name, q):
    s = request.getfixturevalue(name)
    alpha = random_pure_germ(make_rng(5, q), s, 0, q)
    assert verify_prop_0q(alpha, s).passed
    for record in verify_prop_0q_expansions(alpha, s):
        assert record.passed, record


def test_prop_0q_rejects_other_types(random2, rng):
    with pytest.raises(BidegreeError):
        verify_prop_0q(random_pure_germ(rng, random2, 1, 1), random2)


@pytest.mark.parametrize("name", STRUCTURES)
def test_mu_identity(request, name):
    s = request.getfixturevalue(name)
    alpha = random_pure_germ(make_rng(9, 0), s, 0, 2)
    assert verify_mu_identity(alpha, s).passed


def test_uncorrected_mu_identity_holds_when_almost_kahler(almost_kahler2):
    alpha = random_pure_germ(make_rng(9, 1), almost_kahler2, 0, 2)
    assert uncorrected_mu_residual(alpha, almost_kahler2).passed


def test_uncorrected_mu_identity_fails_on_generic_three_fold():
    s = preset('generic', 3)
    rng = make_rng(9, 2)
    residuals = [uncorrected_mu_residual(random_pure_germ(rng, s, 0, 2), s).residual_abs for _ in range(3)]
    assert max(residuals) >= 1e-3


@pytest.mark.parametrize("name", STRUCTURES)
def test_lemma_checks(request, name):
    s = request.getfixturevalue(name)
    rng = make_rng(21, 0)
    for k in range(5):
        a = Form.random(rng, 4, k, 1)
        b = Form.random(rng, 4, k, 1)
        assert check_hodge_pairing(a, b, k, s).passed
        assert check_star_dL(a, k, s).passed
        for j in range(3):
            assert check_lefschetz_commutator(a, k, j, s).passed
            assert check_d_lefschetz_power(a, k, j, s).passed
        if k + 3 <= 4:
            target = Form.random(rng, 4, k + 3, 1)
            assert check_lambda_delbar_adjoint(a, target, k, s).passed


@pytest.mark.parametrize("name", STRUCTURES)
def test_primitive_lemma_checks(request, name):
    s = request.getfixturevalue(name)
    rng = make_rng(22, 0)
    for k in range(3):
        alpha = random_primitive_germ(rng, s, k)
        assert check_primitive_annihilation(alpha, k, s).passed
        for j in range(3 - k):
            assert check_star_lefschetz_primitive(alpha, k, j, s).passed


@pytest.mark.parametrize("p,q", [(0, 1), (1, 0), (1, 1), (0, 2), (2, 1)])
def test_bidegree_lemma_checks(random2, p, q):
    a = random_pure_germ(make_rng(23, 3 * p + q), random2, p, q)
    assert check_taubar_closed_form(a, random2).passed
    for which in ('mubar', 'delbar', 'del', 'mu'):
        assert check_I_conjugation_component(a, which, random2).passed
