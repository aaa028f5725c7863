"""
Тесты внешнего дифференциала и коммутаторов
"""
import pytest

from calculus import (BIDEGREE_SHIFTS, adjoint_op, commutator_dL, d_component, d_part, exterior_d,
                      graded_commutator, lambda_d_commutator, star_conjugated_d, torsion_taubar)
from errors import JetOrderError
from exterior import Form, bigrade_project, hodge_star, lefschetz_L, wedge
from identities import random_pure_germ
from jets import Jet


def test_d_of_coordinate_times_one_form():
    form = Form.from_components(2, {(1,): Jet.coordinate(0, 2, 1)}, order=1)
    assert exterior_d(form).components(1e-14) == {(0, 1): 1}


def test_d_lowers_jet_order(rng):
    a = Form.random(rng, 4, 1, 2)
    assert exterior_d(a).order == 1
    with pytest.raises(JetOrderError):
        exterior_d(Form.random(rng, 4, 1, 0))


@pytest.mark.parametrize("degree", [0, 1, 2, 3])
def test_d_squared_vanishes(rng, degree):
    a = Form.random(rng, 4, degree, 2)
    assert exterior_d(exterior_d(a)).max_abs() < 1e-12


def test_leibniz_rule(rng):
    a = Form.random(rng, 4, 2, 1)
    b = Form.random(rng, 4, 1, 1)
    lhs = exterior_d(wedge(a, b))
    rhs = wedge(exterior_d(a), b) + wedge(a, exterior_d(b))
    assert (lhs - rhs).max_abs() < 1e-12


def test_components_sum_to_d(random2, rng):
    a = Form.random(rng, 4, 2, 1)
    total = Form.zero(4)
    for which in BIDEGREE_SHIFTS:
        total = total + d_part(a, which, random2)
    assert (total - exterior_d(a)).max_abs() < 1e-10


def test_component_shifts_bidegree(random2, rng):
    a = random_pure_germ(rng, random2, 1, 1)
    delbar = d_component(a, 'delbar', random2)
    assert (delbar - bigrade_project(delbar, 1, 2, random2)).max_abs() < 1e-10


def test_mu_vanishes_for_integrable_structure(hermitian2, rng):
    a = random_pure_germ(rng, hermitian2, 0, 1)
    assert d_component(a, 'mu', hermitian2).max_abs() < 1e-10
    assert d_component(a, 'mubar', hermitian2).max_abs() < 1e-10


def test_d_commutes_with_lefschetz_up_to_d_omega(hermitian2, rng):
    a = Form.random(rng, 4, 1, 1)
    lhs = exterior_d(lefschetz_L(a, hermitian2)) - lefschetz_L(exterior_d(a), hermitian2)
    assert (lhs - commutator_dL(a, hermitian2)).max_abs() < 1e-10
    assert commutator_dL(a, hermitian2).max_abs() > 1e-3


def test_graded_commutator_sign():
    def double(a):
        return a * 2.0

    def negate(a):
        return -a

    form = Form.basis(2, [0])
    # нечётные степени: антикоммутатор
    assert (graded_commutator(double, negate, 1, 1)(form) + form * 4.0).max_abs() == 0
    assert graded_commutator(double, negate, 2, 1)(form).max_abs() == 0


def test_weil_identity_on_flat_space(flat2, rng):
    a = Form.random(rng, 4, 2, 1)
    assert (lambda_d_commutator(a, flat2) - star_conjugated_d(a, flat2)).max_abs() < 1e-10


def test_adjoint_of_d_on_functions_vanishes(random2, rng):
    a = Form.random(rng, 4, 0, 1)
    assert adjoint_op('d', a, random2).max_abs() < 1e-12


def test_flat_codifferential_of_coordinate_one_form(flat2):
    a = Form.from_components(4, {(0,): Jet.coordinate(0, 4, 1)}, order=1)
    components = adjoint_op('d', a, flat2).components(1e-12)
    assert list(components) == [()]
    assert components[()] == pytest.approx(-1.0)


@pytest.mark.parametrize("degree", [0, 1, 2, 3])
def test_codifferential_of_star(random2, rng, degree):
    a = Form.random(rng, 4, degree, 1)
    lhs = adjoint_op('d', hodge_star(a, random2), random2)
    rhs = hodge_star(exterior_d(a), random2) * (-1) ** (degree + 1)
    assert (lhs - rhs).max_abs() < 1e-12


def test_torsion_nonzero_on_hermitian_nonkahler(hermitian2, rng):
    a = random_pure_germ(rng, hermitian2, 1, 1)
    assert torsion_taubar(a, hermitian2).max_abs() > 1e-3


def test_torsion_vanishes_on_flat_space(flat2, rng):
    a = random_pure_germ(rng, flat2, 1, 1)
    assert torsion_taubar(a, flat2).max_abs() < 1e-12
