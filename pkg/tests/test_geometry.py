"""
Тесты почти эрмитовых структур
"""
import numpy as np
import pytest

from calculus import d_component
from errors import StructureError, UnknownPresetError
from geometry import (PRESETS, AlmostHermitianStructure, make_rng, nijenhuis, preset, random_structure,
                      standard_complex_structure)
from identities import random_pure_germ
from jets import Jet


def test_standard_complex_structure_squares_to_minus_identity():
    J0 = standard_complex_structure(3)
    assert np.allclose(J0 @ J0, -np.eye(6))
    assert J0[1, 0] == 1.0


def test_make_rng_is_deterministic_per_stream():
    first = make_rng(5, 1).standard_normal(4)
    assert np.allclose(first, make_rng(5, 1).standard_normal(4))
    assert not np.allclose(first, make_rng(5, 2).standard_normal(4))


def test_rejects_non_complex_structure():
    with pytest.raises(StructureError):
        AlmostHermitianStructure(n=1, J=Jet.identity(2, 2, 1), g=Jet.identity(2, 2, 1))


def test_rejects_incompatible_metric():
    J = Jet.constant(standard_complex_structure(1), 2, 1)
    g = Jet.constant(np.diag([1.0, 2.0]), 2, 1)
    with pytest.raises(StructureError):
        AlmostHermitianStructure(n=1, J=J, g=g)


def test_unknown_preset():
    with pytest.raises(UnknownPresetError):
        preset('round_sphere', 2)


def test_almost_kahler_needs_two_complex_dimensions():
    with pytest.raises(StructureError):
        preset('almost_kahler_nonintegrable', 1)


def test_flat_kahler_invariants(flat2):
    assert flat2.d_omega_norm == 0
    assert flat2.nijenhuis_norm == 0


def test_hermitian_nonkahler_invariants(hermitian2):
    assert hermitian2.d_omega_norm > 1e-3
    assert hermitian2.nijenhuis_norm < 1e-12


def test_almost_kahler_invariants(almost_kahler2):
    assert almost_kahler2.d_omega_norm < 1e-10
    assert almost_kahler2.nijenhuis_norm > 1e-3


def test_generic_preset_is_reproducible():
    first = preset('generic', 2)
    second = preset('generic', 2)
    assert first.descr == 'generic'
    assert first.J.allclose(second.J, atol=0.0)
    assert first.d_omega_norm > 1e-3
    assert first.nijenhuis_norm > 1e-3


@pytest.mark.parametrize("n", [1, 2, 3])
def test_random_structure_is_valid(n):
    s = random_structure(11, n)
    dim = 2 * n
    assert np.allclose(s.J.value @ s.J.value, -np.eye(dim))
    assert np.allclose(s.J.value.T @ s.g.value @ s.J.value, s.g.value)
    assert random_structure(11, n).g.allclose(s.g, atol=0.0)


def test_zero_perturbation_gives_flat_structure():
    s = random_structure(4, 2, perturbation_scale=0.0)
    assert s.d_omega_norm < 1e-14
    assert s.nijenhuis_norm < 1e-14


def test_nijenhuis_vanishes_in_real_dimension_two():
    s = random_structure(8, 1)
    assert np.max(np.abs(nijenhuis(s))) < 1e-12


def test_nijenhuis_is_antisymmetric(almost_kahler2):
    tensor = nijenhuis(almost_kahler2)
    assert np.allclose(tensor, -tensor.swapaxes(1, 2))


def test_structure_serialization(random2):
    restored = AlmostHermitianStructure.from_dict(random2.to_dict())
    assert restored.n == 2
    assert restored.g.allclose(random2.g, atol=0.0)
    assert restored.star_matrix.allclose(random2.star_matrix, atol=1e-12)


@pytest.mark.parametrize("name", PRESETS)
def test_presets_with_second_order_jets(name):
    s = preset(name, 2, order=2)
    assert s.order == 2


def test_generic_preset_has_nonzero_mubar():
    s = preset('generic', 2)
    a = random_pure_germ(make_rng(6, 0), s, 1, 0)
    assert d_component(a, 'mubar', s).max_abs() > 1e-3
    assert s.nijenhuis_norm > 1e-3
