"""
Дифференциальные операторы на ростках форм: d, его компоненты по бистепени,
формально сопряжённые операторы и коммутаторы с операторами Лефшеца
"""
import logging
from typing import TYPE_CHECKING, Callable

import numpy as np

from errors import JetOrderError
from exterior import (Form, apply_I, apply_I_inv, basis_tables, bidegree_parts, bigrade_project,
                      hodge_star, lefschetz_L, lefschetz_lambda, pure_bidegree, wedge)
from jets import Jet

if TYPE_CHECKING:
    from geometry import AlmostHermitianStructure

logger = logging.getLogger(__name__)

# Сдвиг бистепени, который вносит каждая компонента d = μ̄ + ∂̄ + ∂ + μ
BIDEGREE_SHIFTS = {
    'mubar': (-1, 2),
    'delbar': (0, 1),
    'del': (1, 0),
    'mu': (2, -1),
}

# Сопряжённый оператор δ̄* = -⋆δ⋆ строится по комплексно-сопряжённой компоненте
CONJUGATE_COMPONENT = {
    'd': 'd',
    'mubar': 'mu',
    'delbar': 'del',
    'del': 'delbar',
    'mu': 'mubar',
}

FormOperator = Callable[[Form], Form]


def exterior_d(a: Form) -> Form:
    """
    Внешний дифференциал ростка формы

    Args:
        a: Форма с коэффициентами-джетами порядка K >= 1

    Returns:
        Росток da порядка K - 1
    """
    if a.order < 1:
        raise JetOrderError("Для внешнего дифференциала нужен джет порядка не ниже 1")
    one_forms = basis_tables(a.dim).one_forms
    value = np.einsum('iab,ib->a', one_forms, a.coeffs.gradient)
    gradient = None
    if a.order >= 2:
        gradient = np.einsum('iab,ijb->ja', one_forms, a.coeffs.hessian)
    return Form(Jet(value, gradient, dim=a.dim), a.dim)


def d_component(a: Form, which: str, s: 'AlmostHermitianStructure') -> Form:
    """
    Компонента d чистой формы: Π_{p+r, q+s} da

    Raises:
        BidegreeError: если форма не имеет чистой бистепени
    """
    if which not in BIDEGREE_SHIFTS:
        raise ValueError(f"Неизвестная компонента d: {which}")
    bidegree = pure_bidegree(a, s)
    da = exterior_d(a)
    if bidegree is None:
        return da
    shift_p, shift_q = BIDEGREE_SHIFTS[which]
    return bigrade_project(da, bidegree[0] + shift_p, bidegree[1] + shift_q, s)


def d_part(a: Form, which: str, s: 'AlmostHermitianStructure') -> Form:
    """Компонента d для формы смешанного типа: сумма по её чистым частям"""
    if which == 'd':
        return exterior_d(a)
    if which not in BIDEGREE_SHIFTS:
        raise ValueError(f"Неизвестная компонента d: {which}")
    shift_p, shift_q = BIDEGREE_SHIFTS[which]
    total = Form.zero(a.dim, max(a.order - 1, 0))
    for (p, q), part in bidegree_parts(a, s).items():
        total = total + bigrade_project(exterior_d(part), p + shift_p, q + shift_q, s)
    return total


def adjoint_op(which: str, a: Form, s: 'AlmostHermitianStructure') -> Form:
    """
    Формально сопряжённый оператор в точке: δ̄* = -⋆δ⋆

    Внутренняя звезда применяется к ростку, внешняя - к значению.
    """
    if which not in CONJUGATE_COMPONENT:
        raise ValueError(f"Неизвестный оператор: {which}")
    inner = d_part(hodge_star(a, s), CONJUGATE_COMPONENT[which], s)
    return -hodge_star(inner, s)


def commutator_dL(a: Form, s: 'AlmostHermitianStructure') -> Form:
    """[d, L] a = dω ∧ a (оператор нулевого порядка)"""
    return wedge(s.d_omega.value(), a.value())


def graded_commutator(first: FormOperator, second: FormOperator,
                      first_degree: int, second_degree: int) -> FormOperator:
    """Градуированный коммутатор [A, B] = AB - (-1)^{|A||B|} BA"""
    sign = -1 if (first_degree * second_degree) % 2 else 1

    def commutator(a: Form) -> Form:
        return first(second(a)) - sign * second(first(a))

    return commutator


def lambda_d_commutator(a: Form, s: 'AlmostHermitianStructure') -> Form:
    """[Λ, d] = Λd - dΛ"""
    return graded_commutator(lambda x: lefschetz_lambda(x, s), exterior_d, -2, 1)(a)


def dstar_lambda_commutator(a: Form, s: 'AlmostHermitianStructure') -> Form:
    """[d*, Λ] = d*Λ - Λd*"""
    return graded_commutator(lambda x: adjoint_op('d', x, s), lambda x: lefschetz_lambda(x, s), -1, -2)(a)


def lambda_adjoint_commutator(which: str, a: Form, s: 'AlmostHermitianStructure') -> Form:
    """[Λ, δ*] = Λδ* - δ*Λ для компоненты δ"""
    return graded_commutator(lambda x: lefschetz_lambda(x, s), lambda x: adjoint_op(which, x, s), -2, -1)(a)


def star_conjugated_d(a: Form, s: 'AlmostHermitianStructure') -> Form:
    """⋆𝕀⁻¹d𝕀⋆ (внутренние операторы на ростке)"""
    return hodge_star(apply_I_inv(exterior_d(apply_I(hodge_star(a, s), s)), s), s)


def I_conjugated_d(a: Form, s: 'AlmostHermitianStructure') -> Form:
    """𝕀⁻¹d𝕀"""
    return apply_I_inv(exterior_d(apply_I(a, s)), s)


def torsion_taubar(a: Form, s: 'AlmostHermitianStructure') -> Form:
    """
    Оператор кручения τ̄ = [Λ, [∂̄, L]] на ростке чистой формы

    Результат - значение в точке; оператор имеет нулевой порядок.
    """
    delbar_L = graded_commutator(lambda x: d_component(x, 'delbar', s), lambda x: lefschetz_L(x, s), 1, 2)
    return graded_commutator(lambda x: lefschetz_lambda(x, s), delbar_L, -2, 3)(a)


def torsion_taubar_adjoint(a: Form, s: 'AlmostHermitianStructure') -> Form:
    """τ̄* = [Λ, ∂̄*] L - L [Λ, ∂̄*]"""
    inner = lambda x: lambda_adjoint_commutator('delbar', x, s)
    return inner(lefschetz_L(a, s)) - lefschetz_L(inner(a), s)
