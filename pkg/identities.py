"""
Тождества почти эрмитовой геометрии: коэффициенты, стороны основного тождества,
промежуточные выкладки и вспомогательные проверки
"""
import logging
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional

import numpy as np

from calculus import (BIDEGREE_SHIFTS, adjoint_op, commutator_dL, d_component, d_part, dstar_lambda_commutator,
                      exterior_d, I_conjugated_d, lambda_adjoint_commutator, lambda_d_commutator,
                      star_conjugated_d, torsion_taubar, torsion_taubar_adjoint)
from errors import BidegreeError, CoefficientRangeError, NotPrimitiveError
from exterior import (Form, PrimitiveDecomposition, apply_I, apply_I_inv, bigrade_project, form_norm,
                      hodge_star, inner_product, lefschetz_decompose, lefschetz_L, lefschetz_lambda,
                      lefschetz_power, pure_bidegree, wedge)
from geometry import AlmostHermitianStructure
from jets import Jet

logger = logging.getLogger(__name__)

DEFAULT_TOL_REL = 1e-8
DEFAULT_TOL_ABS = 1e-10

# Нижняя граница знаменателя относительной невязки
NORM_FLOOR = 1e-14

# Допуск примитивности входных ростков
PRIMITIVE_TOL = 1e-10


@dataclass
class IdentityResidual:
    """Результат проверки одного тождества на одном наборе входных данных"""
    identity_id: str
    structure_descr: str
    n: int
    lhs_norm: float
    rhs_norm: float
    residual_abs: float
    residual_rel: float
    tol_rel: float
    tol_abs: float
    passed: bool
    k: Optional[int] = None
    j: Optional[int] = None
    p: Optional[int] = None
    q: Optional[int] = None
    seed: Optional[int] = None
    trial_id: Optional[str] = None

    def to_dict(self) -> dict:
        return asdict(self)


def _record(identity_id: str, s: AlmostHermitianStructure, lhs_norm: float, rhs_norm: float,
            residual_abs: float, tol_rel: float, tol_abs: float, inputs: dict) -> IdentityResidual:
    residual_rel = residual_abs / max(lhs_norm, rhs_norm, NORM_FLOOR)
    passed = bool(residual_rel < tol_rel or residual_abs < tol_abs)
    record = IdentityResidual(
        identity_id=identity_id,
        structure_descr=s.descr,
        n=s.n,
        lhs_norm=float(lhs_norm),
        rhs_norm=float(rhs_norm),
        residual_abs=float(residual_abs),
        residual_rel=float(residual_rel),
        tol_rel=tol_rel,
        tol_abs=tol_abs,
        passed=passed,
        **inputs,
    )
    logger.debug(f"{identity_id} {inputs}: невязка {residual_abs:.3e} (отн. {residual_rel:.3e})")
    return record


def compare_forms(identity_id: str, lhs: Form, rhs: Form, s: AlmostHermitianStructure,
                  tol_rel: float = DEFAULT_TOL_REL, tol_abs: float = DEFAULT_TOL_ABS,
                  **inputs) -> IdentityResidual:
    """Сравнить две формы в точке по послойной метрике структуры"""
    lhs, rhs = lhs.value(), rhs.value()
    return _record(identity_id, s, form_norm(lhs, s), form_norm(rhs, s), form_norm(lhs - rhs, s),
                   tol_rel, tol_abs, inputs)


def compare_scalars(identity_id: str, lhs: complex, rhs: complex, s: AlmostHermitianStructure,
                    tol_rel: float = DEFAULT_TOL_REL, tol_abs: float = DEFAULT_TOL_ABS,
                    **inputs) -> IdentityResidual:
    return _record(identity_id, s, abs(lhs), abs(rhs), abs(lhs - rhs), tol_rel, tol_abs, inputs)


def compare_jets(identity_id: str, lhs: Jet, rhs: Jet, s: AlmostHermitianStructure,
                 tol_rel: float = DEFAULT_TOL_REL, tol_abs: float = DEFAULT_TOL_ABS,
                 **inputs) -> IdentityResidual:
    """Сравнить джеты (например, матрицы операторов) по максимуму модуля во всех слотах"""
    order = min(lhs.order, rhs.order)
    lhs, rhs = lhs.truncate(order), rhs.truncate(order)
    return _record(identity_id, s, lhs.max_abs(), rhs.max_abs(), (lhs - rhs).max_abs(), tol_rel, tol_abs, inputs)


# ----------------------------------------------------------------------
# Коэффициенты

def f_coeff(n: int, k: int, j: int, r: int) -> Fraction:
    """
    Коэффициент при L^{j+r-1} α_r в основном тождестве

    f(r) = r(n-k+r) - j + (-1)^r j!(n-k-j+r)! / ((j+r-1)!(n-k-j)!)

    Raises:
        CoefficientRangeError: при j+r-1 < 0, n-k-j < 0 или отрицательных аргументах
    """
    if min(n, k, j, r) < 0 or n - k - j < 0 or j + r - 1 < 0:
        raise CoefficientRangeError(f"Коэффициент не определён для n={n}, k={k}, j={j}, r={r}")
    ratio = Fraction(math.factorial(j) * math.factorial(n - k - j + r),
                     math.factorial(j + r - 1) * math.factorial(n - k - j))
    return Fraction(r * (n - k + r) - j) + (-1) ** r * ratio


def _star_expansion_coeff(n: int, k: int, j: int, r: int) -> Fraction:
    """(-1)^{r+1} j!(n-k-j+r)! / ((j+r-1)!(n-k-j)!)"""
    return (-1) ** (r + 1) * Fraction(math.factorial(j) * math.factorial(n - k - j + r),
                                      math.factorial(j + r - 1) * math.factorial(n - k - j))


# ----------------------------------------------------------------------
# Входные данные

def _zero(s: AlmostHermitianStructure) -> Form:
    return Form.zero(s.dim)


def random_pure_germ(rng: np.random.Generator, s: AlmostHermitianStructure, p: int, q: int,
                     order: Optional[int] = None) -> Form:
    """Случайный росток чистой бистепени (p, q)"""
    order = s.order if order is None else order
    return bigrade_project(Form.random(rng, s.dim, p + q, order), p, q, s)


def random_primitive_germ(rng: np.random.Generator, s: AlmostHermitianStructure, k: int,
                          order: Optional[int] = None, bidegree=None) -> Form:
    """Случайный примитивный росток степени k <= n (α_0 разложения Лефшеца)"""
    if k > s.n:
        raise NotPrimitiveError(f"Примитивных форм степени {k} > n = {s.n} нет")
    order = s.order if order is None else order
    a = Form.random(rng, s.dim, k, order)
    if bidegree is not None:
        a = bigrade_project(a, bidegree[0], bidegree[1], s)
    return lefschetz_decompose(a, s, degree=k).component(0)


def _check_primitive(alpha: Form, s: AlmostHermitianStructure, degree: Optional[int]) -> int:
    found = alpha.degree
    if degree is None:
        if found is None:
            raise ValueError("Для нулевого ростка нужно указать степень")
        degree = found
    elif found is not None and found != degree:
        raise ValueError(f"Росток имеет степень {found}, ожидалась {degree}")
    residual = lefschetz_lambda(alpha, s).max_abs()
    if residual > PRIMITIVE_TOL * max(1.0, alpha.max_abs()):
        raise NotPrimitiveError(f"Росток не примитивен: |Λα| = {residual:.3e}")
    return degree


def _lefschetz_sum(decomposition: PrimitiveDecomposition, shift: int, coeff, s: AlmostHermitianStructure,
                   min_r: int = 0) -> Form:
    """Σ_r coeff(r) L^{r+shift} α_r по слагаемым с неотрицательной степенью L"""
    total = _zero(s)
    for r, alpha_r in decomposition:
        if r < min_r or r + shift < 0:
            continue
        total = total + lefschetz_power(alpha_r.value(), r + shift, s) * float(coeff(r))
    return total


# ----------------------------------------------------------------------
# Основное тождество

@dataclass
class TheoremSides:
    """Стороны основного тождества для η = L^j α"""
    lhs: Form
    rhs: Form
    bracket: Form
    star_term: Form
    terms: Dict[str, Form] = field(default_factory=dict)
    decomposition: Optional[PrimitiveDecomposition] = None
    eta: Optional[Form] = None


def theorem_sides(alpha: Form, j: int, s: AlmostHermitianStructure, inject_bug: bool = False,
                  degree: Optional[int] = None) -> TheoremSides:
    """
    Левая и правая части основного тождества

    LHS = [Λ, d]η - ⋆𝕀⁻¹d𝕀⋆η,
    RHS = 1/(j+1) 𝕀⁻¹[d*, Λ]𝕀L^{j+1}α + jΛ[d, L]L^{j-1}α
          + j(j-1)(k-n+j-1)[d, L]L^{j-2}α + Σ_{r>=2} f(r) L^{j+r-1}α_r,
    где dα = Σ L^r α_r.

    Args:
        alpha: Примитивный росток степени k <= n
        j: Степень L, 0 <= j <= n - k
        s: Почти эрмитова структура
        inject_bug: Сменить знак первого слагаемого RHS (самопроверка верификатора)
        degree: Степень α (нужна для нулевого ростка)

    Returns:
        TheoremSides со значениями в точке
    """
    k = _check_primitive(alpha, s, degree)
    n = s.n
    if not 0 <= j <= n - k:
        raise CoefficientRangeError(f"Степень j = {j} вне диапазона 0..{n - k}")

    eta = lefschetz_power(alpha, j, s)
    bracket = lambda_d_commutator(eta, s)
    star_term = star_conjugated_d(eta, s)

    decomposition = lefschetz_decompose(exterior_d(alpha), s, degree=k + 1)
    terms = {}
    lifted = apply_I(lefschetz_power(alpha, j + 1, s), s)
    terms['dstar_lambda'] = apply_I_inv(dstar_lambda_commutator(lifted, s), s) * (1.0 / (j + 1))
    if inject_bug:
        terms['dstar_lambda'] = -terms['dstar_lambda']
    terms['lambda_dL'] = (lefschetz_lambda(commutator_dL(lefschetz_power(alpha, j - 1, s), s), s) * j
                          if j >= 1 else _zero(s))
    terms['dL'] = (commutator_dL(lefschetz_power(alpha, j - 2, s), s) * (j * (j - 1) * (k - n + j - 1))
                   if j >= 2 else _zero(s))
    terms['f_sum'] = _lefschetz_sum(decomposition, j - 1, lambda r: f_coeff(n, k, j, r), s, min_r=2)

    rhs = terms['dstar_lambda'] + terms['lambda_dL'] + terms['dL'] + terms['f_sum']
    return TheoremSides(lhs=bracket - star_term, rhs=rhs, bracket=bracket, star_term=star_term,
                        terms=terms, decomposition=decomposition, eta=eta)


def verify_theorem(alpha: Form, j: int, s: AlmostHermitianStructure, tol_rel: float = DEFAULT_TOL_REL,
                   tol_abs: float = DEFAULT_TOL_ABS, inject_bug: bool = False) -> IdentityResidual:
    """Проверка [Λ, d]η = ⋆𝕀⁻¹d𝕀⋆η + RHS"""
    return theorem_record(theorem_sides(alpha, j, s, inject_bug=inject_bug), j, s, tol_rel, tol_abs)


def theorem_record(sides: TheoremSides, j: int, s: AlmostHermitianStructure, tol_rel: float = DEFAULT_TOL_REL,
                   tol_abs: float = DEFAULT_TOL_ABS) -> IdentityResidual:
    """
    Запись основного тождества по уже вычисленным сторонам

    ⋆𝕀⁻¹d𝕀⋆η переносится вправо: в записи lhs_norm = |[Λ, d]η|,
    rhs_norm = |⋆𝕀⁻¹d𝕀⋆η + RHS|. Невязка та же, что у LHS - RHS, а
    относительная невязка не вырождается в кэлеровом случае, где LHS = RHS = 0.
    """
    k = sides.decomposition.base_degree - 1
    return compare_forms('theorem', sides.bracket, sides.star_term + sides.rhs, s, tol_rel, tol_abs, k=k, j=j)


def check_vanishing_terms(sides: TheoremSides, j: int, s: AlmostHermitianStructure,
                          **tol) -> List[IdentityResidual]:
    """
    Слагаемые правой части по отдельности и [d, L]η

    Там, где dω = 0, каждое из них должно обращаться в ноль, а основное
    тождество - вырождаться в [Λ, d] = ⋆𝕀⁻¹d𝕀⋆.
    """
    k = sides.decomposition.base_degree - 1
    records = [compare_forms(f'theorem_term_{name}', term, _zero(s), s, k=k, j=j, **tol)
               for name, term in sides.terms.items()]
    records.append(compare_forms('theorem_term_dL_eta', commutator_dL(sides.eta, s), _zero(s), s, k=k, j=j, **tol))
    return records


def verify_proof_displays(alpha: Form, j: int, s: AlmostHermitianStructure, tol_rel: float = DEFAULT_TOL_REL,
                          tol_abs: float = DEFAULT_TOL_ABS) -> List[IdentityResidual]:
    """Промежуточные выкладки доказательства основного тождества"""
    sides = theorem_sides(alpha, j, s)
    decomposition = sides.decomposition
    k = decomposition.base_degree - 1
    n = s.n
    m = n - k - j
    inputs = {'k': k, 'j': j}
    records = []
    dalpha = exterior_d(alpha)

    # ⋆𝕀⁻¹d𝕀⋆η через L^{n-k-j} dα
    sign = (-1) ** (k * (k + 1) // 2 + k)
    closed = hodge_star(apply_I_inv(lefschetz_power(dalpha, m, s), s), s) * (
        sign * math.factorial(j) / math.factorial(m))
    if m >= 1:
        closed = closed + hodge_star(apply_I_inv(commutator_dL(lefschetz_power(alpha, m - 1, s), s), s), s) * (
            sign * math.factorial(j) / math.factorial(m - 1))
    records.append(compare_forms('star_conjugated_d_closed_form', sides.star_term, closed, s,
                                 tol_rel, tol_abs, **inputs))

    expansion = (_lefschetz_sum(decomposition, j - 1, lambda r: _star_expansion_coeff(n, k, j, r), s)
                 - sides.terms['dstar_lambda'])
    records.append(compare_forms('star_conjugated_d_expansion', sides.star_term, expansion, s,
                                 tol_rel, tol_abs, **inputs))

    eta = lefschetz_power(alpha, j, s)
    lambda_d = lefschetz_lambda(exterior_d(eta), s)
    expected = (_lefschetz_sum(decomposition, j - 1,
                               lambda r: -(j + r) * (k + 1 - 2 * r - n + j + r - 1), s)
                + sides.terms['lambda_dL'])
    records.append(compare_forms('lambda_d_lefschetz', lambda_d, expected, s, tol_rel, tol_abs, **inputs))

    d_lambda = exterior_d(lefschetz_lambda(eta, s))
    factor = -j * (k - n + j - 1)
    expected = _lefschetz_sum(decomposition, j - 1, lambda r: factor, s)
    if j >= 2:
        expected = expected + commutator_dL(lefschetz_power(alpha, j - 2, s), s) * (factor * (j - 1))
    records.append(compare_forms('d_lambda_lefschetz', d_lambda, expected, s, tol_rel, tol_abs, **inputs))

    expected = (_lefschetz_sum(decomposition, j - 1, lambda r: r * (n - k + r) - j, s)
                + sides.terms['lambda_dL'] + sides.terms['dL'])
    records.append(compare_forms('lambda_d_expansion', sides.bracket, expected, s, tol_rel, tol_abs, **inputs))

    # полная сумма по r >= 0 совпадает с суммой по r >= 2
    full = _lefschetz_sum(decomposition, j - 1, lambda r: f_coeff(n, k, j, r) if j + r - 1 >= 0 else 0, s)
    records.append(compare_forms('f_sum_full_range', full, sides.terms['f_sum'], s, tol_rel, tol_abs, **inputs))
    return records


# ----------------------------------------------------------------------
# Формы типа (0, q)

def _check_zero_q(alpha: Form, s: AlmostHermitianStructure, q: Optional[int] = None) -> int:
    bidegree = pure_bidegree(alpha, s)
    if bidegree is None:
        if q is None:
            raise BidegreeError("Для нулевого ростка нужно указать q")
        return q
    if bidegree[0] != 0 or (q is not None and bidegree[1] != q):
        raise BidegreeError(f"Ожидалась форма типа (0, {q if q is not None else 'q'}), получено {bidegree}")
    return bidegree[1]


def verify_prop_0q(alpha: Form, s: AlmostHermitianStructure, tol_rel: float = DEFAULT_TOL_REL,
                   tol_abs: float = DEFAULT_TOL_ABS) -> IdentityResidual:
    """Λ∂α = i∂̄*α + i[Λ, ∂̄*]Lα для ростка типа (0, q)"""
    q = _check_zero_q(alpha, s)
    lhs = lefschetz_lambda(d_component(alpha, 'del', s), s)
    rhs = (adjoint_op('delbar', alpha, s) * 1j
           + lambda_adjoint_commutator('delbar', lefschetz_L(alpha, s), s) * 1j)
    return compare_forms('prop_0q', lhs, rhs, s, tol_rel, tol_abs, k=q, p=0, q=q)


def verify_prop_0q_expansions(alpha: Form, s: AlmostHermitianStructure, tol_rel: float = DEFAULT_TOL_REL,
                              tol_abs: float = DEFAULT_TOL_ABS) -> List[IdentityResidual]:
    """Разложение сторон основного тождества при j = 0 на типы (0, q-1) и (1, q-2)"""
    q = _check_zero_q(alpha, s)
    inputs = {'k': q, 'p': 0, 'q': q}
    records = []
    L_alpha = lefschetz_L(alpha, s)

    expected = lefschetz_lambda(d_component(alpha, 'del', s) + d_component(alpha, 'mu', s), s)
    records.append(compare_forms('prop_0q_lambda_d', lambda_d_commutator(alpha, s), expected, s,
                                 tol_rel, tol_abs, **inputs))

    expected = (adjoint_op('delbar', alpha, s) - adjoint_op('mubar', alpha, s)) * 1j
    records.append(compare_forms('prop_0q_star_conjugated_d', star_conjugated_d(alpha, s), expected, s,
                                 tol_rel, tol_abs, **inputs))

    lhs = apply_I_inv(dstar_lambda_commutator(apply_I(L_alpha, s), s), s)
    expected = (lambda_adjoint_commutator('delbar', L_alpha, s)
                - lambda_adjoint_commutator('mubar', L_alpha, s)) * 1j
    records.append(compare_forms('prop_0q_dstar_lambda', lhs, expected, s, tol_rel, tol_abs, **inputs))

    # компоненты типа (1, q-2)
    lhs = (lefschetz_lambda(d_component(alpha, 'mu', s), s)
           + adjoint_op('mubar', alpha, s) * 1j
           + lambda_adjoint_commutator('mubar', L_alpha, s) * 1j)
    decomposition = lefschetz_decompose(exterior_d(alpha), s, degree=q + 1)
    alpha_2 = decomposition.component(2)
    f_term = _zero(s)
    if alpha_2 is not None and s.n - q >= 0:
        f_term = lefschetz_L(alpha_2.value(), s) * float(f_coeff(s.n, q, 0, 2))
    records.append(compare_forms('prop_0q_second_identity', lhs, f_term, s, tol_rel, tol_abs, **inputs))
    records.append(compare_forms('prop_0q_f_term_bidegree', f_term, bigrade_project(f_term, 1, q - 2, s), s,
                                 tol_rel, tol_abs, **inputs))
    return records


def verify_mu_identity(alpha: Form, s: AlmostHermitianStructure, tol_rel: float = DEFAULT_TOL_REL,
                       tol_abs: float = DEFAULT_TOL_ABS) -> IdentityResidual:
    """Λμα = -iμ̄*α - i[Λ, μ̄*]Lα для ростка типа (0, 2)"""
    _check_zero_q(alpha, s, q=2)
    lhs = lefschetz_lambda(d_component(alpha, 'mu', s), s)
    rhs = (adjoint_op('mubar', alpha, s) * -1j
           + lambda_adjoint_commutator('mubar', lefschetz_L(alpha, s), s) * -1j)
    return compare_forms('mu_identity', lhs, rhs, s, tol_rel, tol_abs, k=2, p=0, q=2)


def uncorrected_mu_residual(alpha: Form, s: AlmostHermitianStructure, tol_rel: float = DEFAULT_TOL_REL,
                            tol_abs: float = DEFAULT_TOL_ABS) -> IdentityResidual:
    """Невязка тождества [Λ, μ] = -iμ̄* без поправочного слагаемого"""
    _check_zero_q(alpha, s, q=2)
    lhs = (lefschetz_lambda(d_component(alpha, 'mu', s), s)
           - d_component(lefschetz_lambda(alpha, s), 'mu', s))
    rhs = adjoint_op('mubar', alpha, s) * -1j
    return compare_forms('uncorrected_mu_identity', lhs, rhs, s, tol_rel, tol_abs, k=2, p=0, q=2)


# ----------------------------------------------------------------------
# Вспомогательные тождества

def check_star_squared(a: Form, k: int, s: AlmostHermitianStructure, **tol) -> IdentityResidual:
    return compare_forms('star_squared', hodge_star(hodge_star(a, s), s), a * (-1) ** k, s, k=k, **tol)


def check_star_lefschetz(a: Form, k: int, s: AlmostHermitianStructure, **tol) -> List[IdentityResidual]:
    """⋆Λ = L⋆ и ⋆L = Λ⋆"""
    return [
        compare_forms('star_lambda_intertwine', hodge_star(lefschetz_lambda(a, s), s),
                      lefschetz_L(hodge_star(a, s), s), s, k=k, **tol),
        compare_forms('star_lefschetz_intertwine', hodge_star(lefschetz_L(a, s), s),
                      lefschetz_lambda(hodge_star(a, s), s), s, k=k, **tol),
    ]


def check_hodge_pairing(a: Form, b: Form, k: int, s: AlmostHermitianStructure, **tol) -> IdentityResidual:
    """a ∧ ⋆conj(b) = <a, b> vol"""
    lhs = wedge(a.value(), hodge_star(b.value().conj(), s))
    rhs = s.volume.value() * inner_product(a, b, s)
    return compare_forms('hodge_pairing', lhs, rhs, s, k=k, **tol)


def check_lefschetz_commutator(a: Form, k: int, j: int, s: AlmostHermitianStructure, **tol) -> IdentityResidual:
    """[L^j, Λ] = j(k-n+j-1) L^{j-1} на k-формах"""
    lhs = lefschetz_power(lefschetz_lambda(a, s), j, s) - lefschetz_lambda(lefschetz_power(a, j, s), s)
    rhs = lefschetz_power(a, j - 1, s) * (j * (k - s.n + j - 1)) if j >= 1 else _zero(s)
    return compare_forms('lefschetz_power_commutator', lhs, rhs, s, k=k, j=j, **tol)


def check_d_lefschetz_power(a: Form, k: int, j: int, s: AlmostHermitianStructure, **tol) -> IdentityResidual:
    """[d, L^j] = j[d, L]L^{j-1}"""
    lhs = exterior_d(lefschetz_power(a, j, s)) - lefschetz_power(exterior_d(a), j, s)
    rhs = commutator_dL(lefschetz_power(a, j - 1, s), s) * j if j >= 1 else _zero(s)
    return compare_forms('d_lefschetz_power', lhs, rhs, s, k=k, j=j, **tol)


def check_star_dL(a: Form, k: int, s: AlmostHermitianStructure, **tol) -> IdentityResidual:
    """⋆[d, L]a = (-1)^{k+1}[d*, Λ]⋆a"""
    bracket = exterior_d(lefschetz_L(a, s)) - lefschetz_L(exterior_d(a), s)
    lhs = hodge_star(bracket, s)
    rhs = dstar_lambda_commutator(hodge_star(a, s), s) * (-1) ** (k + 1)
    return compare_forms('star_dL_adjoint', lhs, rhs, s, k=k, **tol)


def check_dL_zeroth_order(a: Form, k: int, s: AlmostHermitianStructure, **tol) -> IdentityResidual:
    """d(La) - L(da) = dω ∧ a"""
    lhs = exterior_d(lefschetz_L(a, s)) - lefschetz_L(exterior_d(a), s)
    return compare_forms('dL_zeroth_order', lhs, commutator_dL(a, s), s, k=k, **tol)


def check_I_properties(a: Form, b: Form, k: int, s: AlmostHermitianStructure, **tol) -> List[IdentityResidual]:
    """𝕀 коммутирует с ⋆ и L, 𝕀² = (-1)^k, 𝕀 мультипликативен"""
    return [
        compare_forms('I_commutes_star', apply_I(hodge_star(a, s), s), hodge_star(apply_I(a, s), s), s, k=k, **tol),
        compare_forms('I_commutes_lefschetz', apply_I(lefschetz_L(a, s), s), lefschetz_L(apply_I(a, s), s), s,
                      k=k, **tol),
        compare_forms('I_squared', apply_I(apply_I(a, s), s), a * (-1) ** k, s, k=k, **tol),
        compare_forms('I_multiplicative', apply_I(wedge(a, b), s), wedge(apply_I(a, s), apply_I(b, s)), s,
                      k=k, **tol),
    ]


def check_I_conjugated_d(a: Form, k: int, s: AlmostHermitianStructure, **tol) -> IdentityResidual:
    """𝕀⁻¹d𝕀 = -i(μ̄ - ∂̄ + ∂ - μ)"""
    rhs = (d_part(a, 'mubar', s) - d_part(a, 'delbar', s) + d_part(a, 'del', s) - d_part(a, 'mu', s)) * -1j
    return compare_forms('I_conjugated_d', I_conjugated_d(a, s), rhs, s, k=k, **tol)


def check_I_conjugation_component(a: Form, which: str, s: AlmostHermitianStructure, **tol) -> IdentityResidual:
    """𝕀⁻¹δ𝕀 = (-i)^{r-s} δ для компоненты δ бистепени (r, s) на чистых ростках"""
    p, q = pure_bidegree(a, s)
    shift_p, shift_q = BIDEGREE_SHIFTS[which]
    lhs = apply_I_inv(d_component(apply_I(a, s), which, s), s)
    rhs = d_component(a, which, s) * (-1j) ** (shift_p - shift_q)
    return compare_forms(f'I_conjugation_{which}', lhs, rhs, s, k=p + q, p=p, q=q, **tol)


def check_four_components(a: Form, k: int, s: AlmostHermitianStructure, **tol) -> IdentityResidual:
    """d = μ̄ + ∂̄ + ∂ + μ"""
    total = _zero(s)
    for which in BIDEGREE_SHIFTS:
        total = total + d_part(a, which, s)
    return compare_forms('four_components', exterior_d(a), total, s, k=k, **tol)


def check_leibniz(a: Form, b: Form, k: int, s: AlmostHermitianStructure, **tol) -> IdentityResidual:
    """d(a ∧ b) = da ∧ b + (-1)^k a ∧ db"""
    lhs = exterior_d(wedge(a, b))
    rhs = wedge(exterior_d(a), b) + wedge(a, exterior_d(b)) * (-1) ** k
    return compare_forms('leibniz', lhs, rhs, s, k=k, **tol)


def check_d_squared(a: Form, k: int, s: AlmostHermitianStructure, **tol) -> IdentityResidual:
    return compare_forms('d_squared', exterior_d(exterior_d(a)), _zero(s), s, k=k, **tol)


def check_lefschetz_decomposition(a: Form, k: int, s: AlmostHermitianStructure, **tol) -> List[IdentityResidual]:
    """Восстановление формы, примитивность компонент и сохранение бистепени"""
    decomposition = lefschetz_decompose(a, s, degree=k)
    records = [compare_forms('lefschetz_reconstruct', decomposition.reconstruct(s), a, s, k=k, **tol)]
    try:
        bidegree = pure_bidegree(a, s)
    except BidegreeError:
        # смешанная форма: сохранение бистепени не проверяется
        bidegree = None
    for r, alpha_r in decomposition:
        records.append(compare_forms('lefschetz_component_primitive', lefschetz_lambda(alpha_r, s), _zero(s), s,
                                     k=k, j=r, **tol))
        if bidegree is not None:
            p, q = bidegree
            records.append(compare_forms('lefschetz_component_bidegree', alpha_r,
                                         bigrade_project(alpha_r, p - r, q - r, s), s, k=k, j=r, p=p, q=q, **tol))
    return records


def check_star_lefschetz_primitive(alpha: Form, k: int, j: int, s: AlmostHermitianStructure,
                                   **tol) -> IdentityResidual:
    """⋆L^jα = (-1)^{k(k+1)/2} j!/(n-k-j)! L^{n-k-j}𝕀α для примитивной α"""
    n = s.n
    coeff = (-1) ** (k * (k + 1) // 2) * math.factorial(j) / math.factorial(n - k - j)
    lhs = hodge_star(lefschetz_power(alpha, j, s), s)
    rhs = lefschetz_power(apply_I(alpha, s), n - k - j, s) * coeff
    return compare_forms('star_lefschetz_primitive', lhs, rhs, s, k=k, j=j, **tol)


def check_primitive_annihilation(alpha: Form, k: int, s: AlmostHermitianStructure, **tol) -> IdentityResidual:
    """L^{n-k+1}α = 0 для примитивной α"""
    lhs = lefschetz_power(alpha, s.n - k + 1, s)
    return compare_forms('primitive_annihilation', lhs, _zero(s), s, k=k, **tol)


def _bidegree_part_of_d_omega(s: AlmostHermitianStructure, p: int, q: int) -> Form:
    return bigrade_project(s.d_omega.value(), p, q, s)


def check_lambda_delbar_star_zeroth_order(a: Form, k: int, s: AlmostHermitianStructure,
                                          **tol) -> IdentityResidual:
    """[Λ, ∂̄*] = ⋆(∂ω ∧ ⋆·)"""
    lhs = lambda_adjoint_commutator('delbar', a, s)
    rhs = hodge_star(wedge(_bidegree_part_of_d_omega(s, 2, 1), hodge_star(a.value(), s)), s)
    return compare_forms('lambda_delbar_star_zeroth_order', lhs, rhs, s, k=k, **tol)


def check_lambda_delbar_adjoint(a: Form, b: Form, k: int, s: AlmostHermitianStructure, **tol) -> IdentityResidual:
    """<∂̄ω ∧ a, b> = <a, [Λ, ∂̄*]b>"""
    lhs = inner_product(wedge(_bidegree_part_of_d_omega(s, 1, 2), a.value()), b.value(), s)
    rhs = inner_product(a, lambda_adjoint_commutator('delbar', b, s), s)
    return compare_scalars('lambda_delbar_pointwise_adjoint', lhs, rhs, s, k=k, **tol)


def check_taubar_closed_form(a: Form, s: AlmostHermitianStructure, **tol) -> IdentityResidual:
    """τ̄ = Λ(∂̄ω ∧ ·) - ∂̄ω ∧ Λ(·)"""
    p, q = pure_bidegree(a, s)
    dbar_omega = _bidegree_part_of_d_omega(s, 1, 2)
    rhs = (lefschetz_lambda(wedge(dbar_omega, a.value()), s)
           - wedge(dbar_omega, lefschetz_lambda(a.value(), s)))
    return compare_forms('taubar_closed_form', torsion_taubar(a, s), rhs, s, k=p + q, p=p, q=q, **tol)


def check_zeroth_order(operator_id: str, operator, a: Form, f: Jet, s: AlmostHermitianStructure,
                       **tol) -> IdentityResidual:
    """op(f·a) = f(0)·op(a) в точке"""
    lhs = operator(a * f)
    rhs = operator(a) * complex(f.value)
    return compare_forms(f'{operator_id}_zeroth_order', lhs, rhs, s, **tol)


def check_hermitian_identity(a: Form, s: AlmostHermitianStructure, **tol) -> IdentityResidual:
    """[Λ, ∂] = i(∂̄* + τ̄*) для интегрируемой J"""
    p, q = pure_bidegree(a, s)
    lhs = (lefschetz_lambda(d_component(a, 'del', s), s)
           - d_component(lefschetz_lambda(a, s), 'del', s))
    rhs = (adjoint_op('delbar', a, s) + torsion_taubar_adjoint(a, s)) * 1j
    return compare_forms('hermitian_torsion_identity', lhs, rhs, s, k=p + q, p=p, q=q, **tol)


def check_weil_identity(a: Form, k: int, s: AlmostHermitianStructure, **tol) -> IdentityResidual:
    """[Λ, d] = ⋆𝕀⁻¹d𝕀⋆ в точке, где dω = 0"""
    return compare_forms('weil_identity', lambda_d_commutator(a, s), star_conjugated_d(a, s), s, k=k, **tol)


def check_almost_kahler_degeneration(alpha: Form, k: int, s: AlmostHermitianStructure, **tol) -> IdentityResidual:
    """dα = α_0 + Lα_1: компоненты α_r при r >= 2 обращаются в ноль"""
    decomposition = lefschetz_decompose(exterior_d(alpha), s, degree=k + 1)
    higher = _zero(s)
    for r, alpha_r in decomposition:
        if r >= 2:
            higher = higher + alpha_r.value()
    return compare_forms('almost_kahler_degeneration', higher, _zero(s), s, k=k, **tol)
