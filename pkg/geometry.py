"""
Почти эрмитовы структуры в окрестности точки: построение, проверка,
кешируемые операторы и готовые примеры
"""
import dataclasses
import functools
import logging
import math
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np
import scipy.linalg

from calculus import exterior_d
from errors import DimensionError, JetOrderError, SingularSystemError, StructureError, UnknownPresetError
from exterior import (Form, basis_tables, bigrade_projector_stack, gram_matrix, omega_form, star_matrix,
                      structured_I, wedge_matrix)
from jets import Jet, jet_linear_solve

logger = logging.getLogger(__name__)

# Допуск проверок J² = -I и совместности метрики
STRUCTURE_TOL = 1e-10

# Предельная обусловленность случайной рамки
FRAME_CONDITION_LIMIT = 1e6

MAX_ATTEMPTS = 10

DEFAULT_PERTURBATION_SCALE = 0.3

# Зафиксированные зёрна пресетов
GENERIC_SEED = 20240521
GENERIC_SCALE = 0.5
ALMOST_KAHLER_SEED = 7
ALMOST_KAHLER_SCALE = 0.5

PRESETS = ('flat_kahler', 'hermitian_nonkahler', 'almost_kahler_nonintegrable', 'generic')


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Счётчиковый генератор Philox для зерна и номера потока"""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(stream)])))


def standard_complex_structure(n: int) -> np.ndarray:
    """J₀ в координатах (x_1, y_1, ..., x_n, y_n): J₀∂x = ∂y, J₀∂y = -∂x"""
    return np.kron(np.eye(n), np.array([[0.0, -1.0], [1.0, 0.0]]))


@dataclass(frozen=True, eq=False)
class AlmostHermitianStructure:
    """
    Почти эрмитова структура (J, g), заданная джетами в начале координат ℝ^{2n}

    Операторы на формах (звезда Ходжа, L, Λ, проекторы бистепени, 𝕀)
    строятся лениво и кешируются.
    """
    n: int
    J: Jet
    g: Jet
    descr: str = 'custom'

    def __post_init__(self):
        dim = 2 * self.n
        if self.n < 1:
            raise StructureError(f"Комплексная размерность должна быть положительной: {self.n}")
        for name, jet in (('J', self.J), ('g', self.g)):
            if jet.shape != (dim, dim) or jet.dim != dim:
                raise DimensionError(f"{name}: ожидался джет матрицы {dim}x{dim} на ℝ^{dim}")
        if self.J.order != self.g.order or self.J.order < 1:
            raise JetOrderError("J и g должны быть джетами одного порядка не ниже 1")

        square = self.J @ self.J + Jet.identity(dim, dim, self.J.order)
        if square.max_abs() > STRUCTURE_TOL * max(1.0, self.J.max_abs() ** 2):
            raise StructureError(f"J² ≠ -I: отклонение {square.max_abs():.3e}")
        compat = self.J.T @ self.g @ self.J - self.g
        if compat.max_abs() > STRUCTURE_TOL * max(1.0, self.g.max_abs() * self.J.max_abs() ** 2):
            raise StructureError(f"Метрика не J-инвариантна: отклонение {compat.max_abs():.3e}")
        if (self.g - self.g.T).max_abs() > STRUCTURE_TOL * max(1.0, self.g.max_abs()):
            raise StructureError("Метрика не симметрична")
        if np.any(self.J.value.imag) or np.any(self.g.value.imag):
            raise StructureError("J и g должны быть вещественными")
        if np.linalg.eigvalsh(self.g.value.real).min() <= 0:
            raise StructureError("Метрика не положительно определена в точке")

    @property
    def dim(self) -> int:
        return 2 * self.n

    @property
    def order(self) -> int:
        return self.J.order

    # ------------------------------------------------------------------
    # Формы и операторы

    @functools.cached_property
    def omega(self) -> Form:
        return omega_form(self.J, self.g)

    @functools.cached_property
    def d_omega(self) -> Form:
        return exterior_d(self.omega)

    @functools.cached_property
    def gram(self) -> Jet:
        return gram_matrix(self.g)

    @functools.cached_property
    def lefschetz_matrix(self) -> Jet:
        return wedge_matrix(self.omega.coeffs, self.dim)

    @functools.cached_property
    def _power_cache(self) -> Dict[int, Jet]:
        return {0: Jet.identity(1 << self.dim, self.dim, self.order)}

    def lefschetz_power(self, r: int) -> Jet:
        """Матрица L^r"""
        if r < 0:
            raise ValueError(f"Отрицательная степень L: {r}")
        cache = self._power_cache
        if r not in cache:
            cache[r] = self.lefschetz_matrix @ self.lefschetz_power(r - 1)
        return cache[r]

    @functools.cached_property
    def volume_coefficient(self) -> Jet:
        """Коэффициент формы объёма ω^n/n! при dx^1 ∧ ... ∧ dx^{2n}"""
        full = (1 << self.dim) - 1
        return self.lefschetz_power(self.n)[full, 0] * (1.0 / math.factorial(self.n))

    @property
    def volume(self) -> Form:
        full = (1 << self.dim) - 1
        coeffs = Jet.assemble((1 << self.dim,), self.dim, self.order, [((np.array([full]),), self.volume_coefficient[None])])
        return Form(coeffs, self.dim)

    @functools.cached_property
    def star_matrix(self) -> Jet:
        return star_matrix(self.gram, self.volume_coefficient, self.dim)

    @functools.cached_property
    def star_inverse_matrix(self) -> Jet:
        # на k-формах ⋆⁻¹ = (-1)^k ⋆
        return self.star_matrix * basis_tables(self.dim).parity()[None, :]

    @functools.cached_property
    def lambda_matrix(self) -> Jet:
        return self.star_inverse_matrix @ self.lefschetz_matrix @ self.star_matrix

    @functools.cached_property
    def projector_stack(self):
        return bigrade_projector_stack(self.J)

    @functools.cached_property
    def _projector_cache(self) -> Dict[Tuple[int, int], Jet]:
        return {}

    def projector(self, p: int, q: int) -> Jet:
        """Матрица проектора Π_{p,q}"""
        key = (p, q)
        cache = self._projector_cache
        if key not in cache:
            mask = basis_tables(self.dim).degree_mask(p + q)
            cache[key] = self.projector_stack[q] * mask
        return cache[key]

    @functools.cached_property
    def I_matrix(self) -> Jet:
        return structured_I(self.projector_stack, self.dim)

    @functools.cached_property
    def I_inverse_matrix(self) -> Jet:
        return structured_I(self.projector_stack, self.dim, inverse=True)

    @functools.cached_property
    def d_omega_norm(self) -> float:
        return self.d_omega.value().max_abs()

    @functools.cached_property
    def nijenhuis_norm(self) -> float:
        return float(np.max(np.abs(nijenhuis(self))))

    # ------------------------------------------------------------------
    # Сериализация

    def to_dict(self) -> dict:
        return {'n': self.n, 'descr': self.descr, 'J': self.J.to_dict(), 'g': self.g.to_dict()}

    @staticmethod
    def from_dict(data: dict) -> 'AlmostHermitianStructure':
        return AlmostHermitianStructure(
            n=data['n'],
            J=Jet.from_dict(data['J']),
            g=Jet.from_dict(data['g']),
            descr=data.get('descr', 'custom'),
        )


def nijenhuis(s: AlmostHermitianStructure) -> np.ndarray:
    """
    Тензор Нийенхейса в точке

    N(∂_a, ∂_b) = [J∂_a, J∂_b] - J[J∂_a, ∂_b] - J[∂_a, J∂_b] - [∂_a, ∂_b]

    Returns:
        Массив N[c, a, b] - c-я компонента N(∂_a, ∂_b)
    """
    J = s.J.value
    grad = s.J.gradient
    tensor = (np.einsum('da,dcb->cab', J, grad)
              - np.einsum('db,dca->cab', J, grad)
              + np.einsum('ce,bea->cab', J, grad)
              - np.einsum('ce,aeb->cab', J, grad))
    return np.real(tensor)


def _jet_from_parts(value: np.ndarray, gradient: np.ndarray, order: int) -> Jet:
    dim = gradient.shape[0]
    hessian = np.zeros((dim, dim) + value.shape) if order >= 2 else None
    return Jet(value, gradient, hessian, dim=dim)


def _structure_from_frame(n: int, frame: Jet, metric: Jet, descr: str) -> AlmostHermitianStructure:
    """J = A J₀ A⁻¹, g = (h + Jᵀ h J)/2"""
    dim = 2 * n
    inverse = jet_linear_solve(frame, Jet.identity(dim, dim, frame.order))
    J = frame @ Jet.constant(standard_complex_structure(n), dim, frame.order) @ inverse
    g = (metric + J.T @ metric @ J) * 0.5
    return AlmostHermitianStructure(n=n, J=J.map_slots(np.real), g=g.map_slots(np.real), descr=descr)


def random_structure(seed: int, n: int, perturbation_scale: float = DEFAULT_PERTURBATION_SCALE,
                     order: int = 1) -> AlmostHermitianStructure:
    """
    Случайная почти эрмитова структура

    Args:
        seed: Зерно генератора
        n: Комплексная размерность
        perturbation_scale: Масштаб отклонения от плоской кэлеровой структуры
        order: Порядок джетов J и g

    Returns:
        AlmostHermitianStructure; при нулевом масштабе - плоская кэлерова
    """
    if n < 1:
        raise StructureError(f"Комплексная размерность должна быть положительной: {n}")
    if order not in (1, 2):
        raise JetOrderError(f"Порядок структуры должен быть 1 или 2: {order}")
    dim = 2 * n
    rng = make_rng(seed)
    root = math.sqrt(dim)
    for attempt in range(MAX_ATTEMPTS):
        frame_value = np.eye(dim) + perturbation_scale * rng.standard_normal((dim, dim)) / root
        frame_grad = perturbation_scale * rng.standard_normal((dim, dim, dim)) / root
        base = rng.standard_normal((dim, dim)) / root
        raw = rng.standard_normal((dim, dim, dim)) / root
        if np.linalg.cond(frame_value) > FRAME_CONDITION_LIMIT:
            logger.warning(f"Вырожденная рамка для seed={seed}, попытка {attempt + 1}")
            continue
        metric_value = np.eye(dim) + perturbation_scale * base @ base.T
        metric_grad = perturbation_scale * (raw + raw.swapaxes(1, 2)) / 2
        try:
            return _structure_from_frame(
                n,
                _jet_from_parts(frame_value, frame_grad, order),
                _jet_from_parts(metric_value, metric_grad, order),
                f'random(seed={seed}, scale={perturbation_scale})',
            )
        except (SingularSystemError, StructureError) as e:
            logger.warning(f"Не удалось построить структуру для seed={seed}, попытка {attempt + 1}: {e}")
    raise StructureError(f"Не удалось построить случайную структуру для seed={seed} за {MAX_ATTEMPTS} попыток")


def _almost_kahler_parameters(n: int, rng: np.random.Generator, scale: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Первые производные рамки и метрики с dω = 0 в точке

    dω в точке линейно зависит от параметров; случайный вектор
    проецируется на ядро этого отображения.
    """
    dim = 2 * n
    J0 = standard_complex_structure(n)
    size = dim ** 3
    triples = [(a, b, c) for a in range(dim) for b in range(a + 1, dim) for c in range(b + 1, dim)]
    rows = np.array(triples).T

    def unpack(params):
        frame_grad = params[:size].reshape(dim, dim, dim)
        raw = params[size:].reshape(dim, dim, dim)
        return frame_grad, (raw + raw.swapaxes(1, 2)) / 2

    def d_omega(params):
        frame_grad, metric_grad = unpack(params)
        dJ = frame_grad @ J0 - J0 @ frame_grad
        dg = (metric_grad + dJ.swapaxes(1, 2) @ J0 + J0.T @ metric_grad @ J0 + J0.T @ dJ) / 2
        # dW[i, a, b] = ∂_i ω_ab при g(0) = I
        dW = dJ.swapaxes(1, 2) + J0.T @ dg
        a, b, c = rows
        return dW[a, b, c] - dW[b, a, c] + dW[c, a, b]

    linear_map = np.stack([d_omega(unit) for unit in np.eye(2 * size)], axis=1)
    kernel = scipy.linalg.null_space(linear_map)
    params = kernel @ (kernel.T @ (scale * rng.standard_normal(2 * size)))
    return unpack(params)


def preset(name: str, n: int = 2, order: int = 1) -> AlmostHermitianStructure:
    """
    Готовые структуры

    Args:
        name: flat_kahler, hermitian_nonkahler, almost_kahler_nonintegrable или generic
        n: Комплексная размерность
        order: Порядок джетов

    Returns:
        AlmostHermitianStructure с descr = name
    """
    if name not in PRESETS:
        raise UnknownPresetError(f"Неизвестный пресет: {name}")
    if n < 1:
        raise StructureError(f"Комплексная размерность должна быть положительной: {n}")
    dim = 2 * n
    J0 = standard_complex_structure(n)

    if name == 'flat_kahler':
        return AlmostHermitianStructure(
            n=n, J=Jet.constant(J0, dim, order), g=Jet.identity(dim, dim, order), descr=name)

    if name == 'hermitian_nonkahler':
        # конформно плоская метрика e^{x_1} I
        gradient = np.zeros((dim, dim, dim))
        gradient[0] = np.eye(dim)
        hessian = None
        if order >= 2:
            hessian = np.zeros((dim, dim, dim, dim))
            hessian[0, 0] = np.eye(dim)
        return AlmostHermitianStructure(
            n=n, J=Jet.constant(J0, dim, order), g=Jet(np.eye(dim), gradient, hessian, dim=dim), descr=name)

    if name == 'almost_kahler_nonintegrable':
        if n < 2:
            raise StructureError("В вещественной размерности 2 всякая почти комплексная структура интегрируема")
        frame_grad, metric_grad = _almost_kahler_parameters(n, make_rng(ALMOST_KAHLER_SEED), ALMOST_KAHLER_SCALE)
        return _structure_from_frame(
            n,
            _jet_from_parts(np.eye(dim), frame_grad, order),
            _jet_from_parts(np.eye(dim), metric_grad, order),
            name,
        )

    structure = random_structure(GENERIC_SEED, n, GENERIC_SCALE, order)
    return dataclasses.replace(structure, descr=name)
