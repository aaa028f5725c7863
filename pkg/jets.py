"""
Джеты: усечённые ряды Тейлора массивозначных функций в начале координат ℝ^m
"""
import logging
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from errors import DimensionError, InconsistentSystemError, JetOrderError, SingularSystemError

logger = logging.getLogger(__name__)

MAX_ORDER = 2

# Предельное число обусловленности при решении систем
CONDITION_LIMIT = 1e12

# Относительная невязка, при которой переопределённая система считается несовместной
CONSISTENCY_TOL = 1e-8

# Умножение матрица/вектор по числу хвостовых осей операндов; ведущие оси
# (слоты производных) транслируются, np.matmul уходит в BLAS
_MATMUL_OPS = {
    (2, 1): lambda x, y: np.matmul(x, y[..., None])[..., 0],
    (2, 2): np.matmul,
    (1, 2): lambda x, y: np.matmul(x[..., None, :], y)[..., 0, :],
    (1, 1): lambda x, y: np.einsum('...i,...i->...', x, y),
}


class Jet:
    """
    Джет порядка K ∈ {0, 1, 2} функции со значениями в массивах фиксированной формы

    Производные хранятся в ведущих осях: gradient[i] = ∂_i f(0),
    hessian[i, j] = ∂_i ∂_j f(0). Порядок 0 означает обычные коэффициенты в точке.
    Экземпляры неизменяемы, все операции возвращают новые джеты.
    """

    # ndarray (op) Jet должен передавать управление методам Jet
    __array_ufunc__ = None

    def __init__(self, value, gradient=None, hessian=None, dim: Optional[int] = None):
        value = np.array(value, dtype=complex)
        if gradient is None:
            if hessian is not None:
                raise JetOrderError("Гессиан задан без градиента")
            if dim is None:
                raise DimensionError("Для джета порядка 0 нужно указать размерность dim")
        else:
            gradient = np.array(gradient, dtype=complex)
            if dim is None:
                dim = gradient.shape[0] if gradient.ndim else 0
            if gradient.shape != (dim,) + value.shape:
                raise DimensionError(f"Форма градиента {gradient.shape} не согласована с {(dim,) + value.shape}")
            if hessian is not None:
                hessian = np.array(hessian, dtype=complex)
                if hessian.shape != (dim, dim) + value.shape:
                    raise DimensionError(f"Форма гессиана {hessian.shape} не согласована с {(dim, dim) + value.shape}")
        self._set(value, gradient, hessian, int(dim))

    def _set(self, value, gradient, hessian, dim):
        self.value = value
        self.gradient = gradient
        self.hessian = hessian
        self.dim = dim
        for arr in self.slots():
            arr.flags.writeable = False

    @classmethod
    def _wrap(cls, value, gradient, hessian, dim) -> 'Jet':
        """Создание без копирования и проверок (массивы уже принадлежат новому джету)"""
        obj = cls.__new__(cls)
        obj._set(
            np.asarray(value, dtype=complex),
            None if gradient is None else np.asarray(gradient, dtype=complex),
            None if hessian is None else np.asarray(hessian, dtype=complex),
            dim,
        )
        return obj

    # ------------------------------------------------------------------
    # Свойства

    @property
    def order(self) -> int:
        if self.gradient is None:
            return 0
        return 1 if self.hessian is None else 2

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.value.shape

    @property
    def ndim(self) -> int:
        return self.value.ndim

    def slots(self) -> List[np.ndarray]:
        """Список массивов коэффициентов: значение, градиент, гессиан"""
        return [arr for arr in (self.value, self.gradient, self.hessian) if arr is not None]

    def map_slots(self, func: Callable[[np.ndarray], np.ndarray]) -> 'Jet':
        """
        Применить линейную функцию ко всем слотам

        Функция должна работать с произвольными ведущими осями (через Ellipsis).
        """
        return Jet._wrap(
            func(self.value),
            None if self.gradient is None else func(self.gradient),
            None if self.hessian is None else func(self.hessian),
            self.dim,
        )

    def truncate(self, order: int) -> 'Jet':
        """Отбросить производные выше заданного порядка"""
        if order > self.order:
            raise JetOrderError(f"Нельзя повысить порядок джета с {self.order} до {order}")
        return Jet._wrap(
            self.value,
            self.gradient if order >= 1 else None,
            self.hessian if order >= 2 else None,
            self.dim,
        )

    def value_jet(self) -> 'Jet':
        return self.truncate(0)

    def conj(self) -> 'Jet':
        return self.map_slots(np.conj)

    @property
    def T(self) -> 'Jet':
        return self.map_slots(lambda arr: np.swapaxes(arr, -1, -2))

    def __getitem__(self, key) -> 'Jet':
        if not isinstance(key, tuple):
            key = (key,)
        index = (Ellipsis,) + key
        return self.map_slots(lambda arr: arr[index])

    def max_abs(self) -> float:
        """Максимум модуля по всем слотам"""
        return max((float(np.max(np.abs(arr))) for arr in self.slots() if arr.size), default=0.0)

    def allclose(self, other: 'Jet', atol: float) -> bool:
        return (self - other).max_abs() <= atol

    def __repr__(self):
        return f"Jet(order={self.order}, dim={self.dim}, shape={self.shape})"

    # ------------------------------------------------------------------
    # Арифметика

    def _check_pair(self, other: 'Jet'):
        if self.dim != other.dim:
            raise DimensionError(f"Размерности джетов различаются: {self.dim} и {other.dim}")
        if self.order != other.order:
            raise DimensionError(f"Порядки джетов различаются: {self.order} и {other.order}")

    def _expand(self, ndim: int) -> 'Jet':
        if ndim == self.ndim:
            return self
        tail = (1,) * (ndim - self.ndim) + self.shape
        return self.map_slots(lambda arr: arr.reshape(arr.shape[:arr.ndim - self.ndim] + tail))

    def __add__(self, other) -> 'Jet':
        if isinstance(other, Jet):
            self._check_pair(other)
            if self.shape != other.shape:
                raise DimensionError(f"Формы джетов различаются: {self.shape} и {other.shape}")
            return Jet._wrap(*[a + b for a, b in zip(self.slots(), other.slots())]
                             + [None] * (2 - self.order), self.dim)
        const = np.asarray(other)
        value = self.value + const
        if value.shape != self.shape:
            raise DimensionError(f"Константа формы {const.shape} меняет форму джета {self.shape}")
        return Jet._wrap(value, self.gradient, self.hessian, self.dim)

    __radd__ = __add__

    def __neg__(self) -> 'Jet':
        return self.map_slots(np.negative)

    def __sub__(self, other) -> 'Jet':
        return self + (-other)

    def __rsub__(self, other) -> 'Jet':
        return (-self) + other

    def __mul__(self, other) -> 'Jet':
        if isinstance(other, Jet):
            self._check_pair(other)
            ndim = max(self.ndim, other.ndim)
            return _leibniz(self._expand(ndim), other._expand(ndim), np.multiply)
        const = np.asarray(other)
        if const.ndim > self.ndim:
            raise DimensionError(f"Константа формы {const.shape} шире джета {self.shape}")
        return self.map_slots(lambda arr: arr * const)

    __rmul__ = __mul__

    def reciprocal(self) -> 'Jet':
        """Джет функции 1/f"""
        if np.any(self.value == 0):
            raise ZeroDivisionError("Значение джета обращается в ноль")
        inv = 1.0 / self.value
        gradient = hessian = None
        if self.order >= 1:
            gradient = -self.gradient * inv ** 2
        if self.order >= 2:
            hessian = (-self.hessian * inv ** 2
                       + 2 * self.gradient[:, None] * self.gradient[None] * inv ** 3)
        return Jet._wrap(inv, gradient, hessian, self.dim)

    def __truediv__(self, other) -> 'Jet':
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return self * (1.0 / np.asarray(other, dtype=complex))

    def __matmul__(self, other) -> 'Jet':
        if isinstance(other, Jet):
            self._check_pair(other)
            op = _MATMUL_OPS.get((self.ndim, other.ndim))
            if op is None:
                raise DimensionError(f"Умножение форм {self.shape} @ {other.shape} не поддерживается")
            return _leibniz(self, other, op)
        const = np.asarray(other)
        if const.ndim != 2 or self.ndim not in (1, 2):
            raise DimensionError(f"Умножение форм {self.shape} @ {const.shape} не поддерживается")
        return self.map_slots(lambda arr: arr @ const)

    def __rmatmul__(self, other) -> 'Jet':
        const = np.asarray(other)
        if const.ndim != 2:
            raise DimensionError(f"Умножение форм {const.shape} @ {self.shape} не поддерживается")
        if self.ndim == 1:
            return self.map_slots(lambda arr: np.einsum('ij,...j->...i', const, arr))
        if self.ndim == 2:
            return self.map_slots(lambda arr: np.matmul(const, arr))
        raise DimensionError(f"Умножение форм {const.shape} @ {self.shape} не поддерживается")

    def contract(self, const) -> 'Jet':
        """Свёртка последней оси джета с первой осью постоянного массива"""
        const = np.asarray(const)
        if self.ndim == 0 or const.shape[0] != self.shape[-1]:
            raise DimensionError(f"Свёртка {self.shape} с {const.shape} невозможна")
        return self.map_slots(lambda arr: np.tensordot(arr, const, axes=([arr.ndim - 1], [0])))

    # ------------------------------------------------------------------
    # Конструкторы

    @staticmethod
    def zeros(shape: Sequence[int], dim: int, order: int) -> 'Jet':
        shape = tuple(shape)
        return Jet._wrap(
            np.zeros(shape, dtype=complex),
            np.zeros((dim,) + shape, dtype=complex) if order >= 1 else None,
            np.zeros((dim, dim) + shape, dtype=complex) if order >= 2 else None,
            dim,
        )

    @staticmethod
    def constant(value, dim: int, order: int) -> 'Jet':
        """Джет постоянной функции"""
        value = np.array(value, dtype=complex)
        jet = Jet.zeros(value.shape, dim, order)
        return Jet._wrap(value, jet.gradient, jet.hessian, dim)

    @staticmethod
    def identity(size: int, dim: int, order: int) -> 'Jet':
        return Jet.constant(np.eye(size), dim, order)

    @staticmethod
    def coordinate(index: int, dim: int, order: int) -> 'Jet':
        """Джет координатной функции x_index"""
        if order < 1:
            raise JetOrderError("Координатная функция требует порядок не ниже 1")
        gradient = np.zeros(dim, dtype=complex)
        gradient[index] = 1.0
        hessian = np.zeros((dim, dim), dtype=complex) if order >= 2 else None
        return Jet._wrap(np.zeros((), dtype=complex), gradient, hessian, dim)

    @staticmethod
    def random(rng: np.random.Generator, shape: Sequence[int], dim: int, order: int,
               scale: float = 1.0, complex_valued: bool = True) -> 'Jet':
        """
        Случайный джет с гауссовыми коэффициентами

        Args:
            rng: Генератор случайных чисел
            shape: Форма значений
            dim: Размерность пространства переменных
            order: Порядок джета
            scale: Масштаб коэффициентов
            complex_valued: Комплексные или вещественные коэффициенты

        Returns:
            Джет с симметричным гессианом
        """
        shape = tuple(shape)

        def draw(full_shape):
            sample = rng.standard_normal(full_shape)
            if complex_valued:
                sample = sample + 1j * rng.standard_normal(full_shape)
            return scale * sample

        value = draw(shape)
        gradient = draw((dim,) + shape) if order >= 1 else None
        hessian = None
        if order >= 2:
            raw = draw((dim, dim) + shape)
            hessian = (raw + np.swapaxes(raw, 0, 1)) / 2
        return Jet._wrap(value, gradient, hessian, dim)

    @staticmethod
    def stack(jets: Sequence['Jet'], axis: int = 0) -> 'Jet':
        """Сложить джеты одной формы вдоль новой хвостовой оси"""
        first = jets[0]
        for jet in jets[1:]:
            first._check_pair(jet)
        tail_axis = axis if axis < 0 else axis - (first.ndim + 1)
        slots = [np.stack(group, axis=tail_axis) for group in zip(*(jet.slots() for jet in jets))]
        return Jet._wrap(*slots, *([None] * (2 - first.order)), first.dim)

    @staticmethod
    def assemble(shape: Sequence[int], dim: int, order: int, placements) -> 'Jet':
        """
        Собрать джет из блоков

        Args:
            shape: Форма результата
            dim: Размерность пространства переменных
            order: Порядок результата
            placements: Пары (индекс по хвостовым осям, блок-джет)

        Returns:
            Джет, нулевой вне блоков
        """
        zeros = Jet.zeros(shape, dim, order)
        slots = [arr.copy() for arr in zeros.slots()]
        for key, block in placements:
            if not isinstance(key, tuple):
                key = (key,)
            if block.dim != dim or block.order < order:
                raise DimensionError("Блок не согласован с собираемым джетом")
            for target, source in zip(slots, block.truncate(order).slots()):
                target[(Ellipsis,) + key] = source
        return Jet._wrap(*slots, *([None] * (2 - order)), dim)

    # ------------------------------------------------------------------
    # Сериализация

    def to_dict(self) -> dict:
        return {
            'dim': self.dim,
            'value': _encode(self.value),
            'gradient': None if self.gradient is None else _encode(self.gradient),
            'hessian': None if self.hessian is None else _encode(self.hessian),
        }

    @staticmethod
    def from_dict(data: dict) -> 'Jet':
        gradient = data.get('gradient')
        hessian = data.get('hessian')
        return Jet(
            _decode(data['value']),
            None if gradient is None else _decode(gradient),
            None if hessian is None else _decode(hessian),
            dim=data['dim'],
        )


def _encode(arr: np.ndarray):
    if not np.any(arr.imag):
        return arr.real.tolist()
    return {'re': arr.real.tolist(), 'im': arr.imag.tolist()}


def _decode(data) -> np.ndarray:
    if isinstance(data, dict):
        return np.asarray(data['re'], dtype=float) + 1j * np.asarray(data['im'], dtype=float)
    return np.asarray(data, dtype=complex)


def _leibniz(a: Jet, b: Jet, op) -> Jet:
    """Произведение по правилу Лейбница для билинейной операции op"""
    value = op(a.value, b.value)
    gradient = hessian = None
    if a.order >= 1:
        gradient = op(a.gradient, b.value) + op(a.value, b.gradient)
    if a.order >= 2:
        hessian = (op(a.hessian, b.value) + op(a.value, b.hessian)
                   + op(a.gradient[:, None], b.gradient[None])
                   + op(a.gradient[None], b.gradient[:, None]))
    return Jet._wrap(value, gradient, hessian, a.dim)


def jet_mul(a: Jet, b: Jet) -> Jet:
    """Поэлементное произведение джетов одного порядка и одной размерности"""
    if not isinstance(a, Jet) or not isinstance(b, Jet):
        raise TypeError("jet_mul ожидает два джета")
    return a * b


def _lu_solver(matrix: np.ndarray):
    if not np.all(np.isfinite(matrix)):
        raise SingularSystemError("Матрица системы содержит нечисловые значения")
    cond = np.linalg.cond(matrix)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise SingularSystemError(f"Матрица системы вырождена (обусловленность {cond:.3e})")
    factor = scipy.linalg.lu_factor(matrix, check_finite=False)
    return lambda rhs: scipy.linalg.lu_solve(factor, rhs, check_finite=False)


def _pinv_solver(matrix: np.ndarray):
    u, sing, vh = scipy.linalg.svd(matrix, full_matrices=False)
    if sing.size == 0 or sing[0] == 0 or sing[-1] < sing[0] / CONDITION_LIMIT:
        raise SingularSystemError("Переопределённая система не имеет полного ранга по столбцам")
    pinv = (vh.conj().T / sing) @ u.conj().T
    return lambda rhs: pinv @ rhs


def jet_linear_solve(matrix: Jet, rhs: Jet, least_squares: bool = False) -> Jet:
    """
    Решить A(x)·X(x) = B(x) на уровне джетов

    Значение A факторизуется один раз, производные решения находятся
    дифференцированием тождества A·X = B.

    Args:
        matrix: Джет матрицы A (квадратной либо, при least_squares, высокой)
        rhs: Джет правой части (вектор или матрица)
        least_squares: Решать переопределённую систему через псевдообратную
                       с проверкой совместности

    Returns:
        Джет решения того же порядка
    """
    if not isinstance(matrix, Jet) or not isinstance(rhs, Jet):
        raise TypeError("jet_linear_solve ожидает джеты")
    matrix._check_pair(rhs)
    if matrix.ndim != 2 or rhs.ndim not in (1, 2) or rhs.shape[0] != matrix.shape[0]:
        raise DimensionError(f"Система {matrix.shape} с правой частью {rhs.shape} не согласована")

    if least_squares:
        solve = _pinv_solver(matrix.value)
    else:
        if matrix.shape[0] != matrix.shape[1]:
            raise DimensionError(f"Матрица системы не квадратная: {matrix.shape}")
        solve = _lu_solver(matrix.value)

    dim = matrix.dim
    x0 = solve(rhs.value)
    gradient = hessian = None
    if matrix.order >= 1:
        gradient = np.stack([solve(rhs.gradient[i] - matrix.gradient[i] @ x0) for i in range(dim)])
    if matrix.order >= 2:
        hessian = np.empty((dim, dim) + x0.shape, dtype=complex)
        for i in range(dim):
            for j in range(dim):
                hessian[i, j] = solve(rhs.hessian[i, j] - matrix.hessian[i, j] @ x0
                                      - matrix.gradient[i] @ gradient[j]
                                      - matrix.gradient[j] @ gradient[i])
    solution = Jet._wrap(x0, gradient, hessian, dim)

    if least_squares:
        residual = (matrix @ solution - rhs).max_abs()
        scale = max(1.0, rhs.max_abs(), matrix.max_abs() * solution.max_abs())
        if residual > CONSISTENCY_TOL * scale:
            logger.error(f"Несовместная система: невязка {residual:.3e} при масштабе {scale:.3e}")
            raise InconsistentSystemError(f"Переопределённая система несовместна (невязка {residual:.3e})")
    return solution
