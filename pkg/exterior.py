"""
Внешняя алгебра в точке: формы, внешнее произведение, звезда Ходжа,
операторы Лефшеца, проекторы бистепени и разложение Лефшеца
"""
import functools
import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from errors import BidegreeError, DimensionError
from jets import Jet, jet_linear_solve

if TYPE_CHECKING:
    from geometry import AlmostHermitianStructure

logger = logging.getLogger(__name__)

# Относительный порог, ниже которого компонента бистепени считается нулевой
PURITY_TOL = 1e-10

# Абсолютный порог, ниже которого форма считается нулевой
ZERO_TOL = 1e-12


@dataclass(frozen=True)
class BasisTables:
    """
    Таблицы базиса dx^I, индексированного битовыми масками

    Бит i маски соответствует dx^i, базисные мономы упорядочены по значению маски.
    """
    dim: int
    size: int
    degrees: np.ndarray
    by_degree: Tuple[np.ndarray, ...]
    wedge_sign: np.ndarray
    pair_left: np.ndarray
    pair_right: np.ndarray
    pair_union: np.ndarray
    pair_sign: np.ndarray
    one_forms: np.ndarray

    def degree_mask(self, degree: int) -> np.ndarray:
        return (self.degrees == degree).astype(float)

    def parity(self) -> np.ndarray:
        """Диагональ (-1)^deg"""
        return 1.0 - 2.0 * (self.degrees % 2)

    def scatter_wedge(self, coeffs: np.ndarray) -> np.ndarray:
        """Матрица левого умножения на форму с коэффициентами coeffs (с ведущими осями)"""
        out = np.zeros(coeffs.shape[:-1] + (self.size, self.size), dtype=complex)
        out[..., self.pair_union, self.pair_right] = coeffs[..., self.pair_left] * self.pair_sign
        return out


@functools.lru_cache(maxsize=None)
def basis_tables(dim: int) -> BasisTables:
    """Построить (и закешировать) таблицы базиса для размерности dim"""
    size = 1 << dim
    masks = np.arange(size)
    bits = (masks[:, None] >> np.arange(dim)) & 1
    degrees = bits.sum(axis=1)
    by_degree = tuple(masks[degrees == k] for k in range(dim + 1))

    # e_I ∧ e_J = (-1)^{#{(a∈I, b∈J): a > b}} e_{I∪J}
    above = bits @ np.tril(np.ones((dim, dim), dtype=int), -1)
    inversions = above @ bits.T
    overlap = (masks[:, None] & masks[None, :]) != 0
    wedge_sign = np.where(overlap, 0, 1 - 2 * (inversions % 2))

    left, right = np.nonzero(~overlap)
    tables = BasisTables(
        dim=dim,
        size=size,
        degrees=degrees,
        by_degree=by_degree,
        wedge_sign=wedge_sign,
        pair_left=left,
        pair_right=right,
        pair_union=left | right,
        pair_sign=wedge_sign[left, right].astype(float),
        one_forms=np.zeros((0,)),
    )
    one_forms = np.eye(size)[1 << np.arange(dim)] if dim else np.zeros((0, size))
    object.__setattr__(tables, 'one_forms', tables.scatter_wedge(one_forms).real)
    return tables


class Form:
    """
    Комплексная внешняя форма в точке

    Коэффициенты хранятся джетом формы (2^dim,); джет порядка 0 задаёт
    форму с обычными коэффициентами, порядок 1 и 2 задают росток формы.
    """

    def __init__(self, coeffs: Jet, dim: int):
        if coeffs.shape != (1 << dim,):
            raise DimensionError(f"Ожидались коэффициенты формы ({1 << dim},), получено {coeffs.shape}")
        if coeffs.dim != dim:
            raise DimensionError(f"Размерность джета {coeffs.dim} не совпадает с размерностью формы {dim}")
        self.coeffs = coeffs
        self.dim = dim

    # ------------------------------------------------------------------
    # Конструкторы

    @staticmethod
    def zero(dim: int, order: int = 0) -> 'Form':
        return Form(Jet.zeros((1 << dim,), dim, order), dim)

    @staticmethod
    def basis(dim: int, indices: Sequence[int], order: int = 0) -> 'Form':
        """Мономиальная форма dx^{i_1} ∧ ... ∧ dx^{i_k} (индексы с нуля)"""
        return Form.from_components(dim, {tuple(indices): 1.0}, order)

    @staticmethod
    def from_components(dim: int, components: Mapping[Tuple[int, ...], object], order: int = 0) -> 'Form':
        """
        Собрать форму из словаря мультииндекс -> коэффициент

        Неупорядоченные мультииндексы сортируются со знаком перестановки,
        повторяющиеся индексы дают ноль. Коэффициент - число или скалярный джет.
        """
        result = Form.zero(dim, order)
        for indices, coeff in components.items():
            if any(i < 0 or i >= dim for i in indices):
                raise DimensionError(f"Индекс вне диапазона 0..{dim - 1}: {indices}")
            if len(set(indices)) != len(indices):
                continue
            inversions = sum(1 for a in range(len(indices)) for b in range(a + 1, len(indices))
                             if indices[a] > indices[b])
            mask = sum(1 << i for i in indices)
            unit = np.zeros(1 << dim)
            unit[mask] = -1.0 if inversions % 2 else 1.0
            if isinstance(coeff, Jet):
                term = Form(coeff.truncate(order) * Jet.constant(unit, dim, order), dim)
            else:
                term = Form(Jet.constant(unit * coeff, dim, order), dim)
            result = result + term
        return result

    @staticmethod
    def random(rng: np.random.Generator, dim: int, degree: Optional[int] = None,
               order: int = 1, scale: float = 1.0) -> 'Form':
        """Случайная форма (росток) заданной степени; degree=None - все степени"""
        coeffs = Jet.random(rng, (1 << dim,), dim, order, scale)
        if degree is not None:
            coeffs = coeffs * basis_tables(dim).degree_mask(degree)
        return Form(coeffs, dim)

    # ------------------------------------------------------------------
    # Свойства

    @property
    def order(self) -> int:
        return self.coeffs.order

    @property
    def n(self) -> int:
        return self.dim // 2

    def value(self) -> 'Form':
        """Значение формы в точке"""
        return Form(self.coeffs.value_jet(), self.dim)

    def truncate(self, order: int) -> 'Form':
        return Form(self.coeffs.truncate(order), self.dim)

    def coefficient(self, indices: Sequence[int]) -> Jet:
        """Джет коэффициента при dx^I для возрастающего мультииндекса"""
        return self.coeffs[sum(1 << i for i in indices)]

    def components(self, tol: float = 0.0) -> Dict[Tuple[int, ...], complex]:
        """Ненулевые коэффициенты в точке: мультииндекс -> число"""
        result = {}
        for mask, coeff in enumerate(self.coeffs.value):
            if abs(coeff) > tol:
                result[tuple(i for i in range(self.dim) if mask >> i & 1)] = complex(coeff)
        return result

    def degree_part(self, degree: int) -> 'Form':
        return Form(self.coeffs * basis_tables(self.dim).degree_mask(degree), self.dim)

    def degrees(self, tol: float = 0.0) -> List[int]:
        """Степени, в которых хотя бы один слот джета ненулевой"""
        degrees = basis_tables(self.dim).degrees
        present = np.zeros(self.dim + 1, dtype=bool)
        for arr in self.coeffs.slots():
            flat = np.abs(arr).reshape(-1, arr.shape[-1]).max(axis=0)
            present |= np.bincount(degrees, weights=(flat > tol).astype(float), minlength=self.dim + 1) > 0
        return [k for k in range(self.dim + 1) if present[k]]

    @property
    def degree(self) -> Optional[int]:
        """Степень однородной формы; None для нулевой формы"""
        degrees = self.degrees()
        if len(degrees) > 1:
            raise ValueError(f"Форма неоднородна, степени {degrees}")
        return degrees[0] if degrees else None

    def max_abs(self) -> float:
        return self.coeffs.max_abs()

    def is_zero(self, tol: float = 0.0) -> bool:
        return self.max_abs() <= tol

    def conj(self) -> 'Form':
        return Form(self.coeffs.conj(), self.dim)

    # ------------------------------------------------------------------
    # Арифметика

    def _aligned(self, other: 'Form') -> Tuple[Jet, Jet]:
        if self.dim != other.dim:
            raise DimensionError(f"Размерности форм различаются: {self.dim} и {other.dim}")
        order = min(self.order, other.order)
        return self.coeffs.truncate(order), other.coeffs.truncate(order)

    def __add__(self, other: 'Form') -> 'Form':
        left, right = self._aligned(other)
        return Form(left + right, self.dim)

    def __sub__(self, other: 'Form') -> 'Form':
        left, right = self._aligned(other)
        return Form(left - right, self.dim)

    def __neg__(self) -> 'Form':
        return Form(-self.coeffs, self.dim)

    def __mul__(self, other) -> 'Form':
        """Умножение на число или на функцию (скалярный джет)"""
        if isinstance(other, Jet):
            if other.ndim != 0:
                raise DimensionError("Форму можно умножать только на скалярный джет")
            order = min(self.order, other.order)
            return Form(other.truncate(order) * self.coeffs.truncate(order), self.dim)
        return Form(self.coeffs * complex(other), self.dim)

    __rmul__ = __mul__

    def __truediv__(self, other) -> 'Form':
        return self * (1.0 / complex(other))

    def __repr__(self):
        return f"Form(dim={self.dim}, order={self.order}, degrees={self.degrees()})"


# ----------------------------------------------------------------------
# Линейная алгебра на формах

def wedge_matrix(coeffs: Jet, dim: int) -> Jet:
    """Джет матрицы левого внешнего умножения на форму с коэффициентами coeffs"""
    tables = basis_tables(dim)
    return coeffs.map_slots(tables.scatter_wedge)


def wedge(a: Form, b: Form) -> Form:
    """Внешнее произведение; коэффициенты усекаются до общего порядка"""
    left, right = a._aligned(b)
    return Form(wedge_matrix(left, a.dim) @ right, a.dim)


def apply_operator(matrix: Jet, a: Form) -> Form:
    """Применить оператор, заданный джетом матрицы, к форме"""
    if matrix.shape != (a.coeffs.shape[0],) * 2:
        raise DimensionError(f"Оператор {matrix.shape} не действует на формы размерности {a.dim}")
    order = min(matrix.order, a.order)
    return Form(matrix.truncate(order) @ a.coeffs.truncate(order), a.dim)


def exterior_power(matrix: Jet) -> Jet:
    """
    Продолжение линейного отображения ковекторов на всю внешнюю алгебру

    Столбец e_J равен (A e_b) ∧ Λ(A) e_{J∖b}, где b - младший индекс J;
    элементы результата - миноры det A[I, J].

    Args:
        matrix: Джет квадратной матрицы A размера dim

    Returns:
        Джет матрицы Λ(A) размера 2^dim
    """
    dim = matrix.shape[0]
    tables = basis_tables(dim)
    left_mult = [matrix[:, b].contract(tables.one_forms) for b in range(dim)]
    unit = np.zeros(tables.size)
    unit[0] = 1.0
    columns = {0: Jet.constant(unit, matrix.dim, matrix.order)}
    for degree in range(1, dim + 1):
        masks = tables.by_degree[degree]
        lowest = masks & -masks
        for b in range(dim):
            group = masks[lowest == (1 << b)]
            if not group.size:
                continue
            rest = Jet.stack([columns[int(mask ^ (1 << b))] for mask in group], axis=1)
            block = left_mult[b] @ rest
            for idx, mask in enumerate(group):
                columns[int(mask)] = block[:, idx]
    return Jet.stack([columns[mask] for mask in range(tables.size)], axis=1)


# ----------------------------------------------------------------------
# Построение операторов структуры

def omega_form(J: Jet, g: Jet) -> Form:
    """Фундаментальная форма ω(X, Y) = g(JX, Y)"""
    dim = J.shape[0]
    rows, cols = np.triu_indices(dim, 1)
    values = (J.T @ g)[(rows, cols)]
    coeffs = Jet.assemble((1 << dim,), J.dim, J.order, [(((1 << rows) | (1 << cols),), values)])
    return Form(coeffs, dim)


def gram_matrix(g: Jet) -> Jet:
    """Матрица Грама послойной метрики на формах: миноры g^{-1}"""
    inverse = jet_linear_solve(g, Jet.identity(g.shape[0], g.dim, g.order))
    return exterior_power(inverse)


def star_matrix(gram: Jet, volume: Jet, dim: int) -> Jet:
    """
    Звезда Ходжа из условия a ∧ ⋆conj(b) = <a, b> vol

    Для каждой степени k решается Pair_k S_k = vol * G_k, где Pair_k - знаки
    e_I ∧ e_K для дополнительных мультииндексов.
    """
    tables = basis_tables(dim)
    placements = []
    for k in range(dim + 1):
        rows = tables.by_degree[k]
        comp = tables.by_degree[dim - k]
        pairing = Jet.constant(tables.wedge_sign[np.ix_(rows, comp)], gram.dim, gram.order)
        block = jet_linear_solve(pairing, volume * gram[np.ix_(rows, rows)])
        placements.append((np.ix_(comp, rows), block))
    return Jet.assemble((tables.size, tables.size), gram.dim, gram.order, placements)


def bigrade_projector_stack(J: Jet) -> List[Jet]:
    """
    Проекторы на компоненты с заданной антиголоморфной степенью q

    Λ(P10 + t P01) умножает (p,q)-форму на t^q, поэтому дискретное
    преобразование Фурье по корням из единицы степени dim+1 выделяет q.
    """
    dim = J.shape[0]
    identity = Jet.identity(dim, J.dim, J.order)
    holo = (identity - J.T * 1j) * 0.5
    antiholo = (identity + J.T * 1j) * 0.5
    roots = np.exp(2j * np.pi * np.arange(dim + 1) / (dim + 1))
    powers = [exterior_power(holo + antiholo * t) for t in roots]
    stack = []
    for q in range(dim + 1):
        total = powers[0] * (roots[0] ** (-q) / (dim + 1))
        for t, power in zip(roots[1:], powers[1:]):
            total = total + power * (t ** (-q) / (dim + 1))
        stack.append(total)
    return stack


def structured_I(stack: Sequence[Jet], dim: int, inverse: bool = False) -> Jet:
    """Оператор 𝕀 = Σ i^{p-q} Π_{p,q} (или обратный)"""
    degrees = basis_tables(dim).degrees
    phases = np.array([1, -1j, -1, 1j]) if inverse else np.array([1, 1j, -1, -1j])
    total = None
    for q, projector in enumerate(stack):
        term = projector * phases[(degrees - 2 * q) % 4]
        total = term if total is None else total + term
    return total


# ----------------------------------------------------------------------
# Поточечные операторы почти эрмитовой структуры

def hodge_star(a: Form, s: 'AlmostHermitianStructure') -> Form:
    return apply_operator(s.star_matrix, a)


def hodge_star_inverse(a: Form, s: 'AlmostHermitianStructure') -> Form:
    return apply_operator(s.star_inverse_matrix, a)


def lefschetz_L(a: Form, s: 'AlmostHermitianStructure') -> Form:
    return apply_operator(s.lefschetz_matrix, a)


def lefschetz_lambda(a: Form, s: 'AlmostHermitianStructure') -> Form:
    """Сопряжённый к L оператор Λ = ⋆^{-1} L ⋆"""
    return apply_operator(s.lambda_matrix, a)


def lefschetz_power(a: Form, r: int, s: 'AlmostHermitianStructure') -> Form:
    return apply_operator(s.lefschetz_power(r), a)


def apply_I(a: Form, s: 'AlmostHermitianStructure') -> Form:
    return apply_operator(s.I_matrix, a)


def apply_I_inv(a: Form, s: 'AlmostHermitianStructure') -> Form:
    return apply_operator(s.I_inverse_matrix, a)


def bigrade_project(a: Form, p: int, q: int, s: 'AlmostHermitianStructure') -> Form:
    """Компонента бистепени (p, q); вне допустимого диапазона - ноль"""
    if p < 0 or q < 0 or p > s.n or q > s.n:
        return Form.zero(a.dim, min(a.order, s.order))
    return apply_operator(s.projector(p, q), a)


def bidegree_parts(a: Form, s: 'AlmostHermitianStructure') -> Dict[Tuple[int, int], Form]:
    """Все компоненты бистепени формы, включая пренебрежимо малые"""
    parts = {}
    for k in a.degrees():
        for q in range(max(0, k - s.n), min(k, s.n) + 1):
            parts[(k - q, q)] = bigrade_project(a, k - q, q, s)
    return parts


def pure_bidegree(a: Form, s: 'AlmostHermitianStructure', tol: float = PURITY_TOL) -> Optional[Tuple[int, int]]:
    """
    Бистепень формы чистого типа

    Returns:
        (p, q) или None для нулевой формы

    Raises:
        BidegreeError: если форма имеет несколько существенных компонент
    """
    scale = a.max_abs()
    if scale <= ZERO_TOL:
        return None
    found = [bideg for bideg, part in bidegree_parts(a, s).items() if part.max_abs() > tol * scale]
    if len(found) != 1:
        raise BidegreeError(f"Форма не имеет чистой бистепени: компоненты {sorted(found)}")
    return found[0]


def inner_product(a: Form, b: Form, s: 'AlmostHermitianStructure') -> complex:
    """Эрмитово произведение <a, b> = Σ a_I conj(b_J) G_IJ в точке"""
    if a.dim != s.dim or b.dim != s.dim:
        raise DimensionError("Размерности форм и структуры различаются")
    return complex(a.coeffs.value @ s.gram.value @ b.coeffs.value.conj())


def form_norm(a: Form, s: 'AlmostHermitianStructure') -> float:
    return math.sqrt(max(inner_product(a, a, s).real, 0.0))


# ----------------------------------------------------------------------
# Разложение Лефшеца

@dataclass(frozen=True)
class PrimitiveDecomposition:
    """Разложение a = Σ L^r α_r с примитивными α_r степени base_degree - 2r"""
    base_degree: int
    components: Tuple[Tuple[int, Form], ...]

    def component(self, r: int) -> Optional[Form]:
        for index, form in self.components:
            if index == r:
                return form
        return None

    def __iter__(self) -> Iterator[Tuple[int, Form]]:
        return iter(self.components)

    def reconstruct(self, s: 'AlmostHermitianStructure') -> Form:
        total = None
        for r, form in self.components:
            term = lefschetz_power(form, r, s)
            total = term if total is None else total + term
        return total


def lefschetz_decompose(a: Form, s: 'AlmostHermitianStructure', degree: Optional[int] = None) -> PrimitiveDecomposition:
    """
    Разложение Лефшеца однородной формы (ростка)

    Неизвестные α_r находятся одной переопределённой джет-системой
    [Σ L^r α_r = a; Λ α_r = 0]; несовместность означает ошибку операторов.

    Args:
        a: Однородная форма степени k
        s: Почти эрмитова структура
        degree: Степень (обязательна для нулевой формы)

    Returns:
        PrimitiveDecomposition с α_r для max(0, ⌈(k-n)/2⌉) <= r <= ⌊k/2⌋
    """
    if a.dim != s.dim:
        raise DimensionError("Размерности формы и структуры различаются")
    found = a.degree
    if degree is None:
        if found is None:
            raise ValueError("Для нулевой формы нужно указать степень")
        degree = found
    elif found is not None and found != degree:
        raise ValueError(f"Форма имеет степень {found}, ожидалась {degree}")

    tables = basis_tables(s.dim)
    order = min(a.order, s.order)
    n = s.n
    indices = list(range(max(0, -((n - degree) // 2)), degree // 2 + 1))
    top_rows = tables.by_degree[degree]

    placements = []
    col_offsets = {}
    offset = 0
    for r in indices:
        col_offsets[r] = offset
        offset += len(tables.by_degree[degree - 2 * r])
    n_cols = offset

    row_offset = len(top_rows)
    for r in indices:
        cols = tables.by_degree[degree - 2 * r]
        col_range = np.arange(col_offsets[r], col_offsets[r] + len(cols))
        block = s.lefschetz_power(r)[np.ix_(top_rows, cols)]
        placements.append((np.ix_(np.arange(len(top_rows)), col_range), block))
        if degree - 2 * r - 2 >= 0:
            lam_rows = tables.by_degree[degree - 2 * r - 2]
            block = s.lambda_matrix[np.ix_(lam_rows, cols)]
            placements.append((np.ix_(np.arange(row_offset, row_offset + len(lam_rows)), col_range), block))
            row_offset += len(lam_rows)

    system = Jet.assemble((row_offset, n_cols), s.dim, order, placements)
    rhs = Jet.assemble((row_offset,), s.dim, order,
                       [((np.arange(len(top_rows)),), a.coeffs.truncate(order)[top_rows])])
    solution = jet_linear_solve(system, rhs, least_squares=True)

    components = []
    for r in indices:
        cols = tables.by_degree[degree - 2 * r]
        part = solution[col_offsets[r]:col_offsets[r] + len(cols)]
        coeffs = Jet.assemble((tables.size,), s.dim, order, [((cols,), part)])
        components.append((r, Form(coeffs, s.dim)))
    return PrimitiveDecomposition(base_degree=degree, components=tuple(components))
