"""
Плотный оракул: независимое построение операторов на формах полными матрицами
"""
import itertools
import logging
import math
from typing import Dict, List, Tuple

import numpy as np

from calculus import exterior_d
from exterior import Form
from geometry import AlmostHermitianStructure
from identities import IdentityResidual, compare_forms, compare_jets, theorem_sides
from jets import Jet, jet_linear_solve

logger = logging.getLogger(__name__)

# Допуск сравнения с оракулом (цепочки операторов накапливают ошибку округления)
ORACLE_TOL = 1e-11


def _parity(sequence) -> int:
    """Чётность перестановки по числу инверсий: 0 или 1"""
    inversions = sum(1 for a, b in itertools.combinations(sequence, 2) if a > b)
    return inversions % 2


class DenseOracle:
    """
    Операторы почти эрмитовой структуры, построенные независимо от exterior.py

    Базис - кортежи возрастающих индексов, знаки находятся сортировкой,
    миноры - формулой Лейбница, звезда Ходжа - одним решением полной системы.
    """

    def __init__(self, s: AlmostHermitianStructure):
        self.s = s
        self.dim = s.dim
        self.size = 1 << s.dim
        self.order = s.order
        self.subsets = [tuple(i for i in range(self.dim) if mask >> i & 1) for mask in range(self.size)]
        self.index = {subset: mask for mask, subset in enumerate(self.subsets)}

        self.wedge_one = self._build_wedge_one()
        self.contraction = self._build_contraction()

        self.gram = self.minors(jet_linear_solve(s.g, self._identity(self.dim)))
        self.lefschetz = self._build_lefschetz()
        self.volume_coefficient = self._build_volume_coefficient()
        self.star = self._build_star()
        self.lambda_ = jet_linear_solve(self.gram, self.lefschetz.T @ self.gram)
        self.I = self.minors(s.J.T)
        self.I_inverse = jet_linear_solve(self.I, self._identity(self.size))
        self.projectors = self._build_projectors()
        self.d_matrix = self._build_d_matrix()
        logger.debug(f"Оракул построен для {s.descr}, n={s.n}")

    # ------------------------------------------------------------------
    # Построение

    def _identity(self, size: int) -> Jet:
        return Jet.identity(size, self.dim, self.order)

    def _build_wedge_one(self) -> np.ndarray:
        """dx^i ∧ e_T: индекс i встаёт на своё место после p транспозиций"""
        result = np.zeros((self.dim, self.size, self.size))
        for i in range(self.dim):
            for subset in self.subsets:
                if i in subset:
                    continue
                target = tuple(sorted(subset + (i,)))
                result[i, self.index[target], self.index[subset]] = (-1) ** target.index(i)
        return result

    def _build_contraction(self) -> np.ndarray:
        """Внутреннее умножение на ∂_i"""
        result = np.zeros((self.dim, self.size, self.size))
        for i in range(self.dim):
            for subset in self.subsets:
                if i not in subset:
                    continue
                position = subset.index(i)
                target = subset[:position] + subset[position + 1:]
                result[i, self.index[target], self.index[subset]] = (-1) ** position
        return result

    def minors(self, matrix: Jet) -> Jet:
        """Матрица всех миноров det A[I, J] по формуле Лейбница"""
        placements = [((np.array([[0]]), np.array([[0]])), Jet.identity(1, self.dim, self.order))]
        for degree in range(1, self.dim + 1):
            masks = np.array([mask for mask, subset in enumerate(self.subsets) if len(subset) == degree])
            rows = np.array([self.subsets[mask] for mask in masks])
            total = None
            for perm in itertools.permutations(range(degree)):
                term = None
                for a in range(degree):
                    factor = matrix[rows[:, a][:, None], rows[:, perm[a]][None, :]]
                    term = factor if term is None else term * factor
                if _parity(perm):
                    term = -term
                total = term if total is None else total + term
            placements.append((np.ix_(masks, masks), total))
        return Jet.assemble((self.size, self.size), self.dim, self.order, placements)

    def _build_lefschetz(self) -> Jet:
        """L = Σ_{a<b} ω_ab dx^a ∧ dx^b ∧"""
        rows, cols = np.triu_indices(self.dim, 1)
        omega = (self.s.J.T @ self.s.g)[(rows, cols)]
        products = np.stack([self.wedge_one[a] @ self.wedge_one[b] for a, b in zip(rows, cols)])
        return omega.contract(products)

    def _build_volume_coefficient(self) -> Jet:
        unit = np.zeros(self.size)
        unit[0] = 1.0
        power = Jet.constant(unit, self.dim, self.order)
        for _ in range(self.s.n):
            power = self.lefschetz @ power
        return power[self.size - 1] * (1.0 / math.factorial(self.s.n))

    def _build_star(self) -> Jet:
        """Полная система Pair · S = vol · G, Pair[I, K] - знак e_I ∧ e_K"""
        pairing = np.zeros((self.size, self.size))
        full = tuple(range(self.dim))
        for i, left in enumerate(self.subsets):
            for k, right in enumerate(self.subsets):
                if tuple(sorted(left + right)) == full:
                    pairing[i, k] = -1.0 if _parity(left + right) else 1.0
        return jet_linear_solve(Jet.constant(pairing, self.dim, self.order), self.volume_coefficient * self.gram)

    def _build_projectors(self) -> Dict[Tuple[int, int], Jet]:
        """Π_{p,q} как многочлены Лагранжа от оператора антиголоморфной степени"""
        antiholo = (self._identity(self.dim) + self.s.J.T * 1j) * 0.5
        products = np.stack([self.wedge_one[a] @ self.contraction[b]
                             for a in range(self.dim) for b in range(self.dim)])
        counter = antiholo.map_slots(lambda arr: arr.reshape(arr.shape[:-2] + (-1,))).contract(products)
        identity = self._identity(self.size)
        projectors = {}
        for degree in range(self.dim + 1):
            mask = np.diag([1.0 if len(subset) == degree else 0.0 for subset in self.subsets])
            for q in range(max(0, degree - self.s.n), min(degree, self.s.n) + 1):
                result = Jet.constant(mask, self.dim, self.order)
                for other in range(degree + 1):
                    if other != q:
                        result = ((counter - identity * other) @ result) * (1.0 / (q - other))
                projectors[(degree - q, q)] = result
        return projectors

    def _build_d_matrix(self) -> np.ndarray:
        """d как матрица из слотов (значение, градиент) в значения"""
        return np.concatenate([np.zeros((self.size, self.size))] + list(self.wedge_one), axis=1)

    # ------------------------------------------------------------------
    # Применение

    def apply(self, matrix: Jet, a: Form) -> Form:
        order = min(matrix.order, a.order)
        return Form(matrix.truncate(order) @ a.coeffs.truncate(order), a.dim)

    def d(self, a: Form) -> Form:
        stacked = np.concatenate([a.coeffs.value] + list(a.coeffs.gradient))
        return Form(Jet(self.d_matrix @ stacked, dim=self.dim), self.dim)

    def theorem_lhs(self, alpha: Form, j: int) -> Form:
        """[Λ, d]η - ⋆𝕀⁻¹d𝕀⋆η, η = L^j α"""
        eta = alpha
        for _ in range(j):
            eta = self.apply(self.lefschetz, eta)
        bracket = self.apply(self.lambda_, self.d(eta)) - self.d(self.apply(self.lambda_, eta))
        inner = self.d(self.apply(self.I, self.apply(self.star, eta)))
        return bracket - self.apply(self.star, self.apply(self.I_inverse, inner))

    # ------------------------------------------------------------------
    # Сравнение

    def structured_d_matrix(self) -> np.ndarray:
        """Матрица exterior_d, полученная применением к единичным джетам"""
        columns = []
        for slot in range(self.dim + 1):
            for mask in range(self.size):
                value = np.zeros(self.size)
                gradient = np.zeros((self.dim, self.size))
                if slot == 0:
                    value[mask] = 1.0
                else:
                    gradient[slot - 1, mask] = 1.0
                unit = Form(Jet(value, gradient, dim=self.dim), self.dim)
                columns.append(exterior_d(unit).coeffs.value)
        return np.stack(columns, axis=1)

    def compare(self, tol_rel: float = ORACLE_TOL, tol_abs: float = ORACLE_TOL) -> List[IdentityResidual]:
        """Сравнить все операторы структуры с оракулом"""
        s = self.s
        pairs = [
            ('oracle_gram', s.gram, self.gram),
            ('oracle_lefschetz', s.lefschetz_matrix, self.lefschetz),
            ('oracle_volume', s.volume_coefficient, self.volume_coefficient),
            ('oracle_star', s.star_matrix, self.star),
            ('oracle_lambda', s.lambda_matrix, self.lambda_),
            ('oracle_I', s.I_matrix, self.I),
            ('oracle_I_inverse', s.I_inverse_matrix, self.I_inverse),
        ]
        records = [compare_jets(identity_id, lhs, rhs, s, tol_rel, tol_abs) for identity_id, lhs, rhs in pairs]
        for (p, q), projector in sorted(self.projectors.items()):
            records.append(compare_jets('oracle_projector', s.projector(p, q), projector, s, tol_rel, tol_abs,
                                        k=p + q, p=p, q=q))
        records.append(compare_jets('oracle_d',
                                    Jet.constant(self.structured_d_matrix(), self.dim, 0),
                                    Jet.constant(self.d_matrix, self.dim, 0),
                                    s, tol_rel, tol_abs))
        return records

    def compare_theorem_lhs(self, alpha: Form, j: int, tol_rel: float = ORACLE_TOL,
                            tol_abs: float = ORACLE_TOL) -> IdentityResidual:
        k = alpha.degree
        structured = theorem_sides(alpha, j, self.s, degree=k).lhs
        return compare_forms('oracle_theorem_lhs', structured, self.theorem_lhs(alpha, j), self.s,
                             tol_rel, tol_abs, k=k, j=j)


def dense_oracle(s: AlmostHermitianStructure) -> DenseOracle:
    """Построить плотный оракул для структуры"""
    return DenseOracle(s)
