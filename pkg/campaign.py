"""
Кампания проверок: перебор структур, запуск наборов тождеств и сбор отчёта
"""
import dataclasses
import json
import logging
import re
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional

import numpy as np

from calculus import BIDEGREE_SHIFTS, lambda_adjoint_commutator, torsion_taubar
from config import DEFAULT_JET_ORDER, SUITES, CampaignConfig
from errors import ConfigError
from exterior import Form
from geometry import (DEFAULT_PERTURBATION_SCALE, PRESETS, AlmostHermitianStructure, make_rng, preset,
                      random_structure)
from identities import (
    IdentityResidual, check_almost_kahler_degeneration, check_d_lefschetz_power, check_d_squared,
    check_dL_zeroth_order, check_four_components, check_hermitian_identity, check_hodge_pairing,
    check_I_conjugated_d, check_I_conjugation_component, check_I_properties, check_lambda_delbar_adjoint,
    check_lambda_delbar_star_zeroth_order, check_lefschetz_commutator, check_lefschetz_decomposition,
    check_leibniz, check_primitive_annihilation, check_star_dL, check_star_lefschetz,
    check_star_lefschetz_primitive, check_star_squared, check_taubar_closed_form, check_vanishing_terms,
    check_weil_identity, check_zeroth_order, random_primitive_germ, random_pure_germ, theorem_record, theorem_sides,
    uncorrected_mu_residual, verify_mu_identity, verify_proof_displays, verify_prop_0q, verify_prop_0q_expansions,
)
from jets import Jet
from oracle import dense_oracle

logger = logging.getLogger(__name__)

RANDOM_SOURCE = 'random'

# Порог обнаружения: тождество без поправки должно нарушаться заметно
MU_DETECTION_THRESHOLD = 1e-3
MU_DETECTION_SAMPLES = 3

# Порог, ниже которого dω(0) и N(0) считаются нулевыми
VANISHING_TOL = 1e-12

# Допуск для слагаемых основного тождества, исчезающих при dω = 0
VANISHING_TERM_TOL = 1e-12

# Оракул строится полными матрицами, поэтому только для малых n
ORACLE_MAX_N = 3

_TRIAL_ID = re.compile(r'^(?P<source>[a-z_]+)/n=(?P<n>\d+)/seed=(?P<seed>\d+)'
                       r'(?:/scale=(?P<scale>\d+(?:\.\d*)?(?:e[+-]?\d+)?))?(?:/order=(?P<order>[12]))?$')

SuiteRunner = Callable[[AlmostHermitianStructure, np.random.Generator, CampaignConfig], List[IdentityResidual]]


@dataclass(frozen=True)
class Trial:
    """
    Одно испытание: структура (пресет или случайная), размерность и зерно

    Масштаб возмущения и порядок джетов попадают в идентификатор, только если
    отличаются от значений по умолчанию; иначе они берутся из конфигурации.
    """
    source: str
    n: int
    seed: int
    scale: Optional[float] = None
    order: Optional[int] = None

    @property
    def trial_id(self) -> str:
        trial_id = f"{self.source}/n={self.n}/seed={self.seed}"
        if self.scale is not None:
            trial_id += f"/scale={self.scale!r}"
        if self.order is not None:
            trial_id += f"/order={self.order}"
        return trial_id

    @staticmethod
    def parse(trial_id: str) -> 'Trial':
        """Разобрать идентификатор <source>/n=<n>/seed=<seed>[/scale=<s>][/order=<K>]"""
        match = _TRIAL_ID.match(trial_id.strip())
        if match is None:
            raise ConfigError(f"Некорректный идентификатор испытания: {trial_id}")
        source = match.group('source')
        if source != RANDOM_SOURCE and source not in PRESETS:
            raise ConfigError(f"Неизвестный источник структуры в {trial_id}: {source}")
        scale = match.group('scale')
        if scale is not None and source != RANDOM_SOURCE:
            raise ConfigError(f"Масштаб возмущения задаётся только для случайных структур: {trial_id}")
        order = match.group('order')
        return Trial(
            source,
            int(match.group('n')),
            int(match.group('seed')),
            None if scale is None else float(scale),
            None if order is None else int(order),
        )

    @staticmethod
    def for_config(source: str, n: int, seed: int, config: CampaignConfig) -> 'Trial':
        """Испытание с параметрами конфигурации, отличными от значений по умолчанию"""
        scale = None
        if source == RANDOM_SOURCE and config.perturbation_scale != DEFAULT_PERTURBATION_SCALE:
            scale = config.perturbation_scale
        order = config.jet_order if config.jet_order != DEFAULT_JET_ORDER else None
        return Trial(source, n, seed, scale, order)

    def build_structure(self, config: CampaignConfig) -> AlmostHermitianStructure:
        order = config.jet_order if self.order is None else self.order
        if self.source == RANDOM_SOURCE:
            scale = config.perturbation_scale if self.scale is None else self.scale
            return random_structure(self.seed, self.n, scale, order)
        return preset(self.source, self.n, order)


def enumerate_trials(config: CampaignConfig) -> List[Trial]:
    """
    Детерминированный список испытаний кампании

    Пресеты используют зерно кампании, i-е случайное испытание - зерно кампании + i.
    """
    trials = []
    for n in config.n_list:
        for name in config.presets:
            if name == 'almost_kahler_nonintegrable' and n < 2:
                logger.warning(f"Пропуск {name} при n={n}: нужна размерность n >= 2")
                continue
            trials.append(Trial.for_config(name, n, config.campaign_seed, config))
        for index in range(config.random_trials):
            trials.append(Trial.for_config(RANDOM_SOURCE, n, config.campaign_seed + index, config))
    return trials


# ----------------------------------------------------------------------
# Наборы проверок

def _tol(config: CampaignConfig) -> dict:
    return {'tol_rel': config.tol_rel, 'tol_abs': config.tol_abs}


def _lemma_suite(s: AlmostHermitianStructure, rng: np.random.Generator,
                 config: CampaignConfig) -> List[IdentityResidual]:
    tol = _tol(config)
    n, dim, order = s.n, s.dim, s.order
    records = []

    for k in range(2 * n + 1):
        a = Form.random(rng, dim, k, order)
        b = Form.random(rng, dim, k, order)
        one_form = Form.random(rng, dim, 1, order)
        records.append(check_star_squared(a, k, s, **tol))
        records.extend(check_star_lefschetz(a, k, s, **tol))
        records.append(check_hodge_pairing(a, b, k, s, **tol))
        for j in range(n + 1):
            records.append(check_lefschetz_commutator(a, k, j, s, **tol))
        for j in range(1, n + 1):
            records.append(check_d_lefschetz_power(a, k, j, s, **tol))
        records.append(check_star_dL(a, k, s, **tol))
        records.append(check_dL_zeroth_order(a, k, s, **tol))
        records.extend(check_I_properties(a, one_form, k, s, **tol))
        records.append(check_I_conjugated_d(a, k, s, **tol))
        records.append(check_four_components(a, k, s, **tol))
        records.append(check_leibniz(a, one_form, k, s, **tol))
        records.append(check_lambda_delbar_star_zeroth_order(a, k, s, **tol))
        if k + 3 <= 2 * n:
            target = Form.random(rng, dim, k + 3, order)
            records.append(check_lambda_delbar_adjoint(a, target, k, s, **tol))
        records.extend(check_lefschetz_decomposition(a, k, s, **tol))
        if order >= 2:
            records.append(check_d_squared(a, k, s, **tol))

    for p in range(n + 1):
        for q in range(n + 1):
            a = random_pure_germ(rng, s, p, q)
            for which in BIDEGREE_SHIFTS:
                records.append(check_I_conjugation_component(a, which, s, **tol))
            records.extend(check_lefschetz_decomposition(a, p + q, s, **tol))
            records.append(check_taubar_closed_form(a, s, **tol))
            f = Jet.random(rng, (), dim, order)
            records.append(check_zeroth_order('taubar', lambda x: torsion_taubar(x, s), a, f, s, **tol))
            records.append(check_zeroth_order('lambda_delbar_adjoint',
                                              lambda x: lambda_adjoint_commutator('delbar', x, s), a, f, s, **tol))

    for k in range(n + 1):
        alpha = random_primitive_germ(rng, s, k)
        records.append(check_primitive_annihilation(alpha, k, s, **tol))
        for j in range(n - k + 1):
            records.append(check_star_lefschetz_primitive(alpha, k, j, s, **tol))
    return records


def _theorem_suite(s: AlmostHermitianStructure, rng: np.random.Generator,
                   config: CampaignConfig) -> List[IdentityResidual]:
    records = []
    vanishing = s.d_omega_norm <= VANISHING_TOL
    for k in range(s.n + 1):
        for j in range(s.n - k + 1):
            alpha = random_primitive_germ(rng, s, k)
            sides = theorem_sides(alpha, j, s, inject_bug=config.inject_bug)
            records.append(theorem_record(sides, j, s, config.tol_rel, config.tol_abs))
            if vanishing:
                records.extend(check_vanishing_terms(sides, j, s, tol_rel=config.tol_rel,
                                                     tol_abs=min(config.tol_abs, VANISHING_TERM_TOL)))
    return records


def _proof_display_suite(s: AlmostHermitianStructure, rng: np.random.Generator,
                         config: CampaignConfig) -> List[IdentityResidual]:
    records = []
    for k in range(s.n + 1):
        for j in range(s.n - k + 1):
            alpha = random_primitive_germ(rng, s, k)
            records.extend(verify_proof_displays(alpha, j, s, config.tol_rel, config.tol_abs))
    return records


def _prop_0q_suite(s: AlmostHermitianStructure, rng: np.random.Generator,
                   config: CampaignConfig) -> List[IdentityResidual]:
    records = []
    for q in range(1, min(s.n, 3) + 1):
        alpha = random_pure_germ(rng, s, 0, q)
        records.append(verify_prop_0q(alpha, s, config.tol_rel, config.tol_abs))
        records.extend(verify_prop_0q_expansions(alpha, s, config.tol_rel, config.tol_abs))
    return records


def _mu_suite(s: AlmostHermitianStructure, rng: np.random.Generator,
              config: CampaignConfig) -> List[IdentityResidual]:
    if s.n < 2:
        return []
    records = [verify_mu_identity(random_pure_germ(rng, s, 0, 2), s, config.tol_rel, config.tol_abs)]

    # μω - форма типа (3, 0), поэтому нарушение видно только при n >= 3
    if s.descr == 'generic' and s.n >= 3:
        samples = [uncorrected_mu_residual(random_pure_germ(rng, s, 0, 2), s, config.tol_rel, config.tol_abs)
                   for _ in range(MU_DETECTION_SAMPLES)]
        worst = max(samples, key=lambda record: record.residual_abs)
        detected = worst.residual_abs >= MU_DETECTION_THRESHOLD
        if not detected:
            logger.warning(f"Тождество без поправки не нарушено: невязка {worst.residual_abs:.3e}")
        records.append(dataclasses.replace(worst, identity_id='uncorrected_mu_identity_detected', passed=detected))
    return records


def _oracle_suite(s: AlmostHermitianStructure, rng: np.random.Generator,
                  config: CampaignConfig) -> List[IdentityResidual]:
    if s.n > ORACLE_MAX_N:
        logger.info(f"Оракул пропущен для n={s.n}")
        return []
    oracle = dense_oracle(s)
    records = oracle.compare()
    for k in range(s.n + 1):
        for j in range(s.n - k + 1):
            records.append(oracle.compare_theorem_lhs(random_primitive_germ(rng, s, k), j))
    return records


def _weil_suite(s: AlmostHermitianStructure, rng: np.random.Generator,
                config: CampaignConfig) -> List[IdentityResidual]:
    if s.d_omega_norm > VANISHING_TOL:
        return []
    tol = _tol(config)
    records = []
    for k in range(2 * s.n + 1):
        records.append(check_weil_identity(Form.random(rng, s.dim, k, s.order), k, s, **tol))
    for k in range(s.n + 1):
        records.append(check_almost_kahler_degeneration(random_primitive_germ(rng, s, k), k, s, **tol))
    return records


def _hermitian_suite(s: AlmostHermitianStructure, rng: np.random.Generator,
                     config: CampaignConfig) -> List[IdentityResidual]:
    if s.nijenhuis_norm > VANISHING_TOL:
        return []
    tol = _tol(config)
    records = []
    for p in range(s.n + 1):
        for q in range(s.n + 1):
            records.append(check_hermitian_identity(random_pure_germ(rng, s, p, q), s, **tol))
    return records


SUITE_RUNNERS: Dict[str, SuiteRunner] = {
    'lemmas': _lemma_suite,
    'theorem': _theorem_suite,
    'proof_displays': _proof_display_suite,
    'prop_0q': _prop_0q_suite,
    'mu_identity': _mu_suite,
    'oracle': _oracle_suite,
    'weil': _weil_suite,
    'hermitian': _hermitian_suite,
}


# ----------------------------------------------------------------------
# Запуск

def _error_record(trial: Trial, identity_id: str, config: CampaignConfig) -> IdentityResidual:
    return IdentityResidual(
        identity_id=identity_id,
        structure_descr=trial.source,
        n=trial.n,
        lhs_norm=0.0,
        rhs_norm=0.0,
        residual_abs=0.0,
        residual_rel=0.0,
        tol_rel=config.tol_rel,
        tol_abs=config.tol_abs,
        passed=False,
    )


def run_trial(trial: Trial, config: CampaignConfig) -> List[IdentityResidual]:
    """
    Выполнить все выбранные наборы на одной структуре

    Каждый набор получает свой поток случайных чисел (по позиции набора в SUITES),
    поэтому повтор испытания с другим составом наборов даёт те же входные данные.
    Исключения превращаются в проваленные записи trial_error.
    """
    records = []
    try:
        s = trial.build_structure(config)
    except Exception as e:
        logger.error(f"Не удалось построить структуру {trial.trial_id}: {e}", exc_info=True)
        records.append(_error_record(trial, 'trial_error', config))
    else:
        for stream, suite in enumerate(SUITES, start=1):
            if suite not in config.suites:
                continue
            rng = make_rng(trial.seed, stream)
            try:
                records.extend(SUITE_RUNNERS[suite](s, rng, config))
            except Exception as e:
                logger.error(f"Ошибка в наборе {suite} для {trial.trial_id}: {e}", exc_info=True)
                records.append(_error_record(trial, 'trial_error', config))
    return [dataclasses.replace(record, seed=trial.seed, trial_id=trial.trial_id) for record in records]


@dataclass
class VerificationReport:
    """Результаты кампании"""
    records: List[IdentityResidual]

    @property
    def passed(self) -> bool:
        return all(record.passed for record in self.records)

    def failures(self) -> List[IdentityResidual]:
        return [record for record in self.records if not record.passed]

    def summary(self) -> dict:
        failed = len(self.failures())
        return {
            'total': len(self.records),
            'passed': len(self.records) - failed,
            'failed': failed,
            'max_residual_rel': max((record.residual_rel for record in self.records), default=0.0),
        }

    def to_dict(self) -> dict:
        return {'records': [record.to_dict() for record in self.records], 'summary': self.summary()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def run_campaign(config: CampaignConfig, replay: Optional[str] = None) -> VerificationReport:
    """
    Запустить кампанию проверок

    Args:
        config: Проверенная конфигурация кампании
        replay: Идентификатор одного испытания для повтора

    Returns:
        VerificationReport со всеми записями в порядке выполнения
    """
    trials = [Trial.parse(replay)] if replay else enumerate_trials(config)
    logger.info(f"Запуск кампании: {len(trials)} испытаний, наборы: {', '.join(config.suites)}")
    if config.inject_bug:
        logger.warning("Включена намеренная ошибка знака в основном тождестве")

    records = []
    for number, trial in enumerate(trials, start=1):
        trial_records = run_trial(trial, config)
        failed = sum(1 for record in trial_records if not record.passed)
        logger.info(f"[{number}/{len(trials)}] {trial.trial_id}: проверок {len(trial_records)}, ошибок {failed}")
        for record in trial_records:
            if not record.passed:
                logger.warning(f"Провал {record.identity_id} в {trial.trial_id}: "
                               f"невязка {record.residual_abs:.3e} (отн. {record.residual_rel:.3e})")
        records.extend(trial_records)

    report = VerificationReport(records)
    summary = report.summary()
    logger.info(f"Итог: всего {summary['total']}, успешно {summary['passed']}, ошибок {summary['failed']}")
    return report
