"""
Конфигурация верификатора
"""
import json
import os
from dataclasses import asdict, dataclass, fields
from typing import Optional, Tuple

from dotenv import load_dotenv

from errors import ConfigError
from geometry import DEFAULT_PERTURBATION_SCALE, PRESETS

# Загрузка переменных окружения
load_dotenv()

# Наборы проверок в порядке выполнения
SUITES = ('lemmas', 'theorem', 'proof_displays', 'prop_0q', 'mu_identity', 'oracle', 'weil', 'hermitian')

MAX_N = 4

DEFAULT_JET_ORDER = 1

# Случайных структур на каждое n в кампании по умолчанию
DEFAULT_RANDOM_TRIALS = 20


@dataclass(frozen=True)
class CampaignConfig:
    """Параметры кампании проверок"""
    n_list: Tuple[int, ...] = (1, 2, 3)
    presets: Tuple[str, ...] = PRESETS
    random_trials: int = DEFAULT_RANDOM_TRIALS
    campaign_seed: int = 20240601
    tol_rel: float = 1e-8
    tol_abs: float = 1e-10
    jet_order: int = DEFAULT_JET_ORDER
    suites: Tuple[str, ...] = SUITES
    perturbation_scale: float = DEFAULT_PERTURBATION_SCALE
    inject_bug: bool = False
    output_path: str = ''

    @staticmethod
    def from_dict(data: dict) -> 'CampaignConfig':
        """Создать конфигурацию из словаря (например, JSON-файла)"""
        known = {f.name for f in fields(CampaignConfig)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"Неизвестные параметры конфигурации: {', '.join(unknown)}")
        values = dict(data)
        try:
            for key in ('n_list', 'presets', 'suites'):
                if key in values:
                    values[key] = tuple(values[key])
            if 'n_list' in values:
                values['n_list'] = tuple(int(n) for n in values['n_list'])
            for key in ('random_trials', 'campaign_seed', 'jet_order'):
                if key in values:
                    values[key] = int(values[key])
            for key in ('tol_rel', 'tol_abs', 'perturbation_scale'):
                if key in values:
                    values[key] = float(values[key])
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Некорректное значение в конфигурации: {e}")
        return CampaignConfig(**values)

    def to_dict(self) -> dict:
        return asdict(self)

    def validate(self):
        """
        Проверка корректности параметров

        Raises:
            ConfigError: со списком всех нарушений
        """
        errors = []
        if not self.n_list:
            errors.append("список n пуст")
        for n in self.n_list:
            if not 1 <= n <= MAX_N:
                errors.append(f"n = {n} вне диапазона 1..{MAX_N}")
        for name in self.presets:
            if name not in PRESETS:
                errors.append(f"неизвестный пресет {name}")
        if not self.suites:
            errors.append("не выбран ни один набор проверок")
        for suite in self.suites:
            if suite not in SUITES:
                errors.append(f"неизвестный набор {suite}")
        if self.random_trials < 0:
            errors.append("число случайных испытаний отрицательно")
        if self.campaign_seed < 0:
            errors.append("зерно отрицательно")
        if self.tol_rel <= 0 or self.tol_abs <= 0:
            errors.append("допуски должны быть положительными")
        if self.jet_order not in (1, 2):
            errors.append(f"порядок джетов {self.jet_order} не равен 1 или 2")
        if self.perturbation_scale < 0:
            errors.append("масштаб возмущения отрицателен")
        if errors:
            raise ConfigError("; ".join(errors))


class Config:
    """Основные настройки верификатора"""

    # Логирование
    LOG_LEVEL = os.getenv('VERIFY_LOG_LEVEL', 'INFO')
    LOG_FILE = os.getenv('VERIFY_LOG_FILE', 'verify.log')

    # Состав кампании (списки через запятую)
    N_LIST = os.getenv('VERIFY_N_LIST', '1,2,3')
    PRESETS = os.getenv('VERIFY_PRESETS', ','.join(PRESETS))
    SUITES = os.getenv('VERIFY_SUITES', ','.join(SUITES))
    RANDOM_TRIALS = int(os.getenv('VERIFY_RANDOM_TRIALS', DEFAULT_RANDOM_TRIALS))
    CAMPAIGN_SEED = int(os.getenv('VERIFY_CAMPAIGN_SEED', 20240601))

    # Численные параметры
    TOL_REL = float(os.getenv('VERIFY_TOL_REL', 1e-8))
    TOL_ABS = float(os.getenv('VERIFY_TOL_ABS', 1e-10))
    JET_ORDER = int(os.getenv('VERIFY_JET_ORDER', DEFAULT_JET_ORDER))
    PERTURBATION_SCALE = float(os.getenv('VERIFY_PERTURBATION_SCALE', DEFAULT_PERTURBATION_SCALE))

    @staticmethod
    def _split(value: str) -> Tuple[str, ...]:
        return tuple(item.strip() for item in value.split(',') if item.strip())

    @classmethod
    def get_n_list(cls) -> Tuple[int, ...]:
        """Получить список комплексных размерностей"""
        try:
            return tuple(int(item) for item in cls._split(cls.N_LIST))
        except ValueError:
            raise ConfigError(f"Некорректный список размерностей: {cls.N_LIST}")

    @classmethod
    def get_presets(cls) -> Tuple[str, ...]:
        return cls._split(cls.PRESETS)

    @classmethod
    def get_suites(cls) -> Tuple[str, ...]:
        return cls._split(cls.SUITES)

    @staticmethod
    def load_file_settings(path: str) -> dict:
        """
        Прочитать JSON-файл с параметрами кампании

        Args:
            path: Путь к файлу

        Returns:
            Словарь параметров CampaignConfig
        """
        try:
            with open(path, encoding='utf-8') as f:
                data = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"Не удалось прочитать конфигурацию {path}: {e}")
        if not isinstance(data, dict):
            raise ConfigError(f"Конфигурация {path} должна быть JSON-объектом")
        return data

    @classmethod
    def campaign_config(cls, file_settings: Optional[dict] = None, **overrides) -> CampaignConfig:
        """
        Собрать конфигурацию кампании

        Приоритет: параметры командной строки > файл конфигурации > окружение.
        Параметры со значением None пропускаются.
        """
        settings = {
            'n_list': cls.get_n_list(),
            'presets': cls.get_presets(),
            'random_trials': cls.RANDOM_TRIALS,
            'campaign_seed': cls.CAMPAIGN_SEED,
            'tol_rel': cls.TOL_REL,
            'tol_abs': cls.TOL_ABS,
            'jet_order': cls.JET_ORDER,
            'suites': cls.get_suites(),
            'perturbation_scale': cls.PERTURBATION_SCALE,
        }
        settings.update(file_settings or {})
        settings.update({key: value for key, value in overrides.items() if value is not None})
        config = CampaignConfig.from_dict(settings)
        config.validate()
        return config
