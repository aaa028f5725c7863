"""
Исключения верификатора
"""


class DimensionError(ValueError):
    """Несовпадение размерностей джетов, форм или структур"""


class JetOrderError(ValueError):
    """Недостаточный порядок джета для операции"""


class SingularSystemError(ArithmeticError):
    """Вырожденная или плохо обусловленная линейная система"""


class InconsistentSystemError(ArithmeticError):
    """Переопределённая система несовместна (внутренняя ошибка оператора)"""


class StructureError(ValueError):
    """Некорректная почти эрмитова структура"""


class UnknownPresetError(StructureError):
    """Неизвестное имя пресета"""


class BidegreeError(ValueError):
    """Форма не имеет чистой бистепени"""


class NotPrimitiveError(ValueError):
    """Форма не примитивна"""


class CoefficientRangeError(ValueError):
    """Аргументы коэффициента вне допустимой области"""


class ConfigError(ValueError):
    """Ошибка конфигурации кампании"""
