#!/usr/bin/env python3
"""
Верификатор тождеств почти эрмитовой геометрии

Запускает кампанию проверок и выводит JSON-отчёт.
Коды завершения: 0 - все проверки прошли, 1 - есть провалы, 2 - ошибка параметров.
"""
import argparse
import logging
import sys
from datetime import datetime, timezone
from typing import List, Optional

from campaign import run_campaign
from config import SUITES, Config
from errors import ConfigError
from geometry import PRESETS

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

logger = logging.getLogger(__name__)


def setup_logging():
    """Логирование в файл и в stderr"""
    handlers = [logging.StreamHandler()]
    if Config.LOG_FILE:
        handlers.insert(0, logging.FileHandler(Config.LOG_FILE))
    logging.basicConfig(
        level=getattr(logging, Config.LOG_LEVEL.upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers,
        force=True,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='verify',
        description='Численная проверка тождеств Кэлера для почти эрмитовых структур',
    )
    parser.add_argument('--config', help='JSON-файл с параметрами кампании')
    parser.add_argument('--preset', action='append', choices=PRESETS, help='пресет структуры (можно повторять)')
    parser.add_argument('--n', action='append', type=int, help='комплексная размерность 1..4 (можно повторять)')
    parser.add_argument('--trials', type=int, help='число случайных структур на каждое n')
    parser.add_argument('--seed', type=int, help='зерно кампании')
    parser.add_argument('--tol-rel', type=float, help='относительный допуск')
    parser.add_argument('--tol-abs', type=float, help='абсолютный допуск')
    parser.add_argument('--jet-order', type=int, choices=(1, 2), help='порядок джетов')
    parser.add_argument('--scale', type=float, help='масштаб возмущения случайных структур')
    parser.add_argument('--suite', action='append', choices=SUITES, help='набор проверок (можно повторять)')
    parser.add_argument('--json-out', help='путь для JSON-отчёта (по умолчанию stdout)')
    parser.add_argument('--replay', help='повторить одно испытание по идентификатору <source>/n=<n>/seed=<seed>')
    parser.add_argument('--inject-bug', action='store_true', help='внести ошибку знака для проверки детектора')
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE

    setup_logging()

    try:
        file_settings = Config.load_file_settings(args.config) if args.config else None
        config = Config.campaign_config(
            file_settings,
            n_list=args.n,
            presets=args.preset,
            random_trials=args.trials,
            campaign_seed=args.seed,
            tol_rel=args.tol_rel,
            tol_abs=args.tol_abs,
            jet_order=args.jet_order,
            suites=args.suite,
            perturbation_scale=args.scale,
            inject_bug=args.inject_bug or None,
            output_path=args.json_out,
        )
        report = run_campaign(config, replay=args.replay)
    except ConfigError as e:
        logger.error(f"Ошибка конфигурации: {e}")
        return EXIT_USAGE

    text = report.to_json()
    stamp = datetime.now(timezone.utc).isoformat()
    output_path = config.output_path
    if output_path:
        try:
            with open(output_path, 'w', encoding='utf-8') as f:
                f.write(text + '\n')
            with open(f"{output_path}.stamp", 'w', encoding='utf-8') as f:
                f.write(stamp + '\n')
        except OSError as e:
            logger.error(f"Не удалось записать отчёт {output_path}: {e}")
            return EXIT_USAGE
        logger.info(f"Отчёт записан в {output_path}")
    else:
        print(text)
    logger.info(f"Отчёт сформирован {stamp}")

    return EXIT_OK if report.passed else EXIT_FAILED


if __name__ == '__main__':
    sys.exit(main())
