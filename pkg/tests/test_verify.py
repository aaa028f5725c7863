"""
Тесты командной строки
"""
import json

import pytest

import verify
from config import Config


@pytest.fixture(autouse=True)
def log_to_tmp(tmp_path, monkeypatch):
    monkeypatch.setattr(Config, 'LOG_FILE', str(tmp_path / 'verify.log'))


def test_passing_run_writes_report(tmp_path):
    out = tmp_path / 'report.json'
    code = verify.main(['--n', '1', '--preset', 'flat_kahler', '--trials', '0', '--suite', 'lemmas',
                        '--json-out', str(out)])
    assert code == verify.EXIT_OK
    data = json.loads(out.read_text(encoding='utf-8'))
    assert data['summary']['failed'] == 0
    assert data['summary']['total'] > 0
    assert (tmp_path / 'report.json.stamp').exists()


def test_report_to_stdout(capsys):
    code = verify.main(['--n', '1', '--preset', 'flat_kahler', '--trials', '0', '--suite', 'theorem'])
    assert code == verify.EXIT_OK
    assert json.loads(capsys.readouterr().out)['summary']['failed'] == 0


def test_injected_bug_exit_code(tmp_path):
    code = verify.main(['--n', '2', '--preset', 'generic', '--trials', '0', '--suite', 'theorem',
                        '--inject-bug', '--json-out', str(tmp_path / 'report.json')])
    assert code == verify.EXIT_FAILED


def test_replay(tmp_path):
    code = verify.main(['--replay', 'random/n=1/seed=5', '--suite', 'lemmas',
                        '--json-out', str(tmp_path / 'report.json')])
    assert code == verify.EXIT_OK


@pytest.mark.parametrize("argv", [
    ['--n', '9'],
    ['--tol-rel', '-1'],
    ['--bogus'],
    ['--preset', 'sphere'],
    ['--replay', 'nonsense'],
])
def test_usage_errors(argv):
    assert verify.main(argv) == verify.EXIT_USAGE


def test_config_file(tmp_path):
    path = tmp_path / 'campaign.json'
    path.write_text(json.dumps({'n_list': [1], 'presets': ['flat_kahler'], 'random_trials': 0,
                                'suites': ['theorem']}), encoding='utf-8')
    code = verify.main(['--config', str(path), '--json-out', str(tmp_path / 'report.json')])
    assert code == verify.EXIT_OK


def test_help():
    assert verify.main(['--help']) == verify.EXIT_OK
