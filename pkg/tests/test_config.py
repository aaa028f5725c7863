"""
Тесты конфигурации
"""
import json

import pytest

from config import SUITES, CampaignConfig, Config
from errors import ConfigError


def test_defaults_are_valid():
    config = CampaignConfig()
    config.validate()
    assert config.suites == SUITES
    assert config.jet_order == 1


@pytest.mark.parametrize("changes", [
    {'n_list': (5,)},
    {'n_list': ()},
    {'presets': ('torus',)},
    {'suites': ('everything',)},
    {'suites': ()},
    {'tol_rel': 0.0},
    {'jet_order': 3},
    {'random_trials': -1},
    {'perturbation_scale': -0.1},
])
def test_invalid_values_rejected(changes):
    with pytest.raises(ConfigError):
        CampaignConfig(**changes).validate()


def test_all_violations_reported():
    with pytest.raises(ConfigError) as excinfo:
        CampaignConfig(n_list=(0,), jet_order=5).validate()
    assert ';' in str(excinfo.value)


def test_from_dict_converts_lists():
    config = CampaignConfig.from_dict({'n_list': [1, '2'], 'presets': ['generic'], 'tol_abs': '1e-9'})
    assert config.n_list == (1, 2)
    assert config.presets == ('generic',)
    assert config.tol_abs == 1e-9


def test_from_dict_rejects_unknown_keys():
    with pytest.raises(ConfigError):
        CampaignConfig.from_dict({'colour': 'blue'})


def test_campaign_config_priority(monkeypatch):
    monkeypatch.setattr(Config, 'N_LIST', '1,2,3')
    monkeypatch.setattr(Config, 'RANDOM_TRIALS', 7)
    config = Config.campaign_config({'n_list': [2], 'random_trials': 3}, random_trials=1, campaign_seed=None)
    assert config.n_list == (2,)
    assert config.random_trials == 1
    assert config.campaign_seed == Config.CAMPAIGN_SEED


def test_bad_environment_list(monkeypatch):
    monkeypatch.setattr(Config, 'N_LIST', '1,two')
    with pytest.raises(ConfigError):
        Config.campaign_config()


def test_load_file_settings(tmp_path):
    path = tmp_path / 'campaign.json'
    path.write_text(json.dumps({'n_list': [1], 'suites': ['lemmas']}), encoding='utf-8')
    assert Config.load_file_settings(str(path)) == {'n_list': [1], 'suites': ['lemmas']}


@pytest.mark.parametrize("content", ['{not json', '[1, 2]'])
def test_load_file_settings_rejects_bad_files(tmp_path, content):
    path = tmp_path / 'campaign.json'
    path.write_text(content, encoding='utf-8')
    with pytest.raises(ConfigError):
        Config.load_file_settings(str(path))


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        Config.load_file_settings(str(tmp_path / 'absent.json'))
