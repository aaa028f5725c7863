"""
Тесты кампании проверок
"""
import json
import time

import pytest

from campaign import Trial, VerificationReport, _lemma_suite, enumerate_trials, run_campaign, run_trial
from config import CampaignConfig
from errors import ConfigError
from geometry import make_rng, preset, random_structure


def test_enumerate_trials_skips_small_almost_kahler():
    config = CampaignConfig(n_list=(1, 2), random_trials=2, campaign_seed=40)
    trials = enumerate_trials(config)
    ids = [trial.trial_id for trial in trials]
    assert len(trials) == 11
    assert 'almost_kahler_nonintegrable/n=1/seed=40' not in ids
    assert 'almost_kahler_nonintegrable/n=2/seed=40' in ids
    assert 'random/n=2/seed=41' in ids


def test_trial_id_parsing():
    trial = Trial.parse('random/n=3/seed=17')
    assert trial == Trial('random', 3, 17)
    assert Trial.parse(trial.trial_id) == trial


@pytest.mark.parametrize("trial_id", ['random/n=3', 'sphere/n=2/seed=1', 'random/n=x/seed=1'])
def test_bad_trial_ids(trial_id):
    with pytest.raises(ConfigError):
        Trial.parse(trial_id)


def test_small_campaign_passes():
    config = CampaignConfig(n_list=(1,), presets=('flat_kahler',), random_trials=1, campaign_seed=3,
                            suites=('lemmas', 'theorem', 'oracle', 'weil', 'hermitian'))
    report = run_campaign(config)
    summary = report.summary()
    assert summary['total'] > 0
    assert summary['failed'] == 0, report.failures()
    assert report.passed
    assert {record.trial_id for record in report.records} == {'flat_kahler/n=1/seed=3', 'random/n=1/seed=3'}


def test_suites_applied_by_structure_type():
    config = CampaignConfig(n_list=(2,), presets=('hermitian_nonkahler', 'almost_kahler_nonintegrable'),
                            random_trials=0, suites=('weil', 'hermitian', 'mu_identity', 'prop_0q'))
    report = run_campaign(config)
    assert report.passed, report.failures()
    by_structure = {}
    for record in report.records:
        by_structure.setdefault(record.structure_descr, set()).add(record.identity_id)
    assert 'hermitian_torsion_identity' in by_structure['hermitian_nonkahler']
    assert 'weil_identity' not in by_structure['hermitian_nonkahler']
    assert 'weil_identity' in by_structure['almost_kahler_nonintegrable']
    assert 'hermitian_torsion_identity' not in by_structure['almost_kahler_nonintegrable']


def test_injected_bug_fails_campaign():
    config = CampaignConfig(n_list=(2,), presets=('generic',), random_trials=0, suites=('theorem',),
                            inject_bug=True)
    report = run_campaign(config)
    assert not report.passed
    assert all(record.identity_id == 'theorem' for record in report.failures())


def test_replay_reproduces_records():
    config = CampaignConfig(n_list=(2,), presets=(), random_trials=2, campaign_seed=50, suites=('theorem',))
    full = run_campaign(config)
    replayed = run_campaign(config, replay='random/n=2/seed=51')
    original = [record for record in full.records if record.trial_id == 'random/n=2/seed=51']
    assert [r.residual_abs for r in replayed.records] == [r.residual_abs for r in original]


def test_suite_streams_do_not_depend_on_selection():
    trial = Trial('random', 2, 8)
    alone = run_trial(trial, CampaignConfig(suites=('theorem',)))
    together = run_trial(trial, CampaignConfig(suites=('prop_0q', 'theorem')))
    theorem_records = [record for record in together if record.identity_id == 'theorem']
    assert [r.residual_abs for r in alone] == [r.residual_abs for r in theorem_records]


def test_trial_errors_become_failed_records():
    records = run_trial(Trial('random', 0, 1), CampaignConfig(suites=('theorem',)))
    assert len(records) == 1
    assert records[0].identity_id == 'trial_error'
    assert not records[0].passed
    assert records[0].trial_id == 'random/n=0/seed=1'


def test_uncorrected_mu_detector_on_generic_three_fold():
    config = CampaignConfig(n_list=(3,), presets=('generic',), random_trials=0, suites=('mu_identity',))
    report = run_campaign(config)
    ids = {record.identity_id: record for record in report.records}
    assert ids['uncorrected_mu_identity_detected'].passed
    assert ids['mu_identity'].passed


def test_report_json_layout():
    config = CampaignConfig(n_list=(1,), presets=('flat_kahler',), random_trials=0, suites=('theorem',))
    data = json.loads(run_campaign(config).to_json())
    assert set(data) == {'records', 'summary'}
    assert set(data['summary']) == {'total', 'passed', 'failed', 'max_residual_rel'}
    record = data['records'][0]
    for key in ('identity_id', 'structure_descr', 'n', 'residual_abs', 'residual_rel', 'passed', 'seed',
                'trial_id'):
        assert key in record


def test_empty_report():
    report = VerificationReport([])
    assert report.passed
    assert report.summary() == {'total': 0, 'passed': 0, 'failed': 0, 'max_residual_rel': 0.0}


@pytest.mark.parametrize("n", [2, 3])
def test_lemma_suite_on_random_structure(n):
    s = random_structure(11, n)
    records = _lemma_suite(s, make_rng(11, 1), CampaignConfig())
    assert records
    assert all(record.passed for record in records), [r for r in records if not r.passed]
    assert 'lefschetz_reconstruct' in {record.identity_id for record in records}


def test_lemma_suite_runs_without_trial_errors():
    records = run_trial(Trial('flat_kahler', 2, 1), CampaignConfig(suites=('lemmas',)))
    assert len(records) > 1
    assert 'trial_error' not in {record.identity_id for record in records}
    assert all(record.passed for record in records)


def test_fixed_seed_gives_identical_report():
    config = CampaignConfig(n_list=(1, 2), presets=('flat_kahler', 'generic'), random_trials=1, campaign_seed=77,
                            suites=('lemmas', 'theorem', 'prop_0q'))
    assert run_campaign(config).to_json() == run_campaign(config).to_json()


def test_vanishing_term_records_only_where_omega_is_closed():
    config = CampaignConfig(n_list=(2,), presets=('flat_kahler', 'almost_kahler_nonintegrable', 'generic'),
                            random_trials=0, suites=('theorem',))
    report = run_campaign(config)
    assert report.passed, report.failures()
    term_records = [record for record in report.records if record.identity_id.startswith('theorem_term_')]
    assert {record.structure_descr for record in term_records} == {'flat_kahler', 'almost_kahler_nonintegrable'}
    assert all(record.residual_abs < 1e-12 for record in term_records)


def test_trial_id_carries_non_default_scale_and_order():
    config = CampaignConfig(n_list=(2,), presets=('flat_kahler',), random_trials=1, campaign_seed=5,
                            perturbation_scale=0.5, jet_order=2)
    ids = [trial.trial_id for trial in enumerate_trials(config)]
    assert ids == ['flat_kahler/n=2/seed=5/order=2', 'random/n=2/seed=5/scale=0.5/order=2']
    assert Trial.parse(ids[1]) == Trial('random', 2, 5, 0.5, 2)
    assert [trial.trial_id for trial in enumerate_trials(CampaignConfig(n_list=(2,), presets=(),
                                                                        random_trials=1, campaign_seed=5))] == \
        ['random/n=2/seed=5']


def test_replay_rebuilds_structure_from_trial_id():
    trial = Trial.parse('random/n=2/seed=5/scale=0.5/order=2')
    s = trial.build_structure(CampaignConfig())
    expected = random_structure(5, 2, 0.5, order=2)
    assert s.order == 2
    assert (s.J - expected.J).max_abs() == 0
    assert preset('generic', 2, 2).order == Trial.parse('generic/n=2/seed=1/order=2').build_structure(
        CampaignConfig()).order


def test_scale_only_for_random_structures():
    with pytest.raises(ConfigError):
        Trial.parse('flat_kahler/n=2/seed=1/scale=0.5')


def test_default_campaign_fits_time_budget():
    # оценка по одному случайному испытанию на каждое n
    config = CampaignConfig()
    trials = enumerate_trials(config)
    estimate = 0.0
    for n in config.n_list:
        per_n = [trial for trial in trials if trial.n == n]
        start = time.perf_counter()
        run_trial(per_n[-1], config)
        estimate += (time.perf_counter() - start) * len(per_n)
    assert estimate < 60.0
