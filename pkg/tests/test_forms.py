import json

import pytest

from data.defaults import AUTO_EQUAL_TIME, DEFAULT_SETTINGS
from forms import SECTION_FORMS, load_config_file, merge_settings, validate_settings
from models import ConfigValidationError


def test_defaults_are_valid_in_every_section():
    validated = validate_settings(merge_settings(), SECTION_FORMS)
    assert validated['factorize']['r'] == 0.45
    assert validated['factorize']['reverse_samples'] == AUTO_EQUAL_TIME
    assert validated['calibrate']['r_grid'][0] == 0.0 and len(validated['calibrate']['r_grid']) == 21
    assert validated['sweep']['reverse_counts'] == [7, 24, 60, 240]


def test_overrides_beat_config_file_which_beats_defaults():
    settings = merge_settings({'factorize': {'rank': 4, 'r': 0.3}}, {'factorize': {'rank': 6}})
    assert settings['factorize']['rank'] == 6
    assert settings['factorize']['r'] == 0.3
    assert settings['factorize']['iterations'] == DEFAULT_SETTINGS['factorize']['iterations']
    assert DEFAULT_SETTINGS['factorize']['rank'] == 10


def test_scalar_list_settings_are_wrapped():
    settings = merge_settings(overrides={'sweep': {'seeds': 3}})
    assert settings['sweep']['seeds'] == [3]


def test_unknown_keys_are_rejected():
    with pytest.raises(ConfigValidationError) as error:
        merge_settings({'factorise': {}, 'factorize': {'rnak': 3}})
    assert set(error.value.errors) == {'factorise', 'factorize.rnak'}


def test_every_invalid_field_is_reported_at_once():
    settings = merge_settings(overrides={
        'factorize': {'rank': 0, 'r': 1.5, 'tr': -1.0, 'mode': 'sideways', 'forward_samples': 2.5},
        'nnls': {'tolerance': 'tiny'},
    })
    with pytest.raises(ConfigValidationError) as error:
        validate_settings(settings, ['factorize', 'nnls'])
    assert set(error.value.errors) == {'factorize.rank', 'factorize.r', 'factorize.tr', 'factorize.mode',
                                       'factorize.forward_samples', 'nnls.tolerance'}
    assert 'factorize.r' in str(error.value)


def test_warmup_cannot_exceed_iterations_in_hybrid_mode():
    settings = merge_settings(overrides={'factorize': {'iterations': 3, 'warmup': 5}})
    with pytest.raises(ConfigValidationError) as error:
        validate_settings(settings, ['factorize'])
    assert list(error.value.errors) == ['factorize.warmup']

    forward_only = merge_settings(overrides={'factorize': {'iterations': 3, 'warmup': 5, 'mode': 'forward-only'}})
    assert validate_settings(forward_only, ['factorize'])['factorize']['warmup'] == 5


@pytest.mark.parametrize('value, expected', [(AUTO_EQUAL_TIME, AUTO_EQUAL_TIME), ('240', 240), (7, 7)])
def test_reverse_samples_accepts_counts_and_auto(value, expected):
    settings = merge_settings(overrides={'factorize': {'reverse_samples': value}})
    assert validate_settings(settings, ['factorize'])['factorize']['reverse_samples'] == expected


@pytest.mark.parametrize('value', [0, 'some', -3])
def test_reverse_samples_rejects_other_values(value):
    settings = merge_settings(overrides={'factorize': {'reverse_samples': value}})
    with pytest.raises(ConfigValidationError) as error:
        validate_settings(settings, ['factorize'])
    assert 'factorize.reverse_samples' in error.value.errors


def test_list_entries_are_reported_by_index():
    settings = merge_settings(overrides={'calibrate': {'r_grid': [0.0, 1.2, 0.5]}, 'sweep': {'seeds': []}})
    with pytest.raises(ConfigValidationError) as error:
        validate_settings(settings, ['calibrate', 'sweep'])
    assert set(error.value.errors) == {'calibrate.r_grid[1]', 'sweep.seeds'}


def test_generate_rank_must_fit_the_matrix():
    settings = merge_settings(overrides={'generate': {'rows': 5, 'cols': 10, 'rank': 6, 'density': 1.0}})
    with pytest.raises(ConfigValidationError) as error:
        validate_settings(settings, ['generate'])
    assert set(error.value.errors) == {'generate.rank', 'generate.density'}


def test_booleans_are_not_numbers():
    settings = merge_settings(overrides={'run': {'threads': True}})
    with pytest.raises(ConfigValidationError) as error:
        validate_settings(settings, ['run'])
    assert 'run.threads' in error.value.errors


@pytest.mark.parametrize('section, key', [('input', 'transpose'), ('run', 'plots'), ('benchmark', 'parallel')])
@pytest.mark.parametrize('value', ['false', 0, 1, None])
def test_switches_must_be_real_booleans(section, key, value):
    settings = merge_settings(file_settings={section: {key: value}})
    with pytest.raises(ConfigValidationError) as error:
        validate_settings(settings, [section])
    assert set(error.value.errors) == {f'{section}.{key}'}



def test_load_config_file(tmp_path):
    good = tmp_path / 'config.json'
    good.write_text(json.dumps({'factorize': {'rank': 3}}))
    assert load_config_file(good) == {'factorize': {'rank': 3}}

    broken = tmp_path / 'broken.json'
    broken.write_text('{"factorize": ')
    with pytest.raises(ConfigValidationError):
        load_config_file(broken)

    listing = tmp_path / 'list.json'
    listing.write_text('[1, 2]')
    with pytest.raises(ConfigValidationError):
        load_config_file(listing)

    with pytest.raises(ConfigValidationError):
        load_config_file(tmp_path / 'absent.json')
