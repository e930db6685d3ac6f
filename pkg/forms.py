"""Settings loading and validation.

Settings are plain nested dictionaries (see data/defaults.py). Each section is checked by
its own WTForms form bound to the section dictionary, and every invalid field across all
sections is reported in a single ConfigValidationError.
"""
from copy import deepcopy
from typing import Dict, Iterable, List, Optional
import json
import logging
import math
import numbers

from wtforms import BooleanField, FieldList, FloatField, Form, IntegerField, StringField
from wtforms.validators import AnyOf, NumberRange, StopValidation, ValidationError

from data.defaults import AUTO_EQUAL_TIME, DEFAULT_SETTINGS
from models import ConfigValidationError
from utils.matrix_io import FORMATS

logger = logging.getLogger(__name__)

MODES = ('forward-only', 'hybrid')


def _is_real(value) -> bool:
    return isinstance(value, numbers.Real) and not isinstance(value, bool) and math.isfinite(value)


def real_number(form, field):
    if not _is_real(field.object_data):
        raise StopValidation('Must be a finite number.')


def whole_number(form, field):
    raw = field.object_data
    if not _is_real(raw) or int(raw) != raw:
        raise StopValidation('Must be a whole number.')


def real_bool(form, field):
    if not isinstance(field.object_data, bool):
        raise StopValidation('Must be true or false.')


def not_empty(form, field):
    if not field.entries:
        raise ValidationError('At least one value is required.')


def optional_text(form, field):
    if field.data is not None and not isinstance(field.data, str):
        raise ValidationError('Must be text.')


class InputForm(Form):
    path = StringField('Input path', validators=[optional_text])
    format = StringField('Input format', validators=[AnyOf(FORMATS)])
    transpose = BooleanField('Transpose input', validators=[real_bool])


class FactorizeForm(Form):
    rank = IntegerField('Rank k', validators=[whole_number, NumberRange(min=1)])
    iterations = IntegerField('Total iterations', validators=[whole_number, NumberRange(min=0)])
    warmup = IntegerField('Forward warmup iterations', validators=[whole_number, NumberRange(min=0)])
    mode = StringField('Mode', validators=[AnyOf(MODES)])
    r = FloatField('Reversal distance', validators=[real_number, NumberRange(min=0.0, max=1.0)])
    tr = FloatField('Reversal time (us)', validators=[real_number, NumberRange(min=0.0)])
    forward_samples = IntegerField('Forward samples per QUBO', validators=[whole_number, NumberRange(min=1)])
    reverse_samples = StringField('Reverse samples per QUBO')
    rounded_ratio = BooleanField('Use the flat 0.24 reverse/forward ratio', validators=[real_bool])
    init_density = FloatField('Initial density of C', validators=[real_number, NumberRange(min=0.0, max=1.0)])
    resume = StringField('Resume checkpoint', validators=[optional_text])

    def validate_warmup(self, field):
        if self.mode.data == 'hybrid' and isinstance(field.data, int) and isinstance(self.iterations.data, int) \
                and field.data > self.iterations.data:
            raise ValidationError(f'Warmup cannot exceed the {self.iterations.data} total iterations.')

    def validate_tr(self, field):
        if field.data is not None and field.data <= 0:
            raise ValidationError('Reversal time must be positive.')

    def validate_init_density(self, field):
        if field.data is not None and field.data <= 0:
            raise ValidationError('Initial density must be positive.')

    def validate_reverse_samples(self, field):
        value = field.data
        if value == AUTO_EQUAL_TIME:
            return
        if isinstance(value, str) and value.strip().isdigit():
            value = int(value)
        if isinstance(value, bool) or not isinstance(value, int) or value < 1:
            raise ValidationError(f'Must be a positive whole number or "{AUTO_EQUAL_TIME}".')


class SamplerForm(Form):
    sweeps_per_microsecond = IntegerField('Sweeps per microsecond', validators=[whole_number, NumberRange(min=1)])
    hot_temperature_scale = FloatField('Hot temperature scale', validators=[real_number, NumberRange(min=1e-12)])


class NnlsForm(Form):
    max_iterations = IntegerField('NNLS iteration cap', validators=[whole_number, NumberRange(min=1)])
    tolerance = FloatField('NNLS tolerance', validators=[real_number, NumberRange(min=1e-300)])
    ridge = FloatField('Ridge penalty', validators=[real_number, NumberRange(min=0.0)])
    accelerated = BooleanField('Accelerated projected gradient', validators=[real_bool])


class CalibrateForm(Form):
    r_grid = FieldList(FloatField('r', validators=[real_number, NumberRange(min=0.0, max=1.0)]), validators=[not_empty])
    tr_grid = FieldList(FloatField('t_r', validators=[real_number, NumberRange(min=1e-12)]), validators=[not_empty])
    corpus_size = IntegerField('Corpus size', validators=[whole_number, NumberRange(min=1)])
    samples = IntegerField('Samples per grid point', validators=[whole_number, NumberRange(min=1)])


class BenchmarkForm(Form):
    samples = IntegerField('Reverse samples per QUBO', validators=[whole_number, NumberRange(min=1)])
    max_time_us = FloatField('Classical time limit (us)', validators=[real_number, NumberRange(min=1.0)])
    corpus_size = IntegerField('Corpus size', validators=[whole_number, NumberRange(min=1)])
    parallel = BooleanField('Benchmark QUBOs in parallel', validators=[real_bool])
    competitor = StringField('External competitor command', validators=[optional_text])


class SweepForm(Form):
    reverse_counts = FieldList(IntegerField('reverse samples', validators=[whole_number, NumberRange(min=1)]),
                               validators=[not_empty])
    seeds = FieldList(IntegerField('seed', validators=[whole_number, NumberRange(min=0)]), validators=[not_empty])


class GenerateForm(Form):
    rows = IntegerField('Rows', validators=[whole_number, NumberRange(min=1)])
    cols = IntegerField('Columns', validators=[whole_number, NumberRange(min=1)])
    rank = IntegerField('Planted rank', validators=[whole_number, NumberRange(min=1)])
    noise_sigma = FloatField('Noise sigma', validators=[real_number, NumberRange(min=0.0)])
    density = FloatField('Density of C*', validators=[real_number, NumberRange(min=0.0, max=1.0)])
    output_format = StringField('Output format', validators=[AnyOf(('csv', 'binary'))])

    def validate_rank(self, field):
        if all(isinstance(v, int) for v in (field.data, self.rows.data, self.cols.data)) \
                and field.data > min(self.rows.data, self.cols.data):
            raise ValidationError('Planted rank cannot exceed min(rows, cols).')

    def validate_density(self, field):
        if field.data is not None and not 0 < field.data < 1:
            raise ValidationError('Density must lie strictly between 0 and 1.')


class RunForm(Form):
    seed = IntegerField('Master seed', validators=[whole_number, NumberRange(min=0)])
    threads = IntegerField('Threads (0 = auto)', validators=[whole_number, NumberRange(min=0)])
    out = StringField('Output directory', validators=[optional_text])
    plots = BooleanField('Render PNG charts', validators=[real_bool])


SECTION_FORMS = {
    'input': InputForm,
    'factorize': FactorizeForm,
    'sampler': SamplerForm,
    'nnls': NnlsForm,
    'calibrate': CalibrateForm,
    'benchmark': BenchmarkForm,
    'sweep': SweepForm,
    'generate': GenerateForm,
    'run': RunForm,
}

LIST_FIELDS = {('calibrate', 'r_grid'), ('calibrate', 'tr_grid'), ('sweep', 'reverse_counts'), ('sweep', 'seeds')}


def load_config_file(path) -> Dict:
    try:
        with open(path, 'r', encoding='utf-8') as stream:
            payload = json.load(stream)
    except json.JSONDecodeError as e:
        raise ConfigValidationError({'config': [f'{path} is not valid JSON: {e}']})
    except OSError as e:
        raise ConfigValidationError({'config': [f'cannot read {path}: {e}']})
    if not isinstance(payload, dict):
        raise ConfigValidationError({'config': [f'{path} must hold a JSON object']})
    return payload


def merge_settings(file_settings: Optional[Dict] = None, overrides: Optional[Dict] = None) -> Dict:
    """defaults < config file < explicit overrides; unknown keys are configuration errors."""
    settings = deepcopy(DEFAULT_SETTINGS)
    errors: Dict[str, List[str]] = {}
    for layer in (file_settings or {}, overrides or {}):
        for section, values in layer.items():
            if section not in settings:
                errors.setdefault(section, []).append('Unknown settings section.')
                continue
            if not isinstance(values, dict):
                errors.setdefault(section, []).append('Section must be an object.')
                continue
            for key, value in values.items():
                if key not in settings[section]:
                    errors.setdefault(f'{section}.{key}', []).append('Unknown setting.')
                    continue
                if (section, key) in LIST_FIELDS and not isinstance(value, (list, tuple)):
                    value = [value]
                settings[section][key] = value
    if errors:
        raise ConfigValidationError(errors)
    return settings


def _flatten(prefix: str, errors) -> Dict[str, List[str]]:
    flat: Dict[str, List[str]] = {}
    for name, messages in errors.items():
        key = f'{prefix}.{name}' if name else prefix
        if messages and isinstance(messages[0], list):
            # FieldList: one list of messages per entry, then the list-level ones
            for index, entry in enumerate(messages):
                if isinstance(entry, list) and entry:
                    flat[f'{key}[{index}]'] = list(entry)
                elif isinstance(entry, str):
                    flat.setdefault(key, []).append(entry)
        else:
            flat[key] = [str(m) for m in messages]
    return flat


def validate_settings(settings: Dict, sections: Iterable[str]) -> Dict:
    """Validate the named sections; return their coerced data or raise with every problem."""
    validated, errors = {}, {}
    for section in sections:
        form = SECTION_FORMS[section](data=settings.get(section, {}))
        if form.validate():
            validated[section] = form.data
        else:
            errors.update(_flatten(section, form.errors))
    if errors:
        for name, messages in sorted(errors.items()):
            logger.debug(f"invalid setting {name}: {messages}")
        raise ConfigValidationError(errors)
    if 'factorize' in validated and validated['factorize']['reverse_samples'] != AUTO_EQUAL_TIME:
        validated['factorize']['reverse_samples'] = int(validated['factorize']['reverse_samples'])
    return validated
