"""Validation of the JSON documents the commands read.

Each JSON object is checked by its own form; the first failing field is
reported as a ConfigurationError whose pointer locates it in the
document, e.g. ``/sources/1/amplitude``.
"""
import math

from django import forms
from django.core.exceptions import NON_FIELD_ERRORS

from errormodel.budget import CONSTANT, PROPORTIONAL, SHAPES, BudgetComponent, ErrorBudget
from errormodel.errors import ConfigurationError
from errormodel.simulate import (
    CONDITIONS, NONE, SOURCE_KINDS, ConditionRule, ConditionSchedule, Scenario, make_source,
)


def _validated(form_class, data, pointer, **kwargs):
    if not isinstance(data, dict):
        raise ConfigurationError("expected a JSON object", pointer=pointer or '/')
    form = form_class(data=data, **kwargs)
    if not form.is_valid():
        field, errors = next(iter(form.errors.items()))
        location = pointer if field == NON_FIELD_ERRORS else f"{pointer}/{field}"
        raise ConfigurationError(errors[0], pointer=location or '/')
    return form.cleaned_data


def _list(data, key, pointer, required=True):
    value = data.get(key)
    if value is None and not required:
        return []
    if not isinstance(value, list):
        raise ConfigurationError("expected a JSON array", pointer=f"{pointer}/{key}")
    return value


def _numbers(value, message):
    if not isinstance(value, list) or not all(
        isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x) for x in value
    ):
        raise forms.ValidationError(message)
    return [float(x) for x in value]


class BudgetForm(forms.Form):
    operating_point_m = forms.FloatField(required=False, min_value=0)


class BudgetComponentForm(forms.Form):
    name = forms.CharField(max_length=100)
    std = forms.FloatField(min_value=0)
    unit = forms.CharField(max_length=10)
    sensitivity = forms.CharField(required=False)
    shape = forms.ChoiceField(choices=[(s, s) for s in SHAPES], required=False)

    def clean_sensitivity(self):
        value = self.cleaned_data['sensitivity'] or CONSTANT
        if value in (CONSTANT, PROPORTIONAL):
            return value
        try:
            coefficient = float(value)
        except ValueError:
            raise forms.ValidationError(
                f"sensitivity must be '{CONSTANT}', '{PROPORTIONAL}' or a number, got '{value}'"
            )
        if not math.isfinite(coefficient):
            raise forms.ValidationError("sensitivity coefficient must be finite")
        return coefficient


def parse_budget(data):
    """Budget document -> (ErrorBudget, shapes by component name)"""
    head = _validated(BudgetForm, data, '')
    components = []
    shapes = {}
    for i, item in enumerate(_list(data, 'components', '', required=False)):
        cleaned = _validated(BudgetComponentForm, item, f"/components/{i}")
        components.append(BudgetComponent(
            name=cleaned['name'],
            std=cleaned['std'],
            unit=cleaned['unit'],
            sensitivity=cleaned['sensitivity'],
        ))
        if cleaned['shape']:
            shapes[cleaned['name']] = cleaned['shape']
    budget = ErrorBudget(components=components, operating_point=head['operating_point_m'] or 0.0)
    return budget, shapes


class SourceForm(forms.Form):
    REQUIRED = {
        'additive-constant': ('value',),
        'multiplicative': ('value',),
        'cycle': ('amplitude', 'wavelength'),
        'temperature-polynomial': ('coefficients',),
        'gaussian-noise': ('sigma',),
    }

    kind = forms.ChoiceField(choices=[(k, k) for k in SOURCE_KINDS])
    name = forms.CharField(max_length=100, required=False)
    depends_on = forms.ChoiceField(choices=[(c, c) for c in CONDITIONS + (NONE,)], required=False)
    # c in mm for the additive constant, r in ppm for the multiplicative one
    value = forms.FloatField(required=False)
    amplitude = forms.FloatField(required=False, min_value=0)
    wavelength = forms.FloatField(required=False)
    phase = forms.FloatField(required=False)
    phase_deg = forms.FloatField(required=False)
    coefficients = forms.JSONField(required=False)
    sigma = forms.FloatField(required=False, min_value=0)

    def clean_wavelength(self):
        value = self.cleaned_data['wavelength']
        if value is not None and value <= 0:
            raise forms.ValidationError("wavelength must be positive")
        return value

    def clean_coefficients(self):
        value = self.cleaned_data['coefficients']
        if value is None:
            return value
        return _numbers(value, "coefficients must be a list of numbers")

    def clean(self):
        cleaned = super().clean()
        kind = cleaned.get('kind')
        for field in self.REQUIRED.get(kind, ()):
            if field not in self.errors and cleaned.get(field) is None:
                self.add_error(field, f"required for a {kind} source")
        if cleaned.get('phase') is not None and cleaned.get('phase_deg') is not None:
            self.add_error('phase_deg', "give phase or phase_deg, not both")
        return cleaned


def _build_source(cleaned):
    kind = cleaned['kind']
    common = {'name': cleaned['name'] or None, 'depends_on': cleaned['depends_on'] or None}
    if kind == 'additive-constant':
        return make_source(kind, c=cleaned['value'], **common)
    if kind == 'multiplicative':
        return make_source(kind, r=cleaned['value'], **common)
    if kind == 'cycle':
        phase = cleaned['phase']
        if phase is None:
            phase = math.radians(cleaned['phase_deg'] or 0.0)
        return make_source(
            kind, amplitude=cleaned['amplitude'], wavelength=cleaned['wavelength'], phase=phase, **common
        )
    if kind == 'temperature-polynomial':
        return make_source(kind, coeffs=cleaned['coefficients'], **common)
    return make_source(kind, sigma=cleaned['sigma'], **common)


class ConditionForm(forms.Form):
    generator = forms.ChoiceField(choices=[(g, g) for g in ('constant', 'listed', 'uniform')])
    value = forms.FloatField(required=False)
    values = forms.JSONField(required=False)
    low = forms.FloatField(required=False)
    high = forms.FloatField(required=False)

    def __init__(self, *args, repeats=None, **kwargs):
        super().__init__(*args, **kwargs)
        self.repeats = repeats

    def clean_values(self):
        value = self.cleaned_data['values']
        if value is None:
            return value
        return _numbers(value, "values must be a list of numbers")

    def clean(self):
        cleaned = super().clean()
        generator = cleaned.get('generator')
        if generator == 'constant' and cleaned.get('value') is None:
            self.add_error('value', "required for a constant condition")
        elif generator == 'listed' and 'values' not in self.errors:
            values = cleaned.get('values')
            if values is None:
                self.add_error('values', "required for a listed condition")
            elif self.repeats is not None and len(values) != self.repeats:
                self.add_error('values', f"expected {self.repeats} values, got {len(values)}")
        elif generator == 'uniform':
            low, high = cleaned.get('low'), cleaned.get('high')
            if low is None or high is None:
                self.add_error('low' if low is None else 'high', "required for a uniform condition")
            elif not high > low:
                self.add_error('high', "must exceed low")
        return cleaned


class ScheduleForm(forms.Form):
    repeats = forms.IntegerField(min_value=1)
    seed = forms.IntegerField(required=False, min_value=0)


class ScenarioForm(forms.Form):
    label = forms.CharField(required=False)
    true_value = forms.FloatField(required=False)
    value_unit = forms.ChoiceField(choices=[('m', 'm'), ('MHz', 'MHz')], required=False)


class DifferentialForm(forms.Form):
    pairs = forms.JSONField()
    round_mm = forms.FloatField(required=False, min_value=0)

    def clean_pairs(self):
        pairs = self.cleaned_data['pairs']
        if not isinstance(pairs, list) or not pairs:
            raise forms.ValidationError("pairs must be a non-empty list of [s_ab, s_ac]")
        result = []
        for i, pair in enumerate(pairs):
            values = _numbers(pair, f"pair {i} must be [s_ab, s_ac]")
            if len(values) != 2:
                raise forms.ValidationError(f"pair {i} must be [s_ab, s_ac]")
            if not values[1] > values[0]:
                raise forms.ValidationError(f"pair {i}: s_ac must exceed s_ab")
            result.append(tuple(values))
        return result


def _schedule(data, pointer):
    head = _validated(ScheduleForm, data, pointer)
    conditions = data.get('conditions', {})
    if not isinstance(conditions, dict):
        raise ConfigurationError("expected a JSON object", pointer=f"{pointer}/conditions")
    rules = {}
    for name, rule in conditions.items():
        if name not in CONDITIONS:
            raise ConfigurationError(
                f"unknown condition, expected one of {', '.join(CONDITIONS)}",
                pointer=f"{pointer}/conditions/{name}",
            )
        cleaned = _validated(ConditionForm, rule, f"{pointer}/conditions/{name}", repeats=head['repeats'])
        rules[name] = ConditionRule(
            generator=cleaned['generator'],
            value=cleaned['value'],
            values=tuple(cleaned['values'] or ()),
            low=cleaned['low'],
            high=cleaned['high'],
        )
    return ConditionSchedule(repeats=head['repeats'], conditions=rules, seed=head['seed'])


def parse_scenario(data):
    head = _validated(ScenarioForm, data, '')
    sources = []
    for i, item in enumerate(_list(data, 'sources', '')):
        cleaned = _validated(SourceForm, item, f"/sources/{i}")
        try:
            sources.append(_build_source(cleaned))
        except ConfigurationError as e:
            raise ConfigurationError(str(e), pointer=f"/sources/{i}")
    if not sources:
        raise ConfigurationError("at least one source is required", pointer='/sources')

    schedule = _schedule(data['schedule'], '/schedule') if data.get('schedule') is not None else None
    pairs, round_mm = (), None
    if data.get('differential') is not None:
        differential = _validated(DifferentialForm, data['differential'], '/differential')
        pairs, round_mm = tuple(differential['pairs']), differential['round_mm']
    if schedule is None and not pairs:
        raise ConfigurationError("scenario needs a schedule or a differential section", pointer='/')

    scenario = Scenario(
        sources=tuple(sources),
        true_value=head['true_value'] or 0.0,
        value_unit=head['value_unit'] or 'm',
        schedule=schedule,
        pairs=pairs,
        round_mm=round_mm,
        label=head['label'],
    )
    if pairs and scenario.cycle is None:
        raise ConfigurationError("a differential section needs a cycle source", pointer='/sources')
    return scenario
