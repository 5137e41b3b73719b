"""Module with marshmallow schemas and validators for run configuration."""

from marshmallow import Schema, fields, post_load
from marshmallow.exceptions import ValidationError
from marshmallow.validate import OneOf, Range

from .domain import Design, MeanId, Method, Noise, VarianceId
from .dto import CVConfig, ExperimentConfig, FunctionSpec
from .exception import InvalidConfiguration
from .modelsel import DEFAULT_FOLDS


def _values(enum, exclude=()):
    return [member.value for member in enum if member not in exclude]


OPEN_BANDWIDTH = Range(min=0.0, max=0.5, min_inclusive=False, max_inclusive=False)


class CVConfigSchema(Schema):
    folds = fields.Integer(load_default=DEFAULT_FOLDS, validate=Range(min=2))
    h_grid = fields.List(fields.Float(validate=OPEN_BANDWIDTH), load_default=None, allow_none=True)
    seed = fields.Integer(load_default=0, validate=Range(min=0))
    method = fields.String(load_default=Method.DIFFERENCE.value, validate=OneOf(_values(Method)))

    @post_load
    def make_config(self, data, **kwargs):
        return CVConfig(
            folds=data['folds'],
            h_grid=data['h_grid'],
            seed=data['seed'],
            method=Method(data['method'])
        )


class FunctionSpecSchema(Schema):
    mean_id = fields.String(required=True, validate=OneOf(_values(MeanId, exclude=(MeanId.CUSTOM,))))
    variance_id = fields.String(
        load_default=VarianceId.QUADRATIC.value,
        validate=OneOf(_values(VarianceId, exclude=(VarianceId.CUSTOM,)))
    )
    alpha = fields.Float(load_default=2.0, validate=Range(min=0.0, min_inclusive=False))
    beta = fields.Float(load_default=2.0, validate=Range(min=0.0, min_inclusive=False))
    M_f = fields.Float(load_default=1.0, validate=Range(min=0.0, min_inclusive=False))
    M_V = fields.Float(load_default=1.0, validate=Range(min=0.0, min_inclusive=False))

    @post_load
    def make_spec(self, data, **kwargs):
        return FunctionSpec(
            mean_id=MeanId(data['mean_id']),
            variance_id=VarianceId(data['variance_id']),
            alpha=data['alpha'],
            beta=data['beta'],
            M_f=data['M_f'],
            M_V=data['M_V']
        )


class ExperimentConfigSchema(Schema):
    """Schema of the experiment JSON file accepted by `simulate` and `rates`."""
    n = fields.Integer(required=True, validate=Range(min=10))
    replications = fields.Integer(required=True, validate=Range(min=1))
    functions = fields.Nested(FunctionSpecSchema, required=True)
    noise = fields.String(load_default=Noise.GAUSSIAN.value, validate=OneOf(_values(Noise)))
    design = fields.String(load_default=Design.FIXED.value, validate=OneOf(_values(Design)))
    cv = fields.Nested(CVConfigSchema, load_default=None)
    master_seed = fields.Integer(load_default=0, validate=Range(min=0))
    order = fields.Integer(load_default=2, validate=Range(min=0))

    @post_load
    def make_config(self, data, **kwargs):
        cv = data['cv']
        if cv is None:
            cv = CVConfig(folds=DEFAULT_FOLDS, h_grid=None, seed=data['master_seed'], method=Method.DIFFERENCE)
        return ExperimentConfig(
            n=data['n'],
            replications=data['replications'],
            functions=data['functions'],
            noise=Noise(data['noise']),
            design=Design(data['design']),
            cv=cv,
            master_seed=data['master_seed'],
            order=data['order']
        )


class ParameterValidator:
    """Simple service for validating single command-line parameters.

    Wrapper for marshmallow.validate validators.

    """

    def check(self, name, value, validator):
        try:
            validator(value)
        except ValidationError as e:
            raise InvalidConfiguration(
                message='Invalid value for %s.' % name,
                payload={'field': name, 'value': value, 'errors': e.messages}
            )
        return value

    def bandwidth(self, name, value):
        return self.check(name, value, OPEN_BANDWIDTH)

    def at_least(self, name, value, minimum):
        return self.check(name, value, Range(min=minimum))
