"""JSON schemas for CLI configs and the reports it writes."""

from __future__ import annotations

import jsonschema

from .errors import ConfigInvalid

_num = {"type": "number"}
_num_or_null = {"type": ["number", "null"]}
_unit = {"type": "number", "minimum": 0, "maximum": 1}
_affine = {"type": "array", "items": _num, "minItems": 2, "maxItems": 2}

PRIOR = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["discrete", "piecewise_uniform", "piecewise_linear_density",
                          "beta_mixture", "uniform"]},
        "support": {"type": "array", "items": _unit, "minItems": 1},
        "probs": {"type": "array", "items": _num, "minItems": 1},
        "pieces": {"type": "array", "items": {"type": "array", "items": _num, "minItems": 3, "maxItems": 3},
                   "minItems": 1},
        "knots": {"type": "array", "items": _unit, "minItems": 2},
        "values": {"type": "array", "items": _num, "minItems": 2},
        "components": {"type": "array", "items": {"type": "array", "items": _num, "minItems": 3, "maxItems": 3},
                       "minItems": 1},
    },
    "allOf": [
        {"if": {"properties": {"kind": {"const": "discrete"}}}, "then": {"required": ["support", "probs"]}},
        {"if": {"properties": {"kind": {"const": "piecewise_uniform"}}}, "then": {"required": ["pieces"]}},
        {"if": {"properties": {"kind": {"const": "piecewise_linear_density"}}},
         "then": {"required": ["knots", "values"]}},
        {"if": {"properties": {"kind": {"const": "beta_mixture"}}}, "then": {"required": ["components"]}},
    ],
}

OBJECTIVE = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["polynomial", "s_family", "m_family"]},
        "coeffs": {"type": "array", "items": _num, "minItems": 1},
        "omega_M": _unit,
        "omega_L": _unit,
        "omega_R": _unit,
        "affine": _affine,
    },
    "allOf": [
        {"if": {"properties": {"kind": {"const": "polynomial"}}}, "then": {"required": ["coeffs"]}},
        {"if": {"properties": {"kind": {"const": "s_family"}}}, "then": {"required": ["omega_M"]}},
        {"if": {"properties": {"kind": {"const": "m_family"}}}, "then": {"required": ["omega_L", "omega_R"]}},
    ],
}

ENVIRONMENT = {
    "type": "object",
    "required": ["quality", "citizens", "outlets"],
    "properties": {
        "quality": PRIOR,
        "citizens": OBJECTIVE,
        "outlets": {"oneOf": [{"const": "continuum"},
                              {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0,
                                                          "exclusiveMaximum": 1}}]},
    },
}

_positive = {"type": "number", "exclusiveMinimum": 0}

CONFIG = {
    "type": "object",
    "required": ["task"],
    "properties": {
        "task": {"enum": ["solve_discrete", "solve_continuous", "censorship", "oracle", "sweep"]},
        "name": {"type": "string"},
        "prior": PRIOR,
        "objective": OBJECTIVE,
        "environment": ENVIRONMENT,
        "seed": {"type": "integer", "minimum": 0},
        "grid": {"type": "integer", "minimum": 1},
        "tolerances": {
            "type": "object",
            "properties": {"bisect": _positive, "residual": _positive, "tie": _positive},
            "additionalProperties": False,
        },
        "oracle": {
            "type": "object",
            "properties": {
                "kind": {"enum": ["monotone", "all", "interval_disclosure", "bipooling_pairs",
                                  "stochastic_uc_z"]},
                "random_batch": {
                    "type": "object",
                    "properties": {"count": {"type": "integer", "minimum": 1},
                                   "n_min": {"type": "integer", "minimum": 1},
                                   "n_max": {"type": "integer", "minimum": 1, "maximum": 25}},
                },
            },
        },
        "sweep": {
            "type": "object",
            "required": ["family"],
            "properties": {"family": {"enum": ["discrete_uc", "continuous_cutoff", "censorship_policies"]},
                           "K": {"type": "integer", "minimum": 1}},
        },
        "outputs": {
            "type": "object",
            "properties": {"report": {"type": "string"}, "csv": {"type": "string"},
                           "figures": {"type": "boolean"}},
        },
    },
    "allOf": [
        {"if": {"properties": {"task": {"enum": ["solve_discrete", "solve_continuous"]}}},
         "then": {"required": ["prior", "objective"]}},
        {"if": {"properties": {"task": {"const": "censorship"}}}, "then": {"required": ["environment"]}},
        {"if": {"properties": {"task": {"const": "sweep"}}}, "then": {"required": ["sweep"]}},
    ],
}

_partition = {"type": "array", "items": {"type": "array", "items": {"type": "integer"},
                                         "minItems": 2, "maxItems": 2}}
_contraction = {"type": "object", "required": ["passed", "mean_gap", "worst_violation"],
                "properties": {"passed": {"type": "boolean"}}}

_base_report = {"task": {"type": "string"}, "method": {"enum": ["solver", "oracle"]},
                "files": {"type": "object"}}

REPORTS = {
    "solve_discrete": {
        "type": "object",
        "required": ["task", "method", "omega_star", "q_star", "m_star", "value", "partitions",
                     "monotone_value", "shape"],
        "properties": {**_base_report, "omega_star": _num_or_null, "q_star": _num_or_null,
                       "m_star": _num_or_null, "value": _num, "monotone_value": _num,
                       "partitions": {"type": "array", "items": _partition, "minItems": 1},
                       "uc_forms": {"type": "array"}, "case": {"type": "string"},
                       "contraction": _contraction},
    },
    "solve_continuous": {
        "type": "object",
        "required": ["task", "method", "branch", "omega_L_star", "omega_R_star", "m_L_star", "m_R_star",
                     "value", "bipooling_condition", "unrestricted_value"],
        "properties": {**_base_report, "branch": {"enum": ["interval", "cutoff", "none"]},
                       "omega_L_star": _num, "omega_R_star": _num, "m_L_star": _num, "m_R_star": _num,
                       "value": _num, "unrestricted_value": _num,
                       "bipooling_condition": {"type": "object", "required": ["holds"]},
                       "alternatives": {"type": "array"}, "residuals": {"type": "object"},
                       "contraction": _contraction},
    },
    "censorship": {
        "type": "object",
        "required": ["task", "method", "censored", "permitted", "value", "unrestricted_value"],
        "properties": {**_base_report, "censored": {"type": "array"}, "permitted": {"type": "array"},
                       "value": _num, "unrestricted_value": _num},
    },
    "oracle": {
        "type": "object",
        "required": ["task", "method", "results"],
        "properties": {**_base_report, "method": {"const": "oracle"}, "results": {"type": "array"},
                       "batch": {"type": "object"}},
    },
    "sweep": {
        "type": "object",
        "required": ["task", "method", "family", "rows", "columns"],
        "properties": {**_base_report, "family": {"type": "string"}, "rows": {"type": "integer"},
                       "columns": {"type": "array", "items": {"type": "string"}}},
    },
}


def _path(err) -> str:
    parts = [str(p) for p in err.absolute_path]
    if err.validator == "required" and isinstance(err.instance, dict):
        # point at the missing key rather than its parent
        missing = [k for k in err.validator_value if k not in err.instance]
        parts += missing[:1]
    return ".".join(parts) or "<root>"


def validate_config(cfg) -> None:
    """Raise ``ConfigInvalid`` naming the first offending field."""
    v = jsonschema.Draft202012Validator(CONFIG)
    e = jsonschema.exceptions.best_match(v.iter_errors(cfg))
    if e is not None:
        raise ConfigInvalid(f"config field '{_path(e)}': {e.message}")


def validate_report(task: str, report: dict) -> None:
    jsonschema.validate(report, REPORTS[task], cls=jsonschema.Draft202012Validator)
