"""Deterministic JSON encoding of reports.

Floats are written with their shortest round-trip representation and keys
keep insertion order, so identical inputs give byte-identical output.
"""

from __future__ import annotations

import dataclasses
import json
import math

import numpy as np

SCHEMA_VERSION = 1


def to_plain(obj):
    """Convert dataclasses, numpy values and tuples to JSON-ready builtins."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def dumps(payload: dict, indent: int | None = 2) -> str:
    """Serialize ``payload`` under a versioned envelope."""
    body = {"schema": SCHEMA_VERSION}
    body.update(to_plain(payload))
    return json.dumps(body, indent=indent, allow_nan=False) + "\n"


def fixed_point_dict(fp) -> dict:
    return {
        "lambda_star": fp.lambda_star,
        "q_star": fp.q_star,
        "capacity": fp.capacity,
        "divergences": fp.divergences,
        "index_types": fp.index_types(),
        "type1": [i + 1 for i in fp.type1],
        "type2": [i + 1 for i in fp.type2],
        "type3": [i + 1 for i in fp.type3],
        "kt_residual": fp.kt_residual,
        "provenance": fp.provenance,
        "converged": fp.converged,
        "iterations": fp.iterations,
        "near_degenerate": fp.near_degenerate,
        "warnings": list(fp.warnings),
    }


def spectral_dict(spectral, fp) -> dict:
    return {
        "jacobian": spectral.jacobian,
        "eigenvalues": spectral.eigenvalues,
        "eigenvalues_by_type": spectral.eigenvalues_by_type(fp),
        "theta_max": spectral.theta_max,
        "theta_sec": spectral.theta_sec,
        "A": spectral.A,
        "A1": spectral.A1,
        "A2": spectral.A2,
        "b_max": spectral.b_max,
        "b_max_is_right_eigenvector": spectral.b_max_is_right,
        "theta_max_in_type3": spectral.theta_max_in_type3,
    }


def reduced_dict(model) -> dict:
    return {
        "type2": [i + 1 for i in model.type2],
        "r": model.r,
        "sigma": model.sigma,
        "canonical_rows": model.p,
        "limits": model.limits_full,
        "diag_dominant": model.diag_dominant,
        "sigma_positive": model.sigma_positive,
        "consistency_error": model.consistency_error,
        "warnings": list(model.warnings),
    }


def prediction_dict(pred) -> dict:
    out = {
        "kind": pred.kind,
        "rate": pred.rate,
        "theta": pred.theta,
        "basis": pred.basis,
        "limits": pred.limits,
        "initial_independent": pred.initial_independent,
        "near_degenerate": pred.near_degenerate,
        "notes": list(pred.notes),
    }
    if pred.mi_rate is not None:
        out["mi_rate"] = {"kind": pred.mi_rate.kind, "value": pred.mi_rate.value}
    return out
