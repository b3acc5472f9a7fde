"""Serialization of run, dynamics, and sweep reports.

All JSON is written canonically (sorted keys, two-space indent, trailing
newline) and contains nothing environment-dependent, so rerunning an
identical configuration yields byte-identical files.  Schemas for the three
report families live here as plain dicts and every writer validates against
them before touching disk.
"""

import csv
import json

import jsonschema
import numpy as np

from .analyze import FrequencyDynamicsReport
from .engine import RunReport

_NUMBER = {"type": "number"}
_INT = {"type": "integer"}
_STR = {"type": "string"}

RUN_REPORT_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "required": ["label", "noise_seed", "config", "summary", "per_step"],
    "additionalProperties": False,
    "properties": {
        "label": _STR,
        "noise_seed": _INT,
        "config": {"type": "object"},
        "summary": {
            "type": "object",
            "required": [
                "final_state_mse",
                "mean_mse",
                "mean_cosine",
                "total_flops",
                "full_cost",
                "pred_cost",
                "speedup",
                "full_steps",
                "predicted_steps",
                "peak_cache_units",
            ],
            "additionalProperties": False,
            "properties": {
                "final_state_mse": _NUMBER,
                "mean_mse": _NUMBER,
                "mean_cosine": _NUMBER,
                "total_flops": _INT,
                "full_cost": _INT,
                "pred_cost": _INT,
                "speedup": _NUMBER,
                "full_steps": _INT,
                "predicted_steps": _INT,
                "peak_cache_units": _INT,
            },
        },
        "per_step": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": [
                    "step",
                    "kind",
                    "mse_vs_truth",
                    "cosine_vs_truth",
                    "effective_low_order",
                    "effective_high_order",
                    "flops",
                    "cache_units",
                ],
                "additionalProperties": False,
                "properties": {
                    "step": _INT,
                    "kind": {"enum": ["full", "predicted"]},
                    "mse_vs_truth": _NUMBER,
                    "cosine_vs_truth": _NUMBER,
                    "effective_low_order": {"type": ["integer", "null"]},
                    "effective_high_order": {"type": ["integer", "null"]},
                    "flops": _INT,
                    "cache_units": _INT,
                },
            },
        },
    },
}

DYNAMICS_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "required": [
        "steps",
        "tokens",
        "channels",
        "cutoff",
        "transform",
        "intervals",
        "low_similarity",
        "high_similarity",
        "low_mean",
        "high_mean",
        "low_pca",
    ],
    "additionalProperties": False,
    "properties": {
        "steps": _INT,
        "tokens": _INT,
        "channels": _INT,
        "cutoff": _NUMBER,
        "transform": {"enum": ["dct", "fft", "none"]},
        "intervals": {"type": "array", "items": _INT},
        "low_similarity": {
            "type": "object",
            "additionalProperties": {"type": "array", "items": _NUMBER},
        },
        "high_similarity": {
            "type": "object",
            "additionalProperties": {"type": "array", "items": _NUMBER},
        },
        "low_mean": {"type": "object", "additionalProperties": _NUMBER},
        "high_mean": {"type": "object", "additionalProperties": _NUMBER},
        "low_pca": {
            "type": ["array", "null"],
            "items": {"type": "array", "items": _NUMBER, "minItems": 2, "maxItems": 2},
        },
    },
}

SWEEP_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "required": ["grid", "cells", "best_by_interval"],
    "additionalProperties": False,
    "properties": {
        "grid": {"type": "object"},
        "cells": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": [
                    "transform",
                    "low_order",
                    "high_order",
                    "interval",
                    "cutoff",
                    "mean_mse",
                    "final_state_mse",
                    "speedup",
                    "total_flops",
                    "peak_cache_units",
                    "best_for_interval",
                ],
                "additionalProperties": False,
                "properties": {
                    "transform": {"enum": ["dct", "fft", "none"]},
                    "low_order": _INT,
                    "high_order": _INT,
                    "interval": _INT,
                    "cutoff": _NUMBER,
                    "mean_mse": _NUMBER,
                    "final_state_mse": _NUMBER,
                    "speedup": _NUMBER,
                    "total_flops": _INT,
                    "peak_cache_units": _INT,
                    "best_for_interval": {"type": "boolean"},
                },
            },
        },
        "best_by_interval": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "required": ["transform", "low_order", "high_order", "mean_mse"],
                "additionalProperties": False,
                "properties": {
                    "transform": {"enum": ["dct", "fft", "none"]},
                    "low_order": _INT,
                    "high_order": _INT,
                    "mean_mse": _NUMBER,
                },
            },
        },
    },
}


def run_report_to_dict(report: RunReport) -> dict:
    s = report.summary
    return {
        "label": report.label,
        "noise_seed": report.noise_seed,
        "config": report.config,
        "summary": {
            "final_state_mse": float(s.final_state_mse),
            "mean_mse": float(s.mean_mse),
            "mean_cosine": float(s.mean_cosine),
            "total_flops": int(s.total_flops),
            "full_cost": int(s.full_cost),
            "pred_cost": int(s.pred_cost),
            "speedup": float(s.speedup),
            "full_steps": int(s.full_steps),
            "predicted_steps": int(s.predicted_steps),
            "peak_cache_units": int(s.peak_cache_units),
        },
        "per_step": [
            {
                "step": int(r.step),
                "kind": r.kind,
                "mse_vs_truth": float(r.mse_vs_truth),
                "cosine_vs_truth": float(r.cosine_vs_truth),
                "effective_low_order": None
                if r.effective_low_order is None
                else int(r.effective_low_order),
                "effective_high_order": None
                if r.effective_high_order is None
                else int(r.effective_high_order),
                "flops": int(r.flops),
                "cache_units": int(r.cache_units),
            }
            for r in report.per_step
        ],
    }


def dynamics_to_dict(report: FrequencyDynamicsReport) -> dict:
    pca = report.low_pca
    return {
        "steps": report.steps,
        "tokens": report.tokens,
        "channels": report.channels,
        "cutoff": report.cutoff,
        "transform": report.transform.value,
        "intervals": list(report.intervals),
        "low_similarity": {str(d): list(v) for d, v in report.low_similarity.items()},
        "high_similarity": {str(d): list(v) for d, v in report.high_similarity.items()},
        "low_mean": {str(d): v for d, v in report.low_mean.items()},
        "high_mean": {str(d): v for d, v in report.high_mean.items()},
        "low_pca": None if pca is None else np.asarray(pca).tolist(),
    }


def validate_run_report(doc: dict) -> None:
    jsonschema.validate(doc, RUN_REPORT_SCHEMA)


def validate_dynamics(doc: dict) -> None:
    jsonschema.validate(doc, DYNAMICS_SCHEMA)


def validate_sweep(doc: dict) -> None:
    jsonschema.validate(doc, SWEEP_SCHEMA)


def write_json(doc: dict, path) -> None:
    """Canonical JSON: sorted keys, stable float repr, trailing newline."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_run_report(report: RunReport, json_path, csv_path=None) -> dict:
    doc = run_report_to_dict(report)
    validate_run_report(doc)
    write_json(doc, json_path)
    if csv_path is not None:
        with open(csv_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                [
                    "step",
                    "kind",
                    "mse_vs_truth",
                    "cosine_vs_truth",
                    "effective_low_order",
                    "effective_high_order",
                    "flops",
                    "cache_units",
                ]
            )
            for r in doc["per_step"]:
                writer.writerow(
                    [
                        r["step"],
                        r["kind"],
                        repr(r["mse_vs_truth"]),
                        repr(r["cosine_vs_truth"]),
                        "" if r["effective_low_order"] is None else r["effective_low_order"],
                        "" if r["effective_high_order"] is None else r["effective_high_order"],
                        r["flops"],
                        r["cache_units"],
                    ]
                )
    return doc


def write_dynamics_report(report: FrequencyDynamicsReport, json_path, csv_path=None) -> dict:
    doc = dynamics_to_dict(report)
    validate_dynamics(doc)
    write_json(doc, json_path)
    if csv_path is not None:
        with open(csv_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["interval", "start_step", "low_similarity", "high_similarity"])
            for d in report.intervals:
                lows = report.low_similarity[d]
                highs = report.high_similarity[d]
                for k, (lo, hi) in enumerate(zip(lows, highs)):
                    writer.writerow([d, k, repr(lo), repr(hi)])
    return doc


def write_sweep_report(doc: dict, json_path, csv_path=None) -> dict:
    validate_sweep(doc)
    write_json(doc, json_path)
    if csv_path is not None:
        with open(csv_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                [
                    "transform",
                    "low_order",
                    "high_order",
                    "interval",
                    "cutoff",
                    "mean_mse",
                    "final_state_mse",
                    "speedup",
                    "total_flops",
                    "peak_cache_units",
                    "best_for_interval",
                ]
            )
            for c in doc["cells"]:
                writer.writerow(
                    [
                        c["transform"],
                        c["low_order"],
                        c["high_order"],
                        c["interval"],
                        repr(c["cutoff"]),
                        repr(c["mean_mse"]),
                        repr(c["final_state_mse"]),
                        repr(c["speedup"]),
                        c["total_flops"],
                        c["peak_cache_units"],
                        int(c["best_for_interval"]),
                    ]
                )
    return doc
