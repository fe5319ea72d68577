"""JSON schemas and (de)serialization for hierarchy, truth and score files.

Hierarchy documents carry the node count and a fine-to-coarse list of
levels, each with its group count, a membership vector over the original
nodes, and the estimated group-affinity matrix.  Truth files share the
schema and add the finest-level generating probabilities under
``omega_fine``.  Outputs are written with sorted keys so equal inputs and
seeds produce byte-identical files.
"""

from __future__ import annotations

import json

import jsonschema
import numpy as np

from .errors import SchemaError
from .graph import Partition
from .hierarchy import HierarchyResult

__all__ = [
    "HIERARCHY_SCHEMA",
    "TRUTH_SCHEMA",
    "SCORE_SCHEMA",
    "hierarchy_to_dict",
    "truth_to_dict",
    "score_to_dict",
    "load_levels",
    "dump_json",
    "validate_document",
]

_LEVEL_SCHEMA = {
    "type": "object",
    "required": ["k", "membership", "omega"],
    "properties": {
        "k": {"type": "integer", "minimum": 1},
        "membership": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        "omega": {
            "type": "array",
            "items": {"type": "array", "items": {"type": "number"}},
        },
    },
}

HIERARCHY_SCHEMA = {
    "type": "object",
    "required": ["n", "levels"],
    "properties": {
        "n": {"type": "integer", "minimum": 1},
        "levels": {"type": "array", "minItems": 1, "items": _LEVEL_SCHEMA},
        "seed": {"type": "integer"},
        "diagnostics": {"type": "array"},
    },
}

TRUTH_SCHEMA = {
    "type": "object",
    "required": ["n", "levels", "omega_fine"],
    "properties": {
        **HIERARCHY_SCHEMA["properties"],
        "omega_fine": {
            "type": "array",
            "items": {"type": "array", "items": {"type": "number"}},
        },
    },
}

SCORE_SCHEMA = {
    "type": "object",
    "required": ["xi", "precision", "recall"],
    "properties": {
        "xi": {
            "type": "array",
            "items": {"type": "array", "items": {"type": "number"}},
        },
        "precision": {"type": "number"},
        "recall": {"type": "number"},
    },
}


def _level_dict(k: int, membership: np.ndarray, omega: np.ndarray) -> dict:
    return {
        "k": int(k),
        "membership": [int(x) for x in membership],
        "omega": [[float(x) for x in row] for row in omega],
    }


def hierarchy_to_dict(result: HierarchyResult, seed: int | None = None) -> dict:
    doc = {
        "n": int(result.n),
        "levels": [
            _level_dict(
                level.k, level.composed_partition.assignment, level.affinity.values
            )
            for level in result.levels
        ],
        "diagnostics": result.diagnostics,
    }
    if seed is not None:
        doc["seed"] = int(seed)
    return doc


def truth_to_dict(partitions, level_omegas, omega_fine, seed: int | None = None) -> dict:
    doc = {
        "n": int(partitions[0].n),
        "levels": [
            _level_dict(p.k, p.assignment, omega)
            for p, omega in zip(partitions, level_omegas)
        ],
        "omega_fine": [[float(x) for x in row] for row in np.asarray(omega_fine)],
    }
    if seed is not None:
        doc["seed"] = int(seed)
    return doc


def score_to_dict(report) -> dict:
    return {
        "xi": [[float(x) for x in row] for row in report.xi],
        "precision": float(report.precision),
        "recall": float(report.recall),
    }


def validate_document(doc, schema) -> None:
    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as exc:
        raise SchemaError(
            f"document does not match schema at {exc.json_path}: {exc.message}",
            json_path=exc.json_path,
        ) from exc


def load_levels(path, schema=HIERARCHY_SCHEMA) -> tuple[int, list]:
    """Read a hierarchy/truth file and return (n, fine-to-coarse partitions)."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON in {path}: {exc}") from exc
    validate_document(doc, schema)
    n = doc["n"]
    partitions = []
    for idx, level in enumerate(doc["levels"]):
        membership = np.asarray(level["membership"], dtype=np.int64)
        if membership.size != n:
            raise SchemaError(
                f"level {idx} membership has {membership.size} entries, expected {n}",
                json_path=f"$.levels[{idx}].membership",
            )
        partition = Partition.from_labels(membership)
        if partition.k != level["k"]:
            raise SchemaError(
                f"level {idx} declares k={level['k']} but membership has "
                f"{partition.k} groups",
                json_path=f"$.levels[{idx}].k",
            )
        partitions.append(partition)
    return n, partitions


def dump_json(doc, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")
