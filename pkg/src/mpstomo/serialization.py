"""Shared helpers for the JSON file formats (states, datasets, circuits).

All files carry an integer ``version`` field.  Complex arrays are stored as
nested lists of ``[re, im]`` pairs in row-major order, which keeps the files
diffable and language neutral.
"""

from __future__ import annotations

import json

import numpy as np


class SchemaVersionError(ValueError):
    """File declares a schema version this build does not understand."""


def check_version(found, expected: int, kind: str) -> None:
    if not isinstance(found, int):
        raise ValueError(f"{kind} file is missing an integer 'version' field")
    if found != expected:
        raise SchemaVersionError(
            f"unsupported {kind} schema version {found} (expected {expected})"
        )


def pack_complex(arr: np.ndarray) -> list:
    """Complex ndarray -> nested [re, im] pairs (row-major)."""
    flat = np.asarray(arr, dtype=complex).reshape(-1)
    return [[float(z.real), float(z.imag)] for z in flat]


def unpack_complex(pairs, shape) -> np.ndarray:
    arr = np.asarray(pairs, dtype=float)
    expected = (int(np.prod(shape)), 2) if len(shape) else (1, 2)
    if arr.ndim != 2 or arr.shape != expected:
        raise ValueError(
            f"complex array has shape {arr.shape}, expected {expected[0]} [re, im] pairs"
        )
    return (arr[:, 0] + 1j * arr[:, 1]).reshape(shape)


def dump_json(obj, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=1)
        fh.write("\n")


def load_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"malformed JSON in {path}: {exc}") from exc
