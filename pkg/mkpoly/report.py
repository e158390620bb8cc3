"""
Report serialisation: versioned JSON for every command, CSV for Gram matrices.

JSON output uses sorted keys and plain Python numbers so identical runs
produce byte-identical files.
"""
import csv
import io
import json
import os
from fractions import Fraction
from typing import List, Optional

import mpmath
import numpy as np

from .symlaurent import LaurentPoly

SCHEMA = "mk-report/1"


def to_jsonable(value):
    """Recursively convert numbers, arrays and polynomials into JSON-ready values."""
    if isinstance(value, LaurentPoly):
        return value.to_json()
    if isinstance(value, dict):
        return {str(key): to_jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(item) for item in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating, mpmath.mpc)):
        value = complex(value)
        if value.imag == 0:
            return value.real
        return {"re": value.real, "im": value.imag}
    if isinstance(value, (float, np.floating, Fraction, mpmath.mpf)):
        return float(value)
    return value


def build_report(command: str, config: dict, result: Optional[dict] = None, passed: bool = True,
                 error: Optional[BaseException] = None) -> dict:
    report = {
        "schema": SCHEMA,
        "command": command,
        "config": config,
        "passed": bool(passed) and error is None,
    }
    if result is not None:
        report["result"] = result
    if error is not None:
        report["error"] = {"type": type(error).__name__, "message": str(error)}
    return to_jsonable(report)


def dumps_report(report: dict) -> str:
    return json.dumps(to_jsonable(report), sort_keys=True, indent=2, allow_nan=True) + "\n"


def gram_csv(labels: List, residuals) -> str:
    """Normalised Gram residual matrix with partition labels as header row and column."""
    names = [",".join(str(v) for v in label) for label in labels]
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["label"] + names)
    for name, row in zip(names, np.asarray(residuals, dtype=float)):
        writer.writerow([name] + [repr(float(value)) for value in row])
    return buffer.getvalue()


def write_text(text: str, output_path: Optional[str]) -> None:
    """Write to ``output_path`` (creating parent folders) or to stdout when None."""
    if output_path is None:
        print(text, end="")
        return
    folder = os.path.dirname(output_path)
    if folder:
        os.makedirs(folder, exist_ok=True)
    with open(output_path, "w", encoding="utf-8") as handle:
        handle.write(text)
