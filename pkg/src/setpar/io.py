"""File formats: TOML configs, counts files, CSV tables, and result documents.

Numeric fields in machine-readable outputs are printed with 17 significant
digits so values round-trip exactly through text.  All files are UTF-8 with
LF newlines; counts files may arrive with CRLF endings.
"""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path
from typing import Any, Mapping

import numpy as np

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as tomllib

from .errors import DataFormatError
from .estimate import FitResult, ProfileRow
from .params import CountSeries, RegimeParams, SetparParams

__all__ = [
    "read_toml",
    "params_from_mapping",
    "fit_settings_from_mapping",
    "read_counts",
    "write_series_csv",
    "write_table_csv",
    "format_number",
    "dump_document",
    "load_document",
    "fit_result_to_document",
    "params_from_document",
    "file_digest",
    "load_earthquake_counts",
]

EARTHQUAKE_DATA_PATH = Path("data") / "earthquakes.csv"


def format_number(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    v = float(value)
    if not math.isfinite(v):
        return ""
    return format(v, ".17g")


def read_toml(path) -> dict:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError as exc:
        raise DataFormatError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise DataFormatError(f"config file {path} is not valid TOML: {exc}") from exc


def _require(mapping: Mapping, field: str, context: str):
    if field not in mapping:
        raise DataFormatError(f"missing config field '{context}{field}'")
    return mapping[field]


def _as_float(value, context: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise DataFormatError(f"config field '{context}' must be a number, got {value!r}")
    return float(value)


def _as_int(value, context: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise DataFormatError(f"config field '{context}' must be an integer, got {value!r}")
    return int(value)


def _regime_from_mapping(mapping: Mapping, context: str) -> RegimeParams:
    if not isinstance(mapping, Mapping):
        raise DataFormatError(f"config section '{context}' must be a table of d, a, b")
    d = _as_float(_require(mapping, "d", context + "."), context + ".d")
    a = _as_float(_require(mapping, "a", context + "."), context + ".a")
    b = _as_float(_require(mapping, "b", context + "."), context + ".b")
    try:
        return RegimeParams(d=d, a=a, b=b)
    except ValueError as exc:
        raise DataFormatError(f"config section '{context}': {exc}") from exc


def params_from_mapping(mapping: Mapping, context: str = "params") -> SetparParams:
    """Build model parameters from a config table with lower/upper blocks."""
    if not isinstance(mapping, Mapping):
        raise DataFormatError(f"config section '{context}' must be a table")
    r = _as_int(_require(mapping, "threshold", context + "."), context + ".threshold")
    lower = _regime_from_mapping(_require(mapping, "lower", context + "."), context + ".lower")
    upper = _regime_from_mapping(_require(mapping, "upper", context + "."), context + ".upper")
    try:
        return SetparParams(r=r, lower=lower, upper=upper)
    except ValueError as exc:
        raise DataFormatError(f"config field '{context}.threshold': {exc}") from exc


def fit_settings_from_mapping(mapping: Mapping) -> dict:
    """Validated subset of fit settings accepted in config files."""
    out: dict = {}
    if "alpha1" in mapping:
        out["alpha1"] = _as_float(mapping["alpha1"], "alpha1")
    if "alpha2" in mapping:
        out["alpha2"] = _as_float(mapping["alpha2"], "alpha2")
    if "thresholds" in mapping:
        ts = mapping["thresholds"]
        if not isinstance(ts, list) or not all(
            isinstance(t, int) and not isinstance(t, bool) for t in ts
        ):
            raise DataFormatError("config field 'thresholds' must be a list of integers")
        out["thresholds"] = tuple(ts)
    if "lambda_init" in mapping:
        out["lambda_init"] = _as_float(mapping["lambda_init"], "lambda_init")
    return out


def read_counts(path, column: str | None = None) -> CountSeries:
    """Read a count series from delimited text.

    Accepts one integer per line, or delimited columns with a header row when
    ``column`` names the field to read.  Raises :class:`DataFormatError`
    naming the offending line on malformed input.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8-sig")
    except FileNotFoundError as exc:
        raise DataFormatError(f"data file not found: {path}") from exc
    lines = text.replace("\r\n", "\n").replace("\r", "\n").split("\n")

    def split_fields(line: str) -> list[str]:
        if "," in line:
            return [f.strip() for f in line.split(",")]
        return line.split()

    rows = [(idx + 1, split_fields(line)) for idx, line in enumerate(lines) if line.strip()]
    if not rows:
        raise DataFormatError(f"data file {path} contains no observations")

    def parse_count(field: str, lineno: int) -> int:
        try:
            return int(field)
        except ValueError:
            pass
        try:
            v = float(field)
        except ValueError as exc:
            raise DataFormatError(
                f"{path}: line {lineno}: expected an integer count, got {field!r}"
            ) from exc
        if not v.is_integer():
            raise DataFormatError(
                f"{path}: line {lineno}: expected an integer count, got {field!r}"
            )
        return int(v)

    first_lineno, first_fields = rows[0]
    col_idx = 0
    start = 0

    def is_numeric(field: str) -> bool:
        try:
            float(field)
            return True
        except ValueError:
            return False

    if column is not None:
        if not all(not is_numeric(f) for f in first_fields):
            raise DataFormatError(
                f"{path}: line {first_lineno}: a header row is required when selecting "
                f"column {column!r}"
            )
        if column not in first_fields:
            raise DataFormatError(
                f"{path}: line {first_lineno}: no column named {column!r} in header {first_fields}"
            )
        col_idx = first_fields.index(column)
        start = 1
    elif not is_numeric(first_fields[0]):
        # Optional header on a single-column file.
        start = 1
        if len(rows) == 1:
            raise DataFormatError(f"data file {path} contains no observations")

    values = []
    for lineno, fields in rows[start:]:
        if col_idx >= len(fields):
            raise DataFormatError(f"{path}: line {lineno}: expected {col_idx + 1} fields")
        value = parse_count(fields[col_idx], lineno)
        if value < 0:
            raise DataFormatError(f"{path}: line {lineno}: negative count {value}")
        values.append(value)
    return CountSeries(np.array(values, dtype=np.int64))


def write_series_csv(path, series: CountSeries, lam: np.ndarray) -> None:
    """Write the simulated pair as `t,y,lambda` rows, one per time index."""
    lines = ["t,y,lambda"]
    for t, (y, l) in enumerate(zip(series.values, lam), start=1):
        lines.append(f"{t},{int(y)},{format_number(float(l))}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def write_table_csv(path, header: list[str], rows: list[list]) -> None:
    """Comma-delimited table with deterministic formatting; '' marks absent cells."""
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for cell in row:
            if cell is None:
                cells.append("")
            elif isinstance(cell, str):
                cells.append(cell)
            else:
                cells.append(format_number(cell))
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def _encode(value: Any, indent: int) -> str:
    pad = "  " * indent
    if value is None:
        return "null"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return format(v, ".17g") if math.isfinite(v) else "null"
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, np.ndarray):
        value = value.tolist()
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        inner = ",\n".join(pad + "  " + _encode(v, indent + 1) for v in value)
        return "[\n" + inner + "\n" + pad + "]"
    if isinstance(value, Mapping):
        if not value:
            return "{}"
        items = []
        for k, v in value.items():
            items.append(pad + "  " + json.dumps(str(k)) + ": " + _encode(v, indent + 1))
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    raise TypeError(f"cannot serialize {type(value)!r}")


def dump_document(path, document: Mapping) -> None:
    """Serialize a nested key-value document as JSON with 17-digit floats."""
    Path(path).write_text(_encode(document, 0) + "\n", encoding="utf-8", newline="\n")


def load_document(path) -> dict:
    path = Path(path)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise DataFormatError(f"result document not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"result document {path} is not valid JSON: {exc}") from exc


def _profile_row_doc(row: ProfileRow) -> dict:
    return {
        "r": row.r,
        "theta": None if row.theta is None else row.theta,
        "loglik": row.loglik if math.isfinite(row.loglik) else None,
        "converged": row.converged,
        "grad_inf_norm": row.grad_inf_norm,
        "iterations": row.iterations,
        "n_lower": row.n_lower,
        "n_upper": row.n_upper,
        "skipped": row.skipped,
        "message": row.message,
    }


def fit_result_to_document(
    result: FitResult,
    lambda_path: np.ndarray,
    residuals,
    manifest: Mapping,
) -> dict:
    return {
        "document": "setpar-fit-result",
        "format_version": 1,
        "model": result.model,
        "n": result.n,
        "lambda_init": result.lambda_init,
        "threshold": result.r,
        "estimates": dict(zip(result.param_names, result.theta.tolist())),
        "standard_errors": dict(zip(result.param_names, result.se.tolist())),
        "loglik": result.loglik,
        "aic": result.aic,
        "bic": result.bic,
        "converged": result.converged,
        "g_hat": result.g_hat,
        "g_hat_inv": result.g_hat_inv,
        "profile": [_profile_row_doc(row) for row in result.profile],
        "lambda_path": lambda_path,
        "pearson_residuals": residuals.residuals,
        "residual_moments": {
            "mean": residuals.mean,
            "std_error": residuals.std_error,
            "skewness": residuals.skewness,
            "excess_kurtosis": residuals.excess_kurtosis,
        },
        "manifest": dict(manifest),
    }


def params_from_document(doc: Mapping) -> tuple[SetparParams, float, str]:
    """Recover (params, lambda_init, model) from a fit result document."""
    for field in ("model", "estimates", "lambda_init"):
        if field not in doc:
            raise DataFormatError(f"fit result document is missing field '{field}'")
    model = doc["model"]
    est = doc["estimates"]
    lam1 = float(doc["lambda_init"])
    try:
        if model == "setpar":
            theta = [est[k] for k in ("d1", "a1", "b1", "d2", "a2", "b2")]
            params = SetparParams.from_theta(int(doc["threshold"]), np.array(theta))
        elif model == "setpar-b2zero":
            theta = [est[k] for k in ("d1", "a1", "b1", "d2", "a2")] + [0.0]
            params = SetparParams.from_theta(int(doc["threshold"]), np.array(theta))
        elif model == "par":
            d, a, b = est["d"], est["a"], est["b"]
            params = SetparParams.from_theta(0, np.array([d, a, b, d, a, b]))
        else:
            raise DataFormatError(f"unknown model {model!r} in fit result document")
    except KeyError as exc:
        raise DataFormatError(f"fit result document is missing estimate {exc}") from exc
    return params, lam1, model


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return "sha256:" + h.hexdigest()


def load_earthquake_counts(path=EARTHQUAKE_DATA_PATH) -> tuple[np.ndarray, CountSeries]:
    """Load the annual major-earthquake counts file (`year,count` rows).

    The file is not distributed with the package; see the README for the
    published sources it can be transcribed from.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(
            f"earthquake dataset not found at {path}; see README for how to obtain it"
        )
    years = []
    counts = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            fields = [f.strip() for f in line.split(",")]
            if lineno == 1 and not fields[0].lstrip("-").isdigit():
                continue
            if len(fields) != 2:
                raise DataFormatError(f"{path}: line {lineno}: expected 'year,count'")
            years.append(int(fields[0]))
            counts.append(int(fields[1]))
    return np.array(years, dtype=np.int64), CountSeries(np.array(counts, dtype=np.int64))
