"""File formats, config parsing and deterministic report serialization.

Text formats (whitespace-separated, ``#`` starts a comment line, numbers
written with 17 significant digits so values round-trip losslessly):

matrix        ``sym n`` header, then n rows of n entries; validated
              symmetric to absolute tolerance 1e-12 on read.
observations  ``obs n p count`` header, then ``count`` lines ``i j value``
              with 1-based upper-triangular indices (i <= j).
samples       ``samples N n`` header, then N rows of n entries.
config        ``key = value`` lines; unknown or duplicate keys are errors.

Reports serialize to JSON (full nested structure, config and tool stamp
included) or CSV (one row per trial, fixed column set across all
experiments).  Serialization contains nothing volatile -- two runs with
identical inputs produce byte-identical output; in particular measured
wall-clock time is reported on stderr by the CLI but never serialized.
"""

from __future__ import annotations

import dataclasses
import json
from typing import Any

import numpy as np

from .bounds import BoundReport
from .estimators import ObservationSet, SampleSet
from .harness import ExperimentConfig, ExperimentReport, TrialRecord
from .proofcheck import AlignmentReport

__all__ = [
    "FormatError",
    "read_matrix",
    "write_matrix",
    "matrix_bytes",
    "read_observations",
    "write_observations",
    "observations_bytes",
    "read_samples",
    "write_samples",
    "samples_bytes",
    "parse_config",
    "read_config",
    "report_json_bytes",
    "report_csv_bytes",
    "alignment_json_bytes",
    "alignment_csv_bytes",
    "bound_json_bytes",
    "bound_csv_bytes",
]


class FormatError(ValueError):
    """Malformed input file; carries a 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _data_lines(text: str) -> list[tuple[int, list[str]]]:
    """(line_number, tokens) for every non-blank, non-comment line."""
    out = []
    for i, raw in enumerate(text.splitlines(), start=1):
        s = raw.strip()
        if not s or s.startswith("#"):
            continue
        out.append((i, s.split()))
    return out


def _parse_float(tok: str, line: int, what: str) -> float:
    try:
        v = float(tok)
    except ValueError:
        raise FormatError(f"invalid {what} {tok!r}", line) from None
    if not np.isfinite(v):
        raise FormatError(f"{what} must be finite, got {tok!r}", line)
    return v


def _parse_int(tok: str, line: int, what: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise FormatError(f"invalid {what} {tok!r}", line) from None


# ---------------------------------------------------------------- matrices


def read_matrix(text: str) -> np.ndarray:
    lines = _data_lines(text)
    if not lines:
        raise FormatError("empty matrix file")
    hline, htok = lines[0]
    if len(htok) != 2 or htok[0] != "sym":
        raise FormatError("expected header 'sym n'", hline)
    n = _parse_int(htok[1], hline, "dimension")
    if n < 1:
        raise FormatError(f"dimension must be >= 1, got {n}", hline)
    if len(lines) - 1 != n:
        raise FormatError(f"expected {n} data rows, found {len(lines) - 1}", hline)
    A = np.empty((n, n))
    for r, (ln, tok) in enumerate(lines[1:]):
        if len(tok) != n:
            raise FormatError(f"expected {n} entries in row, found {len(tok)}", ln)
        for c, t in enumerate(tok):
            A[r, c] = _parse_float(t, ln, "matrix entry")
    with np.errstate(over="ignore", invalid="ignore"):
        asym = np.abs(A - A.T)
        if asym.size and asym.max() > 1e-12:
            r, c = np.unravel_index(np.argmax(asym), asym.shape)
            raise FormatError(
                f"matrix not symmetric at ({r + 1}, {c + 1}): "
                f"|A_ij - A_ji| = {asym[r, c]:.3e}",
                lines[1 + int(r)][0],
            )
        S = (A + A.T) / 2.0
    if not np.all(np.isfinite(S)):
        # entries above half the float range overflow in A + A.T; halving
        # first is exact there (such values are far from subnormal)
        S = A / 2.0 + A.T / 2.0
    return S


def matrix_bytes(A: np.ndarray) -> bytes:
    A = np.asarray(A, dtype=np.float64)
    n = A.shape[0]
    rows = [f"sym {n}"]
    rows += [" ".join(_fmt(v) for v in A[i]) for i in range(n)]
    return ("\n".join(rows) + "\n").encode()


def write_matrix(path, A: np.ndarray) -> None:
    with open(path, "wb") as fh:
        fh.write(matrix_bytes(A))


# ------------------------------------------------------------ observations


def read_observations(text: str) -> ObservationSet:
    lines = _data_lines(text)
    if not lines:
        raise FormatError("empty observation file")
    hline, htok = lines[0]
    if len(htok) != 4 or htok[0] != "obs":
        raise FormatError("expected header 'obs n p count'", hline)
    n = _parse_int(htok[1], hline, "dimension")
    p = _parse_float(htok[2], hline, "observation probability")
    count = _parse_int(htok[3], hline, "observation count")
    if len(lines) - 1 != count:
        raise FormatError(f"expected {count} observation lines, found {len(lines) - 1}", hline)
    rows = np.empty(count, dtype=np.int64)
    cols = np.empty(count, dtype=np.int64)
    vals = np.empty(count)
    for idx, (ln, tok) in enumerate(lines[1:]):
        if len(tok) != 3:
            raise FormatError("expected 'i j value'", ln)
        i = _parse_int(tok[0], ln, "row index")
        j = _parse_int(tok[1], ln, "column index")
        if not 1 <= i <= j <= n:
            raise FormatError(f"indices must satisfy 1 <= i <= j <= {n}, got ({i}, {j})", ln)
        rows[idx] = i - 1
        cols[idx] = j - 1
        vals[idx] = _parse_float(tok[2], ln, "observed value")
    try:
        return ObservationSet(n=n, p=p, rows=rows, cols=cols, values=vals)
    except ValueError as e:
        raise FormatError(str(e), hline) from None


def observations_bytes(obs: ObservationSet) -> bytes:
    rows = [f"obs {obs.n} {_fmt(obs.p)} {obs.count}"]
    rows += [
        f"{int(i) + 1} {int(j) + 1} {_fmt(v)}"
        for i, j, v in zip(obs.rows, obs.cols, obs.values)
    ]
    return ("\n".join(rows) + "\n").encode()


def write_observations(path, obs: ObservationSet) -> None:
    with open(path, "wb") as fh:
        fh.write(observations_bytes(obs))


# ----------------------------------------------------------------- samples


def read_samples(text: str) -> SampleSet:
    lines = _data_lines(text)
    if not lines:
        raise FormatError("empty sample file")
    hline, htok = lines[0]
    if len(htok) != 3 or htok[0] != "samples":
        raise FormatError("expected header 'samples N n'", hline)
    N = _parse_int(htok[1], hline, "sample count")
    n = _parse_int(htok[2], hline, "dimension")
    if N < 1 or n < 1:
        raise FormatError("sample count and dimension must be >= 1", hline)
    if len(lines) - 1 != N:
        raise FormatError(f"expected {N} sample rows, found {len(lines) - 1}", hline)
    X = np.empty((N, n))
    for r, (ln, tok) in enumerate(lines[1:]):
        if len(tok) != n:
            raise FormatError(f"expected {n} entries in row, found {len(tok)}", ln)
        for c, t in enumerate(tok):
            X[r, c] = _parse_float(t, ln, "sample entry")
    return SampleSet(N=N, n=n, X=X)


def samples_bytes(samples: SampleSet) -> bytes:
    rows = [f"samples {samples.N} {samples.n}"]
    rows += [" ".join(_fmt(v) for v in row) for row in samples.X]
    return ("\n".join(rows) + "\n").encode()


def write_samples(path, samples: SampleSet) -> None:
    with open(path, "wb") as fh:
        fh.write(samples_bytes(samples))


# ------------------------------------------------------------------ config

_COMMON_KEYS = {
    "experiment",
    "n",
    "trials",
    "seed",
    "spectrum",
    "spectrum_beta",
    "spectrum_c",
    "spectrum_values",
    "basis",
}
_CONSTANT_KEYS = {"C_mc", "c_dn", "C_a", "C_b", "c_cov", "C1"}
_EXPERIMENT_KEYS = {
    "relative": {"k", "eps"},
    "gap": {"k", "eps"},
    "alignment": {"k", "eps"},
    "denoising": {"k", "nu"},
    "completion": {"k", "eps", "p", "t"},
    "covariance": {"k", "eps", "n_samples"},
    "decay_rate": {"delta_grid"},
}

_INT_KEYS = {"n", "trials", "seed", "n_samples"}
_FLOAT_KEYS = {
    "spectrum_beta",
    "spectrum_c",
    "eps",
    "nu",
    "p",
    "t",
} | _CONSTANT_KEYS
_LIST_KEYS = {"spectrum_values", "delta_grid"}


def parse_config(text: str) -> ExperimentConfig:
    """Parse ``key = value`` experiment configuration text.

    Every scientific parameter of the chosen experiment is mandatory; only
    the bound constants (C_mc, c_dn, C_a, C_b, c_cov, C1) have defaults.
    Unknown and duplicate keys are rejected by name.
    """
    raw: dict[str, str] = {}
    for ln, tok in _data_lines(text):
        joined = " ".join(tok)
        if "=" not in joined:
            raise FormatError("expected 'key = value'", ln)
        key, _, value = joined.partition("=")
        key = key.strip()
        value = value.strip()
        if not key or not value:
            raise FormatError("expected 'key = value'", ln)
        if key in raw:
            raise FormatError(f"duplicate key {key!r}", ln)
        raw[key] = value

    if "experiment" not in raw:
        raise FormatError("missing mandatory key 'experiment'")
    experiment = raw["experiment"]
    if experiment not in _EXPERIMENT_KEYS:
        raise FormatError(
            f"unknown experiment {experiment!r}; expected one of "
            f"{sorted(_EXPERIMENT_KEYS)}"
        )
    allowed = _COMMON_KEYS | _CONSTANT_KEYS | _EXPERIMENT_KEYS[experiment]
    unknown = sorted(set(raw) - allowed)
    if unknown:
        raise FormatError(
            f"unknown key(s) for experiment {experiment!r}: {', '.join(unknown)}"
        )
    missing = sorted(k for k in ("n", "trials", "seed", "spectrum", "basis") if k not in raw)
    if missing:
        raise FormatError(f"missing mandatory key(s): {', '.join(missing)}")

    kwargs: dict[str, Any] = {"experiment": experiment}
    for key, value in raw.items():
        if key == "experiment":
            continue
        try:
            if key == "spectrum":
                kwargs["spectrum_kind"] = value
            elif key == "k":
                if value == "oracle":
                    if experiment != "covariance":
                        raise ValueError("k = oracle is only valid for covariance")
                    kwargs["k_oracle"] = True
                else:
                    kwargs["k"] = int(value)
            elif key in _INT_KEYS:
                kwargs[key] = int(value)
            elif key in _FLOAT_KEYS:
                kwargs[key] = float(value)
            elif key in _LIST_KEYS:
                kwargs[key] = tuple(float(v) for v in value.replace(",", " ").split())
            else:
                kwargs[key] = value
        except ArithmeticError:
            raise
        except ValueError as e:
            raise FormatError(f"invalid value for {key!r}: {e}") from None
    try:
        return ExperimentConfig(**kwargs)
    except ValueError as e:
        raise FormatError(str(e)) from None


def read_config(path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


# ----------------------------------------------------------------- reports

#: fixed CSV schema: one row per trial, identical columns for every experiment
CSV_COLUMNS = (
    "trial_id",
    "precondition_holds",
    "precondition_margin",
    "measured_error_F",
    "measured_error_2",
    "tail_F",
    "tail_2",
    "ratio_F",
    "bound_value",
    "bound_satisfied",
    "delta",
    "k_used",
    "p",
    "observed_count",
    "mu0",
    "gamma_k",
    "stable_rank",
    "effective_rank",
    "m1",
    "m2",
    "nu",
    "noise_norm_2",
    "threshold_raw",
    "threshold_clamped",
    "threshold_vacuous",
    "err_full_F",
    "rate_frobenius",
    "rate_spectral",
    "beats_guarantee",
    "beats_full",
    "admissibility_expr",
    "rate",
    "direction_trial",
    "sin_head_alignment",
    "sin_tail_separation",
    "sin_subspace_capture",
    "sin_reference_range_alignment",
    "checks_passed",
    "checks_total",
    "all_checks_passed",
)

_RECORD_FIELDS = {
    "trial_id",
    "precondition_holds",
    "precondition_margin",
    "measured_error_F",
    "measured_error_2",
    "tail_F",
    "tail_2",
    "ratio_F",
    "bound_value",
    "bound_satisfied",
}


def _csv_cell(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return _fmt(v)
    return str(v)


def _record_cell(record: TrialRecord, column: str) -> str:
    if column in _RECORD_FIELDS:
        return _csv_cell(getattr(record, column))
    return _csv_cell(record.aux.get(column))


def report_csv_bytes(report: ExperimentReport) -> bytes:
    rows = [",".join(CSV_COLUMNS)]
    rows += [
        ",".join(_record_cell(r, col) for col in CSV_COLUMNS) for r in report.trials
    ]
    return ("\n".join(rows) + "\n").encode()


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj


def report_json_bytes(report: ExperimentReport) -> bytes:
    """Full nested report as canonical JSON bytes (runtime excluded)."""
    doc = {
        "tool": report.tool,
        "experiment": report.experiment,
        "config": dataclasses.asdict(report.config),
        "pass_rate": report.pass_rate,
        "aggregates": _jsonable(report.aggregates),
        "trials": [_jsonable(dataclasses.asdict(r)) for r in report.trials],
    }
    return (json.dumps(doc, indent=2) + "\n").encode()


def alignment_json_bytes(report: AlignmentReport) -> bytes:
    doc = dataclasses.asdict(report)
    doc["all_passed"] = report.all_passed
    return (json.dumps(_jsonable(doc), indent=2) + "\n").encode()


def alignment_csv_bytes(report: AlignmentReport) -> bytes:
    rows = ["name,lhs,rhs,slack,passed"]
    rows += [
        f"{c.name},{_fmt(c.lhs)},{_fmt(c.rhs)},{_fmt(c.slack)},{_csv_cell(c.passed)}"
        for c in report.checks
    ]
    return ("\n".join(rows) + "\n").encode()


def bound_json_bytes(report: BoundReport) -> bytes:
    return (json.dumps(_jsonable(dataclasses.asdict(report)), indent=2) + "\n").encode()


def bound_csv_bytes(report: BoundReport) -> bytes:
    rows = [
        "name,value,precondition_holds,margin",
        f"{report.name},{_fmt(report.value)},{_csv_cell(report.precondition_holds)},"
        f"{_csv_cell(report.margin)}",
    ]
    return ("\n".join(rows) + "\n").encode()
