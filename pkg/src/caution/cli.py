"""Command-line front end.

Usage::

    caution-blend run CONFIG [--format json|csv] [--out PATH] [--quiet]
    caution-blend sweep CONFIG --grid 0:1:0.1 [--format ...] [--out ...]

CONFIG is a TOML document::

    kind = "binary_blend"     # gaussian_blend | binary_blend | two_pvalue
                              # | ellsberg_kcg | self_benchmark
    [parameters]
    p = 0.2
    working_null_prob = 0.5
    pi_low = 0.1
    kappa = [0.0, 0.5, 1.0]   # a number or a strictly increasing list

    [output]                  # optional
    format = "csv"
    path = "result.csv"

Unknown keys are rejected.  Infinite bounds are written ``"inf"``/``"-inf"``.
Exit status: 0 success, 1 I/O failure, 2 invalid configuration, 3 numerical
non-convergence.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .confidence import (
    HypothesisConfig,
    PValuePair,
    confidence_posterior_from_pvalue,
    confidence_posterior_normal,
    self_benchmark_blend,
    two_pvalue_blend,
)
from .decisions import Quadratic, ellsberg_setting, kcg_action_discrete, moderate_action
from .distributions import Binary, Gaussian, mean, variance
from .errors import CautionError, NonConvergenceError, ValidationError
from .posterior_sets import (
    BinaryNullBoundedSet,
    GaussianConjugateSet,
    UnconstrainedSet,
    WorkingPrior,
    bayes_update_normal,
)
from .projection import BoundaryFlag, moderate_posterior

SCHEMA = "caution-blend v1"
KINDS = ("gaussian_blend", "binary_blend", "two_pvalue", "ellsberg_kcg", "self_benchmark")
FORMATS = ("json", "csv")
CSV_COLUMNS = (
    "kappa",
    "label",
    "status",
    "posterior_type",
    "mean",
    "variance",
    "null_mass",
    "mixture_weight",
    "component_mean",
    "component_variance",
    "achieved_divergence",
    "selected_benchmark",
    "candidate_count",
    "boundary_flag",
    "action",
    "objective",
    "existence",
)

EXIT_OK, EXIT_IO, EXIT_INVALID, EXIT_NONCONVERGENCE = 0, 1, 2, 3


class ConfigError(ValidationError):
    """The configuration document is malformed; the message names the field."""


def _number(value, name, *, allow_inf=False):
    if isinstance(value, str) and allow_inf and value in ("inf", "-inf", "+inf"):
        return float(value)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{name}: expected a number, got {value!r}")
    value = float(value)
    if math.isnan(value) or (math.isinf(value) and not allow_inf):
        raise ConfigError(f"{name}: expected a finite number, got {value!r}")
    return value


def _number_list(value, name):
    if isinstance(value, list):
        if not value:
            raise ConfigError(f"{name}: list must not be empty")
        return tuple(_number(v, f"{name}[{i}]") for i, v in enumerate(value))
    return (_number(value, name),)


# name -> (parser, default); None defaults mark optional keys left unset
_REQUIRED = object()

_SCHEMAS: Dict[str, Dict[str, tuple]] = {
    "gaussian_blend": {
        "x": (_number, _REQUIRED),
        "mu_dot": (_number, _REQUIRED),
        "sigma_dot": (_number, _REQUIRED),
        "base": (str, "conjugate"),
        "mu_lo": (lambda v, n: _number(v, n, allow_inf=True), "-inf"),
        "mu_hi": (lambda v, n: _number(v, n, allow_inf=True), "inf"),
        "sigma_lo": (lambda v, n: _number(v, n, allow_inf=True), 0.0),
        "sigma_hi": (lambda v, n: _number(v, n, allow_inf=True), "inf"),
    },
    "binary_blend": {
        "p": (_number_list, _REQUIRED),
        "working_null_prob": (_number, _REQUIRED),
        "pi_low": (_number, _REQUIRED),
    },
    "two_pvalue": {
        "p1": (_number, _REQUIRED),
        "p2": (_number, _REQUIRED),
        "working_null_prob": (_number, _REQUIRED),
        "pi_prior_low": (_number, None),
        "pi_low": (_number, None),
    },
    "ellsberg_kcg": {
        "settings": (lambda v, n: tuple(int(_number(s, n)) for s in (v if isinstance(v, list) else [v])), [1, 2]),
    },
    "self_benchmark": {
        "p": (_number, _REQUIRED),
        "pi_low": (_number, _REQUIRED),
    },
}


def check_grid(grid: Sequence[float], name: str = "kappa") -> tuple:
    grid = tuple(grid)
    if not grid:
        raise ConfigError(f"{name}: grid must not be empty")
    for k in grid:
        if not 0.0 <= k <= 1.0:
            raise ConfigError(f"{name}: value {k!r} lies outside [0, 1]")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigError(f"{name}: grid must be strictly increasing")
    return grid


def parse_grid(text: str) -> tuple:
    """Parse ``start:stop:step`` (inclusive of ``stop``) or a comma-separated list."""
    text = text.strip()
    if not text:
        raise ConfigError("grid: empty specification")
    try:
        if ":" in text:
            start, stop, step = (float(part) for part in text.split(":"))
            if step <= 0.0:
                raise ConfigError("grid: step must be positive")
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            values = [round(start + i * step, 12) for i in range(max(count, 0))]
        else:
            values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ConfigError(f"grid: cannot parse {text!r}") from None
    return check_grid(values, "grid")


@dataclass(frozen=True)
class AnalysisConfig:
    kind: str
    parameters: dict
    kappa_grid: tuple
    output_format: str = "json"
    output_path: Optional[str] = None
    raw: dict = field(default_factory=dict, compare=False)


def parse_config(doc: dict, *, require_kappa: bool = True) -> AnalysisConfig:
    """Validate a parsed configuration document.

    ``require_kappa=False`` lets a sweep supply the caution grid instead.
    """
    unknown = set(doc) - {"kind", "parameters", "output"}
    if unknown:
        raise ConfigError(f"{sorted(unknown)[0]}: unknown top-level key")
    kind = doc.get("kind")
    if kind not in KINDS:
        raise ConfigError(f"kind: must be one of {', '.join(KINDS)}, got {kind!r}")
    params = dict(doc.get("parameters", {}))
    schema = _SCHEMAS[kind]
    if "kappa" in params:
        kappa_grid = check_grid(_number_list(params.pop("kappa"), "kappa"), "kappa")
    elif require_kappa:
        raise ConfigError("kappa: required parameter is missing")
    else:
        kappa_grid = ()
    for key in params:
        if key not in schema:
            raise ConfigError(f"{key}: unknown parameter for kind {kind}")
    parsed = {}
    for key, (parser, default) in schema.items():
        if key in params:
            value = params[key]
        elif default is _REQUIRED:
            raise ConfigError(f"{key}: required parameter is missing")
        else:
            value = default
        if value is None:
            parsed[key] = None
        elif parser is str:
            if not isinstance(value, str):
                raise ConfigError(f"{key}: expected a string")
            parsed[key] = value
        else:
            parsed[key] = parser(value, key)
    output = dict(doc.get("output", {}))
    bad = set(output) - {"format", "path"}
    if bad:
        raise ConfigError(f"output.{sorted(bad)[0]}: unknown key")
    fmt = output.get("format", "json")
    if fmt not in FORMATS:
        raise ConfigError(f"output.format: must be json or csv, got {fmt!r}")
    path = output.get("path")
    if path is not None and not isinstance(path, str):
        raise ConfigError("output.path: expected a string")
    cfg = AnalysisConfig(kind, parsed, kappa_grid, fmt, path, raw=copy.deepcopy(doc))
    _prepare(cfg)  # surfaces parameter errors before any computation
    return cfg


def load_config(path: str, *, require_kappa: bool = True) -> AnalysisConfig:
    with open(path, "rb") as fh:
        try:
            doc = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"config: not valid TOML ({exc})") from None
    return parse_config(doc, require_kappa=require_kappa)


# ---------------------------------------------------------------- analyses


def _gaussian_setup(p):
    prior = WorkingPrior(p["mu_dot"], p["sigma_dot"])
    working = bayes_update_normal(prior, p["x"])
    if p["base"] == "unconstrained":
        base = UnconstrainedSet()
    elif p["base"] == "conjugate":
        base = GaussianConjugateSet(p["x"], p["mu_lo"], p["mu_hi"], p["sigma_lo"], p["sigma_hi"])
        if not base.contains_prior(prior):
            raise ConfigError("mu_dot: working prior lies outside the prior bounds")
    else:
        raise ConfigError(f"base: must be conjugate or unconstrained, got {p['base']!r}")
    return working, base, [confidence_posterior_normal(p["x"])]


def _binary_setup(p):
    base = BinaryNullBoundedSet(p["pi_low"])
    working = Binary(p["working_null_prob"])
    if not base.contains(working):
        raise ConfigError("working_null_prob: must lie in [pi_low, 1)")
    return working, base, [confidence_posterior_from_pvalue(v) for v in p["p"]]


def _two_pvalue_setup(p):
    if (p["pi_prior_low"] is None) == (p["pi_low"] is None):
        raise ConfigError("pi_prior_low: give exactly one of pi_prior_low or pi_low")
    pair = PValuePair(p["p1"], p["p2"])
    HypothesisConfig(_prior_low(p), p["working_null_prob"], 0.0)
    return pair


def _prior_low(p):
    # an explicit pi_low makes the prior bound irrelevant; 0.5 only satisfies validation
    return p["pi_prior_low"] if p["pi_prior_low"] is not None else 0.5


def _prepare(cfg: AnalysisConfig):
    p = cfg.parameters
    try:
        if cfg.kind == "gaussian_blend":
            return _gaussian_setup(p)
        if cfg.kind == "binary_blend":
            return _binary_setup(p)
        if cfg.kind == "two_pvalue":
            return _two_pvalue_setup(p)
        if cfg.kind == "ellsberg_kcg":
            for s in p["settings"]:
                if s not in (1, 2):
                    raise ConfigError(f"settings: Ellsberg settings are 1 and 2, got {s}")
            return p["settings"]
        if not 0.0 <= p["p"] <= 1.0:
            raise ConfigError("p: must lie in [0, 1]")
        if not 0.0 < p["pi_low"] < 1.0:
            raise ConfigError("pi_low: must lie in (0, 1)")
        return None
    except ConfigError:
        raise
    except ValidationError as exc:
        raise ConfigError(f"parameters: {exc}") from None


def _serialize_posterior(post) -> dict:
    if isinstance(post, Binary):
        return {"type": "binary", "null_mass": post.p0}
    if isinstance(post, Gaussian):
        return {"type": "gaussian", "mean": post.mean, "variance": post.variance}
    return {
        "type": "gaussian_mixture",
        "mean": mean(post),
        "variance": variance(post),
        "weights": list(post.weights),
        "components": [{"mean": c.mean, "variance": c.variance} for c in post.components],
    }


def _blend_row(kappa, result, action=None, objective=None, existence=None):
    return {
        "kappa": kappa,
        "status": "ok",
        "posterior": _serialize_posterior(result.posterior),
        "achieved_divergence": result.achieved_divergence.value,
        "selected_benchmark": result.selected_benchmark,
        "candidate_count": result.candidate_count,
        "boundary_flag": BoundaryFlag(result.boundary_flag).value,
        "action": action,
        "objective": objective,
        "existence": existence,
    }


def _row_for(cfg: AnalysisConfig, prepared, kappa: float) -> dict:
    p = cfg.parameters
    if cfg.kind in ("gaussian_blend", "binary_blend"):
        working, base, benchmarks = prepared
        result = moderate_posterior(working, base, benchmarks, kappa)
        if cfg.kind == "gaussian_blend":
            act = moderate_action(result.posterior, Quadratic())
            return _blend_row(kappa, result, act.action, act.objective, act.existence.value)
        return _blend_row(kappa, result)
    if cfg.kind == "two_pvalue":
        hyp = HypothesisConfig(_prior_low(p), p["working_null_prob"], kappa)
        result = two_pvalue_blend(prepared, hyp, pi_low=p["pi_low"])
        return _blend_row(kappa, result)
    if cfg.kind == "self_benchmark":
        post = self_benchmark_blend(p["p"], p["pi_low"], kappa)
        return {
            "kappa": kappa,
            "status": "ok",
            "posterior": _serialize_posterior(post),
            "achieved_divergence": None,
            "selected_benchmark": 0,
            "candidate_count": 1,
            "boundary_flag": None,
            "action": None,
            "objective": None,
            "existence": None,
        }
    actions, objectives, existence = {}, {}, {}
    for setting in prepared:
        loss, plausible, working = ellsberg_setting(setting)
        res = kcg_action_discrete(loss, plausible, working, kappa)
        key = f"setting{setting}"
        actions[key], objectives[key], existence[key] = res.action, res.objective, res.existence.value
    return {
        "kappa": kappa,
        "status": "ok",
        "posterior": None,
        "achieved_divergence": None,
        "selected_benchmark": None,
        "candidate_count": None,
        "boundary_flag": None,
        "action": actions,
        "objective": objectives,
        "existence": existence,
    }


def _error_row(kappa, status):
    return {"kappa": kappa, "status": status}


@dataclass
class ResultRecord:
    config: dict
    rows: List[dict]

    @property
    def worst_exit(self) -> int:
        statuses = {r["status"] for r in self.rows}
        if "nonconvergence" in statuses:
            return EXIT_NONCONVERGENCE
        if any(s.startswith("invalid") for s in statuses):
            return EXIT_INVALID
        return EXIT_OK


def sweep(config: AnalysisConfig, kappa_grid: Sequence[float]) -> ResultRecord:
    """Evaluate the analysis at every caution level of ``kappa_grid``.

    Failures are recorded in the row's ``status`` and do not stop the sweep.
    """
    grid = check_grid([float(k) for k in kappa_grid], "grid")
    prepared = _prepare(config)
    rows = []
    for kappa in grid:
        try:
            rows.append(_row_for(config, prepared, kappa))
        except NonConvergenceError:
            rows.append(_error_row(kappa, "nonconvergence"))
        except CautionError as exc:
            rows.append(_error_row(kappa, f"invalid: {exc}"))
    # echo the resolved parameters, defaults included, so a record is self-describing
    params = {k: v for k, v in config.parameters.items() if v is not None}
    params["kappa"] = list(grid)
    echo = {"kind": config.kind, "parameters": params}
    if "output" in config.raw:
        echo["output"] = copy.deepcopy(config.raw["output"])
    return ResultRecord(_decode(_encode(echo)), rows)


def run_config(config: AnalysisConfig) -> ResultRecord:
    return sweep(config, config.kappa_grid)


# ---------------------------------------------------------------- output


def _encode(value):
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    if isinstance(value, dict):
        return {k: _encode(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_encode(v) for v in value]
    return value


def _decode(value):
    if value in ("inf", "-inf"):
        return float(value)
    if isinstance(value, dict):
        return {k: _decode(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_decode(v) for v in value]
    return value


def to_json(record: ResultRecord) -> str:
    doc = {"schema": SCHEMA, "config": _encode(record.config), "rows": _encode(record.rows)}
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def from_json(text: str) -> ResultRecord:
    doc = json.loads(text)
    if doc.get("schema") != SCHEMA:
        raise ConfigError(f"schema: expected {SCHEMA!r}")
    return ResultRecord(_decode(doc["config"]), _decode(doc["rows"]))


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return "inf" if value == math.inf else ("-inf" if value == -math.inf else repr(value))
    return str(value)


def _csv_rows(record: ResultRecord):
    for row in record.rows:
        base = {c: None for c in CSV_COLUMNS}
        base.update({"kappa": row["kappa"], "status": row["status"]})
        post = row.get("posterior")
        if post:
            base["posterior_type"] = post["type"]
            base["mean"] = post.get("mean")
            base["variance"] = post.get("variance")
            base["null_mass"] = post.get("null_mass")
            if post["type"] == "gaussian_mixture":
                base["mixture_weight"] = post["weights"][0]
                base["component_mean"] = post["components"][0]["mean"]
                base["component_variance"] = post["components"][0]["variance"]
        for key in ("achieved_divergence", "selected_benchmark", "candidate_count", "boundary_flag"):
            base[key] = row.get(key)
        if isinstance(row.get("action"), dict):
            for label in row["action"]:
                out = dict(base)
                out.update(
                    label=label,
                    action=row["action"][label],
                    objective=row["objective"][label],
                    existence=row["existence"][label],
                )
                yield out
            continue
        for key in ("action", "objective", "existence"):
            base[key] = row.get(key)
        yield base


def to_csv(record: ResultRecord) -> str:
    buf = io.StringIO()
    buf.write(f"# {SCHEMA}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in _csv_rows(record):
        writer.writerow([_cell(row[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


# ---------------------------------------------------------------- entry point


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="caution-blend", description="Moderate posteriors at a chosen caution level.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("run", "sweep"):
        cmd = sub.add_parser(name)
        cmd.add_argument("config")
        if name == "sweep":
            cmd.add_argument("--grid", required=True, help="start:stop:step or a comma list")
        cmd.add_argument("--format", choices=FORMATS)
        cmd.add_argument("--out")
        cmd.add_argument("--quiet", action="store_true")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)

    def say(msg):
        if not args.quiet:
            print(msg, file=sys.stderr)

    try:
        config = load_config(args.config, require_kappa=args.command == "run")
    except OSError as exc:
        print(f"error: config: cannot read {args.config!r} ({exc.strerror})", file=sys.stderr)
        return EXIT_IO
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID

    try:
        grid = parse_grid(args.grid) if args.command == "sweep" else config.kappa_grid
        record = sweep(config, grid)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID

    fmt = args.format or config.output_format
    text = to_json(record) if fmt == "json" else to_csv(record)
    path = args.out or config.output_path
    if path is None:
        sys.stdout.write(text)
    else:
        try:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"error: output.path: cannot write {path!r} ({exc.strerror})", file=sys.stderr)
            return EXIT_IO
        say(f"wrote {len(record.rows)} rows to {path}")
    code = record.worst_exit
    if code == EXIT_NONCONVERGENCE:
        say("warning: some rows did not converge")
    return code


if __name__ == "__main__":
    sys.exit(main())
