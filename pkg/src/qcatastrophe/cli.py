"""Command-line front end.

    qcatastrophe sweep --model cusp --mu 40 --param A --min -2 --max 2 --steps 200 --format csv
    qcatastrophe asymptote --model molar --param gamma --min 0.2 --max 3 --steps 100
    qcatastrophe scaling --model cusp --mu-list 10,20,40,70
    qcatastrophe fixed-points --model butterfly --set A2=0.5 --mu 1
    qcatastrophe validate --quick

Settings can also come from a JSON file (``--config run.json``) whose keys
mirror the long flag names; flags given on the command line win.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import serialize
from .potentials import CatastropheError, CatastropheParams, Model, describe, find_fixed_points, param_names
from .sweep import PEAK_WINDOWS, peak_scan, sweep_entropy

class ConfigError(ValueError):
    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


@dataclass
class RunConfig:
    command: str
    model: Model = Model.CUSP
    params: dict[str, float] = field(default_factory=dict)
    theta: float | None = None
    mu: float | None = None
    mu_list: list[float] | None = None
    param: str | None = None
    range_min: float | None = None
    range_max: float | None = None
    steps: int = 100
    output: Path | None = None
    format: str = "json"
    workers: int | None = None
    resolution: float | None = None
    quick: bool = False
    only: list[int] | None = None

    def template(self) -> CatastropheParams:
        mu = self.mu if self.mu is not None and math.isfinite(self.mu) else 1.0
        try:
            return CatastropheParams(self.model, mu, self._filled_params(), self.theta)
        except CatastropheError as exc:
            raise ConfigError(str(exc)) from exc

    def _filled_params(self) -> dict[str, float]:
        params = dict(self.params)
        # swept parameter needs a placeholder value for construction
        if self.param and self.param not in params:
            params[self.param] = self.range_min if self.range_min is not None else 0.0
        for name in param_names(self.model):
            if name not in params and name in _DEFAULTS[self.model]:
                params[name] = _DEFAULTS[self.model][name]
        return params


# Used when a parameter is neither set nor swept.
_DEFAULTS = {
    Model.CUSP: {"A": -1.0},
    Model.BUTTERFLY: {"A2": 0.9, "A4": -4.0 / math.sqrt(3.0)},
    Model.MOLAR: {"A": -1.0, "gamma": 2.0},
}


def _finite(key: str, raw) -> float:
    try:
        value = float(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be a number, got {raw!r}", key) from None
    if not math.isfinite(value):
        raise ConfigError(f"{key} must be finite, got {raw!r}", key)
    return value


def _parse_set(items: Sequence[str]) -> dict[str, float]:
    out = {}
    for item in items:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}", "set")
        key, raw = item.split("=", 1)
        out[key.strip()] = _finite(key.strip(), raw)
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qcatastrophe", description="Entanglement in quantum catastrophe models.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", type=Path, help="JSON file with default settings")
        p.add_argument("--model", choices=[m.value for m in Model])
        p.add_argument("--set", action="append", default=None, metavar="KEY=VALUE",
                       help="control parameter (A, A2, A4, gamma); repeatable")
        p.add_argument("--theta", help="mixing angle for the 1D models (radians)")
        p.add_argument("--output", "-o", type=Path, help="output file (default: stdout)")
        p.add_argument("--format", choices=["csv", "json"])

    for name in ("sweep", "asymptote"):
        p = sub.add_parser(name, help=f"{'finite-mu' if name == 'sweep' else 'mu -> infinity'} entropy sweep")
        common(p)
        if name == "sweep":
            p.add_argument("--mu")
        p.add_argument("--param", help="parameter to sweep")
        p.add_argument("--min", dest="range_min")
        p.add_argument("--max", dest="range_max")
        p.add_argument("--steps")
        p.add_argument("--workers")
        p.add_argument("--resolution", help="fixed 1D grid spacing, or 2D points per axis")

    p = sub.add_parser("scaling", help="peak position against mu with a power-law fit")
    common(p)
    p.add_argument("--mu-list", dest="mu_list")
    p.add_argument("--min", dest="range_min")
    p.add_argument("--max", dest="range_max")
    p.add_argument("--steps")

    p = sub.add_parser("fixed-points", help="stationary points of the potential")
    common(p)
    p.add_argument("--mu")

    p = sub.add_parser("validate", help="run the acceptance checks")
    p.add_argument("--quick", action="store_true", help="skip the peak-scaling checks")
    p.add_argument("--only", help="comma-separated check numbers")
    p.add_argument("--output", "-o", type=Path)
    return parser


def _float_list(key: str, raw) -> list[float]:
    if isinstance(raw, (list, tuple)):
        items = raw
    else:
        items = [s for s in str(raw).split(",") if s.strip()]
    return [_finite(key, v) for v in items]


_CONFIG_ALIASES = {"min": "range_min", "max": "range_max", "mu-list": "mu_list", "set": "params"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message, "argv")


def load_config(argv: Sequence[str] | None = None) -> RunConfig:
    args = build_parser().parse_args(argv)
    values: dict = {}
    cfg_path = getattr(args, "config", None)
    if cfg_path is not None:
        try:
            loaded = json.loads(Path(cfg_path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {cfg_path}: {exc}", "config") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object", "config")
        values.update({_CONFIG_ALIASES.get(k, k): v for k, v in loaded.items()})
    for key, val in vars(args).items():
        if key in ("command", "config") or val is None or val is False:
            continue
        if key == "set":
            merged = dict(values.get("params", {}))
            merged.update(_parse_set(val))
            values["params"] = merged
        else:
            values[key.replace("-", "_")] = val
    return _to_config(args.command, values)


def _to_config(command: str, values: dict) -> RunConfig:
    known = set(RunConfig.__dataclass_fields__)
    for key in values:
        if key not in known:
            raise ConfigError(f"unknown setting {key!r}", key)
    cfg = RunConfig(command=command)
    if "model" in values:
        try:
            cfg.model = Model(values["model"])
        except ValueError:
            raise ConfigError(f"unknown model {values['model']!r}", "model") from None
    cfg.params = {str(k): _finite(str(k), v) for k, v in values.get("params", {}).items()}
    for key in cfg.params:
        if key not in param_names(cfg.model):
            raise ConfigError(f"parameter {key!r} does not belong to the {cfg.model.value} model", key)
    if values.get("theta") is not None:
        if cfg.model is Model.MOLAR:
            raise ConfigError("theta does not apply to the molar model", "theta")
        cfg.theta = _finite("theta", values["theta"])
    if values.get("mu") is not None:
        cfg.mu = _finite("mu", values["mu"])
        if cfg.mu <= 0:
            raise ConfigError("mu must be positive", "mu")
    if values.get("mu_list") is not None:
        cfg.mu_list = _float_list("mu_list", values["mu_list"])
        if any(m <= 0 for m in cfg.mu_list):
            raise ConfigError("mu values must be positive", "mu_list")
    if values.get("param") is not None:
        cfg.param = str(values["param"])
        if cfg.param not in param_names(cfg.model):
            raise ConfigError(f"{cfg.model.value} has no parameter {cfg.param!r}", "param")
    for key in ("range_min", "range_max"):
        if values.get(key) is not None:
            setattr(cfg, key, _finite(key, values[key]))
    if values.get("steps") is not None:
        steps = _finite("steps", values["steps"])
        if steps != int(steps) or steps < 2:
            raise ConfigError("steps must be an integer >= 2", "steps")
        cfg.steps = int(steps)
    if cfg.range_min is not None and cfg.range_max is not None and not cfg.range_min < cfg.range_max:
        raise ConfigError("min must be smaller than max", "range_min")
    if values.get("workers") is not None:
        cfg.workers = int(_finite("workers", values["workers"]))
    if values.get("resolution") is not None:
        cfg.resolution = _finite("resolution", values["resolution"])
    if values.get("output") is not None:
        cfg.output = Path(values["output"])
    if values.get("format") is not None:
        if values["format"] not in ("csv", "json"):
            raise ConfigError(f"unknown format {values['format']!r}", "format")
        cfg.format = values["format"]
    cfg.quick = bool(values.get("quick", False))
    if values.get("only") is not None:
        cfg.only = [int(v) for v in _float_list("only", values["only"])]
    if command in ("sweep", "asymptote"):
        for key in ("param", "range_min", "range_max"):
            if getattr(cfg, key) is None:
                raise ConfigError(f"{command} needs --{key.replace('range_', '')}", key)
        if command == "sweep" and cfg.mu is None:
            raise ConfigError("sweep needs --mu", "mu")
    if command == "scaling":
        if not cfg.mu_list:
            raise ConfigError("scaling needs --mu-list", "mu_list")
        if cfg.format == "csv":
            raise ConfigError("scaling output is JSON only", "format")
    return cfg


def _emit(data: bytes, output: Path | None) -> None:
    if output is None:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
        return
    output.write_bytes(data)


def run(cfg: RunConfig) -> int:
    if cfg.command in ("sweep", "asymptote"):
        mu = math.inf if cfg.command == "asymptote" else cfg.mu
        sr = sweep_entropy(cfg.template(), cfg.param, (cfg.range_min, cfg.range_max), cfg.steps,
                           mu=mu, resolution=cfg.resolution, workers=cfg.workers)
        _emit(serialize.serialize(sr, cfg.format), cfg.output)
        return 0
    if cfg.command == "scaling":
        name, window, steps = PEAK_WINDOWS[cfg.model]
        if cfg.range_min is not None and cfg.range_max is not None:
            window = (cfg.range_min, cfg.range_max)
        template = cfg.template().replace(mu=cfg.mu_list[0])
        scan = peak_scan(template, cfg.mu_list, window, steps if cfg.steps == 100 else cfg.steps)
        _emit(serialize.serialize(scan, "json"), cfg.output)
        return 0
    if cfg.command == "fixed-points":
        p = cfg.template().replace(mu=cfg.mu or 1.0)
        fps = find_fixed_points(p, allow_marginal=True)
        doc = describe(p)
        doc.update({
            "fixed_points": [
                {
                    "location": list(fp.location),
                    "stable": fp.stable,
                    "marginal": fp.marginal,
                    "excitation_energies": list(fp.excitation_energies),
                    "normal_mode_angle": fp.normal_mode_angle,
                    "well_energy": fp.well_energy,
                }
                for fp in fps
            ],
        })
        _emit(serialize.to_json(doc).encode(), cfg.output)
        return 0
    if cfg.command == "validate":
        from .validation import run_all

        results = run_all(include_slow=not cfg.quick, only=cfg.only)
        lines = "\n".join(r.line() for r in results) + "\n"
        _emit(lines.encode(), cfg.output)
        return 0 if all(r.passed for r in results) else 1
    raise ConfigError(f"unknown command {cfg.command!r}", "command")


def _error_record(exc: Exception, key: str | None = None) -> str:
    record = {"error": type(exc).__name__, "message": str(exc)}
    if key:
        record["key"] = key
    return json.dumps(record)


def main(argv: Sequence[str] | None = None) -> int:
    try:
        cfg = load_config(argv)
    except ConfigError as exc:
        print(_error_record(exc, exc.key), file=sys.stderr)
        return 2
    try:
        return run(cfg)
    except ConfigError as exc:
        print(_error_record(exc, exc.key), file=sys.stderr)
        return 2
    except OSError as exc:
        print(_error_record(exc), file=sys.stderr)
        return 3
    except Exception as exc:  # noqa: BLE001 - every failure becomes an error record
        print(_error_record(exc), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
