"""``qng-certify``: thresholds, loss tolerance and sweeps from a JSON config.

Exit codes: 0 success, 1 invalid configuration or failed verification,
2 a Gaussian threshold did not converge (results are still written).

CSV columns, in this order and only for the requested kinds:
``sweep_value`` (sweep only), ``threshold_passive``, ``threshold_gaussian``,
``converged_gaussian``, ``eta_min_passive``, ``eta_min_gaussian`` (loss
only). Wall-clock times go to the sidecar ``<out>.meta.json`` so that the
CSV is byte-identical across runs with the same seed.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import os
import re
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from importlib import metadata
from pathlib import Path

from .cmaes import CmaesConfig
from .errors import InvalidConfig, NotConvergedWarning, QngError
from .loss import min_transmission
from .targets import TargetSpec
from .threshold import EscalationConfig, GridConfig, gaussian_threshold, passive_threshold

COMMANDS = ("threshold", "loss-tolerance", "sweep", "verify")
KINDS = ("passive", "gaussian", "both")
TOP_KEYS = {"command", "target", "kind", "optimizer", "escalation", "grid", "sweep", "seed", "output", "format",
            "loss", "suite"}
SWEEP_KEYS = {"parameter", "start", "stop", "steps"}
LOSS_KEYS = {"tol", "grid_points"}
_PHIS_ITEM = re.compile(r"^phis\[(\d+)\]$")


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def _overrides(cls, data, section: str, fixed: dict | None = None):
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise InvalidConfig(f"{section}: expected a JSON object")
    names = {f.name for f in dataclasses.fields(cls)} - set(fixed or {})
    for key in data:
        if key not in names:
            raise InvalidConfig(f"{key}: unknown key in {section!r}")
    try:
        return cls(**{**(fixed or {}), **data})
    except (TypeError, ValueError) as exc:
        raise InvalidConfig(f"{section}: {exc}") from exc


@dataclasses.dataclass
class RunConfig:
    command: str
    target: TargetSpec | None
    kind: str = "both"
    optimizer: CmaesConfig = dataclasses.field(default_factory=lambda: CmaesConfig(dim=6))
    escalation: EscalationConfig = dataclasses.field(default_factory=EscalationConfig)
    grid: GridConfig = dataclasses.field(default_factory=GridConfig)
    sweep: dict | None = None
    loss: dict | None = None
    seed: int = 0
    output: str | None = None
    format: str = "csv"
    suite: str | None = None

    @classmethod
    def from_dict(cls, command: str, data: dict) -> "RunConfig":
        """Validate a parsed JSON config; every error names the offending key."""
        if not isinstance(data, dict):
            raise InvalidConfig("config: expected a JSON object")
        for key in data:
            if key not in TOP_KEYS:
                raise InvalidConfig(f"{key}: unknown configuration key")
        if command not in COMMANDS:
            raise InvalidConfig(f"command: unknown command {command!r}")
        if data.get("command", command) != command:
            raise InvalidConfig(f"command: config says {data['command']!r} but {command!r} was requested")
        kind = data.get("kind", "both")
        if kind not in KINDS:
            raise InvalidConfig(f"kind: must be one of {KINDS}, got {kind!r}")
        fmt = data.get("format", "csv")
        if fmt not in ("csv", "json"):
            raise InvalidConfig(f"format: must be csv or json, got {fmt!r}")
        seed = data.get("seed", 0)
        if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < 2**64:
            raise InvalidConfig("seed: must be a non-negative 64-bit integer")

        target = None
        if command != "verify":
            if "target" not in data:
                raise InvalidConfig("target: missing")
            target = TargetSpec.from_dict(data["target"])
        loss = data.get("loss")
        if isinstance(loss, bool):
            loss = {} if loss else None
        if loss is not None:
            if not isinstance(loss, dict):
                raise InvalidConfig("loss: expected a JSON object or a boolean")
            for key in loss:
                if key not in LOSS_KEYS:
                    raise InvalidConfig(f"{key}: unknown key in 'loss'")
        if command == "loss-tolerance" and loss is None:
            loss = {}
        sweep = data.get("sweep")
        if command == "sweep":
            sweep = _check_sweep(sweep, target)
        elif sweep is not None:
            raise InvalidConfig(f"sweep: only valid for the sweep command, not {command!r}")
        return cls(
            command=command,
            target=target,
            kind=kind,
            optimizer=_overrides(CmaesConfig, data.get("optimizer"), "optimizer", {"dim": 6}),
            escalation=_overrides(EscalationConfig, data.get("escalation"), "escalation"),
            grid=_overrides(GridConfig, data.get("grid"), "grid"),
            sweep=sweep,
            loss=loss,
            seed=seed,
            output=data.get("output"),
            format=fmt,
            suite=data.get("suite"),
        )

    def points(self) -> list[tuple[float | None, TargetSpec]]:
        if self.command != "sweep":
            return [(None, self.target)]
        s = self.sweep
        out = []
        for i in range(s["steps"]):
            value = s["start"] + (s["stop"] - s["start"]) * i / (s["steps"] - 1)
            out.append((value, _with_parameter(self.target, s["parameter"], value)))
        return out


def _with_parameter(spec: TargetSpec, name: str, value: float) -> TargetSpec:
    m = _PHIS_ITEM.match(name)
    if m:
        phis = list(spec.phis)
        phis[int(m.group(1))] = value
        return spec.replace(phis=tuple(phis))
    if name == "n":
        return spec.replace(n=int(round(value)))
    return spec.replace(**{name: value})


def _check_sweep(sweep, target: TargetSpec) -> dict:
    if not isinstance(sweep, dict):
        raise InvalidConfig("sweep: missing or not a JSON object")
    for key in sweep:
        if key not in SWEEP_KEYS:
            raise InvalidConfig(f"{key}: unknown key in 'sweep'")
    for key in SWEEP_KEYS:
        if key not in sweep:
            raise InvalidConfig(f"{key}: missing from 'sweep'")
    name = sweep["parameter"]
    numeric = {"theta", "alpha", "r", "n"}
    m = _PHIS_ITEM.match(str(name))
    if not (name in numeric or m):
        raise InvalidConfig(f"parameter: {name!r} is not a numeric target field")
    if m and (target.phis is None or int(m.group(1)) >= len(target.phis)):
        raise InvalidConfig(f"parameter: {name!r} indexes past the target's phis")
    if not m and getattr(target, name) is None:
        raise InvalidConfig(f"parameter: {name!r} is not a field of family {target.family!r}")
    steps = sweep["steps"]
    if not isinstance(steps, int) or steps < 2:
        raise InvalidConfig("steps: must be an integer >= 2")
    for key in ("start", "stop"):
        if not isinstance(sweep[key], (int, float)) or not math.isfinite(sweep[key]):
            raise InvalidConfig(f"{key}: must be a finite number")
    cfg = dict(sweep)
    if name == "n":
        vals = [cfg["start"] + (cfg["stop"] - cfg["start"]) * i / (steps - 1) for i in range(steps)]
        if any(abs(v - round(v)) > 1e-9 for v in vals):
            raise InvalidConfig("steps: sweeping n must land on integers")
    # building the end points surfaces invalid values before any work starts
    _with_parameter(target, name, cfg["start"])
    _with_parameter(target, name, cfg["stop"])
    return cfg


def _columns(cfg: RunConfig) -> list[str]:
    cols = ["sweep_value"] if cfg.command == "sweep" else []
    kinds = ["passive", "gaussian"] if cfg.kind == "both" else [cfg.kind]
    cols += [f"threshold_{k}" for k in kinds]
    if "gaussian" in kinds:
        cols.append("converged_gaussian")
    if cfg.command == "loss-tolerance" or (cfg.command == "sweep" and cfg.loss is not None):
        cols += [f"eta_min_{k}" for k in kinds]
    return cols


def _evaluate(args) -> tuple[dict, dict]:
    """One row plus its provenance record; runs in a worker process when ``--jobs`` > 1."""
    cfg, sweep_value, spec = args
    t0 = time.perf_counter()
    state = spec.build()
    row: dict = {}
    meta: dict = {"target": spec.to_dict(), "seed": cfg.seed, "cutoff": state.basis.cutoff,
                  "leakage": state.leakage}
    if sweep_value is not None:
        row["sweep_value"] = sweep_value
    results = {}
    if cfg.kind in ("passive", "both"):
        results["passive"] = passive_threshold(state, cfg.grid)
    if cfg.kind in ("gaussian", "both"):
        hint = results["passive"].best_params if "passive" in results else None
        opt = dataclasses.replace(cfg.optimizer, seed=cfg.seed)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NotConvergedWarning)
            results["gaussian"] = gaussian_threshold(state, opt, cfg.escalation, warm_start=hint)
    for kind, res in results.items():
        row[f"threshold_{kind}"] = res.value
        meta[kind] = res.to_dict()
    if "gaussian" in results:
        row["converged_gaussian"] = results["gaussian"].converged
    want_loss = cfg.command == "loss-tolerance" or (cfg.command == "sweep" and cfg.loss is not None)
    if want_loss:
        for kind, res in results.items():
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                lr = min_transmission(state, res, **(cfg.loss or {}))
            row[f"eta_min_{kind}"] = lr.eta_min
            meta[kind]["loss"] = {"eta_min": lr.eta_min, "monotone_verified": lr.monotone_verified,
                                  "no_margin": lr.no_margin, "fidelity_curve": lr.fidelity_curve,
                                  "warnings": [str(w.message) for w in caught]}
    meta["wall_time_ms"] = int(round(1000 * (time.perf_counter() - t0)))
    return row, meta


def _render(rows: list[dict], cols: list[str], fmt: str) -> str:
    if fmt == "json":
        return json.dumps([{c: r[c] for c in cols} for r in rows], indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(cols)
    for r in rows:
        writer.writerow([repr(float(r[c])) if isinstance(r[c], float) else str(r[c]).lower()
                         if isinstance(r[c], bool) else r[c] for c in cols])
    return buf.getvalue()


def execute(command: str, data: dict, seed: int | None = None, out: str | Path | None = None,
            fmt: str | None = None, jobs: int = 1, stream=None) -> int:
    """Run a validated command and write its outputs; returns the exit code.

    Raises:
        InvalidConfig: the configuration does not validate.
    """
    data = dict(data)
    if seed is not None:
        data["seed"] = seed
    if fmt is not None:
        data["format"] = fmt
    cfg = RunConfig.from_dict(command, data)
    out = out if out is not None else cfg.output
    stream = stream or sys.stdout

    if command == "verify":
        from .verify import SUITES, run_suite

        if cfg.suite not in SUITES:
            raise InvalidConfig(f"suite: unknown suite {cfg.suite!r}; choose from {SUITES}")
        results = run_suite(cfg.suite, stream=stream)
        return 0 if all(r.passed for r in results) else 1

    tasks = [(cfg, v, spec) for v, spec in cfg.points()]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            done = list(pool.map(_evaluate, tasks))
    else:
        done = [_evaluate(t) for t in tasks]
    rows = [r for r, _ in done]
    cols = _columns(cfg)
    text = _render(rows, cols, cfg.format)
    if out is None:
        stream.write(text)
    else:
        out = Path(out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_bytes(text.encode("utf-8"))
        sidecar = {
            "version": _version(),
            "command": command,
            "seed": cfg.seed,
            "config": {**data, "command": command},
            "columns": cols,
            "rows": [m for _, m in done],
        }
        out.with_name(out.name + ".meta.json").write_text(json.dumps(sidecar, indent=2, default=str) + "\n")
    converged = all(r.get("converged_gaussian", True) for r in rows)
    return 0 if converged else 2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qng-certify", description="Fidelity thresholds for non-Gaussian entanglement")
    p.add_argument("command", help=f"one of {', '.join(COMMANDS)}")
    p.add_argument("--config", type=Path, help="UTF-8 JSON run configuration (optional for verify)")
    p.add_argument("--seed", type=int, help="overrides the config seed")
    p.add_argument("--out", type=Path, help="output file; a <out>.meta.json sidecar is written next to it")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps (env QNG_CERTIFY_JOBS wins)")
    p.add_argument("--suite", help="verify suite: oracles, figures-fast or figures-full")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    jobs = args.jobs
    env = os.environ.get("QNG_CERTIFY_JOBS")
    try:
        if env is not None:
            try:
                jobs = int(env)
            except ValueError:
                raise InvalidConfig(f"QNG_CERTIFY_JOBS: not an integer: {env!r}") from None
        if jobs < 1:
            raise InvalidConfig("jobs: must be >= 1")
        data: dict = {}
        if args.config is not None:
            try:
                data = json.loads(args.config.read_text(encoding="utf-8"))
            except (OSError, json.JSONDecodeError) as exc:
                raise InvalidConfig(f"config: cannot read {args.config}: {exc}") from exc
        elif args.command != "verify":
            raise InvalidConfig("config: --config is required for this command")
        if args.suite is not None:
            if not isinstance(data, dict):
                raise InvalidConfig("config: expected a JSON object")
            data = {**data, "suite": args.suite}
        return execute(args.command, data, seed=args.seed, out=args.out, fmt=args.format, jobs=jobs)
    except InvalidConfig as exc:
        print(f"qng-certify: invalid configuration: {exc}", file=sys.stderr)
        return 1
    except QngError as exc:
        print(f"qng-certify: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
