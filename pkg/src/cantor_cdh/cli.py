"""Batch front end: parse a JSON run config, dispatch, write a JSON report.

Config keys (all optional except ``command``)::

    command      audit | extend-cdh | split | tower
    generators   "seed" | "bitflip" | "fixed-cylinder" | list of map literals
                 such as "0 -> 1; 1 -> 0" or "e -> e [1: 0>1 1>0]"
    generators_file  path to a file of map literals, one map per paragraph
    word_cap, steps, depth, retry_cap, seed, height   positive integers
    dense_d, dense_e   zeros | ones | alternating | period4
    y            point literal "pre~per"
    Y            clopen literal "0,10" ("e" is the empty word, "" the empty set)
    N            list of point literals
    M            "evens", "odds", "all", "none" or "pattern 10 flip 3,5"
    targets      list of clopen literals (tower schedule, used round robin)
    report       output path

Exit status is 0 iff every check passes, 1 on a failed check or violated
hypothesis, 2 on a malformed config.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import re
import sys
from dataclasses import dataclass, field, fields, replace
from typing import Any, Optional, Sequence

from . import cofinitary, engine, split
from .cantor import ClopenSet, Point
from .homeo import BlockHomeo

COMMANDS = ("audit", "extend-cdh", "split", "tower")
DEFAULT_PRESET = {"audit": "seed", "extend-cdh": "seed", "split": "bitflip", "tower": "bitflip"}
PRESETS = {
    "seed": cofinitary.seed_generators,
    "bitflip": lambda: [BlockHomeo.bitflip()],
    "fixed-cylinder": lambda: [cofinitary.fixed_cylinder_map()],
}


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str, line: Optional[int] = None):
        self.field = field_name
        self.line = line
        where = f"line {line}: " if line else ""
        super().__init__(f"{where}field '{field_name}': {message}")


@dataclass
class RunConfig:
    command: str
    generators: Any = None  # preset name, tuple of BlockHomeo, or None for the command default
    generators_file: Optional[str] = None
    word_cap: int = 3
    steps: int = 8
    depth: int = 8
    retry_cap: int = 3
    seed: int = 0
    height: int = 4
    dense_d: str = "zeros"
    dense_e: str = "alternating"
    y: Point = Point("", "0")
    Y: ClopenSet = field(default_factory=ClopenSet.everything)
    N: tuple[Point, ...] = (Point("", "01"),)
    M: split.PeriodicSet = split.PeriodicSet()
    targets: tuple[ClopenSet, ...] = (ClopenSet(["0"]), ClopenSet(["1"]), ClopenSet(["01"]))
    report: Optional[str] = None

    def generator_maps(self) -> list[BlockHomeo]:
        if self.generators_file is not None:
            return list(read_generators_file(self.generators_file))
        if self.generators is None:
            return PRESETS[DEFAULT_PRESET[self.command]]()
        if isinstance(self.generators, str):
            return PRESETS[self.generators]()
        return list(self.generators)


INT_FIELDS = ("word_cap", "steps", "depth", "retry_cap", "height")


def _line_of(text: str, key: str) -> Optional[int]:
    m = re.search(r'"' + re.escape(key) + r'"\s*:', text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def parse_generators(value: Any, name: str = "generators") -> Any:
    if isinstance(value, str):
        if value not in PRESETS:
            raise ConfigError(name, f"unknown preset {value!r}; expected one of {sorted(PRESETS)}")
        return value
    if not isinstance(value, list) or not value:
        raise ConfigError(name, "expected a preset name or a nonempty list of map literals")
    out = []
    for k, lit in enumerate(value):
        if not isinstance(lit, str):
            raise ConfigError(f"{name}[{k}]", "expected a string")
        try:
            out.append(BlockHomeo.parse(lit))
        except ValueError as exc:
            raise ConfigError(f"{name}[{k}]", str(exc)) from None
    return tuple(out)


def read_generators_file(path: str) -> tuple[BlockHomeo, ...]:
    with open(path) as fh:
        paragraphs = [p.strip() for p in fh.read().split("\n\n") if p.strip()]
    return parse_generators(paragraphs, "generators_file")


def _literal(key: str, value: Any, parser, kind: str):
    if not isinstance(value, str):
        raise ConfigError(key, f"expected a {kind} literal string")
    try:
        return parser(value)
    except ValueError as exc:
        raise ConfigError(key, str(exc)) from None


def parse_config(text: str) -> RunConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<json>", exc.msg, exc.lineno) from None
    if not isinstance(raw, dict):
        raise ConfigError("<json>", "top level must be an object", 1)
    try:
        return config_from_dict(raw)
    except ConfigError as exc:
        if exc.line is None:
            raise ConfigError(exc.field, str(exc).split(": ", 1)[1],
                              _line_of(text, exc.field.split("[")[0])) from None
        raise


def config_from_dict(raw: dict) -> RunConfig:
    known = {f.name for f in fields(RunConfig)}
    for key in raw:
        if key not in known:
            raise ConfigError(key, "unknown key")
    if "command" not in raw:
        raise ConfigError("command", "missing")
    if raw["command"] not in COMMANDS:
        raise ConfigError("command", f"expected one of {list(COMMANDS)}")
    kw: dict[str, Any] = {"command": raw["command"]}
    for key in INT_FIELDS + ("seed",):
        if key in raw:
            v = raw[key]
            if not isinstance(v, int) or isinstance(v, bool):
                raise ConfigError(key, "expected an integer")
            if key in INT_FIELDS and v <= 0:
                raise ConfigError(key, "must be positive")
            kw[key] = v
    for key in ("dense_d", "dense_e"):
        if key in raw:
            if raw[key] not in engine.TAILS:
                raise ConfigError(key, f"expected one of {sorted(engine.TAILS)}")
            kw[key] = raw[key]
    if "generators" in raw:
        kw["generators"] = parse_generators(raw["generators"])
    if "generators_file" in raw:
        if "generators" in raw:
            raise ConfigError("generators_file", "give either generators or generators_file, not both")
        if not isinstance(raw["generators_file"], str):
            raise ConfigError("generators_file", "expected a path")
        kw["generators_file"] = raw["generators_file"]
    if "y" in raw:
        kw["y"] = _literal("y", raw["y"], Point.parse, "point")
    if "Y" in raw:
        kw["Y"] = _literal("Y", raw["Y"], ClopenSet.parse, "clopen")
    if "M" in raw:
        kw["M"] = _literal("M", raw["M"], split.PeriodicSet.parse, "set")
    if "N" in raw:
        if not isinstance(raw["N"], list):
            raise ConfigError("N", "expected a list of point literals")
        kw["N"] = tuple(_literal(f"N[{k}]", v, Point.parse, "point") for k, v in enumerate(raw["N"]))
    if "targets" in raw:
        if not isinstance(raw["targets"], list) or not raw["targets"]:
            raise ConfigError("targets", "expected a nonempty list of clopen literals")
        kw["targets"] = tuple(_literal(f"targets[{k}]", v, ClopenSet.parse, "clopen")
                              for k, v in enumerate(raw["targets"]))
    if "report" in raw:
        if not isinstance(raw["report"], str):
            raise ConfigError("report", "expected a path")
        kw["report"] = raw["report"]
    return RunConfig(**kw)


def config_to_dict(cfg: RunConfig) -> dict:
    out: dict[str, Any] = {
        "command": cfg.command,
        "word_cap": cfg.word_cap, "steps": cfg.steps, "depth": cfg.depth,
        "retry_cap": cfg.retry_cap, "seed": cfg.seed, "height": cfg.height,
        "dense_d": cfg.dense_d, "dense_e": cfg.dense_e,
        "y": str(cfg.y), "Y": str(cfg.Y), "N": [str(x) for x in cfg.N], "M": str(cfg.M),
        "targets": [str(t) for t in cfg.targets],
    }
    if isinstance(cfg.generators, str):
        out["generators"] = cfg.generators
    elif cfg.generators is not None:
        out["generators"] = [str(g) for g in cfg.generators]
    if cfg.generators_file is not None:
        out["generators_file"] = cfg.generators_file
    if cfg.report is not None:
        out["report"] = cfg.report
    return out


def emit_config(cfg: RunConfig) -> str:
    return json.dumps(config_to_dict(cfg), indent=2, sort_keys=True)


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# ------------------------------------------------------------------ dispatch

def _run_audit(cfg: RunConfig, gens) -> dict:
    rep = cofinitary.audit(cofinitary.GroupHandle(gens, cfg.word_cap))
    out = rep.to_json()
    out["exemption_note"] = "words evaluating to the identity are exempt from the finite fixed set requirement"
    out["checks"] = {"audit": rep.passed}
    return out


def _run_engine(cfg: RunConfig, gens) -> dict:
    ecfg = engine.EngineConfig(steps=cfg.steps, word_cap=cfg.word_cap, retry_cap=cfg.retry_cap,
                               dense_d=cfg.dense_d, dense_e=cfg.dense_e)
    state = engine.init(cofinitary.GroupHandle(gens, cfg.word_cap), ecfg)
    records: list = []
    per_step = []
    for _ in range(cfg.steps):
        engine.step(state, records)
        per_step.append({c.name: c.ok for c in engine.validate(state)})
    out = engine.report(state, records)
    out["ledger"] = out.pop("steps_detail")
    out["validator_per_step"] = per_step
    ext = engine.extension_audit(state, cfg.word_cap)
    out["extension_audit"] = ext
    out["checks"] = dict(out["checks"])
    out["checks"]["every_step"] = all(all(s.values()) for s in per_step)
    out["checks"]["extension_audit"] = ext["passed"]
    return out


def _run_split(cfg: RunConfig, gens) -> dict:
    scfg = split.SplitConfig(gens, cfg.word_cap, cfg.N, cfg.Y, cfg.y, cfg.M)
    space = split.build_split(scfg)
    checks = split.check_split(space, cfg.depth, seed=cfg.seed)
    out = split.split_report(space, cfg.depth, checks)
    out["checks"] = {c.name: c.ok for c in checks}
    return out


def _run_tower(cfg: RunConfig, gens) -> dict:
    tower = split.build_tower(gens, cfg.targets, cfg.height, cfg.word_cap, cfg.N, cfg.M)
    checks = split.tower_check(tower, cfg.depth, seed=cfg.seed)
    return split.tower_report(tower, checks)


RUNNERS = {"audit": _run_audit, "extend-cdh": _run_engine, "split": _run_split, "tower": _run_tower}
MODULES = {"audit": "cofinitary", "extend-cdh": "engine", "split": "split", "tower": "split"}


def dispatch(cfg: RunConfig) -> tuple[int, dict]:
    canonical = emit_config(replace(cfg, report=None))
    report: dict[str, Any] = {
        "command": cfg.command,
        "seed": cfg.seed,
        "inputs_digest": hashlib.sha256(canonical.encode()).hexdigest(),
        "config": json.loads(canonical),
        "caps": {"word_cap": cfg.word_cap, "steps": cfg.steps, "depth": cfg.depth,
                 "retry_cap": cfg.retry_cap},
    }
    try:
        gens = cfg.generator_maps()
        report["generators"] = [str(g) for g in gens]
        result = RUNNERS[cfg.command](cfg, gens)
    except (ValueError, RuntimeError, AssertionError) as exc:
        report["error"] = {"module": MODULES[cfg.command], "kind": type(exc).__name__, "message": str(exc)}
        report["passed"] = False
        return 1, report
    report["result"] = result
    report["depth_stamp"] = {"word_cap": cfg.word_cap,
                             "depth": cfg.depth if cfg.command in ("split", "tower") else None,
                             "steps": cfg.steps if cfg.command == "extend-cdh" else None}
    report["passed"] = all(result.get("checks", {}).values()) and result.get("passed", True) is not False
    return (0 if report["passed"] else 1), report


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cantor-cdh", description="Exact Cantor-set homeomorphism pipelines.")
    p.add_argument("command", nargs="?", choices=COMMANDS)
    p.add_argument("--config", help="JSON run config")
    p.add_argument("--report", help="write the JSON report here (default: stdout)")
    p.add_argument("--seed", type=int)
    p.add_argument("--steps", type=int)
    p.add_argument("--word-cap", type=int, dest="word_cap")
    p.add_argument("--depth", type=int)
    p.add_argument("--retry-cap", type=int, dest="retry_cap")
    p.add_argument("--emit-config", action="store_true", help="print the canonical config and exit")
    return p


def load(args) -> RunConfig:
    if args.config:
        with open(args.config) as fh:
            cfg = parse_config(fh.read())
        if args.command and args.command != cfg.command:
            raise ConfigError("command", f"config says {cfg.command!r}, command line says {args.command!r}")
    elif args.command:
        cfg = RunConfig(command=args.command)
    else:
        raise ConfigError("command", "give a command or --config")
    overrides = {}
    for key in INT_FIELDS + ("seed",):
        v = getattr(args, key, None)
        if v is not None:
            if key in INT_FIELDS and v <= 0:
                raise ConfigError(key, "must be positive")
            overrides[key] = v
    if args.report:
        overrides["report"] = args.report
    return replace(cfg, **overrides)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load(args)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if args.emit_config:
        sys.stdout.write(emit_config(cfg) + "\n")
        return 0
    status, report = dispatch(cfg)
    text = dumps(report)
    if cfg.report:
        with open(cfg.report, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    raise SystemExit(main())
