"""Command line entry point.

    isoholder {bound,chain,hh,moment,fuzz} --config run.json [--out PATH]
              [--format table|csv|json-lines] [--seed N] [--paper-verbatim-sign]

Config files are JSON documents with a ``version`` field (currently 1).
Exit status: 0 when every row passes, 1 when a checked inequality fails or a
numeric error occurs, 2 when the config cannot be read or validated.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .core import (
    IndexGrid2D,
    IndexRange1D,
    Interval,
    Rectangle,
    Samples,
    as_function,
)
from .functional import Functional, Partition, make_partition
from .hh import CornerContext, compare_corner_bounds, kernel_moment_exact, kernel_moment_placements, verify_hh_identity
from .holder import (
    CHAIN_RTOL,
    ConjugateExponents,
    classical_holder,
    conjugate_of,
    improved_holder,
    reversed_holder,
    verify_chain,
)
from .quadrature import DEFAULT_RULE, QuadratureRule
from .search import FuzzConfig, fuzz_chain

COMMANDS = ("bound", "chain", "hh", "moment", "fuzz")
FORMATS = ("table", "csv", "json-lines")
CONFIG_VERSION = 1
CSV_HEADER = (
    "command",
    "instance_id",
    "p",
    "q",
    "lhs",
    "refined",
    "classical",
    "slack_refined",
    "refinement_gap",
    "tightness",
    "pass",
)
MOMENT_TOL = 1e-8
PLACEMENT_TOL = 1e-10


class ConfigError(ValueError):
    pass


@dataclass
class Instance:
    id: str
    p: float
    domain: Any = None
    f: Any = None
    g: Any = None
    w: Any = None
    f_st: Any = None
    partition: Partition | None = None
    weights: list | None = None


@dataclass
class RunConfig:
    command: str
    instances: list[Instance] = field(default_factory=list)
    rule: QuadratureRule = DEFAULT_RULE
    fuzz: list[FuzzConfig] = field(default_factory=list)
    output_format: str = "csv"
    out: str | None = None
    verbatim_sign: bool = False
    workers: int = 1


def _require(d: dict, key: str, where: str):
    if key not in d:
        raise ConfigError(f"missing required field '{key}' in {where}")
    return d[key]


def _domain(spec, where):
    if not isinstance(spec, dict):
        raise ConfigError(f"'domain' in {where} must be an object")
    kind = _require(spec, "kind", f"{where}.domain")
    try:
        if kind == "interval":
            return Interval(float(spec["a"]), float(spec["b"]))
        if kind == "rectangle":
            return Rectangle(*(float(spec[k]) for k in "abcd"))
        if kind == "index":
            return IndexRange1D(int(spec["n"]))
        if kind == "grid":
            return IndexGrid2D(int(spec["n"]), int(spec["m"]))
    except KeyError as exc:
        raise ConfigError(f"missing required field '{exc.args[0]}' in {where}.domain") from exc
    except ValueError as exc:
        raise ConfigError(f"{where}.domain: {exc}") from exc
    raise ConfigError(f"{where}.domain: unknown kind {kind!r}")


def _function(spec, where):
    try:
        if isinstance(spec, list):
            return Samples(np.asarray(spec, dtype=float))
        if isinstance(spec, (str, int, float)) and not isinstance(spec, bool):
            return as_function(spec if isinstance(spec, str) else float(spec))
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc
    raise ConfigError(f"{where}: expected an expression string or a list of samples")


def _rule(spec) -> QuadratureRule:
    if spec is None:
        return DEFAULT_RULE
    try:
        return QuadratureRule(**spec)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"quadrature: {exc}") from exc


def _p(raw, where) -> float:
    try:
        p = float(raw)
        ConjugateExponents.from_p(p)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: invalid p {raw!r}") from exc
    return p


def load_config(doc: dict, command: str) -> RunConfig:
    """Validate a parsed JSON document and build a :class:`RunConfig`."""
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    version = _require(doc, "version", "config")
    if version != CONFIG_VERSION:
        raise ConfigError(f"unsupported config version {version!r}")
    if doc.get("command", command) != command:
        raise ConfigError(f"config is for command {doc['command']!r}, not {command!r}")
    cfg = RunConfig(command, rule=_rule(doc.get("quadrature")))
    cfg.output_format = doc.get("format", "csv")

    if command == "fuzz":
        fz = _require(doc, "fuzz", "config")
        cases = fz.get("cases", [fz.get("case", "discrete-1d")])
        base = {k: v for k, v in fz.items() if k not in ("cases", "case")}
        for name in ("n_range", "m_range", "p_range", "value_range"):
            if name in base:
                base[name] = tuple(base[name])
        cfg.workers = int(base.pop("workers", 1))
        for case in cases:
            try:
                cfg.fuzz.append(FuzzConfig(case=case, **base))
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"fuzz: {exc}") from exc
        return cfg

    if command == "moment":
        ps = doc.get("p_values")
        if ps is None:
            ps = [_require(doc, "p", "config")]
        for i, p in enumerate(ps):
            p = float(p)
            if not p > 0:
                raise ConfigError(f"p_values[{i}]: p must be positive")
            cfg.instances.append(Instance(id=f"p={p:g}", p=p))
        return cfg

    raw = doc.get("instances")
    if raw is None:
        raw = [{k: v for k, v in doc.items() if k not in ("version", "command", "quadrature", "format")}]
    for i, item in enumerate(raw):
        where = f"instances[{i}]"
        inst_id = str(item.get("id", i + 1))
        if "p" not in item and "p" not in doc:
            raise ConfigError(f"missing required field 'p' in {where}")
        p = _p(item.get("p", doc.get("p")), where)
        if command == "hh":
            dom = _domain(item.get("domain", {"kind": "rectangle", "a": 0, "b": 1, "c": 0, "d": 1}), where)
            if not isinstance(dom, Rectangle):
                raise ConfigError(f"{where}: hh needs a rectangle domain")
            inst = Instance(
                inst_id,
                p,
                dom,
                f=_function(_require(item, "f", where), f"{where}.f"),
                f_st=_function(_require(item, "f_st", where), f"{where}.f_st"),
            )
        else:
            dom = _domain(_require(item, "domain", where), where)
            inst = Instance(
                inst_id,
                p,
                dom,
                f=_function(_require(item, "f", where), f"{where}.f"),
                g=_function(_require(item, "g", where), f"{where}.g"),
                w=_function(item.get("w", "1"), f"{where}.w"),
                weights=item.get("weights"),
            )
            if "partition" in item:
                ps = item["partition"]
                try:
                    inst.partition = make_partition(_require(ps, "kind", f"{where}.partition"), dom, ps.get("m"))
                except ValueError as exc:
                    raise ConfigError(f"{where}.partition: {exc}") from exc
            elif command == "chain":
                raise ConfigError(f"missing required field 'partition' in {where}")
        cfg.instances.append(inst)
    return cfg


def _functional(inst: Instance, rule: QuadratureRule) -> Functional:
    if inst.domain.discrete:
        return Functional.sum(inst.domain, inst.weights)
    return Functional.integral(inst.domain, rule)


def _row(command, inst_id, p=None, q=None, lhs=None, refined=None, classical=None, passed=True, **extra):
    def diff(x, y):
        return None if x is None or y is None else x - y

    row = {
        "command": command,
        "instance_id": inst_id,
        "p": p,
        "q": q,
        "lhs": lhs,
        "refined": refined,
        "classical": classical,
        "slack_refined": diff(refined, lhs),
        "refinement_gap": diff(classical, refined),
        "tightness": refined / classical if refined is not None and classical else None,
        "pass": bool(passed),
    }
    row.update(extra)
    return row


def _run_instance(cfg: RunConfig, inst: Instance) -> dict:
    cmd = cfg.command
    if cmd == "moment":
        placements = kernel_moment_placements(inst.p, cfg.rule)
        exact = kernel_moment_exact(inst.p)
        ok = max(abs(v - exact) for v in placements) <= MOMENT_TOL and max(placements) - min(placements) <= PLACEMENT_TOL
        q = conjugate_of(inst.p) if inst.p != 1 else None
        return {
            **_row(cmd, inst.id, inst.p, q, lhs=placements[0], classical=exact, passed=ok),
            "tightness": None,
            "placements": list(placements),
        }
    exps = ConjugateExponents.from_p(inst.p)
    if cmd == "hh":
        ctx = CornerContext(inst.domain, inst.f, inst.f_st, exps, cfg.rule)
        cb = compare_corner_bounds(ctx, cfg.verbatim_sign)
        ident = verify_hh_identity(ctx, 1e-8, cfg.verbatim_sign)
        return _row(
            cmd, inst.id, exps.p, exps.q, cb.lhs_abs, cb.bound_improved, cb.bound_classical, cb.ordered,
            edge_term=cb.edge_term, brackets=list(cb.brackets), identity_residual=ident.residual,
            identity_pass=ident.passed,
        )
    A = _functional(inst, cfg.rule)
    if cmd == "chain":
        ch = verify_chain(A, inst.w, inst.f, inst.g, exps, inst.partition)
        r = ch.report
        return _row(cmd, inst.id, r.p, r.q, r.lhs, r.refined, r.classical, ch.passed,
                    terms=list(r.terms), min_slack=ch.min_slack, tolerance=ch.tolerance)
    # bound
    if exps.regime == "reversed":
        r = reversed_holder(A, inst.w, inst.f, inst.g, exps)
        scale = max(abs(r.lhs), abs(r.classical))
        ok = r.lhs >= r.classical - CHAIN_RTOL * scale
        return _row(cmd, inst.id, r.p, r.q, r.lhs, None, r.classical, ok, regime="reversed")
    if inst.partition is not None:
        r = improved_holder(A, inst.w, inst.f, inst.g, exps, inst.partition)
    else:
        r = classical_holder(A, inst.w, inst.f, inst.g, exps)
    scale = max(abs(r.lhs), abs(r.classical))
    ok = r.lhs <= r.refined + CHAIN_RTOL * scale
    return _row(cmd, inst.id, r.p, r.q, r.lhs, r.refined, r.classical, ok, terms=list(r.terms))


def _fuzz_row(fc: FuzzConfig, workers: int) -> dict:
    s = fuzz_chain(fc, workers)
    return {
        **_row("fuzz", fc.case, passed=s.violations == 0 and s.errors == 0),
        "slack_refined": s.min_relative_slack,
        "tightness": s.tightness_mean,
        "summary": json.loads(s.to_json()),
    }


def execute(cfg: RunConfig) -> list[dict]:
    """Run every instance; numeric failures become failing diagnostic rows."""
    rows = []
    if cfg.command == "fuzz":
        return [_fuzz_row(fc, cfg.workers) for fc in cfg.fuzz]
    for inst in cfg.instances:
        try:
            rows.append(_run_instance(cfg, inst))
        except (ArithmeticError, ValueError) as exc:
            rows.append(_row(cfg.command, inst.id, inst.p, passed=False, error=f"{type(exc).__name__}: {exc}"))
    return rows


def _fmt(v, digits: int) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return f"{v:.{digits}g}"
    return str(v)


def render(rows: list[dict], fmt: str) -> str:
    if fmt == "json-lines":
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in rows)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in rows:
            writer.writerow([_fmt(r.get(k), 17) for k in CSV_HEADER])
        return buf.getvalue()
    cells = [list(CSV_HEADER)] + [[_fmt(r.get(k), 6) for k in CSV_HEADER] for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(CSV_HEADER))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(row, widths)).rstrip() for row in cells]
    for r in rows:
        if "error" in r:
            lines.append(f"# {r['instance_id']}: {r['error']}")
    return "\n".join(lines) + "\n"


def row_verdict(row: dict, tol: float = CHAIN_RTOL) -> bool:
    """Re-derive a chain/bound row's pass flag from its numbers alone."""
    lhs, refined, classical = (float(row[k]) for k in ("lhs", "refined", "classical"))
    scale = max(abs(lhs), abs(refined), abs(classical))
    slack = min(refined - lhs, classical - refined)
    return scale == 0 or slack >= -tol * scale


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON run description")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--format", choices=FORMATS, help="report format (default: config value or csv)")
    common.add_argument("--seed", type=int, help="override the fuzz seed")
    common.add_argument("--workers", type=int, help="processes for fuzz trials")
    common.add_argument(
        "--paper-verbatim-sign",
        action="store_true",
        help="hh: subtract the double-integral mean in the left side (audit only)",
    )
    parser = argparse.ArgumentParser(prog="isoholder", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with open(args.config, encoding="utf-8") as fh:
            doc = json.load(fh)
        cfg = load_config(doc, args.command)
        if args.seed is not None:
            cfg.fuzz = [FuzzConfig(**{**f.__dict__, "seed": args.seed}) for f in cfg.fuzz]
        if args.workers is not None:
            cfg.workers = args.workers
        if args.format:
            cfg.output_format = args.format
        if cfg.output_format not in FORMATS:
            raise ConfigError(f"unknown format {cfg.output_format!r}")
    except (OSError, json.JSONDecodeError, ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    cfg.out = args.out
    cfg.verbatim_sign = args.paper_verbatim_sign
    rows = execute(cfg)
    text = render(rows, cfg.output_format)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if all(r["pass"] for r in rows) else 1


if __name__ == "__main__":
    sys.exit(main())
