"""Command line front end: ``contagion {validate,run,shock,matrix}``.

Settings come from one JSON config file; command-line flags override config
keys, and ``CONTAGION_SEED`` is used only when neither sets a seed. Exit
status is 0 on success, 1 when inputs fail validation, 2 on any other error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .balance_sheets import (
    BankBalanceSheet,
    DataError,
    MIN_CET1_OBSERVATIONS,
    categorize_line_items,
    cet1_observations,
    estimate_capital,
    load_mapping,
    month_ordinal,
    month_range,
    monthly_snapshots,
    read_balance_sheets,
    read_cet1_observations,
    read_line_items,
)
from .cascade import SCENARIOS, ScenarioConfig, run_cascade
from .montecarlo import (
    DEFAULT_SIMULATIONS,
    DEFAULT_SIZE_GROUPS,
    SimulationPlan,
    cell_seed,
    run_plan,
    run_time_series,
    simulation_rng,
    size_group_profile,
)
from .network import (
    Structure,
    StructureSpec,
    average_probability,
    raw_probabilities,
    sample_edges,
    scale_probabilities,
    structure_probabilities,
)

log = logging.getLogger("contagion")

EXIT_OK, EXIT_INVALID, EXIT_ERROR = 0, 1, 2


class ConfigError(ValueError):
    pass


def fmt(x) -> str:
    """Shortest decimal that round-trips to the same double."""
    return repr(float(x))


@dataclass
class RunConfig:
    balance_sheets: Path | None = None
    cet1: Path | None = None
    line_items: Path | None = None
    mapping: Path | None = None
    months: list[str] | None = None
    structures: list[StructureSpec] = field(default_factory=lambda: [StructureSpec(Structure.ERDOS_RENYI, 0.5)])
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    m: int = DEFAULT_SIMULATIONS
    seed: int = 0
    jobs: int = 1
    out: Path = Path("results")
    clamp_negative_buckets: bool = False

    def to_json(self) -> dict:
        def p(x):
            return None if x is None else str(x)

        return {
            "data": {
                "balance_sheets": p(self.balance_sheets),
                "cet1": p(self.cet1),
                "line_items": p(self.line_items),
                "mapping": p(self.mapping),
            },
            "months": self.months,
            "structures": [
                {"kind": s.name, "target_p_bar": s.target_p_bar, "base_p": s.base_p} for s in self.structures
            ],
            "scenario": self.scenario.as_dict(),
            "m": self.m,
            "seed": self.seed,
            "jobs": self.jobs,
            "out": str(self.out),
            "clamp_negative_buckets": self.clamp_negative_buckets,
        }


def parse_months(value) -> list[str] | None:
    if value is None:
        return None
    if isinstance(value, str):
        if ".." in value:
            first, last = value.split("..", 1)
            return month_range(first.strip(), last.strip())
        value = [v for v in value.split(",") if v.strip()]
    months = [str(v).strip() for v in value]
    for mth in months:
        month_ordinal(mth)
    return sorted(set(months), key=month_ordinal)


def _structures(raw, default_p_bar) -> list[StructureSpec]:
    if raw == "all":
        raw = [s.value for s in Structure]
    specs = []
    for item in raw:
        if isinstance(item, str):
            specs.append(StructureSpec(Structure.parse(item), default_p_bar))
        else:
            specs.append(StructureSpec(
                Structure.parse(item["kind"]),
                float(item.get("target_p_bar", default_p_bar)),
                float(item.get("base_p", 0.5)),
            ))
    if not specs:
        raise ConfigError("no network structures configured")
    return specs


def _scenario(raw) -> ScenarioConfig:
    if raw is None:
        return ScenarioConfig()
    if isinstance(raw, str):
        raw = {"preset": raw}
    raw = dict(raw)
    preset = raw.pop("preset", None)
    base = ScenarioConfig()
    if preset is not None:
        if preset not in SCENARIOS:
            raise ConfigError(f"unknown scenario preset {preset!r}; choose from {sorted(SCENARIOS)}")
        base = SCENARIOS[preset]
    params = base.as_dict()
    unknown = set(raw) - set(params)
    if unknown:
        raise ConfigError(f"unknown scenario keys {sorted(unknown)}")
    params.update({k: float(v) for k, v in raw.items()})
    return ScenarioConfig(**params)


def load_config(path: str | Path | None, args: argparse.Namespace | None = None) -> RunConfig:
    raw: dict = {}
    base_dir = Path.cwd()
    if path is not None:
        path = Path(path)
        try:
            raw = json.loads(path.read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file {path} not found") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}: {exc.msg}") from None
        base_dir = path.resolve().parent

    def data_path(key):
        v = (raw.get("data") or {}).get(key)
        if v is None:
            return None
        p = Path(v)
        return p if p.is_absolute() else (base_dir / p).resolve()

    try:
        p_bar = float(raw.get("target_p_bar", 0.5))
        cfg = RunConfig(
            balance_sheets=data_path("balance_sheets"),
            cet1=data_path("cet1"),
            line_items=data_path("line_items"),
            mapping=data_path("mapping"),
            months=parse_months(raw.get("months")),
            structures=_structures(raw.get("structures", ["ErdosRenyi"]), p_bar),
            scenario=_scenario(raw.get("scenario")),
            m=int(raw.get("m", DEFAULT_SIMULATIONS)),
            seed=int(raw["seed"]) if raw.get("seed") is not None else None,
            jobs=int(raw.get("jobs", 1)),
            out=Path(raw.get("out", "results")),
            clamp_negative_buckets=bool(raw.get("clamp_negative_buckets", False)),
        )
    except (TypeError, KeyError) as exc:
        raise ConfigError(f"bad config value: {exc}") from None
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    if args is not None:
        if getattr(args, "seed", None) is not None:
            cfg.seed = args.seed
        if getattr(args, "jobs", None) is not None:
            cfg.jobs = args.jobs
        if getattr(args, "out", None) is not None:
            cfg.out = Path(args.out)
        if getattr(args, "months", None) is not None:
            try:
                cfg.months = parse_months(args.months)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        if getattr(args, "structure", None):
            try:
                kinds = [Structure.parse(s) for s in args.structure]
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
            picked = [s for s in cfg.structures if s.kind in kinds]
            known = {s.kind for s in picked}
            p_bar = cfg.structures[0].target_p_bar
            picked += [StructureSpec(k, p_bar) for k in kinds if k not in known]
            cfg.structures = picked
        if getattr(args, "clamp_negative_buckets", False):
            cfg.clamp_negative_buckets = True
    if cfg.seed is None:
        env = os.environ.get("CONTAGION_SEED")
        try:
            cfg.seed = int(env) if env else 0
        except ValueError:
            raise ConfigError(f"CONTAGION_SEED={env!r} is not an integer") from None
    if not 0 <= cfg.seed < 2**64:
        raise ConfigError(f"seed must be an unsigned 64-bit integer, got {cfg.seed}")
    if cfg.m < 1:
        raise ConfigError(f"m must be >= 1, got {cfg.m}")
    if cfg.jobs < 1:
        raise ConfigError(f"jobs must be >= 1, got {cfg.jobs}")
    if cfg.balance_sheets is None and cfg.line_items is None:
        raise ConfigError("config needs data.balance_sheets or data.line_items")
    return cfg


# -- data assembly ----------------------------------------------------------

@dataclass
class Finding:
    severity: str  # "rejected" or "excluded"
    bank_id: str
    month: str
    message: str


def load_sheets(cfg: RunConfig, findings: list[Finding] | None = None) -> list[BankBalanceSheet]:
    """Read balance sheets, rebuilding buckets from line items when configured.

    With ``findings`` given, per-bank categorisation failures are collected
    there instead of raised.
    """
    sheets = read_balance_sheets(cfg.balance_sheets) if cfg.balance_sheets else []
    if cfg.line_items is None:
        return sheets
    mapping = load_mapping(cfg.mapping)
    by_key = {(s.month, s.bank_id): s for s in sheets}
    for raw in read_line_items(cfg.line_items):
        try:
            buckets = categorize_line_items(raw, mapping, cfg.clamp_negative_buckets)
        except DataError as exc:
            if findings is None:
                raise
            findings.append(Finding("rejected", raw.bank_id, raw.month, str(exc)))
            by_key.pop((raw.month, raw.bank_id), None)
            continue
        old = by_key.get((raw.month, raw.bank_id))
        by_key[(raw.month, raw.bank_id)] = BankBalanceSheet(
            raw.bank_id, raw.month, *buckets, capital=old.capital if old else None
        )
    return list(by_key.values())


def load_snapshots(cfg: RunConfig):
    sheets = load_sheets(cfg)
    ratios = read_cet1_observations(cfg.cet1) if cfg.cet1 else []
    filled, excluded = estimate_capital(sheets, ratios)
    for bank, count in sorted(excluded.items()):
        log.info("excluding %s: %d CET1 observations", bank, count)
    if not filled:
        raise DataError("no bank has enough CET1 observations; nothing to simulate")
    return monthly_snapshots(filled, cfg.months), excluded


# -- output helpers ---------------------------------------------------------

class Outputs:
    """Collect output files and only move them into place when all succeed."""

    def __init__(self, out_dir: Path):
        self.dir = Path(out_dir)
        self.pending: list[tuple[Path, Path]] = []

    def _tmp(self, name: str) -> Path:
        self.dir.mkdir(parents=True, exist_ok=True)
        final = self.dir / name
        tmp = self.dir / f".{name}.partial"
        self.pending.append((tmp, final))
        return tmp

    def csv(self, name: str, header, rows):
        with self._tmp(name).open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)

    def json(self, name: str, obj):
        self._tmp(name).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")

    def commit(self) -> list[Path]:
        for tmp, final in self.pending:
            tmp.replace(final)
        return [f for _, f in self.pending]

    def discard(self):
        for tmp, _ in self.pending:
            tmp.unlink(missing_ok=True)


def _structure_label(spec: StructureSpec, specs) -> str:
    same_kind = [s for s in specs if s.kind is spec.kind]
    return spec.name if len(same_kind) == 1 else f"{spec.name}@{fmt(spec.target_p_bar)}"


def manifest(cfg: RunConfig, command: str, **derived) -> dict:
    doc = cfg.to_json()
    doc["command"] = command
    doc["version"] = __version__
    doc["derived"] = derived
    return doc


# -- commands ---------------------------------------------------------------

def cmd_validate(cfg: RunConfig, args) -> int:
    findings: list[Finding] = []
    sheets = load_sheets(cfg, findings)
    ratios = read_cet1_observations(cfg.cet1) if cfg.cet1 else []

    months_all = sorted({s.month for s in sheets}, key=month_ordinal)
    wanted = cfg.months or months_all
    series = cet1_observations(sheets, ratios)
    banks = sorted({s.bank_id for s in sheets})
    print(f"{len(banks)} banks, {len(months_all)} months ({months_all[0] if months_all else '-'}"
          f"..{months_all[-1] if months_all else '-'})")
    print("CET1 observations per bank:")
    for b in banks:
        k = len(series.get(b, ()))
        print(f"  {b}: {k}")
        if k < MIN_CET1_OBSERVATIONS:
            findings.append(Finding("excluded", b, "", f"{k} CET1 observations, need {MIN_CET1_OBSERVATIONS}"))

    excluded = {f.bank_id for f in findings if f.severity == "excluded"}
    print("month coverage (included banks):")
    for mth in wanted:
        present = {s.bank_id for s in sheets if s.month == mth} - excluded
        print(f"  {mth}: {len(present)}")
        if mth not in months_all:
            findings.append(Finding("rejected", "", mth, "no balance sheets for this month"))
        elif len(present) < 2:
            findings.append(Finding("rejected", "", mth, f"only {len(present)} usable banks, need 2"))

    out = Outputs(cfg.out)
    out.csv("validation_report.csv", ["severity", "bank_id", "month", "message"],
            [(f.severity, f.bank_id, f.month, f.message) for f in findings])
    out.commit()
    for f in findings:
        where = f"{f.bank_id} {f.month}".strip()
        text = f.message if f.message.startswith(where) else f"{where} {f.message}".strip()
        print(f"{f.severity.upper()}: {text}")
    return EXIT_INVALID if any(f.severity == "rejected" for f in findings) else EXIT_OK


def cmd_run(cfg: RunConfig, args) -> int:
    snapshots, excluded = load_snapshots(cfg)
    snaps = list(snapshots.values())
    cells = run_time_series(snaps, cfg.structures, cfg.scenario, cfg.m, cfg.seed, cfg.jobs,
                            keep_alphas=bool(args.dump_alphas))
    out = Outputs(cfg.out)
    try:
        out.csv("alpha_timeseries.csv", ["month", "structure", "alpha_bar"],
                [(c.month, _structure_label(c.structure, cfg.structures), fmt(c.alpha_bar)) for c in cells])
        if args.dump_alphas:
            out.csv("alpha_standard_error.csv", ["month", "structure", "standard_error"],
                    [(c.month, _structure_label(c.structure, cfg.structures), fmt(c.standard_error))
                     for c in cells])
        out.json("run_manifest.json", manifest(
            cfg, "run",
            excluded_banks=excluded,
            cells=[{"month": c.month, "structure": _structure_label(c.structure, cfg.structures), "seed": c.seed}
                   for c in cells],
        ))
    except BaseException:
        out.discard()
        raise
    for path in out.commit():
        print(f"wrote {path}")
    return EXIT_OK


def _pick_month(cfg: RunConfig, snapshots, month: str | None) -> str:
    if month is None:
        return list(snapshots)[-1]
    if month not in snapshots:
        raise KeyError(f"month {month} not available; have {list(snapshots)[0]}..{list(snapshots)[-1]}")
    return month


def cmd_shock(cfg: RunConfig, args) -> int:
    snapshots, _ = load_snapshots(cfg)
    month = _pick_month(cfg, snapshots, args.month)
    snap = snapshots[month]
    spec = cfg.structures[0]
    n = snap.index_of(args.bank)
    seed = cell_seed(cfg.seed, month, spec)

    # same graph as simulation 0 of the profile run
    graph = sample_edges(structure_probabilities(spec, snap.assets), simulation_rng(seed, 0))
    result = run_cascade(snap, graph, n, cfg.scenario, trace=True)
    print(f"{month} {spec.name}: shock {args.bank} -> theta={result.theta}, alpha={fmt(result.alpha)}, "
          f"rounds={result.rounds}")

    out = Outputs(cfg.out)
    derived = {"month": month, "structure": spec.name, "bank": args.bank, "seed": seed}
    try:
        if args.trace:
            out.csv("cascade_trace.csv",
                    ["round", "bank_id", "loss_recap", "loss_liquidity", "loss_proximity", "capital_after", "defaulted"],
                    [(r.round, snap.bank_ids[r.bank], fmt(r.loss_recap), fmt(r.loss_liquidity),
                      fmt(r.loss_proximity), fmt(r.capital_after), int(r.defaulted)) for r in result.trace])
        if args.profile:
            groups = parse_groups(args.groups) if args.groups else DEFAULT_SIZE_GROUPS
            res = run_plan(SimulationPlan(snap, spec, cfg.scenario, cfg.m, seed, keep_alphas=True), cfg.jobs)
            prof = size_group_profile(res, groups)
            out.csv("alpha_profile.csv", ["bank_id", "assets", "alpha_bar_n"],
                    [(b, fmt(a), fmt(x)) for b, a, x in zip(snap.bank_ids, snap.assets, res.alpha_bar_n)])
            out.csv("size_groups.csv", ["group", "first_rank", "last_rank", "mean_alpha_bar_n"],
                    [(g, lo, hi, fmt(v)) for g, lo, hi, v in prof.groups])
            out.csv("alpha_scatter.csv", ["log_assets", "alpha_bar_n"],
                    [(fmt(x), fmt(y)) for x, y in prof.scatter])
            out.csv("alpha_raw.csv", ["sim_index", "alpha"], [(i, fmt(a)) for i, a in enumerate(res.alphas)])
            for g, lo, hi, v in prof.groups:
                print(f"  {g} (ranks {lo}-{hi}): mean alpha_bar_n = {v:.6f}")
            derived["alpha_bar"] = res.alpha_bar
        out.json("run_manifest.json", manifest(cfg, "shock", **derived))
    except BaseException:
        out.discard()
        raise
    for path in out.commit():
        print(f"wrote {path}")
    return EXIT_OK


def parse_groups(text: str):
    """``large:1-4,medium:5,small:6-13,very small:14-`` → group triples."""
    groups = []
    for part in text.split(","):
        name, _, ranks = part.rpartition(":")
        lo, dash, hi = ranks.partition("-")
        if not name or not lo.strip().isdigit():
            raise ConfigError(f"bad size group {part!r}")
        first = int(lo)
        last = (int(hi) if hi.strip() else None) if dash else first
        groups.append((name.strip(), first, last))
    return groups


def cmd_matrix(cfg: RunConfig, args) -> int:
    snapshots, _ = load_snapshots(cfg)
    month = _pick_month(cfg, snapshots, args.month)
    snap = snapshots[month]
    out = Outputs(cfg.out)
    summary = []
    try:
        for spec in cfg.structures:
            raw = raw_probabilities(spec.kind, snap.assets, spec.base_p)
            scaled = scale_probabilities(raw, spec.target_p_bar)
            label = _structure_label(spec, cfg.structures)
            p0, achieved = average_probability(raw), average_probability(scaled)
            for kind, mat in (("raw", raw), ("scaled", scaled)):
                out.csv(f"matrix_{kind}_{label}.csv", snap.bank_ids, [[fmt(x) for x in row] for row in mat])
            summary.append((label, fmt(spec.target_p_bar), fmt(p0), fmt(achieved)))
            print(f"{month} {label}: p_bar_0={fmt(p0)} target={fmt(spec.target_p_bar)} achieved={fmt(achieved)}")
        out.csv("matrix_summary.csv", ["structure", "target_p_bar", "p_bar_0", "achieved_p_bar"], summary)
        out.json("run_manifest.json", manifest(cfg, "matrix", month=month))
    except BaseException:
        out.discard()
        raise
    for path in out.commit():
        print(f"wrote {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file (a run_manifest.json works too)")
    common.add_argument("--seed", type=int, help="master seed; falls back to config, then $CONTAGION_SEED")
    common.add_argument("--jobs", type=int, help="worker processes; output does not depend on it")
    common.add_argument("--out", help="output directory")
    common.add_argument("--months", help="A..B range or comma list of YYYY-MM months")
    common.add_argument("--structure", action="append", help="network structure (repeatable)")
    common.add_argument("--clamp-negative-buckets", action="store_true",
                        help="clamp buckets driven negative by impairments to zero instead of rejecting")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="contagion", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    sub.add_parser("validate", parents=[common], help="check input data and report exclusions")
    p = sub.add_parser("run", parents=[common], help="systemic risk indicator per month and structure")
    p.add_argument("--dump-alphas", action="store_true", help="also write per-cell standard errors")
    p = sub.add_parser("shock", parents=[common], help="trace one cascade and profile alpha_bar_n")
    p.add_argument("--month")
    p.add_argument("--bank", required=True)
    p.add_argument("--trace", action="store_true", help="write cascade_trace.csv")
    p.add_argument("--profile", action="store_true", help="per-bank alpha_bar_n and size-group means")
    p.add_argument("--groups", help="size groups, e.g. 'large:1-4,medium:5,small:6-13,very small:14-'")
    p = sub.add_parser("matrix", parents=[common], help="raw and scaled edge probability matrices")
    p.add_argument("--month")
    return ap


COMMANDS = {"validate": cmd_validate, "run": cmd_run, "shock": cmd_shock, "matrix": cmd_matrix}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config, args)
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, DataError, FileNotFoundError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001
        log.debug("failure", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
