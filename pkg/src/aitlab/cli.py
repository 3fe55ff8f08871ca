"""Command line entry point: ``aitlab <command> [options]``.

Every command rebuilds the lab from its configuration (which is cheap and
deterministic), writes its files under ``--out`` and exits with status 0
only when no hard invariant failed.
"""

from __future__ import annotations

import argparse
import json
import logging
import random
import sys
from pathlib import Path

from .algstats import HOLDS, VIOLATION, lemma10_harness, theorem8_harness, theorem9_harness
from .calibration import calibrate, remapped_outputs, write_slack
from .codec import read_bits_lines
from .config import ConfigError, RunConfig, load_slack
from .entropy import chain_violations, entropy_report, hg_via_mu
from .lab import Lab, build_lab
from .machine import enumerate_universe
from .protocol import NoValidStrategy, best_classical, best_mixed, gap_csv, noncompression_gap
from .quantum import DecodeFailure, DimensionMismatch, PureState

log = logging.getLogger("aitlab")


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    log.info("wrote %s", path)


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


def _header(lab: Lab) -> dict:
    return {"config_hash": lab.config.content_hash(), "machine": lab.machine.version}


class MissingSnapshot(FileNotFoundError):
    """A report was pointed at a universe or catalog file that was never written."""


def _check_inputs(lab: Lab, args) -> None:
    """Files passed with --universe/--catalog must exist and match this configuration."""
    for what, path, render in (("universe", getattr(args, "universe", None), lab.snapshot.to_text),
                               ("catalog", getattr(args, "catalog", None), lab.catalog.to_text)):
        if path is None:
            continue
        p = Path(path)
        if not p.is_file():
            raise MissingSnapshot(f"{what} file {p} not found; run `aitlab {what}` first")
        if p.read_text() != render():
            raise ConfigError(f"{p} was built with a different configuration")


def _load_states(paths: list[str]) -> list[tuple[str, PureState]]:
    states = []
    for p in paths:
        try:
            states.append((Path(p).stem, PureState.from_text(Path(p).read_text())))
        except (ValueError, DecodeFailure) as exc:
            raise DecodeFailure(f"{p}: {exc}") from None
    return states


# ------------------------------------------------------------------ commands

def cmd_universe(lab: Lab, args) -> int:
    out = Path(lab.config.out)
    snap = lab.snapshot
    extra = []
    if args.aux_file:
        extra = read_bits_lines(Path(args.aux_file).read_text())
    if extra:
        snap = enumerate_universe(lab.machine, list(snap.auxiliaries) + extra, lab.config.workers)
    _write(out / "universe.txt", snap.to_text())
    _write(out / "universe-left-total.txt", lab.remapped.to_text())
    _write(out / "halting.txt", lab.halting.bits + "\n")
    summary = _header(lab) | {
        "omega_lower": str(snap.omega_lower), "records": len(snap.records),
        "auxiliaries": len(snap.auxiliaries), "lmax": snap.lmax, "steps": snap.step_limit,
    }
    _write(out / "universe.json", _dump(summary))
    return 0


def cmd_catalog(lab: Lab, args) -> int:
    _write(Path(lab.config.out) / "catalog.txt", lab.catalog.to_text())
    return 0


def cmd_entropy(lab: Lab, args) -> int:
    slack = lab.config.slack(lab.machine.version)
    states = _load_states(args.state) if args.state else lab.entropy_population()
    rows, failures = [], 0
    for label, psi in states:
        rep = entropy_report(label, psi, lab.catalog)
        bad = chain_violations(rep, slack)
        exact = rep.hg == hg_via_mu(psi, lab.catalog)
        failures += bool(bad) or not exact
        rows.append(rep.to_json(lab.catalog) | {"violations": bad, "hg_routes_agree": exact})
    _write(Path(lab.config.out) / "entropy.json", _dump(_header(lab) | {"states": rows, "failures": failures}))
    return 1 if failures else 0


def cmd_transmit(lab: Lab, args) -> int:
    out = Path(lab.config.out)
    if args.mode == "gap":
        slack = lab.config.slack(lab.machine.version)
        states = _load_states(args.state) if args.state else lab.gap_population()
        rows = noncompression_gap(states, lab.snapshot, lab.catalog, lab.halting, slack,
                                  lab.config.signature_states)
        _write(out / "gap.csv", gap_csv(rows))
        return 1 if any(r.flag == "violation" or r.gap < 0 for r in rows) else 0
    if not args.state:
        raise ConfigError("--state is required for classical and mixed modes")
    search = best_classical if args.mode == "classical" else best_mixed
    reports = {label: search(psi, lab.snapshot).to_json() for label, psi in _load_states(args.state)}
    _write(out / f"transmit-{args.mode}.json", _dump(_header(lab) | {"strategies": reports}))
    return 0


def cmd_algstats(lab: Lab, args) -> int:
    slack = lab.config.slack(lab.machine.version)
    rng = random.Random(lab.config.seed)
    t8, t9, hard = [], [], 0
    for inst in lab.stats_plan.instances:
        r8 = theorem8_harness(inst.f, inst.m, lab.stats_snapshot, slack, rng)
        r9 = theorem9_harness(inst.f, lab.remapped, lab.halting, slack)
        cov = r8.get("covering") or {}
        hard += r8["verdict"] == VIOLATION or r9["verdict"] == VIOLATION or not r9["routes_agree"]
        hard += any(not row["bound_ok"] for row in cov.get("rows", []))
        t8.append({"instance": inst.label} | r8)
        t9.append({"instance": inst.label} | r9)
    l10 = []
    for x in remapped_outputs(lab):
        r = lemma10_harness(x, lab.remapped, lab.halting, slack)
        hard += not r["bound_holds"]
        l10.append(r)
    verdicts = [r["verdict"] for r in t8 + t9]
    report = _header(lab) | {
        "stochasticity": t8, "border": t9, "prefix": l10, "hard_failures": hard,
        "verdict_counts": {v: verdicts.count(v) for v in sorted(set(verdicts))},
        "all_hold": all(v == HOLDS for v in verdicts),
    }
    _write(Path(lab.config.out) / "algstats.json", _dump(report))
    return 1 if hard else 0


def cmd_calibrate(lab: Lab, args) -> int:
    table = calibrate(lab)
    path = write_slack(table, lab.config.slack_path)
    log.info("calibrated %d constants into %s", len(table.values), path)
    load_slack(path, lab.machine.version)  # read back
    return 0


COMMANDS = {
    "universe": cmd_universe,
    "catalog": cmd_catalog,
    "entropy": cmd_entropy,
    "transmit": cmd_transmit,
    "algstats": cmd_algstats,
    "calibrate": cmd_calibrate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aitlab", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--lmax", type=int, default=RunConfig.lmax, help="longest program enumerated")
    common.add_argument("--steps", type=int, default=RunConfig.steps, help="step limit per run")
    common.add_argument("--stats-lmax", type=int, default=RunConfig.stats_lmax)
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--seed", type=int, default=0, help="seed for the Monte-Carlo checks")
    common.add_argument("--slack", default=None, help="slack table path (default: packaged table)")
    common.add_argument("--out", default="out")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "universe":
            p.add_argument("--aux-file", help="extra auxiliary tapes, one bit string per line")
        if name in ("entropy", "transmit", "algstats"):
            p.add_argument("--universe", help="universe.txt from an earlier run, checked against this config")
            p.add_argument("--catalog", help="catalog.txt from an earlier run, checked against this config")
        if name in ("entropy", "transmit"):
            p.add_argument("--state", action="append", help="state file (repeatable)")
        if name == "transmit":
            p.add_argument("--mode", choices=["classical", "mixed", "gap"], default="gap")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        config = RunConfig(lmax=args.lmax, steps=args.steps, stats_lmax=args.stats_lmax, workers=args.workers,
                           seed=args.seed, slack_path=args.slack, out=args.out)
        lab = build_lab(config)
        _check_inputs(lab, args)
        return COMMANDS[args.command](lab, args)
    except (ConfigError, DecodeFailure, DimensionMismatch, NoValidStrategy, FileNotFoundError) as exc:
        print(f"aitlab: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
