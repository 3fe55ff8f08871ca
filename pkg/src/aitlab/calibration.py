"""Measuring the slack constants that later runs treat as fixed thresholds.

Each constant is the least integer (never below zero) for which every
measured instance satisfies its inequality.  Log-slack scales are fixed at 1.
The exotic threshold is the exception: it sits halfway between the largest
halting-information proxy of the ordinary population and the planted state's.
"""

from __future__ import annotations

import math
from pathlib import Path

from .algstats import lemma10_harness, theorem8_harness, theorem9_harness
from .codec import encode_pair
from .config import DEFAULT_SLACK_PATH, SLACK_NAMES, SlackTable
from .entropy import entropy_report, transform_info_excesses, dominance_exponents, state_info_with_halting
from .lab import Lab
from .machine import (
    ReferenceMachine,
    Undefined,
    UniverseSnapshot,
    build_halting,
    coding_constant,
    enumerate_universe,
    info_with_halting,
    k_hat,
    mutual_info,
)
from .machine.estimators import nongrowth_excesses
from .numeric import Bits, le_log_slack
from .protocol import best_classical, best_mixed

SCALES = {"c3": 1, "c5": 1, "c_stoch_scale": 1, "c_border_scale": 1}
PROBE_STRINGS = ("", "0", "1")
HALTING_TEST_STRINGS = ("0", "11", "0101")


def min_offset(pairs, scale: int) -> int:
    """Least ``c >= 0`` with ``a <= b + scale log2(b+2) + c`` for every finite pair."""
    c = 0
    for a, b in pairs:
        if a.is_inf or b.is_inf:
            continue
        guess = math.floor(float(a) - float(b) - (scale * math.log2(max(float(b), 0) + 2) if scale else 0)) - 1
        c = max(c, guess)
        while not le_log_slack(a, b, scale, c):
            c += 1
    return c


class _Placeholder:
    """Slack lookups during calibration: scales as configured, offsets zero."""

    def __getitem__(self, name: str) -> int:
        return SCALES.get(name, 0)


def reference_snapshots() -> tuple[UniverseSnapshot, UniverseSnapshot, object]:
    """The empty-table default universe and a wider one probed with its halting bits."""
    default = enumerate_universe(ReferenceMachine(lmax=14))
    halting = build_halting(default, 10)
    wide = enumerate_universe(ReferenceMachine(lmax=21), ["", halting.bits])
    return default, wide, halting


def measure_machine(default: UniverseSnapshot, wide: UniverseSnapshot, halting, lab: Lab) -> dict[str, int]:
    mutual = chain = 0
    for x in PROBE_STRINGS:
        mutual = max(mutual, abs(mutual_info(x, x, wide) - k_hat(x, "", wide)))
        for y in PROBE_STRINGS:
            mutual = max(mutual, abs(mutual_info(x, y, wide) - mutual_info(y, x, wide)))
            chain = max(chain, k_hat(encode_pair(x, y), "", wide) - k_hat(x, "", wide) - k_hat(y, "", wide))
    growth = [e for _, _, e in nongrowth_excesses(wide, halting)]
    for y in HALTING_TEST_STRINGS:
        try:
            growth.append(info_with_halting(y, "", halting, wide))
        except Undefined:
            pass
    return {
        "c_machine": max(0, coding_constant(default), coding_constant(lab.snapshot)),
        "c_chain": max(0, int(chain)),
        "c_mutual": max(0, int(mutual)),
        "c_nongrowth": max([0] + growth),
    }


def measure_entropy(lab: Lab) -> dict[str, int]:
    reports = [entropy_report(label, psi, lab.catalog) for label, psi in lab.entropy_population()]
    exps = [e for e in dominance_exponents(lab.catalog) if e is not None]
    states = lab.entropy_population()[:40]
    excess = [e for _, _, e in transform_info_excesses(states, lab.catalog, lab.snapshot, lab.halting,
                                                 lab.config.signature_states)]
    return {
        "c_lemma6": max([0] + exps),
        "c1": min_offset([(r.hg, r.hv) for r in reports], 0),
        "c2": min_offset([(r.hg, r.hc) for r in reports], 0),
        "c3": SCALES["c3"],
        "c4": min_offset([(r.hc, r.hv) for r in reports], SCALES["c3"]),
        "c_transform": max([0] + excess),
    }


def measure_gap(lab: Lab) -> dict[str, int]:
    count = lab.config.signature_states
    pairs, infos = [], []
    planted = None
    for label, psi in lab.gap_population():
        info = state_info_with_halting(psi, lab.catalog, lab.snapshot, lab.halting, count)
        if label == "planted-exotic":
            planted = info
            continue
        infos.append(info)
        pairs.append((best_classical(psi, lab.snapshot).total, best_mixed(psi, lab.snapshot).total))
    ordinary = max([0] + infos)
    if planted is None or planted <= ordinary + 1:
        raise RuntimeError("the planted exotic state does not stand out; enlarge the signature")
    # halfway between the ordinary population and the planted state
    c_exotic = (ordinary + planted + 1) // 2
    return {"c5": SCALES["c5"], "c6": min_offset(pairs, SCALES["c5"]), "c_exotic": c_exotic}


def measure_algstats(lab: Lab) -> dict[str, int]:
    slack = _Placeholder()
    t8, t9 = [], []
    for inst in lab.stats_plan.instances:
        r = theorem8_harness(inst.f, inst.m, lab.stats_snapshot, slack)
        if r["rhs"] is not None and r["lhs"]["offset"] is not None:
            t8.append((Bits.from_json(r["lhs"]), Bits.from_json(r["rhs"])))
        r = theorem9_harness(inst.f, lab.remapped, lab.halting, slack)
        if r["lhs"]["offset"] is not None:
            t9.append((Bits.from_json(r["lhs"]), Bits.from_json(r["rhs"])))
    l10 = []
    for x in remapped_outputs(lab):
        r = lemma10_harness(x, lab.remapped, lab.halting)
        l10.append((Bits(r["ks_upper"]), Bits(r["info_proxy"])))
    return {
        "c_stoch_scale": SCALES["c_stoch_scale"],
        "c_stoch": min_offset(t8, SCALES["c_stoch_scale"]),
        "c_border_scale": SCALES["c_border_scale"],
        "c_border": min_offset(t9, SCALES["c_border_scale"]),
        "c_prefix": min_offset(l10, 1),
    }


def remapped_outputs(lab: Lab, count: int = 16) -> list[str]:
    """The first ``count`` outputs of the remapped universe in ξ order."""
    outs = sorted({r.output for r in lab.remapped.halting("")}, key=lambda x: (len(x), x))
    return outs[:count]


def calibrate(lab: Lab) -> SlackTable:
    default, wide, halting = reference_snapshots()
    values: dict[str, int] = {}
    values.update(measure_machine(default, wide, halting, lab))
    values.update(measure_entropy(lab))
    values.update(measure_gap(lab))
    values.update(measure_algstats(lab))
    missing = set(SLACK_NAMES) - set(values)
    if missing:
        raise RuntimeError(f"calibration did not measure {sorted(missing)}")
    return SlackTable(lab.machine.version, values)


def write_slack(table: SlackTable, path: Path | str | None = None) -> Path:
    path = Path(path) if path is not None else DEFAULT_SLACK_PATH
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(table.to_text())
    return path

