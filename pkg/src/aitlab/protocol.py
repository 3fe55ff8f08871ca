"""The two-channel transmission game.

Alice sends ``L`` classical bits ``p`` and an ``M``-qubit state ``theta``.
Bob runs ``p`` on the reference machine, reads the output as a circuit
``(V, M)`` and prepares ``V|theta 0...0>``.  The cost is
``L + M - log2 |<psi|psi'>|^2``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction

from .codec import CodeError
from .entropy import Catalog, state_info_with_halting
from .machine import Diverged, InvalidProgram, UniverseSnapshot
from .numeric import Bits, le_log_slack, log_bound
from .quantum import (
    Circuit,
    DecodeFailure,
    DimensionMismatch,
    PureState,
    best_input_overlap,
    decode_circuit,
    fidelity,
    pad_and_apply,
)


class NoValidStrategy(LookupError):
    pass


@dataclass(frozen=True)
class Strategy:
    program: str
    theta: PureState  # M qubits; M = 0 means the quantum channel is empty

    @property
    def m(self) -> int:
        return self.theta.n


@dataclass(frozen=True)
class CostReport:
    strategy: Strategy
    fid: Fraction

    @property
    def L(self) -> int:
        return len(self.strategy.program)

    @property
    def M(self) -> int:
        return self.strategy.m

    @property
    def F(self) -> Bits:
        return Bits.neg_log(self.fid)

    @property
    def total(self) -> Bits:
        return Bits(self.L + self.M) + self.F

    @property
    def classical_only(self) -> bool:
        return self.M == 0

    def to_json(self) -> dict:
        return {"program": self.strategy.program, "L": self.L, "M": self.M, "F": self.F.to_json(),
                "total": self.total.to_json(), "classical_only": self.classical_only}


def circuit_of(program: str, snapshot: UniverseSnapshot, aux: str = "") -> Circuit:
    """Bob's side: run the program and read its output as a circuit code."""
    rec = snapshot.run_record(program, aux)
    if rec is not None:
        out = rec.output
    else:
        try:
            out = snapshot.machine.run(program, aux).output
        except (InvalidProgram, Diverged) as exc:
            raise DecodeFailure(f"program does not halt: {exc}") from None
    return decode_circuit(out)


def evaluate(psi: PureState, strategy: Strategy, snapshot: UniverseSnapshot) -> CostReport:
    circ = circuit_of(strategy.program, snapshot)
    if circ.m != strategy.m:
        raise DimensionMismatch(f"circuit takes {circ.m} qubits, theta has {strategy.m}")
    if circ.unitary.dim != psi.dim:
        raise DimensionMismatch("circuit and target act on different numbers of qubits")
    return CostReport(strategy, fidelity(psi, pad_and_apply(circ, strategy.theta)))


def decoded_circuits(snapshot: UniverseSnapshot, n: int) -> list[tuple[str, Circuit]]:
    """Snapshot programs printing an ``n``-qubit circuit, in ξ order."""
    cache = snapshot.__dict__.setdefault("_circuit_cache", {})
    if n not in cache:
        parsed: dict[str, Circuit | None] = {}
        found = []
        for r in snapshot.halting(""):
            if r.output not in parsed:
                try:
                    c = decode_circuit(r.output)
                    parsed[r.output] = c if c.unitary.dim == 2 ** n else None
                except (DecodeFailure, CodeError):
                    parsed[r.output] = None
            if parsed[r.output] is not None:
                found.append((r.program, parsed[r.output]))
        cache[n] = sorted(found, key=lambda t: (len(t[0]), t[0]))
    return cache[n]


def _search(psi: PureState, snapshot: UniverseSnapshot, mixed: bool) -> CostReport:
    best: CostReport | None = None
    empty = PureState.basis(0)
    for program, circ in decoded_circuits(snapshot, psi.n):
        if circ.m > 0 and not mixed:
            continue
        if best is not None and Bits(len(program) + circ.m) >= best.total:
            continue  # F >= 0
        if circ.m == 0:
            fid, theta = fidelity(psi, pad_and_apply(circ, empty)), empty
        else:
            fid, theta = best_input_overlap(circ, psi)
        if fid == 0:
            continue
        report = CostReport(Strategy(program, theta), fid)
        if best is None or report.total < best.total:
            best = report
    if best is None:
        raise NoValidStrategy("no snapshot program prints a usable circuit")
    return best


def best_classical(psi: PureState, snapshot: UniverseSnapshot, catalog: Catalog | None = None) -> CostReport:
    """Cheapest strategy with an empty quantum channel; ties go to the first program in ξ order."""
    return _search(psi, snapshot, mixed=False)


def best_mixed(psi: PureState, snapshot: UniverseSnapshot, catalog: Catalog | None = None) -> CostReport:
    """Cheapest strategy over every decoded circuit, using the optimal input state."""
    return _search(psi, snapshot, mixed=True)


@dataclass(frozen=True)
class GapRow:
    label: str
    classical: CostReport
    mixed: CostReport
    bound: str
    within: bool
    info: int
    flag: str  # "", "violation" or "exotic"

    @property
    def gap(self) -> Bits:
        return self.classical.total - self.mixed.total


GAP_HEADER = ["state", "L", "M", "F", "total_classical", "total_mixed", "gap", "bound", "flag", "info"]


def noncompression_gap(states, snapshot: UniverseSnapshot, catalog: Catalog, halting, slack,
                       count: int = 16) -> list[GapRow]:
    """Classical-only versus mixed cost for each labelled state.

    A state whose halting-information proxy reaches ``c_exotic`` is flagged
    exotic and left out of the pass/fail count whatever its gap.
    """
    c5, c6 = slack["c5"], slack["c6"]
    rows = []
    for label, psi in states:
        cl, mx = best_classical(psi, snapshot), best_mixed(psi, snapshot)
        within = le_log_slack(cl.total, mx.total, c5, c6)
        info = state_info_with_halting(psi, catalog, snapshot, halting, count)
        flag = "exotic" if info >= slack["c_exotic"] else ("" if within else "violation")
        bound = f"{float(log_bound(mx.total, c5, c6)):.9f}"
        rows.append(GapRow(label, cl, mx, bound, within, info, flag))
    return rows


def _num(b: Bits) -> str:
    return "inf" if b.is_inf else f"{float(b):.9f}"


def gap_csv(rows: list[GapRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(GAP_HEADER)
    for r in rows:
        w.writerow([r.label, r.mixed.L, r.mixed.M, _num(r.mixed.F), _num(r.classical.total),
                    _num(r.mixed.total), _num(r.gap), r.bound, r.flag, r.info])
    return buf.getvalue()
