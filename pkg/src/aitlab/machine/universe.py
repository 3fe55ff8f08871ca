"""Bounded enumeration of the reference machine's halting programs."""

from __future__ import annotations

import hashlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterable, NamedTuple

from ..codec import encode_string, encode_whole
from .core import OPCODES, SIGNATURES, Diverged, ReferenceMachine

SNAPSHOT_MAGIC = "# aitlab universe snapshot v1"


class AuxiliaryNotProbed(KeyError):
    pass


class HaltRecord(NamedTuple):
    program: str
    aux_id: int
    output: str
    steps: int


def _string_codes(budget: int) -> list[tuple[str, str]]:
    out = []
    n = 0
    while len(encode_string("0" * n)) <= budget:
        for v in range(2 ** n):
            x = format(v, f"0{n}b") if n else ""
            out.append((encode_string(x), x))
        n += 1
    return out


def _whole_codes(budget: int) -> list[tuple[str, int]]:
    out = []
    n = 0
    while len(encode_whole(n)) <= budget:
        out.append((encode_whole(n), n))
        n += 1
    return out


@lru_cache(maxsize=None)
def _programs_within(budget: int) -> tuple[tuple[str, tuple], ...]:
    res: list[tuple[str, tuple]] = []
    for name, word in OPCODES.items():
        rem = budget - len(word)
        if rem < 0:
            continue
        sig = SIGNATURES[name]
        if sig == "":
            res.append((word, (name,)))
        elif sig == "s":
            res.extend((word + c, (name, x)) for c, x in _string_codes(rem))
        elif sig == "n":
            res.extend((word + c, (name, n)) for c, n in _whole_codes(rem))
        elif sig == "p":
            res.extend((word + c, (name, a)) for c, a in _programs_within(rem))
        else:
            for c1, a in _programs_within(rem):
                res.extend((word + c1 + c2, (name, a, b)) for c2, b in _programs_within(rem - len(c1)))
    return tuple(res)


def complete_programs(lmax: int) -> list[tuple[str, tuple]]:
    """Every complete program of length at most ``lmax`` with its parse, in canonical order.

    Canonical order is the whole-number order: shorter first, then lexicographic.
    """
    if lmax < 0:
        return []
    return sorted(_programs_within(lmax), key=lambda pa: (len(pa[0]), pa[0]))


def _run_chunk(args) -> list[HaltRecord]:
    machine, chunk, auxiliaries = args
    out = []
    for aux_id, aux in enumerate(auxiliaries):
        for program, ast in chunk:
            try:
                res = machine.run_ast(ast, len(program), aux)
            except Diverged:
                continue
            out.append(HaltRecord(program, aux_id, res.output, res.steps))
    return out


def _record_key(r: HaltRecord):
    return (r.aux_id, len(r.program), r.program)


@dataclass(eq=False)
class UniverseSnapshot:
    """Frozen result of running every program up to ``lmax`` bits on each probed auxiliary."""

    machine: ReferenceMachine
    auxiliaries: tuple[str, ...]
    records: tuple[HaltRecord, ...]
    left_total: bool = False
    _aux_ids: dict = field(init=False, repr=False)

    def __post_init__(self):
        self.records = tuple(sorted(self.records, key=_record_key))
        self._aux_ids = {}
        for i, a in enumerate(self.auxiliaries):
            self._aux_ids.setdefault(a, i)

    @property
    def lmax(self) -> int:
        return self.machine.lmax

    @property
    def step_limit(self) -> int:
        return self.machine.step_limit

    def aux_id(self, aux: str) -> int:
        try:
            return self._aux_ids[aux]
        except KeyError:
            raise AuxiliaryNotProbed(f"auxiliary of length {len(aux)} was not probed") from None

    def has_aux(self, aux: str) -> bool:
        return aux in self._aux_ids

    @cached_property
    def _by_aux(self) -> dict[int, tuple[HaltRecord, ...]]:
        d: dict[int, list[HaltRecord]] = {i: [] for i in range(len(self.auxiliaries))}
        for r in self.records:
            d[r.aux_id].append(r)
        return {k: tuple(v) for k, v in d.items()}

    @cached_property
    def _outputs(self) -> dict[int, dict[str, list]]:
        idx: dict[int, dict[str, list]] = {}
        for aux_id, recs in self._by_aux.items():
            table: dict[str, list] = {}
            for r in recs:
                entry = table.get(r.output)
                if entry is None:
                    # [shortest length, mass, shortest program]
                    table[r.output] = [len(r.program), Fraction(1, 2 ** len(r.program)), r.program]
                else:
                    entry[1] += Fraction(1, 2 ** len(r.program))
            idx[aux_id] = table
        return idx

    def halting(self, aux: str = "") -> tuple[HaltRecord, ...]:
        return self._by_aux[self.aux_id(aux)]

    def output_table(self, aux: str = "") -> dict[str, list]:
        return self._outputs[self.aux_id(aux)]

    @cached_property
    def omega_lower(self) -> Fraction:
        if not self.has_aux(""):
            return Fraction(0)
        return sum((Fraction(1, 2 ** len(r.program)) for r in self.halting("")), Fraction(0))

    def shortest_program(self, x: str, aux: str = "") -> str | None:
        entry = self.output_table(aux).get(x)
        return None if entry is None else entry[2]

    def run_record(self, program: str, aux: str = "") -> HaltRecord | None:
        for r in self.halting(aux):
            if r.program == program:
                return r
        return None

    # -------------------------------------------------------------- files

    def to_text(self) -> str:
        lines = [
            SNAPSHOT_MAGIC,
            f"machine\t{self.machine.version}",
            f"lmax\t{self.lmax}",
            f"steps\t{self.step_limit}",
            f"left_total\t{int(self.left_total)}",
            f"table\t{len(self.machine.table)}",
        ]
        lines += [f"entry\t{i}\t{t}" for i, t in enumerate(self.machine.table)]
        lines.append(f"auxiliaries\t{len(self.auxiliaries)}")
        lines += [f"aux\t{i}\t{a}" for i, a in enumerate(self.auxiliaries)]
        lines.append(f"records\t{len(self.records)}")
        lines += [f"{r.program}\t{r.aux_id}\t{r.output}\t{r.steps}" for r in self.records]
        om = self.omega_lower
        lines.append(f"omega_lower\t{om.numerator}/{om.denominator}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "UniverseSnapshot":
        rows = [line.split("\t") for line in text.split("\n")[:-1]]
        if not rows or rows[0][0] != SNAPSHOT_MAGIC:
            raise ValueError("not a universe snapshot")
        it = iter(rows[1:])
        head = {}
        for key in ("machine", "lmax", "steps", "left_total", "table"):
            row = next(it)
            if row[0] != key:
                raise ValueError(f"expected {key!r} header")
            head[key] = row[1]
        table = tuple(next(it)[2] for _ in range(int(head["table"])))
        n_aux = int(next(it)[1])
        auxiliaries = tuple(next(it)[2] for _ in range(n_aux))
        n_rec = int(next(it)[1])
        records = []
        for _ in range(n_rec):
            p, a, o, s = next(it)
            records.append(HaltRecord(p, int(a), o, int(s)))
        machine = ReferenceMachine(table, int(head["steps"]), int(head["lmax"]))
        if machine.version != head["machine"]:
            raise ValueError("machine version does not match its table")
        snap = cls(machine, auxiliaries, tuple(records), bool(int(head["left_total"])))
        om = next(it)
        if om[0] != "omega_lower" or Fraction(om[1]) != snap.omega_lower:
            raise ValueError("omega_lower does not match the records")
        return snap

    def digest(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()


def enumerate_universe(
    machine: ReferenceMachine,
    auxiliaries: Iterable[str] = ("",),
    workers: int = 1,
) -> UniverseSnapshot:
    """Run every program of at most ``machine.lmax`` bits on each auxiliary.

    The empty auxiliary is always probed (it defines ``omega_lower``).  Work
    is split by the first three program bits; the merged records are sorted
    canonically, so the snapshot does not depend on ``workers``.
    """
    auxes = [""] + [a for a in auxiliaries if a != ""]
    auxes = list(dict.fromkeys(auxes))
    programs = complete_programs(machine.lmax)
    groups: dict[str, list] = {}
    for p, ast in programs:
        groups.setdefault(p[:3], []).append((p, ast))
    jobs = [(machine, groups[k], tuple(auxes)) for k in sorted(groups)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, jobs))
    else:
        parts = [_run_chunk(j) for j in jobs]
    records = [r for part in parts for r in part]
    return UniverseSnapshot(machine, tuple(auxes), tuple(records))
