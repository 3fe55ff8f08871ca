"""The reference machine: a small prefix-free instruction set.

A program is one instruction word followed by its arguments.  Arguments are
either self-delimiting codes (strings and whole numbers) or complete
sub-programs, so the set of complete programs is prefix-free by
construction: the parser stops exactly at the end of a program, and a
program followed by extra bits is rejected.

Instruction words (a prefix-free set, Kraft sum 31/32)::

    ID     000      output the auxiliary tape
    LIT    001 <x>  output x
    AUX    010 <n>  output the first n auxiliary bits
    TABLE  011 <i>  output the i-th entry of the machine's table
    CAT    1000 p q concatenation of the outputs of p and q
    PIPE   1001 p q run q with the output of p as its auxiliary tape
    PAIR   1010 p q the pair code <U(p), U(q)>
    KEY    1011 <i> key of the i-th element of a set-of-pairs code on the aux tape
    EVAL   1100 p   run the aux tape as a program, feed its output to p
    FST    1101 p   run p on x where the aux tape is <x>alpha
    SND    11100 p  run p on alpha where the aux tape is <x>alpha
    NOT    11101 p  complement the output of p
    REV    11110 p  reverse the output of p

There are no loops, so every complete program halts in time linear in its
length and output unless it reads the auxiliary tape in a way the tape does
not support, in which case the machine never halts on that tape.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import cached_property

from ..codec import (
    CodeError,
    decode,
    decode_stream,
    encode_pair,
    encode_string,
    encode_whole,
    xi,
)

OPCODES: dict[str, str] = {
    "ID": "000",
    "LIT": "001",
    "AUX": "010",
    "TABLE": "011",
    "CAT": "1000",
    "PIPE": "1001",
    "PAIR": "1010",
    "KEY": "1011",
    "EVAL": "1100",
    "FST": "1101",
    "SND": "11100",
    "NOT": "11101",
    "REV": "11110",
}
_BY_WORD = {w: name for name, w in OPCODES.items()}
_MAX_WORD = max(len(w) for w in OPCODES.values())

# argument signature per opcode: "s" string code, "n" whole-number code, "p" sub-program
SIGNATURES: dict[str, str] = {
    "ID": "",
    "LIT": "s",
    "AUX": "n",
    "TABLE": "n",
    "CAT": "pp",
    "PIPE": "pp",
    "PAIR": "pp",
    "KEY": "n",
    "EVAL": "p",
    "FST": "p",
    "SND": "p",
    "NOT": "p",
    "REV": "p",
}

MACHINE_FAMILY = "aitlab-m1"


class MachineError(Exception):
    pass


class InvalidProgram(MachineError):
    """Not a complete program: grammar violation, truncation, or trailing bits."""


class Diverged(MachineError):
    """The machine does not halt on this input within the budget."""


def parse_prefix(buf: str, pos: int = 0):
    """Parse one program starting at ``pos``; return ``(ast, end)``.

    Raises :class:`InvalidProgram` when the bits at ``pos`` do not begin a
    complete program.
    """
    word = ""
    while word not in _BY_WORD:
        if pos >= len(buf) or len(word) >= _MAX_WORD:
            raise InvalidProgram("no instruction word")
        word += buf[pos]
        pos += 1
    name = _BY_WORD[word]
    args: list = [name]
    for kind in SIGNATURES[name]:
        if kind == "p":
            sub, pos = parse_prefix(buf, pos)
            args.append(sub)
            continue
        try:
            value, used = decode_stream(buf, "string" if kind == "s" else "whole", pos)
        except CodeError as exc:
            raise InvalidProgram(str(exc)) from None
        args.append(value)
        pos += used
    return tuple(args), pos


def parse(program: str):
    ast, end = parse_prefix(program, 0)
    if end != len(program):
        raise InvalidProgram("bits after a complete program")
    return ast


@dataclass
class _Budget:
    limit: int
    used: int = 0

    def spend(self, n: int) -> None:
        self.used += n
        if self.used > self.limit:
            raise Diverged("step budget exhausted")


def _split_aux(aux: str) -> tuple[str, str]:
    try:
        x, used = decode_stream(aux, "string")
    except CodeError:
        raise Diverged("auxiliary tape is not of the form <x>alpha") from None
    return x, aux[used:]


@dataclass(frozen=True)
class RunResult:
    output: str
    steps: int


@dataclass(frozen=True)
class ReferenceMachine:
    """The machine together with its planted table and budgets.

    ``table`` holds bit strings reachable through ``TABLE <i>``; planting
    the codes of catalog objects there gives them short programs.
    """

    table: tuple[str, ...] = ()
    step_limit: int = 10_000
    lmax: int = 14

    @cached_property
    def version(self) -> str:
        h = hashlib.sha256("\n".join(self.table).encode()).hexdigest()[:12]
        return f"{MACHINE_FAMILY}:{h}"

    def with_budgets(self, lmax: int | None = None, step_limit: int | None = None) -> "ReferenceMachine":
        return ReferenceMachine(
            self.table,
            self.step_limit if step_limit is None else step_limit,
            self.lmax if lmax is None else lmax,
        )

    def run(self, program: str, auxiliary: str = "", step_limit: int | None = None) -> RunResult:
        """Run ``program`` on ``auxiliary``; raise :class:`InvalidProgram` or :class:`Diverged`."""
        limit = self.step_limit if step_limit is None else step_limit
        if limit < 1:
            raise ValueError("step limit must be positive")
        ast = parse(program)
        budget = _Budget(limit)
        budget.spend(len(program))
        out = self.evaluate(ast, auxiliary, budget)
        return RunResult(out, budget.used)

    def run_ast(self, ast, program_length: int, auxiliary: str, step_limit: int | None = None) -> RunResult:
        budget = _Budget(self.step_limit if step_limit is None else step_limit)
        budget.spend(program_length)
        out = self.evaluate(ast, auxiliary, budget)
        return RunResult(out, budget.used)

    def evaluate(self, ast, aux: str, budget: _Budget) -> str:
        op = ast[0]
        budget.spend(1)
        if op == "ID":
            out = aux
        elif op == "LIT":
            out = ast[1]
        elif op == "AUX":
            if ast[1] > len(aux):
                raise Diverged("auxiliary tape too short")
            out = aux[: ast[1]]
        elif op == "TABLE":
            if ast[1] >= len(self.table):
                raise Diverged("table index out of range")
            out = self.table[ast[1]]
        elif op == "CAT":
            out = self.evaluate(ast[1], aux, budget) + self.evaluate(ast[2], aux, budget)
        elif op == "PIPE":
            out = self.evaluate(ast[2], self.evaluate(ast[1], aux, budget), budget)
        elif op == "PAIR":
            out = encode_pair(self.evaluate(ast[1], aux, budget), self.evaluate(ast[2], aux, budget))
        elif op == "KEY":
            out = _key_of(aux, ast[1])
        elif op == "EVAL":
            try:
                inner = parse(aux)
            except InvalidProgram:
                raise Diverged("auxiliary tape is not a program") from None
            budget.spend(len(aux))
            out = self.evaluate(ast[1], self.evaluate(inner, "", budget), budget)
        elif op == "FST":
            out = self.evaluate(ast[1], _split_aux(aux)[0], budget)
        elif op == "SND":
            out = self.evaluate(ast[1], _split_aux(aux)[1], budget)
        elif op == "NOT":
            out = self.evaluate(ast[1], aux, budget).translate(_FLIP)
        elif op == "REV":
            out = self.evaluate(ast[1], aux, budget)[::-1]
        else:  # pragma: no cover - parse() only yields known opcodes
            raise AssertionError(op)
        budget.spend(len(out))
        return out


_FLIP = str.maketrans("01", "10")


def _key_of(aux: str, i: int) -> str:
    try:
        items = decode(aux, "tuple")
        if i >= len(items):
            raise Diverged("element index out of range")
        key, _ = decode(items[i], "tuple")
    except (CodeError, ValueError):
        raise Diverged("auxiliary tape is not a set of pairs") from None
    return key


# ---------------------------------------------------------------- program builders

def lit(x: str) -> str:
    return OPCODES["LIT"] + encode_string(x)


def aux_prefix(n: int) -> str:
    return OPCODES["AUX"] + encode_whole(n)


def table(i: int) -> str:
    return OPCODES["TABLE"] + encode_whole(i)


def key(i: int) -> str:
    return OPCODES["KEY"] + encode_whole(i)


def unary_op(name: str, p: str) -> str:
    if SIGNATURES[name] != "p":
        raise ValueError(f"{name} is not a unary program operator")
    return OPCODES[name] + p


def binary_op(name: str, p: str, q: str) -> str:
    if SIGNATURES[name] != "pp":
        raise ValueError(f"{name} is not a binary program operator")
    return OPCODES[name] + p + q


IDENTITY = OPCODES["ID"]


def whole_string(n: int) -> str:
    """Whole numbers are handled as their order strings."""
    return xi(n)
