"""Complexity and information estimates read off a universe snapshot."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from ..codec import encode_pair, encode_string, xi
from ..numeric import ceil_log2
from .core import OPCODES
from .universe import UniverseSnapshot

INF = math.inf


class Undefined(ValueError):
    """An information quantity needs a complexity that is infinite within budget."""


@dataclass(frozen=True)
class HaltingApprox:
    """Characteristic bits of the halting domain (empty auxiliary) in whole-number order.

    Bit ``i`` is 1 iff the program ``xi(i)`` halts within the budget.  Only
    programs of at most ``lmax`` bits are covered.
    """

    bits: str
    lmax: int
    step_limit: int

    def __len__(self) -> int:
        return len(self.bits)


def build_halting(snapshot: UniverseSnapshot, lmax: int | None = None) -> HaltingApprox:
    lmax = snapshot.lmax if lmax is None else lmax
    if lmax > snapshot.lmax:
        raise ValueError("halting prefix cannot exceed the snapshot's length budget")
    n_strings = 2 ** (lmax + 1) - 2  # nonempty strings of length <= lmax
    bits = bytearray(b"0" * n_strings)
    for r in snapshot.halting(""):
        if len(r.program) <= lmax:
            bits[int("1" + r.program, 2) - 2] = ord("1")
    return HaltingApprox(bits.decode(), lmax, snapshot.step_limit)


def halting_aux(aux: str, halting: HaltingApprox) -> str:
    """Auxiliary tape carrying ``aux`` together with the halting bits.

    With an empty ``aux`` the tape is the halting bits themselves; otherwise
    it is ``<aux>`` followed by them.
    """
    return halting.bits if aux == "" else encode_string(aux) + halting.bits


def k_hat(x: str, aux: str, snapshot: UniverseSnapshot) -> float | int:
    """Length of the shortest snapshot program printing ``x`` on ``aux`` (``inf`` if none)."""
    entry = snapshot.output_table(aux).get(x)
    return INF if entry is None else entry[0]


def m_hat(x: str, aux: str, snapshot: UniverseSnapshot) -> Fraction:
    entry = snapshot.output_table(aux).get(x)
    return Fraction(0) if entry is None else entry[1]


def omega_hat(snapshot: UniverseSnapshot) -> Fraction:
    return snapshot.omega_lower


def k_whole(n: int, aux: str, snapshot: UniverseSnapshot) -> float | int:
    return k_hat(xi(n), aux, snapshot)


def pair_code(x: str, y: str) -> str:
    return encode_pair(x, y)


def mutual_info(x: str, y: str, snapshot: UniverseSnapshot, aux: str = "") -> int:
    kx, ky, kxy = (k_hat(v, aux, snapshot) for v in (x, y, pair_code(x, y)))
    if INF in (kx, ky, kxy):
        raise Undefined("a complexity term is infinite within budget")
    return kx + ky - kxy


def info_with_halting(x: str, aux: str, halting: HaltingApprox, snapshot: UniverseSnapshot) -> int:
    """``k_hat(x|aux) - k_hat(x|aux, halting bits)``."""
    k0 = k_hat(x, aux, snapshot)
    k1 = k_hat(x, halting_aux(aux, halting), snapshot)
    if INF in (k0, k1):
        raise Undefined("a complexity term is infinite within budget")
    return k0 - k1


def coding_excess(snapshot: UniverseSnapshot, aux: str = "") -> dict[str, int]:
    """Per output ``x``: smallest integer c with ``k_hat(x) <= -log2 m_hat(x) + c``."""
    out = {}
    for x, (k, mass, _) in snapshot.output_table(aux).items():
        # k + log2(mass) <= c  <=>  mass * 2**k <= 2**c
        out[x] = ceil_log2(mass * 2 ** k)
    return out


def coding_constant(snapshot: UniverseSnapshot, aux: str = "") -> int:
    excess = coding_excess(snapshot, aux)
    return max(excess.values(), default=0)


# Finite-prefix transformers g, each given by a program that maps aux x to g(x).
TRANSFORMERS: dict[str, str] = {
    "complement": OPCODES["NOT"] + OPCODES["ID"],
    "reverse": OPCODES["REV"] + OPCODES["ID"],
    "double": OPCODES["CAT"] + OPCODES["ID"] + OPCODES["ID"],
    "self-pair": OPCODES["PAIR"] + OPCODES["ID"] + OPCODES["ID"],
}


def transformer_cost(program: str, snapshot: UniverseSnapshot) -> int:
    """Description length charged for a transformer: ``k_hat`` of its program, capped by its length."""
    k = k_hat(program, "", snapshot)
    return min(k, len(program))


def nongrowth_excesses(
    snapshot: UniverseSnapshot, halting: HaltingApprox
) -> list[tuple[str, str, int]]:
    """``info(g(x)) - info(x) - cost(g)`` for every transformer and snapshot output ``x``.

    Pairs where either information value is undefined within budget are skipped.
    """
    rows = []
    outputs = sorted(snapshot.output_table(""), key=lambda x: (len(x), x))
    for name, prog in TRANSFORMERS.items():
        cost = transformer_cost(prog, snapshot)
        for x in outputs:
            gx = snapshot.machine.run(prog, x).output
            try:
                ix = info_with_halting(x, "", halting, snapshot)
                igx = info_with_halting(gx, "", halting, snapshot)
            except Undefined:
                continue
            rows.append((name, x, igx - ix - cost))
    return rows
