"""Left-total re-layout of a snapshot, totality, border prefixes and ``m_b``.

Halting programs are taken in order of convergence time (steps, then
canonical order) and given consecutive intervals of width ``2**-len(p)``
starting at 0.  The new machine halts on ``q`` with the output of ``p``
exactly when the dyadic interval of ``q`` lies inside the interval of ``p``
and the interval of ``q``'s parent does not.  All arithmetic is exact.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction

from .universe import HaltRecord, UniverseSnapshot


class NotTotal(ValueError):
    pass


def dyadic_interval(p: str) -> tuple[Fraction, Fraction]:
    """Interval ``[v 2**-k, (v+1) 2**-k]`` of the string ``p`` (``v`` its binary value)."""
    k = len(p)
    v = int(p, 2) if p else 0
    return Fraction(v, 2 ** k), Fraction(v + 1, 2 ** k)


def dyadic_cover(lo: Fraction, hi: Fraction) -> list[str]:
    """Maximal dyadic strings whose intervals tile ``[lo, hi]`` (both dyadic)."""
    out = []
    while lo < hi:
        # largest aligned block starting at lo that fits
        k = 0
        while True:
            width = Fraction(1, 2 ** k)
            if (lo / width).denominator == 1 and lo + width <= hi:
                break
            k += 1
        v = int(lo / width)
        out.append(format(v, f"0{k}b") if k else "")
        lo += width
    return out


def left_of(a: str, b: str) -> bool:
    """``a`` is to the left of ``b``: they split at some position with 0 in ``a`` and 1 in ``b``."""
    for x, y in zip(a, b):
        if x != y:
            return x == "0"
    return False


@dataclass(frozen=True)
class Placement:
    source: str
    lo: Fraction
    hi: Fraction
    programs: tuple[str, ...]


def layout(snapshot: UniverseSnapshot, aux: str = "") -> list[Placement]:
    """Interval assignment for the halting programs on ``aux``."""
    recs = sorted(snapshot.halting(aux), key=lambda r: (r.steps, len(r.program), r.program))
    out = []
    lo = Fraction(0)
    for r in recs:
        hi = lo + Fraction(1, 2 ** len(r.program))
        out.append(Placement(r.program, lo, hi, tuple(dyadic_cover(lo, hi))))
        lo = hi
    return out


def left_totalize(snapshot: UniverseSnapshot) -> UniverseSnapshot:
    """Return the left-total re-layout of every probed auxiliary."""
    records = []
    for aux_id, aux in enumerate(snapshot.auxiliaries):
        by_program = {r.program: r for r in snapshot.halting(aux)}
        for place in layout(snapshot, aux):
            src = by_program[place.source]
            records.extend(HaltRecord(q, aux_id, src.output, src.steps) for q in place.programs)
    return UniverseSnapshot(snapshot.machine, snapshot.auxiliaries, tuple(records), left_total=True)


class TotalityIndex:
    """Fast totality queries over the halting programs of one auxiliary."""

    def __init__(self, snapshot: UniverseSnapshot, aux: str = ""):
        recs = snapshot.halting(aux)
        self.programs = sorted(r.program for r in recs)
        self.halting = set(self.programs)
        self._prefix_mass = [Fraction(0)]
        for p in self.programs:
            self._prefix_mass.append(self._prefix_mass[-1] + Fraction(1, 2 ** len(p)))
        self.max_len = max((len(p) for p in self.programs), default=0)

    def extension_mass(self, x: str) -> Fraction:
        """Total weight of halting programs extending ``x`` (including ``x``)."""
        i = bisect.bisect_left(self.programs, x)
        j = bisect.bisect_left(self.programs, x + "2")  # "2" sorts after both bits
        return self._prefix_mass[j] - self._prefix_mass[i]

    def halting_prefix(self, x: str) -> str | None:
        for k in range(len(x) + 1):
            if x[:k] in self.halting:
                return x[:k]
        return None

    def is_total(self, x: str) -> bool:
        """Every infinite extension of ``x`` passes through a halting program."""
        if self.halting_prefix(x) is not None:
            return True
        return self.extension_mass(x) == Fraction(1, 2 ** len(x))


def is_total(x: str, snapshot: UniverseSnapshot, aux: str = "") -> bool:
    return _index(snapshot, aux).is_total(x)


def _index(snapshot: UniverseSnapshot, aux: str) -> TotalityIndex:
    cache = snapshot.__dict__.setdefault("_totality_cache", {})
    key = snapshot.aux_id(aux)
    if key not in cache:
        cache[key] = TotalityIndex(snapshot, aux)
    return cache[key]


def left_total_violations(snapshot: UniverseSnapshot, aux: str = "") -> list[tuple[str, str]]:
    """Pairs ``(x, y)`` with ``y`` halting, ``x`` left of ``y`` and ``x`` not total.

    Every string left of ``y`` extends some ``y[:i] + "0"`` with ``y[i] == "1"``,
    and totality passes to extensions, so checking those siblings is exhaustive.
    """
    idx = _index(snapshot, aux)
    bad = []
    for y in idx.programs:
        for i, bit in enumerate(y):
            if bit == "1":
                x = y[:i] + "0"
                if not idx.is_total(x):
                    bad.append((x, y))
    return bad


def omega_bits(snapshot: UniverseSnapshot, length: int) -> str:
    """First ``length`` bits of the binary expansion of ``omega_lower``."""
    om = snapshot.omega_lower
    return format(int(om * 2 ** length), f"0{length}b") if length else ""


def border_prefixes(snapshot: UniverseSnapshot, aux: str = "", max_len: int | None = None) -> list[str]:
    """Strings ``b`` that are total while ``b[:-1]`` is not, scanned up to ``max_len``."""
    idx = _index(snapshot, aux)
    max_len = idx.max_len if max_len is None else max_len
    out = []
    frontier = [""]
    for _ in range(max_len):
        nxt = []
        for parent in frontier:
            for c in "01":
                b = parent + c
                if idx.is_total(b):
                    out.append(b)
                else:
                    nxt.append(b)
        frontier = nxt
    return out


def m_b(x: str, b: str, snapshot: UniverseSnapshot, aux: str = "") -> Fraction:
    """Weight of programs printing ``x`` that are left of ``b`` or extend ``b``."""
    if not is_total(b, snapshot, aux):
        raise NotTotal(f"{b!r} is not total")
    return sum(
        (Fraction(1, 2 ** len(r.program)) for r in snapshot.halting(aux)
         if r.output == x and (left_of(r.program, b) or r.program.startswith(b))),
        Fraction(0),
    )


def m_b_table(b: str, snapshot: UniverseSnapshot, aux: str = "") -> dict[str, Fraction]:
    """``m_b`` for every output at once."""
    if not is_total(b, snapshot, aux):
        raise NotTotal(f"{b!r} is not total")
    out: dict[str, Fraction] = {}
    for r in snapshot.halting(aux):
        if left_of(r.program, b) or r.program.startswith(b):
            out[r.output] = out.get(r.output, Fraction(0)) + Fraction(1, 2 ** len(r.program))
    return out
