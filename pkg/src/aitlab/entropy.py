"""State and circuit catalogs, the three entropy estimators and the Enc stream.

A catalog lists primitive states and circuits on ``N`` qubits.  Their codes
are planted in the reference machine's table, so each one is printed by a
short ``TABLE <i>`` program; its complexity and weight are then read off
the snapshot like any other string.  Entropies are :class:`Bits` values,
exact numbers of the form ``k - log2 r``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterator

from .codec import encode_rational, encode_tuple
from .machine import INF, UniverseSnapshot, halting_aux, k_hat, lit, m_hat
from .numeric import Bits, le_log_slack
from .quantum import (
    CQ,
    Circuit,
    PrimitiveUnitary,
    PureState,
    best_input_overlap,
    cayley_unitary,
    fidelity,
    identity,
    mu_aggregate,
    normalized,
    pad_and_apply,
    permutation_unitary,
    projector,
    random_primitive_state,
    random_skew_hermitian,
    smallest_dominating_power,
    synthesize_preparation,
)


class EmptyCatalog(ValueError):
    pass


class CatalogNotClosed(LookupError):
    pass


# ------------------------------------------------------------------ catalog plan

@dataclass(frozen=True)
class CatalogPlan:
    """The objects of a catalog before weights are known."""

    n: int
    states: tuple[tuple[str, PureState], ...]
    circuits: tuple[tuple[str, Circuit], ...]

    def codes(self) -> list[str]:
        return [s.code() for _, s in self.states] + [c.code() for _, c in self.circuits]


def plan_catalog(n: int = 2, seed: int = 7, n_random: int = 10) -> CatalogPlan:
    """Deterministic catalog: basis states, seeded random states and their preparations,
    the identity and two permutation circuits, and two Cayley circuits with the
    images of their inputs' basis states."""
    rng = random.Random(seed)
    dim = 2 ** n
    states: list[tuple[str, PureState]] = [(f"basis-{b:0{n}b}", PureState.basis(n, b)) for b in range(dim)]
    states += [(f"random-{i}", random_primitive_state(n, rng)) for i in range(n_random)]
    circuits: list[tuple[str, Circuit]] = [("identity", Circuit(PrimitiveUnitary(identity(dim)), n))]
    shift = list(range(1, dim)) + [0]
    circuits.append(("cycle", Circuit(permutation_unitary(shift), n)))
    swap_half = [b ^ (dim // 2) for b in range(dim)]
    circuits.append(("flip-first", Circuit(permutation_unitary(swap_half), n - 1 if n > 1 else n)))
    for i, m in enumerate((1, n) if n > 1 else (1,)):
        u = cayley_unitary(random_skew_hermitian(dim, rng))
        circuits.append((f"cayley-{i}", Circuit(u, m)))
    # images V|b 0..0> of every circuit join the states
    seen = {s.amps for _, s in states}
    for label, c in list(circuits):
        for b in range(2 ** c.m):
            img = pad_and_apply(c, PureState.basis(c.m, b))
            if img.amps not in seen:
                seen.add(img.amps)
                states.append((f"{label}-image-{b}", img))
    for label, s in states:
        circuits.append((f"prep-{label}", synthesize_preparation(s)))
    return CatalogPlan(n, tuple(states), tuple(circuits))


# ------------------------------------------------------------------ weighted catalog

@dataclass(frozen=True)
class Entry:
    label: str
    obj: object
    code: str
    k: int | float
    weight: Fraction


@dataclass
class Catalog:
    n: int
    states: list[Entry]
    circuits: list[Entry]
    machine_version: str = ""
    _index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._index = {e.obj.amps: i for i, e in enumerate(self.states)}

    @classmethod
    def from_snapshot(cls, plan: CatalogPlan, snapshot: UniverseSnapshot, aux: str = "") -> "Catalog":
        def entry(label, obj):
            code = obj.code()
            return Entry(label, obj, code, k_hat(code, aux, snapshot), m_hat(code, aux, snapshot))

        return cls(
            plan.n,
            [entry(lbl, s) for lbl, s in plan.states],
            [entry(lbl, c) for lbl, c in plan.circuits],
            snapshot.machine.version,
        )

    def index_of(self, psi: PureState) -> int | None:
        return self._index.get(psi.amps) if psi.kind == "primitive" else None

    @cached_property
    def mu(self):
        return mu_aggregate([(e.obj, e.weight) for e in self.states], dim=2 ** self.n)

    def total_weight(self) -> Fraction:
        return sum((e.weight for e in self.states), Fraction(0))

    def to_text(self) -> str:
        lines = [f"catalog\t{self.n}\t{self.machine_version}"]
        for kind, entries in (("state", self.states), ("circuit", self.circuits)):
            for e in entries:
                k = "inf" if e.k == INF else str(e.k)
                lines.append(f"{kind}\t{e.label}\t{k}\t{e.weight}\t{e.code}")
        return "\n".join(lines) + "\n"


# ------------------------------------------------------------------ entropies

def hg(psi: PureState, catalog: Catalog) -> Bits:
    """``-log2 sum_theta m(theta) |<psi|theta>|^2`` over the catalog states."""
    if not catalog.states:
        raise EmptyCatalog("no states")
    total = sum((e.weight * fidelity(psi, e.obj) for e in catalog.states if e.weight), Fraction(0))
    return Bits.neg_log(total)


def hg_via_mu(psi: PureState, catalog: Catalog) -> Bits:
    """The same quantity computed as ``-log2 <psi|mu|psi>``."""
    return Bits.neg_log(catalog.mu.expect(psi))


def hv(psi: PureState, catalog: Catalog) -> tuple[Bits, int | None]:
    """``min_theta k(theta) - log2 |<psi|theta>|^2`` and the index of the first minimizer."""
    if not catalog.states:
        raise EmptyCatalog("no states")
    best, arg = Bits.infinite(), None
    for i, e in enumerate(catalog.states):
        if e.k == INF:
            continue
        val = Bits(e.k, fidelity(psi, e.obj))
        if val < best:
            best, arg = val, i
    return best, arg


def hc(psi: PureState, catalog: Catalog) -> tuple[Bits, int | None, PureState | None]:
    """``min_(V,M) k(V,M) + M - log2 max_theta |<psi|V|theta 0..>|^2`` with witnesses."""
    if not catalog.circuits:
        raise EmptyCatalog("no circuits")
    best, arg, theta = Bits.infinite(), None, None
    for i, e in enumerate(catalog.circuits):
        circ = e.obj
        if e.k == INF or circ.n != psi.n:
            continue
        if Bits(e.k + circ.m) >= best:
            continue  # cannot beat the incumbent even at overlap 1
        value, witness = best_input_overlap(circ, psi)
        val = Bits(e.k + circ.m, value)
        if val < best:
            best, arg, theta = val, i, witness
    return best, arg, theta


@dataclass
class EntropyReport:
    label: str
    hg: Bits
    hv: Bits
    hv_witness: int | None
    hc: Bits
    hc_witness: int | None
    hc_theta: PureState | None

    def to_json(self, catalog: Catalog) -> dict:
        return {
            "state": self.label,
            "hg": self.hg.to_json(),
            "hv": self.hv.to_json(),
            "hv_witness": None if self.hv_witness is None else catalog.states[self.hv_witness].label,
            "hc": self.hc.to_json(),
            "hc_witness": None if self.hc_witness is None else catalog.circuits[self.hc_witness].label,
        }


def entropy_report(label: str, psi: PureState, catalog: Catalog) -> EntropyReport:
    v, vi = hv(psi, catalog)
    c, ci, theta = hc(psi, catalog)
    return EntropyReport(label, hg(psi, catalog), v, vi, c, ci, theta)


def chain_violations(report: EntropyReport, slack) -> list[str]:
    """Names of the chain inequalities the report breaks at the frozen constants."""
    bad = []
    if not report.hg <= report.hv + slack["c1"]:
        bad.append("hg<=hv+c1")
    if not report.hg <= report.hc + slack["c2"]:
        bad.append("hg<=hc+c2")
    if not le_log_slack(report.hc, report.hv, slack["c3"], slack["c4"]):
        bad.append("hc<=hv+c3*log(hv+2)+c4")
    return bad


# ------------------------------------------------------------------ Enc stream

def unit_rationals() -> Iterator[Fraction]:
    """Rationals in (0, 1] in Stern-Brocot order: 1, then the subtree under 1/2 level by level."""
    yield Fraction(1)
    level = [((0, 1), (1, 1))]
    while True:
        nxt = []
        for (a, b), (c, d) in level:
            med = (a + c, b + d)
            yield Fraction(*med)
            nxt.append(((a, b), med))
            nxt.append((med, (c, d)))
        level = nxt


def pair_order(n_states: int) -> Iterator[tuple[int, int]]:
    """``(state index, rational index)`` pairs by increasing index sum, state index ascending."""
    s = 0
    while True:
        for i in range(min(s, n_states - 1) + 1):
            yield i, s - i
        s += 1


class _Rationals:
    def __init__(self):
        self._it = unit_rationals()
        self._seen: list[Fraction] = []

    def __getitem__(self, j: int) -> Fraction:
        while len(self._seen) <= j:
            self._seen.append(next(self._it))
        return self._seen[j]


class EncStream:
    """Pull-based stream of ``(theta index, q, bit)`` with ``bit = [|<psi|theta>|^2 >= q]``."""

    def __init__(self, psi: PureState, catalog: Catalog):
        if not catalog.states:
            raise EmptyCatalog("no states")
        self.psi = psi
        self.catalog = catalog
        self._q = _Rationals()
        self._fid: dict[int, Fraction] = {}

    def rational(self, j: int) -> Fraction:
        return self._q[j]

    def fidelity_with(self, i: int) -> Fraction:
        if i not in self._fid:
            self._fid[i] = fidelity(self.psi, self.catalog.states[i].obj)
        return self._fid[i]

    def bit(self, i: int, j: int) -> int:
        return int(self.fidelity_with(i) >= self.rational(j))

    def tuples(self, count: int) -> list[tuple[int, Fraction, int]]:
        out = []
        for (i, j), _ in zip(pair_order(len(self.catalog.states)), range(count)):
            out.append((i, self.rational(j), self.bit(i, j)))
        return out

    def encoded(self, count: int) -> list[str]:
        """Code words ``<<theta>, <q>, bit>`` of the first ``count`` tuples."""
        return [
            encode_tuple([self.catalog.states[i].code, encode_rational(q), str(b)])
            for i, q, b in self.tuples(count)
        ]


class TransformedEncStream(EncStream):
    """Stream for ``V psi`` computed only from the source stream.

    The bit for ``(theta, q)`` is the source bit for ``(V* theta, q)``.  When
    ``V* theta`` is not a catalog state the bit is computed directly from its
    fidelity if ``on_demand`` is set, and :class:`CatalogNotClosed` is raised otherwise.
    """

    def __init__(self, unitary: PrimitiveUnitary, source: EncStream, on_demand: bool = False):
        super().__init__(source.psi, source.catalog)
        self.source = source
        self.unitary = unitary
        self.on_demand = on_demand
        self._back = unitary.adjoint()

    def bit(self, i: int, j: int) -> int:
        theta = self.catalog.states[i].obj
        pre = PureState(theta.n, self._back.apply(theta.amps), theta.kind)
        k = self.catalog.index_of(pre)
        if k is not None:
            return self.source.bit(k, j)
        if not self.on_demand:
            raise CatalogNotClosed(f"V* maps catalog state {i} outside the catalog")
        return int(fidelity(self.source.psi, pre) >= self.rational(j))


def enc_stream(psi: PureState, catalog: Catalog) -> EncStream:
    return EncStream(psi, catalog)


def transform_enc(unitary: PrimitiveUnitary, stream: EncStream, on_demand: bool = False) -> TransformedEncStream:
    if unitary.n != stream.psi.n:
        raise ValueError("unitary and state differ in qubit count")
    return TransformedEncStream(unitary, stream, on_demand)


# ------------------------------------------------------------------ halting information of states

HALF_INDEX = 1  # position of 1/2 in the rational order


def signature(psi: PureState, catalog: Catalog, count: int) -> str:
    """The ``q = 1/2`` column of the Enc stream for the first ``count`` catalog states."""
    stream = EncStream(psi, catalog)
    return "".join(str(stream.bit(i, HALF_INDEX)) for i in range(min(count, len(catalog.states))))


def capped_k(x: str, aux: str, snapshot: UniverseSnapshot) -> int:
    """``k_hat(x|aux)`` capped by the length of the literal program for ``x``.

    The literal program halts on every auxiliary, so the cap is a valid upper
    bound even when it lies beyond the enumeration budget.
    """
    k = k_hat(x, aux, snapshot)
    return min(k, len(lit(x))) if k != INF else len(lit(x))


def state_info_with_halting(psi: PureState, catalog: Catalog, snapshot: UniverseSnapshot, halting, count: int = 16) -> int:
    """Finite-prefix proxy for the halting information of ``psi`` (a proxy, not the true value)."""
    sig = signature(psi, catalog, count)
    return capped_k(sig, "", snapshot) - capped_k(sig, halting_aux("", halting), snapshot)


def planted_exotic_state(catalog: Catalog, halting, count: int = 16, seed: int = 0,
                         attempts: int = 50_000) -> PureState:
    """A state whose signature spells out the first ``count`` halting bits.

    Candidates are the normalized sum of the catalog states at the 1-bits
    plus a seeded random perturbation of growing size; the first candidate
    whose signature matches exactly is returned.
    """
    n_sig = min(count, len(catalog.states))
    target = halting.bits[:n_sig]
    ones = [i for i in range(n_sig) if target[i] == "1"]
    if not ones:
        raise ValueError("no halting bit set among the signature positions")
    dim = 2 ** catalog.n
    base = [sum((catalog.states[i].obj.amps[b] for i in ones), CQ(0)) for b in range(dim)]
    rng = random.Random(seed)
    for t in range(attempts):
        scale = Fraction(1 + t % 8, 8)
        noise = random_primitive_state(catalog.n, rng).amps
        vec = [a + scale * e for a, e in zip(base, noise)]
        if all(v.is_zero() for v in vec):
            continue
        psi = normalized(vec)
        if catalog.index_of(psi) is None and signature(psi, catalog, count) == target:
            return psi
    raise ValueError("no state with the requested signature was found")


def transform_info_excesses(states, catalog: Catalog, snapshot: UniverseSnapshot, halting, count: int = 16) -> list[tuple[str, str, int]]:
    """``info(V psi) - info(psi) - k(V)`` for full-width catalog circuits ``V``."""
    rows = []
    for label, psi in states:
        base = state_info_with_halting(psi, catalog, snapshot, halting, count)
        for e in catalog.circuits:
            circ = e.obj
            if e.k == INF or circ.m != circ.n:
                continue
            moved = PureState(psi.n, circ.unitary.apply(psi.amps), psi.kind)
            val = state_info_with_halting(moved, catalog, snapshot, halting, count)
            rows.append((label, e.label, val - base - e.k))
    return rows


def dominance_exponents(catalog: Catalog) -> list[int | None]:
    """Per weighted catalog state: least ``k`` with ``m(A) A <= 2**k mu`` for ``A = |theta><theta|``."""
    mu = catalog.mu.rows
    return [smallest_dominating_power(projector(e.obj, e.weight), mu) for e in catalog.states if e.weight]
