"""Algorithmic statistics on a finite snapshot.

Measures are explicit primitive measures printed by snapshot programs; a
whole number ``x`` is identified with the string ``xi(x)``, so a map or
measure code ``c`` stands for the whole number ``xi_index(c)``.

Complexities given an auxiliary tape that the snapshot did not probe are
computed by enumerating the snapshot's machine on that tape the first time
it is needed.  Left-total snapshots cannot be extended this way, since
their programs are re-laid-out copies.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable

from .codec import (
    CodeError,
    PrimitiveMap,
    PrimitiveMeasure,
    decode,
    encode_map,
    encode_measure,
    encode_string,
    xi,
    xi_index,
)
from .machine import (
    INF,
    AuxiliaryNotProbed,
    HaltingApprox,
    Undefined,
    UniverseSnapshot,
    enumerate_universe,
    is_total,
    k_hat,
    lit,
    m_b_table,
    m_hat,
)
from .numeric import Bits, ceil_neg_log2, floor_neg_log2, le_exp_neg, le_log_slack, pow2


class ZeroMass(ValueError):
    pass


class NoMeasureFound(LookupError):
    pass


class InstanceTooLarge(ValueError):
    pass


class NotFound(RuntimeError):
    pass


class NoShortestProgram(LookupError):
    pass


class LedgerViolation(AssertionError):
    pass


# ------------------------------------------------------------------ probing

def probe(snapshot: UniverseSnapshot, aux: str) -> UniverseSnapshot:
    """A snapshot of the same machine that has ``aux`` probed."""
    if snapshot.has_aux(aux):
        return snapshot
    if snapshot.left_total:
        raise AuxiliaryNotProbed("left-total snapshots cannot probe new auxiliaries")
    cache = snapshot.__dict__.setdefault("_probe_cache", {})
    if aux not in cache:
        cache[aux] = enumerate_universe(snapshot.machine, [aux])
    return cache[aux]


def k_given(x: str, aux: str, snapshot: UniverseSnapshot) -> int | float:
    return k_hat(x, aux, probe(snapshot, aux))


def _measure_of(output: str) -> PrimitiveMeasure | None:
    try:
        q = decode(output, "measure")
    except CodeError:
        return None
    return q if q.is_probability else None


def measure_programs(snapshot: UniverseSnapshot, aux: str = "") -> list[tuple[str, PrimitiveMeasure]]:
    """Programs printing a probability measure, in ξ order (length, then lexicographic)."""
    cache = snapshot.__dict__.setdefault("_measure_cache", {})
    if aux not in cache:
        seen: dict[str, PrimitiveMeasure | None] = {}
        found = []
        for r in probe(snapshot, aux).halting(aux):
            if r.output not in seen:
                seen[r.output] = _measure_of(r.output)
            if seen[r.output] is not None:
                found.append((r.program, seen[r.output]))
        cache[aux] = sorted(found, key=lambda t: (len(t[0]), t[0]))
    return cache[aux]


# ------------------------------------------------------------------ deficiency

@dataclass(frozen=True)
class DeficiencyValue:
    neg_log_mass: int  # floor(-log2 Q(x))
    k: int  # K̂(x | condition)

    @property
    def bits(self) -> int:
        return self.neg_log_mass - self.k


def condition_tape(v: str, context: str | None) -> str:
    """``v`` alone, or ``<v>`` followed by the context tape."""
    return v if context is None else encode_string(v) + context


def deficiency(x: int, q: PrimitiveMeasure, v: str, snapshot: UniverseSnapshot,
               context: str | None = None) -> DeficiencyValue:
    """``floor(-log Q(x)) - K̂(x | v)``; with a context the condition is ``<v>context``."""
    mass = q(x)
    if mass <= 0:
        raise ZeroMass(f"Q({x}) = 0")
    k = k_given(xi(x), condition_tape(v, context), snapshot)
    if k == INF:
        raise Undefined(f"no program prints xi({x}) given the condition")
    return DeficiencyValue(floor_neg_log2(mass), int(k))


def _eps_log(k: int) -> Bits:
    # 2 log2 max(k, 1) = -log2 (1 / max(k, 1)^2)
    k = max(k, 1)
    return Bits(0, Fraction(1, k * k))


def _eps_linear(k: int) -> Bits:
    return Bits(max(k, 0))


EPSILONS: dict[str, Callable[[int], Bits]] = {"2log": _eps_log, "linear": _eps_linear}


@dataclass(frozen=True)
class StochasticityCertificate:
    x: int
    program: str
    measure: PrimitiveMeasure
    k: int
    epsilon: str
    value: Bits

    @property
    def j(self) -> int:
        return len(self.program)

    def to_json(self) -> dict:
        return {"x": self.x, "x_bits": xi(self.x), "j": self.j, "k": self.k, "program": self.program,
                "epsilon": self.epsilon,
                "value": self.value.to_json(),
                "measure": {str(a): str(p) for a, p in self.measure.entries}}


def stochasticity(x: int, epsilon: str, snapshot: UniverseSnapshot,
                  aux: str = "") -> StochasticityCertificate:
    """Minimize ``|v| + eps(d(x|Q,v))`` over snapshot programs ``v`` printing ``<Q>``.

    With a non-empty ``aux`` the programs run on ``aux`` and the deficiency is
    taken given ``<v>aux``.  Ties go to the first program in ξ order.
    """
    eps = EPSILONS[epsilon]
    context = aux if aux else None
    best: StochasticityCertificate | None = None
    for v, q in measure_programs(snapshot, aux):
        if best is not None and Bits(len(v)) >= best.value:
            break  # eps is nonnegative, so longer programs cannot win
        if q(x) <= 0:
            continue
        k = k_given(xi(x), condition_tape(v, context), snapshot)
        if k == INF:
            continue
        d = floor_neg_log2(q(x)) - int(k)
        value = Bits(len(v)) + eps(d)
        if best is None or value < best.value:
            best = StochasticityCertificate(x, v, q, d, epsilon, value)
    if best is None:
        raise NoMeasureFound(f"no snapshot measure explains {x}")
    return best


# ------------------------------------------------------------------ weighted sums

def weighted_sum(f: PrimitiveMap, weight: Callable[[int], Fraction], upto: int | None = None) -> Fraction:
    """``sum over a in Dom(f) of weight(a) 2^-f(a)``, optionally only where ``f(a) <= upto``."""
    return sum((weight(a) * pow2(-b) for a, b in f.entries if upto is None or b <= upto), Fraction(0))


def weighted_level(f: PrimitiveMap, m: PrimitiveMeasure) -> int:
    total = weighted_sum(f, m)
    if total == 0:
        raise ZeroMass("m gives no weight to the domain of f")
    return ceil_neg_log2(total)


def mass_ledger(f: PrimitiveMap, m: PrimitiveMeasure, s: int) -> dict[str, bool]:
    """The three exact facts every covering argument relies on."""
    total = weighted_sum(f, m)
    low = weighted_sum(f, m, upto=s)
    return {
        "sum_at_least_2^-s": total >= pow2(-s),
        "tail_at_most_2^-(s+1)": total - low <= pow2(-s - 1),
        "truncated_at_least_2^-(s+1)": low >= pow2(-s - 1),
    }


def check_ledger(f: PrimitiveMap, m: PrimitiveMeasure, s: int) -> dict[str, bool]:
    ledger = mass_ledger(f, m, s)
    bad = [k for k, ok in ledger.items() if not ok]
    if bad:
        raise LedgerViolation(", ".join(bad))
    return ledger


# ------------------------------------------------------------------ covering families

MAX_SUPPORT = 8
MAX_LEVEL = 3


def map_of_key(key: int) -> PrimitiveMap:
    return decode(xi(key), "map")


def key_of_map(f: PrimitiveMap) -> int:
    return xi_index(encode_map(f))


def condition_on_mass(q: PrimitiveMeasure, m: PrimitiveMeasure, s: int) -> PrimitiveMeasure:
    """Restrict ``Q`` to maps ``g`` whose ``<= s`` part carries ``m``-weight at least ``2^-(s+1)``."""
    kept = {k: p for k, p in q.entries if weighted_sum(map_of_key(k), m, upto=s) >= pow2(-s - 1)}
    total = sum(kept.values(), Fraction(0))
    if total == 0:
        raise ZeroMass("no map in the support of Q carries enough weight")
    return PrimitiveMeasure.from_dict({k: p / total for k, p in kept.items()})


@dataclass(frozen=True)
class CoveringFamily:
    sets: tuple[frozenset, ...]  # A_0 ... A_s
    c: int
    d: int
    s: int

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.sets)

    def misses(self, g: PrimitiveMap) -> bool:
        """True when every level set ``g^-1(n)`` avoids ``A_n``."""
        return all(a not in self.sets[b] for a, b in g.entries if b <= self.s)

    def to_json(self) -> dict:
        return {"c": self.c, "d": self.d, "s": self.s, "sets": [sorted(a) for a in self.sets]}


def family_sizes(s: int, c: int, d: int) -> list[int]:
    return [c * d * 2 ** (s + 1 - n) for n in range(s + 1)]


def miss_probability(q: PrimitiveMeasure, family: CoveringFamily, m: PrimitiveMeasure) -> Fraction:
    """Exact ``E_{g~Q}[1(g, A)]`` with level sets taken inside ``Supp(m)``."""
    support = set(m.support)
    total = Fraction(0)
    for key, p in q.entries:
        g = map_of_key(key)
        restricted = PrimitiveMap.from_dict({a: b for a, b in g.entries if a in support})
        if family.misses(restricted):
            total += p
    return total


def _padding(pool: Iterable[int], count: int) -> list[int]:
    taken = set(pool)
    out: list[int] = []
    a = 0
    while len(out) < count:
        if a not in taken:
            out.append(a)
        a += 1
    return out


def _check_tiny(q: PrimitiveMeasure, m: PrimitiveMeasure, s: int) -> None:
    if len(m.support) > MAX_SUPPORT or len(q.support) > MAX_SUPPORT or s > MAX_LEVEL or s < 0:
        raise InstanceTooLarge(f"|Supp m|={len(m.support)}, |Supp Q|={len(q.support)}, s={s}")


def search_covering_family(q: PrimitiveMeasure, m: PrimitiveMeasure, s: int, c: int, d: int) -> CoveringFamily:
    """First family, in canonical order, with miss probability at most ``exp(-c d)``.

    ``A_n`` has exactly ``c d 2^(s+1-n)`` elements.  Only its intersection
    with ``Supp(m)`` matters, so the candidates for ``A_n`` are the
    largest possible subsets of ``Supp(m)`` in lexicographic order, padded
    with the smallest whole numbers outside the support.  Families are
    ordered lexicographically by ``(A_0, ..., A_s)``.
    """
    _check_tiny(q, m, s)
    if c < 1 or d < 1:
        raise ValueError("c and d must be positive")
    pool = list(m.support)
    sizes = family_sizes(s, c, d)
    choices = []
    for size in sizes:
        inside = min(size, len(pool))
        pad = _padding(pool, size - inside)
        choices.append([frozenset(combo) | frozenset(pad) for combo in itertools.combinations(pool, inside)])
    bound = Fraction(c * d)
    for sets in itertools.product(*choices):
        family = CoveringFamily(tuple(sets), c, d, s)
        if le_exp_neg(miss_probability(q, family, m), bound):
            return family
    raise NotFound("no family meets the bound; the expectation argument guarantees one")


def random_family(m: PrimitiveMeasure, s: int, c: int, d: int, rng: random.Random) -> CoveringFamily:
    """``A_n`` made of ``c d 2^(s+1-n)`` independent draws from ``m`` (duplicates collapse)."""
    support = list(m.support)
    weights = [m(a) for a in support]
    sets = tuple(frozenset(rng.choices(support, weights=weights, k=size)) for size in family_sizes(s, c, d))
    return CoveringFamily(sets, c, d, s)


def sampled_family_successes(q: PrimitiveMeasure, m: PrimitiveMeasure, s: int, c: int, d: int,
                             rng: random.Random, trials: int = 100) -> int:
    """How many of ``trials`` random families meet the ``exp(-c d)`` bound."""
    bound = Fraction(c * d)
    return sum(le_exp_neg(miss_probability(q, random_family(m, s, c, d, rng), m), bound) for _ in range(trials))


# ------------------------------------------------------------------ verdicts

HOLDS = "holds"
VIOLATION = "violation"
INCONCLUSIVE = "proxy-inconclusive"


def verdict(lhs: Bits, rhs: Bits, scale: int, const: int, proxy_reliable: bool) -> str:
    """Three-way outcome of ``lhs <= rhs + scale log(rhs + 2) + const``.

    A failed comparison only counts as a violation when every estimate it
    used was a genuine snapshot value rather than a fallback.
    """
    if not lhs.is_inf and le_log_slack(lhs, rhs, scale, const):
        return HOLDS
    return VIOLATION if proxy_reliable else INCONCLUSIVE


def _bits(k: int | float) -> Bits:
    return Bits.infinite() if k == INF else Bits(int(k))


def _fraction_table(d: dict) -> dict[str, str]:
    return {str(k): str(v) for k, v in d.items()}


# ------------------------------------------------------------------ stochasticity bound

def covering_sweep(f: PrimitiveMap, q: PrimitiveMeasure, m: PrimitiveMeasure, s: int, d: int,
                   rng: random.Random, c_values: Iterable[int] = range(1, 9)) -> dict:
    """Search families for each ``c``; the workable ``c`` is the first whose family catches ``f``."""
    qc = condition_on_mass(q, m, s)
    key = key_of_map(f)
    if qc(key) <= 0:
        raise LedgerViolation("f lost its weight when Q was conditioned")
    support = set(m.support)
    f_inside = PrimitiveMap.from_dict({a: b for a, b in f.entries if a in support})
    rows = []
    workable = None
    for c in c_values:
        family = search_covering_family(qc, m, s, c, d)
        miss = miss_probability(qc, family, m)
        bound_ok = le_exp_neg(miss, Fraction(c * d))
        caught = not family.misses(f_inside)
        rows.append({"c": c, "miss_probability": str(miss), "bound_ok": bound_ok, "catches_f": caught,
                     "sizes": list(family.sizes)})
        if caught and workable is None:
            workable = c
    sampled = sampled_family_successes(qc, m, s, 1, d, rng)
    return {"d": d, "support": len(qc.support), "rows": rows, "workable_c": workable,
            "sampled_successes_c1": sampled}


def theorem8_harness(f: PrimitiveMap, m: PrimitiveMeasure, snapshot: UniverseSnapshot, slack,
                     rng: random.Random | None = None) -> dict:
    """Compare ``min_a f(a) + K̂(a|m)`` with ``-log sum m(a) 2^-f(a) + Ks(f|m)``."""
    rng = rng or random.Random(0)
    total = weighted_sum(f, m)
    s = weighted_level(f, m)
    ledger = check_ledger(f, m, s)
    m_tape = encode_measure(m)
    terms = {a: b + k_given(xi(a), m_tape, snapshot) for a, b in f.entries}
    lhs_val = min(terms.values())
    lhs = _bits(lhs_val)
    report = {
        "f": _fraction_table(f.as_dict()), "m": _fraction_table(m.as_dict()),
        "sum": str(total), "s": s, "ledger": ledger,
        "lhs": lhs.to_json(), "argmin": min(terms, key=lambda a: (terms[a], a)) if lhs_val != INF else None,
    }
    report["argmin_bits"] = None if report["argmin"] is None else xi(report["argmin"])
    try:
        cert = stochasticity(key_of_map(f), "2log", snapshot, aux=m_tape)
    except NoMeasureFound:
        report.update(rhs=None, stochasticity=None, covering=None, verdict=INCONCLUSIVE)
        return report
    rhs = Bits.neg_log(total) + cert.value
    report["stochasticity"] = cert.to_json()
    report["rhs"] = rhs.to_json()
    report["verdict"] = verdict(lhs, rhs, slack["c_stoch_scale"], slack["c_stoch"], lhs_val != INF)
    try:
        report["covering"] = covering_sweep(f, cert.measure, m, s, max(cert.k, 1), rng)
    except InstanceTooLarge as exc:
        report["covering"] = {"skipped": str(exc)}
    return report


# ------------------------------------------------------------------ info proxy

def info_proxy(x: str, snapshot: UniverseSnapshot, halting: HaltingApprox) -> tuple[int, bool]:
    """``K̂(x) - K̂(x|H)`` with both terms capped by the literal program.

    The flag is False when a cap was used, i.e. the value is only a bound.
    """
    cap = len(lit(x))
    k0 = k_hat(x, "", snapshot)
    k1 = k_hat(x, halting.bits, snapshot)
    reliable = k0 != INF and k1 != INF
    return int(min(k0, cap) - min(k1, cap)), reliable


# ------------------------------------------------------------------ border string

def _string_of(value: int, length: int) -> str:
    return format(value, f"0{length}b") if length else ""


def border_level(f: PrimitiveMap, z: str, snapshot: UniverseSnapshot) -> int | None:
    """``ceil(-log sum m_z(a) 2^-f(a))`` for total ``z``; None when the sum is 0."""
    table = m_b_table(z, snapshot)
    total = weighted_sum(f, lambda a: table.get(xi(a), Fraction(0)))
    return None if total == 0 else ceil_neg_log2(total)


def _below(f: PrimitiveMap, z: str, s: int, snapshot: UniverseSnapshot) -> bool:
    lvl = border_level(f, z, snapshot)
    return lvl is not None and lvl < s


def shortest_total_search(f: PrimitiveMap, s: int, snapshot: UniverseSnapshot, max_len: int) -> str:
    """Shortest total ``b`` with ``S(b) < s`` by bisection at each length.

    On a left-total snapshot the total strings of a given length form an
    initial run in lexicographic order, and ``S`` does not increase along it.
    """
    for length in range(max_len + 1):
        lo, hi = 0, 2 ** length  # count total strings
        while lo < hi:
            mid = (lo + hi) // 2
            if is_total(_string_of(mid, length), snapshot):
                lo = mid + 1
            else:
                hi = mid
        n_total = lo
        if n_total == 0 or not _below(f, _string_of(n_total - 1, length), s, snapshot):
            continue
        lo, hi = 0, n_total - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if _below(f, _string_of(mid, length), s, snapshot):
                hi = mid
            else:
                lo = mid + 1
        return _string_of(lo, length)
    raise NotFound("no total string reaches the level")


def scan_at_length(f: PrimitiveMap, s: int, snapshot: UniverseSnapshot, length: int) -> str:
    """First ``b'`` of the given length, in lexicographic order, that is total with ``S(b') < s``."""
    for value in range(2 ** length):
        z = _string_of(value, length)
        if is_total(z, snapshot) and _below(f, z, s, snapshot):
            return z
    raise NotFound(f"no string of length {length} qualifies")


def theorem9_harness(f: PrimitiveMap, remapped: UniverseSnapshot, halting: HaltingApprox, slack) -> dict:
    """Both sides of the halting-information bound plus the border string ``b``."""
    if not remapped.left_total:
        raise ValueError("needs a left-total snapshot")

    def weight(a: int) -> Fraction:
        return m_hat(xi(a), "", remapped)

    total = weighted_sum(f, weight)
    if total == 0:
        raise ZeroMass("the snapshot gives no weight to Dom(f)")
    s = 1 + ceil_neg_log2(total)
    max_len = max(len(r.program) for r in remapped.halting("")) + 1
    b = shortest_total_search(f, s, remapped, max_len)
    b_scan = scan_at_length(f, s, remapped, len(b))
    parent_total = bool(b) and is_total(b[:-1], remapped)
    terms = {a: v + k_hat(xi(a), "", remapped) for a, v in f.entries}
    lhs_val = min(terms.values())
    info, reliable = info_proxy(encode_map(f), remapped, halting)
    rhs = Bits.neg_log(total) + Bits(info)
    return {
        "f": _fraction_table(f.as_dict()), "sum": str(total), "s": s,
        "b": b, "b_scan": b_scan, "routes_agree": b == b_scan,
        "S_b": border_level(f, b, remapped), "parent_total": parent_total,
        "lhs": _bits(lhs_val).to_json(), "info_proxy": info, "proxy_reliable": reliable,
        "rhs": rhs.to_json(),
        "verdict": verdict(_bits(lhs_val), rhs, slack["c_border_scale"], slack["c_border"], reliable and lhs_val != INF),
    }


# ------------------------------------------------------------------ shortest total prefix

def prefix_measure(v: str, snapshot: UniverseSnapshot) -> dict[str, Fraction]:
    """``Q(a) = sum over w of 2^-|w| [U(vw) = a]`` read off the halting programs."""
    q: dict[str, Fraction] = {}
    for r in snapshot.halting(""):
        if r.program.startswith(v):
            q[r.output] = q.get(r.output, Fraction(0)) + pow2(len(v) - len(r.program))
    return q


def lemma10_harness(x: str, remapped: UniverseSnapshot, halting: HaltingApprox | None, slack=None) -> dict:
    """Rebuild the measure of the shortest total prefix of ``x*`` and check its mass on ``x``."""
    if not remapped.left_total:
        raise ValueError("needs a left-total snapshot")
    xstar = remapped.shortest_program(x)
    if xstar is None:
        raise NoShortestProgram(f"no halting program prints {x!r}")
    v = next(xstar[:k] for k in range(len(xstar) + 1) if is_total(xstar[:k], remapped))
    q = prefix_measure(v, remapped)
    floor = pow2(len(v) - len(xstar))
    report = {
        "x": x, "xstar": xstar, "v": v, "support": len(q), "q_total": str(sum(q.values())),
        "q_x": str(q[x]), "floor": str(floor), "bound_holds": q[x] >= floor,
        "measure": _fraction_table(dict(sorted(q.items()))),
        # two-part description: v, then the index of x under Q
        "ks_upper": len(v) + floor_neg_log2(q[x]),
    }
    if halting is not None and remapped.has_aux(halting.bits):
        info, reliable = info_proxy(x, remapped, halting)
        report.update(info_proxy=info, proxy_reliable=reliable)
        if slack is not None:
            report["verdict"] = verdict(Bits(report["ks_upper"]), Bits(info), 1, slack["c_prefix"], reliable)
    return report
