from __future__ import annotations

import random
from fractions import Fraction

import pytest

from aitlab.machine import (
    HaltRecord,
    NotTotal,
    ReferenceMachine,
    UniverseSnapshot,
    border_prefixes,
    enumerate_universe,
    is_total,
    layout,
    left_of,
    left_total_violations,
    left_totalize,
    m_b,
    m_b_table,
    m_hat,
    omega_bits,
)
from aitlab.machine.lefttotal import dyadic_cover, dyadic_interval

# Seven halting programs laid out left to right; the dyadic picture of a
# left-total machine with x* = 0110010 and its shortest total prefix 01100.
FIG_PROGRAMS = ["00", "010", "011000", "0110010", "01100110", "011001110", "011001111"]


def hand_snapshot(programs, outputs=None, steps=None):
    outputs = outputs or [format(i, "b") for i in range(len(programs))]
    steps = steps or list(range(1, len(programs) + 1))
    recs = tuple(HaltRecord(p, 0, o, s) for p, o, s in zip(programs, outputs, steps))
    return UniverseSnapshot(ReferenceMachine(lmax=max(map(len, programs))), ("",), recs)


def test_left_of():
    assert left_of("0", "1")
    assert left_of("0110", "0111")
    assert not left_of("1", "0")
    assert not left_of("01", "011")
    assert not left_of("011", "01")


def test_dyadic_cover_small_cases():
    assert dyadic_cover(Fraction(0), Fraction(1, 8)) == ["000"]
    assert dyadic_cover(Fraction(1, 8), Fraction(1, 4)) == ["001"]
    # an unaligned interval of width 1/4 splits into two eighths
    assert dyadic_cover(Fraction(1, 8), Fraction(3, 8)) == ["001", "010"]
    assert dyadic_cover(Fraction(0), Fraction(1)) == [""]


def test_single_program_layout():
    snap = hand_snapshot(["101"])
    (place,) = layout(snap)
    assert (place.lo, place.hi) == (0, Fraction(1, 8))
    remapped = left_totalize(snap)
    assert [r.program for r in remapped.records] == ["000"]
    assert remapped.left_total
    assert remapped.omega_lower == Fraction(1, 8)


def test_seven_program_universe_layout_is_fixed_point():
    snap = hand_snapshot(FIG_PROGRAMS)
    assert snap.omega_lower == Fraction(13, 32)
    places = layout(snap)
    assert [p.source for p in places] == FIG_PROGRAMS
    assert [p.programs for p in places] == [(p,) for p in FIG_PROGRAMS]
    lo = Fraction(0)
    for p in places:
        assert p.lo == lo and (p.lo, p.hi) == dyadic_interval(p.source)
        lo = p.hi
    remapped = left_totalize(snap)
    assert sorted(r.program for r in remapped.records) == sorted(FIG_PROGRAMS)
    assert left_total_violations(remapped) == []


def test_seven_program_universe_totality():
    snap = left_totalize(hand_snapshot(FIG_PROGRAMS))
    xstar = "0110010"
    prefixes = [xstar[:k] for k in range(len(xstar) + 1)]
    total = [p for p in prefixes if is_total(p, snap)]
    assert total[0] == "01100"
    assert not is_total("0110", snap)
    # the non-total parent of the shortest total prefix lies on the binary expansion of omega
    assert omega_bits(snap, 5) == "01101"
    assert omega_bits(snap, 4).startswith("0110")
    for b in border_prefixes(snap):
        assert omega_bits(snap, len(b) - 1) == b[:-1]


def test_convergence_order_drives_layout():
    # the slow short program goes to the right of the fast long one
    snap = hand_snapshot(["1", "0101"], steps=[9, 2])
    places = layout(snap)
    assert [p.source for p in places] == ["0101", "1"]
    assert places[0].programs == ("0000",)
    assert places[1].programs == ("0001", "001", "01", "1000")
    remapped = left_totalize(snap)
    assert remapped.omega_lower == snap.omega_lower
    assert remapped.output_table()["0"][1] == Fraction(1, 2)


def test_total_when_everything_halts():
    snap = hand_snapshot(["0", "1"])
    assert snap.omega_lower == 1
    assert is_total("", snap)
    assert m_b_table("", snap) == {x: e[1] for x, e in snap.output_table().items()}
    assert m_b("0", "1", snap) == Fraction(1, 2)
    assert sum(m_b_table("1", snap).values()) == 1


def test_m_b_requires_totality():
    snap = left_totalize(hand_snapshot(FIG_PROGRAMS))
    with pytest.raises(NotTotal):
        m_b("0", "0110", snap)
    with pytest.raises(NotTotal):
        m_b("0", "", snap)


def brute_m_b(x, b, programs, outputs):
    tot = Fraction(0)
    for p, o in zip(programs, outputs):
        if o != x:
            continue
        split = next((i for i in range(min(len(p), len(b))) if p[i] != b[i]), None)
        if (split is not None and p[split] == "0") or p[: len(b)] == b:
            tot += Fraction(1, 2 ** len(p))
    return tot


@pytest.fixture(scope="module")
def six_bit_remapped():
    snap = enumerate_universe(ReferenceMachine(lmax=11, step_limit=40))
    return snap, left_totalize(snap)


def test_remap_preserves_mass_and_outputs(six_bit_remapped):
    snap, remapped = six_bit_remapped
    assert remapped.omega_lower == snap.omega_lower
    for x, (_, mass, _) in snap.output_table().items():
        assert m_hat(x, "", remapped) == mass
    for place in layout(snap):
        for q in place.programs:
            lo, hi = dyadic_interval(q)
            plo, phi = dyadic_interval(q[:-1])
            assert place.lo <= lo and hi <= place.hi
            assert not (place.lo <= plo and phi <= place.hi)


def test_remapped_is_left_total(six_bit_remapped):
    snap, remapped = six_bit_remapped
    assert left_total_violations(remapped) == []
    assert left_total_violations(snap)  # the raw machine is not left-total


def test_left_total_by_pairwise_scan(six_bit_remapped):
    _, remapped = six_bit_remapped
    programs = [r.program for r in remapped.halting("")]
    maxlen = max(map(len, programs))
    rng = random.Random(1)
    for _ in range(3000):
        y = rng.choice(programs)
        x = "".join(rng.choice("01") for _ in range(rng.randrange(1, maxlen + 1)))
        if left_of(x, y):
            assert is_total(x, remapped)


def test_m_b_brute_force(six_bit_remapped):
    _, remapped = six_bit_remapped
    programs = [r.program for r in remapped.halting("")]
    outputs = [r.output for r in remapped.halting("")]
    borders = border_prefixes(remapped)
    assert borders
    for b in borders:
        table = m_b_table(b, remapped)
        for x in set(outputs):
            val = m_b(x, b, remapped)
            assert val == brute_m_b(x, b, programs, outputs)
            assert val == table.get(x, 0)
            assert val <= m_hat(x, "", remapped)
    # longer total strings see fewer programs
    for b in borders:
        ext = b + "1"
        if is_total(ext, remapped):
            for x in set(outputs):
                assert m_b(x, b, remapped) >= m_b(x, ext, remapped)


def test_borders_follow_omega(six_bit_remapped):
    _, remapped = six_bit_remapped
    for b in border_prefixes(remapped):
        assert is_total(b, remapped) and not is_total(b[:-1], remapped)
        assert omega_bits(remapped, len(b) - 1) == b[:-1]
