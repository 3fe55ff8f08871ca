"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``criterion N: PASS`` or ``criterion N: FAIL`` line
(shown even when output capture is on) and fails normally on any violation.
Frozen constants come from the packaged slack table; nothing here loosens them.
"""

from __future__ import annotations

import random
import time
from contextlib import contextmanager
from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest

from aitlab.algstats import VIOLATION, check_ledger, lemma10_harness, theorem8_harness, theorem9_harness
from aitlab.cli import main
from aitlab.codec import decode, encode_string, is_prefix_free, kraft_sum, xi
from aitlab.entropy import chain_violations, entropy_report, hg_via_mu, dominance_exponents
from aitlab.machine import (
    HaltRecord,
    InvalidProgram,
    ReferenceMachine,
    UniverseSnapshot,
    build_halting,
    coding_constant,
    enumerate_universe,
    is_total,
    k_hat,
    left_of,
    left_total_violations,
    left_totalize,
    m_hat,
)
from aitlab.protocol import noncompression_gap
from aitlab.quantum import (
    Circuit,
    PureState,
    adjoint,
    best_input_overlap,
    fidelity,
    identity,
    matmul,
    pad_and_apply,
    random_primitive_state,
    random_unitary,
    synthesize_preparation,
)
from test_codec import ENCODERS, _random_value
from test_lefttotal import FIG_PROGRAMS
from test_quantum import as_np, search_overlap, unit_phase


@contextmanager
def criterion(capsys, number: int, title: str, limit: float):
    start = time.perf_counter()
    status = "FAIL"
    try:
        yield
        elapsed = time.perf_counter() - start
        assert elapsed < limit, f"took {elapsed:.1f}s, limit {limit}s"
        status = "PASS"
    finally:
        elapsed = time.perf_counter() - start
        with capsys.disabled():
            print(f"\ncriterion {number}: {status}  {title}  ({elapsed:.1f}s)")


def test_criterion_1_codecs(capsys):
    with criterion(capsys, 1, "codec round-trips, Kraft sums, worked examples", 10):
        for kind, enc in sorted(ENCODERS.items()):
            rng = random.Random(f"accept-{kind}")
            codes = set()
            for _ in range(10_000):
                v = _random_value(rng, kind)
                c = enc(v)
                assert enc(decode(c, kind)) == c
                codes.add(c)
            assert is_prefix_free(codes)
            assert kraft_sum(codes) <= 1
        assert encode_string("11111") == "11011011111"
        assert xi(6) == "000"


def test_criterion_2_machine(capsys, slack):
    with criterion(capsys, 2, "prefix-free domain, budget monotonicity, coding constant", 120):
        machine = ReferenceMachine(lmax=14, step_limit=10_000)
        snap = enumerate_universe(machine)
        programs = sorted(r.program for r in snap.halting(""))
        assert programs
        # sorted order puts any prefix directly before one of its extensions
        assert all(not b.startswith(a) for a, b in zip(programs, programs[1:]))
        for p in programs:
            for tail in ("0", "1"):
                with pytest.raises(InvalidProgram):
                    machine.run(p + tail)

        small = enumerate_universe(ReferenceMachine(lmax=12, step_limit=1_000))
        assert {(r.program, r.output) for r in small.records} <= {(r.program, r.output) for r in snap.records}
        assert small.omega_lower <= snap.omega_lower
        for x in small.output_table():
            assert m_hat(x, "", small) <= m_hat(x, "", snap)
            assert k_hat(x, "", snap) <= k_hat(x, "", small)
        hs, hb = build_halting(small), build_halting(snap, 12)
        assert all(a <= b for a, b in zip(hs.bits, hb.bits))

        assert coding_constant(snap) <= slack["c_machine"]


def test_criterion_3_left_total(capsys, lab):
    with criterion(capsys, 3, "left-total remap and hand-computed fixtures", 30):
        remapped = lab.remapped
        assert left_total_violations(remapped) == []
        programs = sorted(r.program for r in remapped.halting(""))
        for x, y in combinations(programs, 2):
            if left_of(x, y):
                assert is_total(x, remapped)
            elif left_of(y, x):
                assert is_total(y, remapped)

        recs = tuple(HaltRecord(p, 0, xi(i), i + 1) for i, p in enumerate(FIG_PROGRAMS))
        fig = UniverseSnapshot(ReferenceMachine(lmax=9), ("",), recs)
        assert fig.omega_lower == Fraction(13, 32)
        fixed = left_totalize(fig)
        assert sorted(r.program for r in fixed.records) == sorted(FIG_PROGRAMS)
        assert left_total_violations(fixed) == []
        r = lemma10_harness(xi(3), fixed, None)
        assert (r["xstar"], r["v"], r["support"]) == ("0110010", "01100", 5)
        assert Fraction(r["q_x"]) == Fraction(1, 4)


def assert_unitary(rows):
    eye = identity(len(rows))
    assert matmul(adjoint(rows), rows) == eye and matmul(rows, adjoint(rows)) == eye


def test_criterion_4_quantum(capsys, lab, slack):
    with criterion(capsys, 4, "unitarity, phase invariance, overlap oracle, preparation, dominance", 180):
        rng = random.Random(41)
        for n in (1, 2, 3):
            for _ in range(10):
                assert_unitary(random_unitary(n, rng).rows)
        for e in lab.catalog.circuits:
            assert_unitary(e.obj.unitary.rows)

        for _ in range(1000):
            psi, phi = random_primitive_state(2, rng), random_primitive_state(2, rng)
            z = unit_phase(rng)
            assert fidelity(psi, PureState(2, tuple(z * a for a in phi.amps))) == fidelity(psi, phi)

        nrng = np.random.default_rng(42)
        for i in range(50):
            u, psi, m = random_unitary(2, rng), random_primitive_state(2, rng), i % 3
            value, witness = best_input_overlap(Circuit(u, m), psi)
            vnp = np.array([[complex(x) for x in row] for row in u.rows])
            assert abs(search_overlap(vnp, as_np(psi), m, nrng, samples=1_000) - float(value)) < 1e-6
            assert fidelity(pad_and_apply(Circuit(u, m), witness), psi) == value

        for i in range(100):
            theta = random_primitive_state(1 + i % 3, rng)
            circ = synthesize_preparation(theta)
            assert_unitary(circ.unitary.rows)
            assert fidelity(pad_and_apply(circ, PureState.basis(0)), theta) == 1

        exps = dominance_exponents(lab.catalog)
        assert all(e is not None for e in exps) and max(exps) <= slack["c_lemma6"]


def test_criterion_5_entropy_chain(capsys, lab, slack):
    with criterion(capsys, 5, "entropy chain over the state population", 300):
        population = lab.entropy_population()
        assert len(population) >= 200
        kinds = {psi.kind for _, psi in population}
        assert kinds == {"primitive", "approximate"}
        bad = []
        for label, psi in population:
            rep = entropy_report(label, psi, lab.catalog)
            bad += [(label, v) for v in chain_violations(rep, slack)]
            assert rep.hg == hg_via_mu(psi, lab.catalog), label
        assert bad == []


def test_criterion_6_gap(capsys, lab, slack):
    with criterion(capsys, 6, "classical versus mixed transmission gap", 300):
        rows = noncompression_gap(lab.gap_population(), lab.snapshot, lab.catalog, lab.halting, slack,
                                  lab.config.signature_states)
        ordinary = [r for r in rows if r.flag != "exotic"]
        assert len(ordinary) >= 100
        assert [r.label for r in ordinary if r.flag == "violation" or not r.within] == []
        assert [r.label for r in rows if r.mixed.total > r.classical.total] == []
        planted = next(r for r in rows if r.label == "planted-exotic")
        assert planted.flag == "exotic"


def test_criterion_7_harnesses(capsys, lab, slack):
    with criterion(capsys, 7, "stochasticity and border-string harnesses", 300):
        instances = lab.stats_plan.instances
        assert len(instances) >= 20
        rng = random.Random(lab.config.seed)
        for inst in instances:
            r8 = theorem8_harness(inst.f, inst.m, lab.stats_snapshot, slack, rng)
            assert r8["verdict"] != VIOLATION, inst.label
            assert all(r8["ledger"].values())
            assert all(check_ledger(inst.f, inst.m, r8["s"]).values())
            assert r8["covering"] is not None, inst.label
            assert all(row["bound_ok"] for row in r8["covering"]["rows"])
            r9 = theorem9_harness(inst.f, lab.remapped, lab.halting, slack)
            assert r9["routes_agree"] and r9["b"] == r9["b_scan"], inst.label
            assert r9["verdict"] != VIOLATION, inst.label


REPORTS = {
    "universe": ["universe.txt", "universe-left-total.txt", "halting.txt", "universe.json"],
    "catalog": ["catalog.txt"],
    "entropy": ["entropy.json"],
    "transmit": ["gap.csv"],
    "algstats": ["algstats.json"],
}


def test_criterion_8_determinism(capsys, tmp_path):
    with criterion(capsys, 8, "byte-identical reports across runs and worker counts", 600):
        outputs = {}
        for run, workers in (("first", 1), ("second", 1), ("parallel", 4)):
            out = tmp_path / run
            for command in REPORTS:
                assert main([command, "--workers", str(workers), "--out", str(out)]) == 0
            outputs[run] = {name: (out / name).read_bytes() for names in REPORTS.values() for name in names}
        assert outputs["first"] == outputs["second"] == outputs["parallel"]
