from __future__ import annotations

import random
from fractions import Fraction
from itertools import islice
from math import gcd

import numpy as np
import pytest

from aitlab.codec import decode
from aitlab.entropy import (
    Catalog,
    CatalogNotClosed,
    EmptyCatalog,
    Entry,
    chain_violations,
    enc_stream,
    entropy_report,
    hc,
    hg,
    hg_via_mu,
    hv,
    transform_info_excesses,
    dominance_exponents,
    pair_order,
    signature,
    state_info_with_halting,
    transform_enc,
    unit_rationals,
)
from aitlab.machine import INF
from aitlab.quantum import (
    PureState,
    cayley_unitary,
    permutation_unitary,
    random_approximate_state,
    random_primitive_state,
    random_skew_hermitian,
)


def vec(psi: PureState) -> np.ndarray:
    v = np.array([complex(a) for a in psi.amps])
    return v / np.linalg.norm(v)


def float_fid(a: PureState, b: PureState) -> float:
    return abs(np.vdot(vec(a), vec(b))) ** 2


def test_unit_rationals_order():
    first = list(islice(unit_rationals(), 8))
    assert first == [Fraction(1), Fraction(1, 2), Fraction(1, 3), Fraction(2, 3),
                     Fraction(1, 4), Fraction(2, 5), Fraction(3, 5), Fraction(3, 4)]
    seen = list(islice(unit_rationals(), 2 ** 10))
    assert len(set(seen)) == len(seen)
    # every reduced fraction with denominator <= 8 appears early
    wanted = {Fraction(p, q) for q in range(1, 9) for p in range(1, q + 1) if gcd(p, q) == 1}
    assert wanted <= set(seen)


def test_pair_order_is_diagonal():
    assert list(islice(pair_order(5), 6)) == [(0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0)]
    pairs = list(islice(pair_order(3), 60))
    assert all(i < 3 for i, _ in pairs)
    assert len(set(pairs)) == len(pairs)
    assert {(i, j) for i in range(3) for j in range(5)} <= set(pairs)


def test_catalog_weights(lab):
    cat = lab.catalog
    assert all(e.k < INF and e.weight > 0 for e in cat.states + cat.circuits)
    assert 0 < cat.total_weight() <= 1
    assert cat.mu.trace == cat.total_weight()
    text = cat.to_text()
    assert text.splitlines()[0].startswith("catalog\t2\t")
    assert len(text.splitlines()) == 1 + len(cat.states) + len(cat.circuits)


def test_hg_two_routes_agree_exactly(lab):
    rng = random.Random(3)
    states = [e.obj for e in lab.catalog.states]
    states += [random_primitive_state(2, rng) for _ in range(10)]
    states += [random_approximate_state(2, rng) for _ in range(5)]
    for psi in states:
        assert hg(psi, lab.catalog) == hg_via_mu(psi, lab.catalog)


def test_hg_matches_float_oracle(lab):
    rng = random.Random(4)
    for _ in range(10):
        psi = random_primitive_state(2, rng)
        ref = -np.log2(sum(float(e.weight) * float_fid(psi, e.obj) for e in lab.catalog.states))
        assert abs(float(hg(psi, lab.catalog)) - ref) < 1e-9


def test_hv_matches_brute_minimum(lab):
    rng = random.Random(5)
    for _ in range(10):
        psi = random_primitive_state(2, rng)
        value, arg = hv(psi, lab.catalog)
        ref = min(e.k - np.log2(f) for e in lab.catalog.states if (f := float_fid(psi, e.obj)) > 0)
        assert abs(float(value) - ref) < 1e-9
        assert float(value) == pytest.approx(lab.catalog.states[arg].k - np.log2(float_fid(psi, lab.catalog.states[arg].obj)))


def test_catalog_member_entropies(lab):
    cat = lab.catalog
    preps = {e.label: e for e in cat.circuits}
    for e in cat.states:
        assert hv(e.obj, cat)[0] <= e.k
        # the preparation circuit reproduces the state with no qubits sent
        assert hc(e.obj, cat)[0] <= preps[f"prep-{e.label}"].k


def test_hc_matches_block_norm_oracle(lab):
    rng = random.Random(6)
    for _ in range(6):
        psi = random_primitive_state(2, rng)
        best = np.inf
        for e in lab.catalog.circuits:
            c = e.obj
            v = np.array([[complex(x) for x in row] for row in c.unitary.rows])
            back = v.conj().T @ vec(psi)
            overlap = sum(abs(back[a << (2 - c.m)]) ** 2 for a in range(2 ** c.m))
            if overlap > 0:
                best = min(best, e.k + c.m - np.log2(overlap))
        assert abs(float(hc(psi, lab.catalog)[0]) - best) < 1e-9


def test_chain_on_catalog_states(lab, slack):
    for e in lab.catalog.states:
        assert chain_violations(entropy_report(e.label, e.obj, lab.catalog), slack) == []


def test_empty_catalog_rejected():
    empty = Catalog(1, [], [])
    with pytest.raises(EmptyCatalog):
        hg(PureState.basis(1), empty)
    with pytest.raises(EmptyCatalog):
        hc(PureState.basis(1), empty)


def basis_catalog(n: int = 2) -> Catalog:
    entries = [Entry(f"b{i}", PureState.basis(n, i), PureState.basis(n, i).code(), 5, Fraction(1, 8))
               for i in range(2 ** n)]
    return Catalog(n, entries, [])


def test_enc_stream_bits(lab):
    rng = random.Random(77)
    psi = random_primitive_state(2, rng)
    stream = enc_stream(psi, lab.catalog)
    for i, q, b in stream.tuples(200):
        assert b == int(fidelity_ge(psi, lab.catalog.states[i].obj, q))
    for word in stream.encoded(20):
        items = decode(word, "tuple")
        assert len(items) == 3 and items[2] in ("0", "1")


def fidelity_ge(a, b, q):
    f = float_fid(a, b)
    assert abs(f - float(q)) > 1e-12  # random states never sit on a threshold
    return f >= float(q)


def test_transformed_stream_matches_direct_stream():
    cat = basis_catalog()
    rng = random.Random(8)
    psi = random_primitive_state(2, rng)
    u = permutation_unitary([2, 0, 3, 1])
    moved = PureState(2, u.apply(psi.amps))
    direct = enc_stream(moved, cat)
    via = transform_enc(u, enc_stream(psi, cat))
    assert [via.bit(i, j) for i, j in islice(pair_order(4), 300)] == [direct.bit(i, j) for i, j in islice(pair_order(4), 300)]


def test_transform_outside_catalog():
    cat = basis_catalog()
    rng = random.Random(9)
    psi = random_primitive_state(2, rng)
    u = cayley_unitary(random_skew_hermitian(4, rng))
    via = transform_enc(u, enc_stream(psi, cat))
    with pytest.raises(CatalogNotClosed):
        via.bit(0, 1)
    lazy = transform_enc(u, enc_stream(psi, cat), on_demand=True)
    direct = enc_stream(PureState(2, u.apply(psi.amps)), cat)
    assert [lazy.bit(i, 1) for i in range(4)] == [direct.bit(i, 1) for i in range(4)]


def test_catalog_dominance(lab, slack):
    exps = dominance_exponents(lab.catalog)
    assert all(e is not None for e in exps)
    assert max(exps) <= slack["c_lemma6"]


def test_exotic_state_carries_halting_bits(lab, slack):
    count = lab.config.signature_states
    psi = lab.exotic_state
    assert signature(psi, lab.catalog, count) == lab.halting.bits[:count]
    assert state_info_with_halting(psi, lab.catalog, lab.snapshot, lab.halting, count) >= slack["c_exotic"]
    for e in lab.catalog.states:
        assert state_info_with_halting(e.obj, lab.catalog, lab.snapshot, lab.halting, count) < slack["c_exotic"]


def test_transform_info_excess(lab, slack):
    rng = random.Random(10)
    states = [(f"s{i}", random_primitive_state(2, rng)) for i in range(5)]
    rows = transform_info_excesses(states, lab.catalog, lab.snapshot, lab.halting, lab.config.signature_states)
    assert rows
    assert max(e for _, _, e in rows) <= slack["c_transform"]
