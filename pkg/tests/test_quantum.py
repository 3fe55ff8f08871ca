from __future__ import annotations

import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aitlab.quantum import (
    CQ,
    Circuit,
    DecodeFailure,
    DimensionMismatch,
    NotNormalized,
    NotUnitary,
    PrimitiveUnitary,
    PureState,
    SemiDensityMatrix,
    WeightOverflow,
    adjoint,
    best_input_overlap,
    cayley_unitary,
    decode_circuit,
    decode_state,
    diagonal_unitary,
    fidelity,
    identity,
    is_psd,
    matmul,
    mu_aggregate,
    pad_and_apply,
    permutation_unitary,
    psd_dominates,
    random_approximate_state,
    random_primitive_state,
    random_skew_hermitian,
    random_unitary,
    sphere_point,
    synthesize_preparation,
)

F = Fraction


def as_np(psi: PureState) -> np.ndarray:
    v = np.array([complex(a) for a in psi.amps])
    return v / np.linalg.norm(v)


def unit_phase(rng: random.Random) -> CQ:
    x, y = sphere_point([F(rng.randint(-9, 9), rng.randint(1, 9))])
    return CQ(x, y)


def test_fidelity_examples():
    a = PureState.make([F(3, 5), F(4, 5)])
    e0 = PureState.basis(1, 0)
    assert fidelity(a, a) == 1
    assert fidelity(e0, PureState.basis(1, 1)) == 0
    assert fidelity(a, e0) == F(9, 25)
    with pytest.raises(DimensionMismatch):
        fidelity(a, PureState.basis(2))


def test_state_validation():
    with pytest.raises(NotNormalized):
        PureState.make([F(1, 2), F(1, 2)], "primitive")
    with pytest.raises(DimensionMismatch):
        PureState(2, (CQ(1),))


def test_fidelity_phase_invariance_and_symmetry():
    rng = random.Random(11)
    for _ in range(1000):
        psi = random_primitive_state(2, rng)
        phi = random_primitive_state(2, rng)
        z = unit_phase(rng)
        rotated = PureState(2, tuple(z * a for a in phi.amps))
        f = fidelity(psi, phi)
        assert fidelity(psi, rotated) == f
        assert fidelity(phi, psi) == f
        assert 0 <= f <= 1


def test_approximate_states_are_rays():
    rng = random.Random(4)
    for _ in range(50):
        a = random_approximate_state(2, rng)
        assert a.kind == "approximate"
        assert abs(a.norm2 - 1) <= F(1, 2 ** 64)
        assert fidelity(a, a) == 1
        b = random_primitive_state(2, rng)
        assert abs(float(fidelity(a, b)) - abs(np.vdot(as_np(a), as_np(b))) ** 2) < 1e-12


def test_generated_unitaries_are_exact():
    rng = random.Random(5)
    for n in (1, 2, 3):
        for _ in range(8):
            u = random_unitary(n, rng)
            assert matmul(adjoint(u.rows), u.rows) == identity(2 ** n)
            assert matmul(u.rows, adjoint(u.rows)) == identity(2 ** n)
    assert permutation_unitary([1, 0]).rows == ((CQ(0), CQ(1)), (CQ(1), CQ(0)))
    diagonal_unitary([1, CQ(0, 1), -1, CQ(F(3, 5), F(4, 5))])
    cayley_unitary(random_skew_hermitian(4, rng))


def test_non_unitary_rejected():
    with pytest.raises(NotUnitary):
        PrimitiveUnitary(((CQ(1), CQ(1)), (CQ(0), CQ(1))))
    with pytest.raises(NotUnitary):
        diagonal_unitary([1, 2])
    with pytest.raises(ValueError):
        cayley_unitary(((CQ(1), CQ(0)), (CQ(0), CQ(0))))


def test_pad_and_apply():
    rng = random.Random(6)
    psi = random_primitive_state(2, rng)
    eye = Circuit(PrimitiveUnitary(identity(4)), 2)
    assert pad_and_apply(eye, psi) == psi
    u = random_unitary(2, rng)
    out = pad_and_apply(Circuit(u, 0), PureState.basis(0))
    assert out.amps == u.column(0)
    for m in (0, 1, 2):
        theta = random_primitive_state(m, rng) if m else PureState.basis(0)
        assert pad_and_apply(Circuit(u, m), theta).norm2 == 1
    with pytest.raises(DimensionMismatch):
        pad_and_apply(Circuit(u, 1), psi)


def test_best_input_overlap_examples():
    rng = random.Random(8)
    psi = random_primitive_state(2, rng)
    eye = PrimitiveUnitary(identity(4))
    value, witness = best_input_overlap(Circuit(eye, 2), psi)
    assert value == 1 and fidelity(witness, psi) == 1
    value, witness = best_input_overlap(Circuit(eye, 0), PureState.basis(2))
    assert value == 1
    value, witness = best_input_overlap(Circuit(eye, 0), PureState.basis(2, 3))
    assert value == 0 and witness == PureState.basis(0)


def search_overlap(v: np.ndarray, psi: np.ndarray, m: int, rng: np.random.Generator, samples: int = 10_000) -> float:
    """Random sampling followed by shrinking random-perturbation hill climbing."""
    n_qubits = int(np.log2(len(psi)))
    shift = n_qubits - m

    def score(theta):
        theta = theta / np.linalg.norm(theta)
        full = np.zeros(len(psi), dtype=complex)
        full[np.arange(2 ** m) << shift] = theta
        return abs(np.vdot(psi, v @ full)) ** 2

    starts = rng.normal(size=(samples, 2 ** m)) + 1j * rng.normal(size=(samples, 2 ** m))
    scores = [score(s) for s in starts]
    best = starts[int(np.argmax(scores))]
    best_score = max(scores)
    step = 0.5
    while step > 1e-9:
        improved = False
        for _ in range(30):
            cand = best + step * (rng.normal(size=2 ** m) + 1j * rng.normal(size=2 ** m))
            s = score(cand)
            if s > best_score:
                best, best_score, improved = cand, s, True
        if not improved:
            step /= 2
    return best_score


def test_best_input_overlap_matches_search():
    rng = random.Random(9)
    nrng = np.random.default_rng(9)
    for _ in range(10):
        u = random_unitary(2, rng)
        psi = random_primitive_state(2, rng)
        value, witness = best_input_overlap(Circuit(u, 1), psi)
        vnp = np.array([[complex(x) for x in row] for row in u.rows])
        found = search_overlap(vnp, as_np(psi), 1, nrng)
        assert abs(found - float(value)) < 1e-6
        assert fidelity(pad_and_apply(Circuit(u, 1), witness), psi) == value


def test_preparation_examples():
    assert synthesize_preparation(PureState.basis(2)).unitary.rows == identity(4)
    c = synthesize_preparation(PureState.make([F(3, 5), F(4, 5)]))
    assert c.unitary.rows == ((CQ(F(3, 5)), CQ(F(4, 5))), (CQ(F(4, 5)), CQ(F(-3, 5))))
    assert c.m == 0


def test_preparation_on_random_states():
    rng = random.Random(10)
    for i in range(100):
        theta = random_primitive_state(1 + i % 3, rng)
        circ = synthesize_preparation(theta)
        out = pad_and_apply(circ, PureState.basis(0))
        assert out == theta
        assert fidelity(out, theta) == 1


def test_pure_phase_preparation():
    z = CQ(F(3, 5), F(4, 5))
    theta = PureState.make([z, 0])
    assert pad_and_apply(synthesize_preparation(theta), PureState.basis(0)) == theta


def test_codes_roundtrip():
    rng = random.Random(12)
    for _ in range(20):
        psi = random_primitive_state(2, rng)
        assert decode_state(psi.code()) == psi
        circ = Circuit(random_unitary(2, rng), rng.randint(0, 2))
        assert decode_circuit(circ.code()) == circ
    with pytest.raises(DecodeFailure):
        decode_circuit(psi.code())
    with pytest.raises(DecodeFailure):
        decode_state("0101")


def test_text_files_roundtrip():
    rng = random.Random(13)
    psi = random_primitive_state(2, rng)
    assert PureState.from_text(psi.to_text()) == psi
    circ = Circuit(random_unitary(1, rng), 1)
    assert Circuit.from_text(circ.to_text()) == circ
    approx = random_approximate_state(1, rng)
    assert PureState.from_text(approx.to_text()) == approx


def test_mu_aggregate():
    e0 = PureState.basis(1)
    mu = mu_aggregate([(e0, F(1))])
    assert mu.rows == ((CQ(1), CQ(0)), (CQ(0), CQ(0)))
    empty = mu_aggregate([], dim=4)
    assert empty.trace == 0
    with pytest.raises(WeightOverflow):
        mu_aggregate([(e0, F(2, 3)), (e0, F(1, 2))])
    rng = random.Random(14)
    for _ in range(20):
        items = [(random_primitive_state(2, rng), F(1, rng.randint(4, 40))) for _ in range(rng.randint(1, 3))]
        mu = mu_aggregate(items)
        assert mu.trace == sum(w for _, w in items)
        assert is_psd(mu.rows)


def test_psd_examples():
    rng = random.Random(15)
    psi = random_primitive_state(1, rng)
    a = mu_aggregate([(psi, F(1, 2))])
    assert psd_dominates(a, a, 1)
    d0 = mu_aggregate([(PureState.basis(1, 0), F(1))])
    d1 = mu_aggregate([(PureState.basis(1, 1), F(1))])
    for c in (1, 10, 1000):
        assert not psd_dominates(d0, d1, c)
    with pytest.raises(ValueError):
        SemiDensityMatrix(((CQ(1), CQ(1)), (CQ(1), CQ(0))))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(-6, 6), min_size=16, max_size=16))
def test_psd_decision_matches_eigenvalues(vals):
    # Gram matrices are PSD; subtracting a multiple of the identity can break that
    g = np.array(vals, dtype=float).reshape(4, 4)
    herm = g @ g.T
    shift = Fraction(int(np.trace(herm)) // 4)
    rows = tuple(tuple(CQ(int(herm[i, j]) - (shift if i == j else 0)) for j in range(4)) for i in range(4))
    eig = np.linalg.eigvalsh(herm - float(shift) * np.eye(4))
    if abs(eig.min()) > 1e-6:
        assert is_psd(rows) == (eig.min() > 0)
