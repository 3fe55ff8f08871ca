"""Exact Gaussian-rational linear algebra for small pure states and circuits.

Amplitudes are :class:`CQ` values (complex numbers with ``Fraction`` parts).
A *primitive* state has norm exactly 1.  An *approximate* state is an exact
rational vector whose squared norm is within ``2**-64`` of 1; it stands for
the ray it spans, and every overlap is divided by the squared norms, so
fidelities of approximate states are still computed without rounding.
Basis index ``i`` of an ``N``-qubit register is read big-endian, so the
padded input ``|theta 0..0>`` has index ``a << (N - M)``.
"""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath

from .codec import CodeError, decode, encode_rational, encode_tuple, xi, xi_index

log = logging.getLogger(__name__)

EPS_NORM = Fraction(1, 2 ** 64)
EXACT_PSD_MAX_DIM = 16
PSD_TOLERANCE = mpmath.mpf(2) ** -40


class DimensionMismatch(ValueError):
    pass


class NotUnitary(ValueError):
    pass


class NotNormalized(ValueError):
    pass


class WeightOverflow(ValueError):
    pass


class DecodeFailure(ValueError):
    """A bit string is not the code of the requested quantum object."""


class CQ:
    """Complex rational ``re + i*im``."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @classmethod
    def of(cls, v) -> "CQ":
        if isinstance(v, CQ):
            return v
        if isinstance(v, complex):
            return cls(Fraction(v.real), Fraction(v.imag))
        return cls(v)

    def __add__(self, o):
        o = CQ.of(o)
        return CQ(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, o):
        o = CQ.of(o)
        return CQ(self.re - o.re, self.im - o.im)

    def __rsub__(self, o):
        return CQ.of(o) - self

    def __neg__(self):
        return CQ(-self.re, -self.im)

    def __mul__(self, o):
        o = CQ.of(o)
        return CQ(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = CQ.of(o)
        d = o.abs2()
        if d == 0:
            raise ZeroDivisionError("division by complex zero")
        n = self * o.conj()
        return CQ(n.re / d, n.im / d)

    def conj(self) -> "CQ":
        return CQ(self.re, -self.im)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __eq__(self, o):
        if isinstance(o, (int, Fraction, complex, CQ)):
            o = CQ.of(o)
            return self.re == o.re and self.im == o.im
        return NotImplemented

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        if self.im == 0:
            return f"CQ({self.re})"
        return f"CQ({self.re}, {self.im})"

    def to_text(self) -> str:
        return f"{self.re.numerator}/{self.re.denominator} {self.im.numerator}/{self.im.denominator}"

    @classmethod
    def from_text(cls, text: str) -> "CQ":
        re, im = text.split()
        return cls(Fraction(re), Fraction(im))

    def code(self) -> str:
        return encode_tuple([encode_rational(self.re), encode_rational(self.im)])


ZERO = CQ(0)
ONE = CQ(1)

Matrix = tuple[tuple[CQ, ...], ...]


def decode_complex(bits: str) -> CQ:
    parts = decode(bits, "tuple")
    if len(parts) != 2:
        raise DecodeFailure("a complex code has two parts")
    return CQ(decode(parts[0], "rational"), decode(parts[1], "rational"))


# ------------------------------------------------------------------ matrices

def identity(dim: int) -> Matrix:
    return tuple(tuple(ONE if i == j else ZERO for j in range(dim)) for i in range(dim))


def adjoint(a: Matrix) -> Matrix:
    return tuple(tuple(a[j][i].conj() for j in range(len(a))) for i in range(len(a[0])))


def matmul(a: Matrix, b: Matrix) -> Matrix:
    cols = list(zip(*b))
    return tuple(tuple(_dot(row, col) for col in cols) for row in a)


def matvec(a: Matrix, v: Sequence[CQ]) -> tuple[CQ, ...]:
    return tuple(_dot(row, v) for row in a)


def _dot(u: Sequence[CQ], v: Sequence[CQ]) -> CQ:
    re = Fraction(0)
    im = Fraction(0)
    for x, y in zip(u, v):
        re += x.re * y.re - x.im * y.im
        im += x.re * y.im + x.im * y.re
    return CQ(re, im)


def inner(u: Sequence[CQ], v: Sequence[CQ]) -> CQ:
    """``<u|v>``, conjugate-linear in ``u``."""
    return _dot([x.conj() for x in u], v)


def norm2(v: Sequence[CQ]) -> Fraction:
    return sum((x.abs2() for x in v), Fraction(0))


def matrix_add(a: Matrix, b: Matrix, scale_b=1) -> Matrix:
    s = CQ.of(scale_b)
    return tuple(tuple(x + s * y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def scale(a: Matrix, s) -> Matrix:
    s = CQ.of(s)
    return tuple(tuple(s * x for x in row) for row in a)


def inverse(a: Matrix) -> Matrix:
    """Exact Gauss-Jordan inverse over the Gaussian rationals."""
    n = len(a)
    aug = [list(row) + [ONE if i == j else ZERO for j in range(n)] for i, row in enumerate(a)]
    for col in range(n):
        piv = next((r for r in range(col, n) if not aug[r][col].is_zero()), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        aug[col], aug[piv] = aug[piv], aug[col]
        p = aug[col][col]
        aug[col] = [x / p for x in aug[col]]
        for r in range(n):
            if r != col and not aug[r][col].is_zero():
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return tuple(tuple(row[n:]) for row in aug)


def matrix_code(a: Matrix) -> str:
    return encode_tuple([x.code() for row in a for x in row])


def decode_matrix(bits: str) -> Matrix:
    try:
        entries = [decode_complex(e) for e in decode(bits, "tuple")]
    except CodeError as exc:
        raise DecodeFailure(str(exc)) from None
    dim = _exact_sqrt_int(len(entries))
    if not dim or dim & (dim - 1):
        raise DecodeFailure("entry count is not the square of a power of two")
    return tuple(tuple(entries[i * dim:(i + 1) * dim]) for i in range(dim))


def _exact_sqrt_int(n: int) -> int | None:
    r = math.isqrt(n)
    return r if r * r == n else None


def qubits_of(dim: int) -> int:
    if dim < 1 or dim & (dim - 1):
        raise DimensionMismatch(f"dimension {dim} is not a power of two")
    return dim.bit_length() - 1


# ------------------------------------------------------------------ states

@dataclass(frozen=True)
class PureState:
    n: int
    amps: tuple[CQ, ...]
    kind: str = "primitive"

    def __post_init__(self):
        if len(self.amps) != 2 ** self.n:
            raise DimensionMismatch(f"{len(self.amps)} amplitudes for {self.n} qubits")
        nrm = norm2(self.amps)
        if self.kind == "primitive":
            if nrm != 1:
                raise NotNormalized("primitive state must have norm exactly 1")
        elif self.kind == "approximate":
            if abs(nrm - 1) > EPS_NORM:
                raise NotNormalized("approximate state norm is off by more than 2**-64")
        else:
            raise ValueError(f"unknown state kind {self.kind!r}")

    @classmethod
    def make(cls, amps: Iterable, kind: str | None = None) -> "PureState":
        """State from amplitudes; the kind is inferred from the norm unless given."""
        amps = tuple(CQ.of(a) for a in amps)
        n = qubits_of(len(amps))
        if kind is None:
            kind = "primitive" if norm2(amps) == 1 else "approximate"
        return cls(n, amps, kind)

    @classmethod
    def basis(cls, n: int, index: int = 0) -> "PureState":
        return cls(n, tuple(ONE if i == index else ZERO for i in range(2 ** n)))

    @property
    def dim(self) -> int:
        return len(self.amps)

    @property
    def norm2(self) -> Fraction:
        return norm2(self.amps)

    def code(self) -> str:
        if self.kind != "primitive":
            raise ValueError("only primitive states have a finite code")
        return encode_tuple([a.code() for a in self.amps])

    def to_text(self) -> str:
        return f"{self.n} {self.kind}\n" + "".join(a.to_text() + "\n" for a in self.amps)

    @classmethod
    def from_text(cls, text: str) -> "PureState":
        lines = text.strip().splitlines()
        n_str, kind = lines[0].split()
        return cls(int(n_str), tuple(CQ.from_text(x) for x in lines[1:]), kind)

    def __repr__(self):
        return f"PureState(n={self.n}, {self.kind}, {list(self.amps)})"


def decode_state(bits: str) -> PureState:
    try:
        amps = [decode_complex(e) for e in decode(bits, "tuple")]
        return PureState.make(amps, "primitive")
    except (CodeError, DimensionMismatch, NotNormalized) as exc:
        raise DecodeFailure(str(exc)) from None


def fidelity(psi: PureState, phi: PureState) -> Fraction:
    """``|<psi|phi>|^2`` for the normalized rays of both arguments."""
    if psi.n != phi.n:
        raise DimensionMismatch("states on different numbers of qubits")
    ov = inner(psi.amps, phi.amps).abs2()
    if psi.kind == "primitive" and phi.kind == "primitive":
        return ov
    return ov / (psi.norm2 * phi.norm2)


# ------------------------------------------------------------------ unitaries and circuits

@dataclass(frozen=True)
class PrimitiveUnitary:
    rows: Matrix

    def __post_init__(self):
        dim = len(self.rows)
        qubits_of(dim)
        if any(len(r) != dim for r in self.rows):
            raise DimensionMismatch("unitary must be square")
        if matmul(adjoint(self.rows), self.rows) != identity(dim):
            raise NotUnitary("V*V is not the identity")

    @property
    def dim(self) -> int:
        return len(self.rows)

    @property
    def n(self) -> int:
        return qubits_of(self.dim)

    def adjoint(self) -> "PrimitiveUnitary":
        return PrimitiveUnitary(adjoint(self.rows))

    def apply(self, v: Sequence[CQ]) -> tuple[CQ, ...]:
        return matvec(self.rows, v)

    def column(self, j: int) -> tuple[CQ, ...]:
        return tuple(row[j] for row in self.rows)

    def code(self) -> str:
        return matrix_code(self.rows)

    def to_text(self) -> str:
        return f"{self.n} unitary\n" + "".join(x.to_text() + "\n" for row in self.rows for x in row)

    @classmethod
    def from_text(cls, text: str) -> "PrimitiveUnitary":
        lines = text.strip().splitlines()
        dim = 2 ** int(lines[0].split()[0])
        vals = [CQ.from_text(x) for x in lines[1:]]
        return cls(tuple(tuple(vals[i * dim:(i + 1) * dim]) for i in range(dim)))


@dataclass(frozen=True)
class Circuit:
    unitary: PrimitiveUnitary
    m: int

    def __post_init__(self):
        if not 0 <= self.m <= self.unitary.n:
            raise DimensionMismatch("input width must lie between 0 and N")

    @property
    def n(self) -> int:
        return self.unitary.n

    def code(self) -> str:
        return encode_tuple([self.unitary.code(), xi(self.m)])

    def to_text(self) -> str:
        return f"m {self.m}\n" + self.unitary.to_text()

    @classmethod
    def from_text(cls, text: str) -> "Circuit":
        head, rest = text.split("\n", 1)
        return cls(PrimitiveUnitary.from_text(rest), int(head.split()[1]))


def decode_circuit(bits: str) -> Circuit:
    try:
        parts = decode(bits, "tuple")
        if len(parts) != 2:
            raise DecodeFailure("a circuit code has two parts")
        rows = decode_matrix(parts[0])
        return Circuit(PrimitiveUnitary(rows), xi_index(parts[1]))
    except (CodeError, NotUnitary, DimensionMismatch, ValueError) as exc:
        if isinstance(exc, DecodeFailure):
            raise
        raise DecodeFailure(str(exc)) from None


def padded(theta: PureState, n: int) -> tuple[CQ, ...]:
    """Amplitudes of ``theta`` followed by ``n - theta.n`` qubits in state 0."""
    shift = n - theta.n
    out = [ZERO] * (2 ** n)
    for a, amp in enumerate(theta.amps):
        out[a << shift] = amp
    return tuple(out)


def pad_and_apply(circuit: Circuit, theta: PureState) -> PureState:
    if theta.n != circuit.m:
        raise DimensionMismatch(f"circuit takes {circuit.m} qubits, state has {theta.n}")
    return PureState(circuit.n, circuit.unitary.apply(padded(theta, circuit.n)), theta.kind)


def best_input_overlap(circuit: Circuit, psi: PureState) -> tuple[Fraction, PureState]:
    """Maximum of ``|<psi|V|theta 0..0>|^2`` over unit ``theta`` and a maximizer.

    The maximum is the squared norm of the block of ``V* psi`` whose last
    ``N - M`` qubits are 0; the maximizer is that block, normalized.
    """
    if psi.n != circuit.n:
        raise DimensionMismatch("state and circuit differ in qubit count")
    shift = circuit.n - circuit.m
    w = matvec(adjoint(circuit.unitary.rows), psi.amps)
    block = tuple(w[a << shift] for a in range(2 ** circuit.m))
    value = norm2(block)
    if psi.kind != "primitive":
        value /= psi.norm2
    if value == 0:
        return Fraction(0), PureState.basis(circuit.m)
    return value, normalized(block)


def normalized(v: Sequence[CQ]) -> PureState:
    """Unit state along ``v``: primitive when the norm is rational, else an approximate ray."""
    v = tuple(v)
    nrm = norm2(v)
    root = _rational_sqrt(nrm)
    if root is not None:
        return PureState.make((x / root for x in v), "primitive")
    # rational r close to 1/sqrt(nrm); the ray is still exactly v's
    with mpmath.workprec(256):
        r = Fraction(int(mpmath.nint(mpmath.mpf(2) ** 200 / mpmath.sqrt(mpmath.mpf(nrm.numerator) / nrm.denominator))), 2 ** 200)
    return PureState.make((x * r for x in v), "approximate")


def _rational_sqrt(q: Fraction) -> Fraction | None:
    a, b = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if a * a == q.numerator and b * b == q.denominator:
        return Fraction(a, b)
    return None


# ------------------------------------------------------------------ exact generators

def permutation_unitary(perm: Sequence[int]) -> PrimitiveUnitary:
    """Unitary sending basis state ``j`` to basis state ``perm[j]``."""
    dim = len(perm)
    return PrimitiveUnitary(tuple(tuple(ONE if perm[j] == i else ZERO for j in range(dim)) for i in range(dim)))


def diagonal_unitary(phases: Sequence) -> PrimitiveUnitary:
    """Diagonal unitary; each phase must be a unit Gaussian rational (e.g. +-1, +-i, 3/5+4i/5)."""
    ph = [CQ.of(p) for p in phases]
    dim = len(ph)
    return PrimitiveUnitary(tuple(tuple(ph[i] if i == j else ZERO for j in range(dim)) for i in range(dim)))


def cayley_unitary(skew: Matrix) -> PrimitiveUnitary:
    """``(I - S)(I + S)^-1`` for a skew-Hermitian rational ``S``."""
    if adjoint(skew) != scale(skew, -1):
        raise ValueError("matrix is not skew-Hermitian")
    dim = len(skew)
    eye = identity(dim)
    return PrimitiveUnitary(matmul(matrix_add(eye, skew, -1), inverse(matrix_add(eye, skew))))


def random_skew_hermitian(dim: int, rng: random.Random, bound: int = 3) -> Matrix:
    rows = [[ZERO] * dim for _ in range(dim)]
    for i in range(dim):
        rows[i][i] = CQ(0, Fraction(rng.randint(-bound, bound), rng.randint(1, bound)))
        for j in range(i + 1, dim):
            z = CQ(Fraction(rng.randint(-bound, bound), rng.randint(1, bound)),
                   Fraction(rng.randint(-bound, bound), rng.randint(1, bound)))
            rows[i][j] = z
            rows[j][i] = -z.conj()
    return tuple(tuple(r) for r in rows)


def sphere_point(t: Sequence[Fraction]) -> tuple[Fraction, ...]:
    """Inverse stereographic projection of ``t`` in Q^k onto the unit sphere in Q^(k+1)."""
    s = sum((x * x for x in t), Fraction(0))
    return tuple(2 * x / (s + 1) for x in t) + ((s - 1) / (s + 1),)


def random_primitive_state(n: int, rng: random.Random, bound: int = 4) -> PureState:
    dim = 2 ** n
    t = [Fraction(rng.randint(-bound, bound), rng.randint(1, bound)) for _ in range(2 * dim - 1)]
    x = sphere_point(t)
    perm = list(range(2 * dim))
    rng.shuffle(perm)  # spread the distinguished last coordinate around
    x = [x[perm[k]] for k in range(2 * dim)]
    return PureState(n, tuple(CQ(x[2 * i], x[2 * i + 1]) for i in range(dim)))


def random_approximate_state(n: int, rng: random.Random) -> PureState:
    """Gaussian-random direction rounded to a 2**-60 grid, then scaled to near-unit norm."""
    vec = [CQ(Fraction(round(rng.gauss(0, 1) * 2 ** 60), 2 ** 60), Fraction(round(rng.gauss(0, 1) * 2 ** 60), 2 ** 60))
           for _ in range(2 ** n)]
    return normalized(vec)


def random_unitary(n: int, rng: random.Random) -> PrimitiveUnitary:
    """Cayley unitary, optionally composed with a permutation and signs."""
    dim = 2 ** n
    u = cayley_unitary(random_skew_hermitian(dim, rng))
    perm = list(range(dim))
    rng.shuffle(perm)
    signs = [rng.choice((ONE, -ONE, CQ(0, 1), CQ(0, -1))) for _ in range(dim)]
    return PrimitiveUnitary(matmul(diagonal_unitary(signs).rows, matmul(permutation_unitary(perm).rows, u.rows)))


def synthesize_preparation(theta: PureState) -> Circuit:
    """Circuit ``(V, 0)`` with ``V|0..0> = theta`` exactly.

    ``V = I - w w* / (1 - conj(z))`` with ``w = e0 - theta`` and ``z = theta_0``
    is unitary and maps ``e0`` to ``theta``; for real ``z`` it is the
    Householder reflection through ``w``.  ``theta = e0`` gives the identity.
    """
    if theta.kind != "primitive":
        raise NotNormalized("preparation needs a primitive state")
    dim = theta.dim
    z = theta.amps[0]
    if z == ONE:
        return Circuit(PrimitiveUnitary(identity(dim)), 0)
    w = [(ONE if i == 0 else ZERO) - a for i, a in enumerate(theta.amps)]
    c = ONE / (ONE - z.conj())
    rows = tuple(
        tuple((ONE if i == j else ZERO) - c * w[i] * w[j].conj() for j in range(dim)) for i in range(dim)
    )
    return Circuit(PrimitiveUnitary(rows), 0)


# ------------------------------------------------------------------ semi-density matrices

@dataclass(frozen=True)
class SemiDensityMatrix:
    rows: Matrix
    certify: bool = True

    def __post_init__(self):
        qubits_of(len(self.rows))
        if adjoint(self.rows) != self.rows:
            raise ValueError("matrix is not Hermitian")
        if self.trace > 1:
            raise ValueError("trace exceeds 1")
        if self.certify and not is_psd(self.rows):
            raise ValueError("matrix is not positive semidefinite")

    @property
    def dim(self) -> int:
        return len(self.rows)

    @property
    def trace(self) -> Fraction:
        return sum((self.rows[i][i].re for i in range(len(self.rows))), Fraction(0))

    def expect(self, psi: PureState) -> Fraction:
        """``<psi|A|psi>`` for the normalized ray of ``psi``."""
        if psi.dim != self.dim:
            raise DimensionMismatch("state and matrix differ in dimension")
        val = inner(psi.amps, matvec(self.rows, psi.amps)).re
        return val if psi.kind == "primitive" else val / psi.norm2

    def to_text(self) -> str:
        return f"{qubits_of(self.dim)} density\n" + "".join(x.to_text() + "\n" for row in self.rows for x in row)


def projector(psi: PureState, weight=1) -> Matrix:
    w = Fraction(weight) / psi.norm2
    return tuple(tuple(a * b.conj() * w for b in psi.amps) for a in psi.amps)


def mu_aggregate(weighted: Iterable[tuple[PureState, Fraction]], dim: int | None = None) -> SemiDensityMatrix:
    """``sum w |theta><theta|``; weights must be nonnegative with total at most 1."""
    weighted = list(weighted)
    if dim is None:
        if not weighted:
            raise DimensionMismatch("dimension needed for an empty aggregate")
        dim = weighted[0][0].dim
    total = Fraction(0)
    acc = [[Fraction(0), Fraction(0)] for _ in range(dim * dim)]
    for psi, w in weighted:
        w = Fraction(w)
        if w < 0:
            raise ValueError("negative weight")
        if psi.dim != dim:
            raise DimensionMismatch("states of different dimensions")
        total += w
        if total > 1:
            raise WeightOverflow("weights sum to more than 1")
        if w == 0:
            continue
        f = w / psi.norm2
        amps = psi.amps
        for i in range(dim):
            ai = amps[i]
            for j in range(dim):
                p = ai * amps[j].conj()
                cell = acc[i * dim + j]
                cell[0] += f * p.re
                cell[1] += f * p.im
    rows = tuple(tuple(CQ(*acc[i * dim + j]) for j in range(dim)) for i in range(dim))
    # a nonnegative combination of projectors is PSD by construction
    return SemiDensityMatrix(rows, certify=False)


def is_psd(a: Matrix) -> bool:
    """Decide whether a Hermitian matrix is positive semidefinite.

    Up to dimension 16 this is exact: symmetric pivoting on the largest
    diagonal entry followed by a Schur complement (an LDL* factorization).  A
    zero pivot forces its whole row to vanish.  Larger matrices use
    high-precision eigenvalues with tolerance ``2**-40`` and log a warning.
    """
    if len(a) > EXACT_PSD_MAX_DIM:
        log.warning("WARNING: PSD check on dimension %d uses a high-precision eigenvalue fallback", len(a))
        with mpmath.workprec(192):
            m = mpmath.matrix([[_mpc(x) for x in row] for row in a])
            return min(mpmath.eighe(m, eigvals_only=True)) >= -PSD_TOLERANCE
    m = [list(row) for row in a]
    while m:
        diag = [m[i][i].re for i in range(len(m))]
        k = max(range(len(m)), key=lambda i: diag[i])
        p = diag[k]
        if p < 0:
            return False
        if p == 0:
            # all diagonal entries are 0, so the matrix must vanish
            return all(x.is_zero() for row in m for x in row)
        rest = [i for i in range(len(m)) if i != k]
        col = [m[i][k] for i in rest]
        m = [[m[i][j] - col[a] * col[b].conj() / p for b, j in enumerate(rest)] for a, i in enumerate(rest)]
    return True


def _mpc(x: CQ):
    return mpmath.mpc(mpmath.mpf(x.re.numerator) / x.re.denominator, mpmath.mpf(x.im.numerator) / x.im.denominator)


def psd_dominates(a: SemiDensityMatrix | Matrix, b: SemiDensityMatrix | Matrix, c) -> bool:
    """``c*B - A`` is positive semidefinite."""
    ra = a.rows if isinstance(a, SemiDensityMatrix) else a
    rb = b.rows if isinstance(b, SemiDensityMatrix) else b
    if len(ra) != len(rb):
        raise DimensionMismatch("matrices differ in dimension")
    return is_psd(matrix_add(scale(rb, Fraction(c)), ra, -1))


def smallest_dominating_power(a, b, max_exp: int = 64) -> int | None:
    """Least ``k >= 0`` with ``2**k * B - A`` PSD, or None up to ``max_exp``."""
    for k in range(max_exp + 1):
        if psd_dominates(a, b, 2 ** k):
            return k
    return None
