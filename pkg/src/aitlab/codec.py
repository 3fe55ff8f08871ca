"""Self-delimiting codes for strings, numbers and finite objects.

Bit strings are plain ``str`` values over the alphabet ``"01"``.  Whole
numbers are identified with strings through the length-increasing
lexicographic order ``0, 1, 00, 01, 10, 11, 000, ...``.

Composite objects use a single grammar: a tuple of strings ``(x1, .., xm)``
is written ``<m><x1>..<xm>`` where ``<.>`` is the efficient string code.
Nested objects are first encoded to a string, and that string becomes the
tuple element.  Sets use the same layout with elements sorted by their
element code, which makes the code canonical.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping

__all__ = [
    "CodeError",
    "MalformedCode",
    "Truncated",
    "PrimitiveMap",
    "PrimitiveMeasure",
    "check_bits",
    "xi",
    "xi_index",
    "encode_unary_guarded",
    "encode_string",
    "encode_whole",
    "encode_integer",
    "encode_rational",
    "encode_tuple",
    "encode_set",
    "encode_pair",
    "encode_map",
    "encode_measure",
    "encode_composite",
    "decode_stream",
    "decode",
    "interleave",
    "with_stream",
    "pack_bits",
    "unpack_bits",
    "write_bits_lines",
    "read_bits_lines",
    "kraft_sum",
    "is_prefix_free",
]


class CodeError(ValueError):
    """Base class for decoding failures."""


class MalformedCode(CodeError):
    """The buffer does not start with a code word of the requested grammar."""


class Truncated(CodeError):
    """The buffer ends before the code word does."""


def check_bits(x: str) -> str:
    if not isinstance(x, str) or x.strip("01"):
        raise ValueError(f"not a bit string: {x!r}")
    return x


# ---------------------------------------------------------------- numbers

def xi(n: int) -> str:
    """Return the ``n``-th string of the length-increasing order (``xi(6) == "000"``)."""
    if n < 0:
        raise ValueError("whole numbers only")
    return bin(n + 2)[3:]


def xi_index(x: str) -> int:
    """Inverse of :func:`xi`; the empty string has no index."""
    if not x:
        raise ValueError("the empty string is not in the whole-number order")
    return int("1" + check_bits(x), 2) - 2


def _zigzag(z: int) -> int:
    return 2 * z if z >= 0 else -2 * z - 1


def _unzigzag(n: int) -> int:
    return n // 2 if n % 2 == 0 else -(n + 1) // 2


# ---------------------------------------------------------------- encoders

def encode_unary_guarded(x: str) -> str:
    return "1" * len(x) + "0" + x


def encode_string(x: str) -> str:
    """Efficient self-delimiting code ``<xi_|x|>' 0 x``."""
    return encode_unary_guarded(xi(len(x))) + "0" + x


def encode_whole(n: int) -> str:
    return encode_string(xi(n))


def encode_integer(z: int) -> str:
    # Signed integers are mapped to whole numbers 0, -1, 1, -2, ... -> 0, 1, 2, 3, ...
    return encode_whole(_zigzag(z))


def encode_tuple(items: Iterable[str]) -> str:
    items = list(items)
    return encode_whole(len(items)) + "".join(encode_string(x) for x in items)


def encode_pair(x: str, y: str) -> str:
    return encode_tuple((x, y))


def encode_set(items: Iterable[str]) -> str:
    items = list(items)
    if len(set(items)) != len(items):
        raise ValueError("set elements must be distinct")
    return encode_tuple(sorted(items, key=encode_string))


def encode_rational(r: Fraction | int) -> str:
    r = Fraction(r)
    return encode_tuple((xi(_zigzag(r.numerator)), xi(r.denominator)))


@dataclass(frozen=True)
class PrimitiveMap:
    """Finite map between whole numbers, keys kept strictly increasing."""

    entries: tuple[tuple[int, int], ...]

    def __post_init__(self):
        keys = [k for k, _ in self.entries]
        if keys != sorted(set(keys)):
            raise ValueError("keys must be unique and increasing")
        if any(k < 0 or v < 0 for k, v in self.entries):
            raise ValueError("primitive maps are over whole numbers")

    @classmethod
    def from_dict(cls, d: Mapping[int, int]) -> "PrimitiveMap":
        return cls(tuple(sorted((int(k), int(v)) for k, v in d.items())))

    def as_dict(self) -> dict[int, int]:
        return dict(self.entries)

    @property
    def domain(self) -> tuple[int, ...]:
        return tuple(k for k, _ in self.entries)

    def __call__(self, a: int) -> int:
        return self.as_dict()[a]

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class PrimitiveMeasure:
    """Finite-support measure over whole numbers with rational masses."""

    entries: tuple[tuple[int, Fraction], ...]

    def __post_init__(self):
        keys = [k for k, _ in self.entries]
        if keys != sorted(set(keys)):
            raise ValueError("keys must be unique and increasing")
        if any(k < 0 for k in keys):
            raise ValueError("primitive measures are over whole numbers")
        if any(Fraction(q) < 0 for _, q in self.entries):
            raise ValueError("masses must be nonnegative")

    @classmethod
    def from_dict(cls, d: Mapping[int, Fraction | int]) -> "PrimitiveMeasure":
        return cls(tuple(sorted((int(k), Fraction(q)) for k, q in d.items())))

    def as_dict(self) -> dict[int, Fraction]:
        return dict(self.entries)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(k for k, q in self.entries if q > 0)

    @property
    def total(self) -> Fraction:
        return sum((q for _, q in self.entries), Fraction(0))

    @property
    def is_probability(self) -> bool:
        return self.total == 1

    def __call__(self, a: int) -> Fraction:
        return self.as_dict().get(a, Fraction(0))


def encode_map(f: PrimitiveMap | Mapping[int, int]) -> str:
    if not isinstance(f, PrimitiveMap):
        f = PrimitiveMap.from_dict(f)
    return encode_set(encode_pair(xi(a), xi(b)) for a, b in f.entries)


def encode_measure(q: PrimitiveMeasure | Mapping[int, Fraction]) -> str:
    if not isinstance(q, PrimitiveMeasure):
        q = PrimitiveMeasure.from_dict(q)
    # Only the support is listed.
    return encode_set(encode_pair(xi(a), encode_rational(m)) for a, m in q.entries if m > 0)


def encode_composite(value) -> str:
    """Encode a rational, map, measure, set (``frozenset``/``set``) or tuple of strings."""
    if isinstance(value, (Fraction, int)) and not isinstance(value, bool):
        return encode_rational(value)
    if isinstance(value, PrimitiveMap):
        return encode_map(value)
    if isinstance(value, PrimitiveMeasure):
        return encode_measure(value)
    if isinstance(value, (set, frozenset)):
        return encode_set(value)
    if isinstance(value, (tuple, list)):
        return encode_tuple(value)
    raise TypeError(f"no code for {type(value).__name__}")


# ---------------------------------------------------------------- decoders

class _Reader:
    __slots__ = ("buf", "pos")

    def __init__(self, buf: str, pos: int = 0):
        self.buf = buf
        self.pos = pos

    def bit(self) -> str:
        if self.pos >= len(self.buf):
            raise Truncated("buffer ends inside a code word")
        b = self.buf[self.pos]
        self.pos += 1
        return b

    def take(self, n: int) -> str:
        end = self.pos + n
        if end > len(self.buf):
            raise Truncated("buffer ends inside a code word")
        out = self.buf[self.pos:end]
        self.pos = end
        return out


def _read_unary_guarded(r: _Reader) -> str:
    n = 0
    while r.bit() == "1":
        n += 1
    return r.take(n)


def _read_unary_len(r: _Reader) -> str:
    header = _read_unary_guarded(r)
    if not header:
        # <x>' of the empty string never starts an efficient code.
        raise MalformedCode("empty length header")
    return header


def _read_efficient(r: _Reader) -> str:
    n = xi_index(_read_unary_len(r))
    if r.bit() != "0":
        raise MalformedCode("missing separator after length header")
    return r.take(n)


def _read_whole(r: _Reader) -> int:
    s = _read_efficient(r)
    if not s:
        raise MalformedCode("empty string is not a whole number")
    return xi_index(s)


def _read_tuple(r: _Reader) -> list[str]:
    m = _read_whole(r)
    return [_read_efficient(r) for _ in range(m)]


def _read_set(r: _Reader) -> list[str]:
    items = _read_tuple(r)
    codes = [encode_string(x) for x in items]
    if any(a >= b for a, b in zip(codes, codes[1:])):
        raise MalformedCode("set elements not in canonical order")
    return items


def _parse_whole(s: str) -> int:
    if not s:
        raise MalformedCode("empty string is not a whole number")
    return xi_index(s)


def _parse_rational(s: str) -> Fraction:
    r = _Reader(s)
    items = _read_tuple(r)
    if r.pos != len(s) or len(items) != 2:
        raise MalformedCode("rational must be a pair")
    p = _unzigzag(_parse_whole(items[0]))
    q = _parse_whole(items[1])
    if q < 1 or math.gcd(p, q) != 1:
        raise MalformedCode("rational not in lowest terms")
    return Fraction(p, q)


def _parse_pair(s: str) -> tuple[str, str]:
    r = _Reader(s)
    items = _read_tuple(r)
    if r.pos != len(s) or len(items) != 2:
        raise MalformedCode("expected a pair")
    return items[0], items[1]


def _read_rational(r: _Reader) -> Fraction:
    start = r.pos
    _read_tuple(r)
    return _parse_rational(r.buf[start:r.pos])


def _read_map(r: _Reader) -> PrimitiveMap:
    pairs = [_parse_pair(x) for x in _read_set(r)]
    d = {}
    for a, b in pairs:
        k = _parse_whole(a)
        if k in d:
            raise MalformedCode("duplicate key")
        d[k] = _parse_whole(b)
    return PrimitiveMap.from_dict(d)


def _read_measure(r: _Reader) -> PrimitiveMeasure:
    pairs = [_parse_pair(x) for x in _read_set(r)]
    d = {}
    for a, q in pairs:
        k = _parse_whole(a)
        if k in d:
            raise MalformedCode("duplicate key")
        mass = _parse_rational(q)
        if mass <= 0:
            raise MalformedCode("listed masses must be positive")
        d[k] = mass
    return PrimitiveMeasure.from_dict(d)


_READERS = {
    "unary": _read_unary_guarded,
    "string": _read_efficient,
    "whole": _read_whole,
    "integer": lambda r: _unzigzag(_read_whole(r)),
    "rational": _read_rational,
    "tuple": _read_tuple,
    "set": lambda r: frozenset(_read_set(r)),
    "map": _read_map,
    "measure": _read_measure,
}


def decode_stream(buffer: str, kind: str = "string", pos: int = 0):
    """Decode one code word of grammar ``kind`` starting at ``pos``.

    Returns ``(value, consumed)``.  Bits after the code word are never read.
    """
    try:
        reader = _READERS[kind]
    except KeyError:
        raise ValueError(f"unknown code kind {kind!r}") from None
    r = _Reader(buffer, pos)
    value = reader(r)
    return value, r.pos - pos


def decode(buffer: str, kind: str = "string"):
    """Decode a buffer that must hold exactly one code word."""
    value, used = decode_stream(buffer, kind)
    if used != len(buffer):
        raise MalformedCode(f"{len(buffer) - used} trailing bits")
    return value


# ---------------------------------------------------------------- streams

def interleave(a: str, b: str) -> str:
    """Finite-prefix version of the pair code of two infinite sequences."""
    if len(a) != len(b):
        raise ValueError("interleave needs equal-length prefixes")
    return "".join(x + y for x, y in zip(a, b))


def with_stream(x: str, stream: Iterable[str]) -> tuple[str, Iterator[str]]:
    """Represent ``<x> alpha`` for an unbounded ``alpha`` as (finite code, bit iterator)."""
    return encode_string(x), iter(stream)


# ---------------------------------------------------------------- files

def pack_bits(bits: str) -> bytes:
    """Packed form: 8-byte big-endian bit count, then bits MSB-first, last byte zero-padded."""
    check_bits(bits)
    n = len(bits)
    padded = bits + "0" * (-n % 8)
    body = int(padded, 2).to_bytes(len(padded) // 8, "big") if padded else b""
    return n.to_bytes(8, "big") + body


def unpack_bits(data: bytes) -> str:
    if len(data) < 8:
        raise Truncated("missing length header")
    n = int.from_bytes(data[:8], "big")
    body = data[8:]
    if len(body) != (n + 7) // 8:
        raise MalformedCode("body size does not match length header")
    if not body:
        return ""
    bits = bin(int.from_bytes(body, "big"))[2:].zfill(8 * len(body))
    if bits[n:].strip("0"):
        raise MalformedCode("nonzero padding")
    return bits[:n]


def write_bits_lines(strings: Iterable[str]) -> str:
    return "".join(check_bits(s) + "\n" for s in strings)


def read_bits_lines(text: str) -> list[str]:
    """Inverse of :func:`write_bits_lines`; one string per line, empty lines allowed."""
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return [check_bits(line.rstrip("\r")) for line in lines]


# ---------------------------------------------------------------- checks

def kraft_sum(codes: Iterable[str]) -> Fraction:
    return sum((Fraction(1, 2 ** len(c)) for c in set(codes)), Fraction(0))


def is_prefix_free(codes: Iterable[str]) -> bool:
    ordered = sorted(set(codes))
    # In sorted order a prefix is always followed directly by one of its extensions.
    return not any(b.startswith(a) for a, b in itertools.pairwise(ordered))
