"""Bit strings, self-delimiting codes, the canonical graph code and permutation ranks.

Bit strings are written most-significant bit first. When packed into bytes the
last byte is padded with zero bits and the bit length is kept alongside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Iterator, Sequence

import numpy as np

from . import kernels
from .errors import LengthMismatchError, MalformedCodeError

if TYPE_CHECKING:
    from .graphs import LabeledGraph


@dataclass(frozen=True)
class BitString:
    """Immutable sequence of bits backed by a string of ``'0'``/``'1'``."""

    bits: str = ""

    def __post_init__(self):
        if self.bits.strip("01"):
            raise ValueError(f"not a bit string: {self.bits[:32]!r}")

    @classmethod
    def _raw(cls, bits: str) -> "BitString":
        # skips validation; callers guarantee a 0/1 string
        obj = object.__new__(cls)
        object.__setattr__(obj, "bits", bits)
        return obj

    @classmethod
    def from_int(cls, value: int, width: int) -> "BitString":
        """``value`` written in exactly ``width`` bits."""
        if value < 0 or value.bit_length() > width:
            raise ValueError(f"{value} does not fit in {width} bits")
        return cls._raw(format(value, "b").zfill(width) if width else "")

    @classmethod
    def from_array(cls, arr) -> "BitString":
        a = np.asarray(arr, dtype=np.uint8)
        return cls._raw((a + 48).tobytes().decode("ascii"))

    @classmethod
    def join(cls, parts: Sequence["BitString"]) -> "BitString":
        return cls._raw("".join(p.bits for p in parts))

    def to_int(self) -> int:
        return int(self.bits, 2) if self.bits else 0

    def to_array(self) -> np.ndarray:
        return np.frombuffer(self.bits.encode("ascii"), dtype=np.uint8) - 48

    def to_bytes(self) -> bytes:
        if not self.bits:
            return b""
        padded = self.bits + "0" * (-len(self.bits) % 8)
        return int(padded, 2).to_bytes(len(padded) // 8, "big")

    @classmethod
    def from_bytes(cls, data: bytes, length: int) -> "BitString":
        if length > 8 * len(data) or length <= 8 * len(data) - 8 and data:
            raise LengthMismatchError(f"{len(data)} bytes cannot hold exactly {length} bits")
        if not data:
            if length:
                raise LengthMismatchError(f"no data for {length} bits")
            return cls()
        bits = format(int.from_bytes(data, "big"), "b").zfill(8 * len(data))
        return cls._raw(bits[:length])

    def to_hex(self) -> str:
        return self.to_bytes().hex()

    @classmethod
    def from_hex(cls, text: str, length: int) -> "BitString":
        return cls.from_bytes(bytes.fromhex(text.strip()), length)

    def __len__(self) -> int:
        return len(self.bits)

    def __add__(self, other: "BitString") -> "BitString":
        if not isinstance(other, BitString):
            return NotImplemented
        return BitString._raw(self.bits + other.bits)

    def __getitem__(self, key):
        if isinstance(key, slice):
            return BitString._raw(self.bits[key])
        return int(self.bits[key])

    def __iter__(self) -> Iterator[int]:
        return (int(b) for b in self.bits)

    def __str__(self) -> str:
        return self.bits

    def flip(self, index: int) -> "BitString":
        """Copy with the bit at ``index`` inverted."""
        b = self.bits
        return BitString._raw(b[:index] + ("1" if b[index] == "0" else "0") + b[index + 1:])


EMPTY = BitString()


def ceil_log2(x: int) -> int:
    """Exact ``ceil(log2(x))`` for a positive integer."""
    if x < 1:
        raise ValueError("ceil_log2 needs a positive integer")
    return (x - 1).bit_length()


def binary(k: int) -> BitString:
    """Shortest binary numeral of ``k``; zero is the empty string."""
    if k < 0:
        raise ValueError("negative length")
    return BitString._raw(format(k, "b") if k else "")


def number_to_string(k: int) -> BitString:
    """Bijective numbering 0 -> '', 1 -> '0', 2 -> '1', 3 -> '00', ..."""
    if k < 0:
        raise ValueError("natural numbers only")
    return BitString._raw(format(k + 1, "b")[1:])


def string_to_number(x: BitString) -> int:
    return int("1" + x.bits, 2) - 1


def sd_encode_bar(x: BitString) -> BitString:
    return BitString._raw("1" * len(x) + "0" + x.bits)


def sd_decode_bar(s: BitString) -> tuple[BitString, BitString]:
    """Split ``bar(x) + rest`` into ``(x, rest)``."""
    bits = s.bits
    k = bits.find("0")
    if k < 0:
        raise MalformedCodeError("no stop bit in self-delimiting prefix")
    end = 2 * k + 1
    if len(bits) < end:
        raise MalformedCodeError(f"stop bit announces {k} bits but only {len(bits) - k - 1} follow")
    return BitString._raw(bits[k + 1:end]), BitString._raw(bits[end:])


def sd_encode_prime(x: BitString) -> BitString:
    """Length of ``x`` bar-coded in binary, then ``x``: ``|x| + 2*ceil(log(|x|+1)) + 1`` bits."""
    return sd_encode_bar(binary(len(x))) + x


def sd_decode_prime(s: BitString) -> tuple[BitString, BitString]:
    length_bits, rest = sd_decode_bar(s)
    if length_bits.bits.startswith("0"):
        raise MalformedCodeError("length field has a leading zero")
    length = length_bits.to_int()
    if len(rest) < length:
        raise MalformedCodeError(f"prefix announces {length} bits but only {len(rest)} follow")
    return rest[:length], rest[length:]


def bar_length(k: int) -> int:
    return 2 * k + 1


def prime_length(k: int) -> int:
    return k + 2 * ceil_log2(k + 1) + 1


# ---------------------------------------------------------------- graph code

def edge_count(n: int) -> int:
    return n * (n - 1) // 2


def encode_graphs(adj: np.ndarray) -> np.ndarray:
    """Batch form of E(G): ``(k, n, n)`` adjacency stack to ``(k, n(n-1)/2)`` uint8 codes."""
    adj = np.asarray(adj)
    n = adj.shape[-1]
    iu = np.triu_indices(n, k=1)
    return adj[..., iu[0], iu[1]].astype(np.uint8)


def decode_graphs(codes: np.ndarray, n: int) -> np.ndarray:
    """Inverse of ``encode_graphs``: symmetric boolean adjacency stack with empty diagonal."""
    codes = np.asarray(codes)
    if codes.shape[-1] != edge_count(n):
        raise LengthMismatchError(f"a graph on {n} nodes needs {edge_count(n)} bits, got {codes.shape[-1]}")
    adj = np.zeros(codes.shape[:-1] + (n, n), dtype=bool)
    iu = np.triu_indices(n, k=1)
    adj[..., iu[0], iu[1]] = codes.astype(bool)
    adj |= np.swapaxes(adj, -1, -2)
    return adj


def encode_graph(g: "LabeledGraph") -> BitString:
    """E(G): one bit per pair (1,2),(1,3),...,(1,n),(2,3),... set iff the edge exists."""
    return BitString.from_array(encode_graphs(g.adj))


def decode_graph(s: BitString, n: int) -> "LabeledGraph":
    from .graphs import LabeledGraph

    if len(s) != edge_count(n):
        raise LengthMismatchError(f"a graph on {n} nodes needs {edge_count(n)} bits, got {len(s)}")
    return LabeledGraph.from_adjacency(decode_graphs(s.to_array(), n))


def write_graph(path, g: "LabeledGraph") -> None:
    """Text file: ``n=<n>`` then the hex of E(G), zero-padded to whole bytes."""
    Path(path).write_text(f"n={g.n}\n{encode_graph(g).to_hex()}\n")


def read_graph(path) -> "LabeledGraph":
    lines = Path(path).read_text().split("\n")
    header = lines[0].strip()
    if not header.startswith("n="):
        raise MalformedCodeError(f"graph file must start with 'n=<int>', got {header!r}")
    n = int(header[2:])
    body = lines[1].strip() if len(lines) > 1 else ""
    return decode_graph(BitString.from_hex(body, edge_count(n)), n)


# ------------------------------------------------------- permutation ranks

def permutation_code_length(d: int) -> int:
    """``ceil(log2(d!))`` bits, enough to index every permutation of d items."""
    return ceil_log2(math.factorial(d))


def rank_permutation(perm: Sequence[int]) -> int:
    """Lexicographic rank of a permutation of ``0..d-1`` via its Lehmer code."""
    d = len(perm)
    if sorted(perm) != list(range(d)):
        raise ValueError("not a permutation of 0..d-1")
    digits = kernels.lehmer_digits(perm) if d else []
    rank = 0
    for i, c in enumerate(digits):
        rank = rank * (d - i) + int(c)
    return rank


def unrank_permutation(rank: int, d: int) -> tuple[int, ...]:
    if not 0 <= rank < math.factorial(d):
        raise MalformedCodeError(f"rank {rank} out of range for {d} items")
    digits = [0] * d
    for i in range(d - 1, -1, -1):
        rank, digits[i] = divmod(rank, d - i)
    pool = list(range(d))
    return tuple(pool.pop(c) for c in digits)


def encode_permutation(perm: Sequence[int]) -> BitString:
    return BitString.from_int(rank_permutation(perm), permutation_code_length(len(perm)))


def decode_permutation(s: BitString, d: int) -> tuple[int, ...]:
    if len(s) != permutation_code_length(d):
        raise MalformedCodeError(f"permutation of {d} items takes {permutation_code_length(d)} bits, got {len(s)}")
    return unrank_permutation(s.to_int(), d)
