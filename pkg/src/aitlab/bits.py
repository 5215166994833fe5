"""Finite bit strings and the self-delimiting pairing codec.

Strings are capped at 64 bits; every object in the laboratory (targets,
conditions, programs, pair codes) lives inside this cap.  Internally a
string of length L with bits b0..b(L-1) is packed into the integer
``(1 << L) | bits`` with b0 as the most significant payload bit, so
appending a bit is ``key << 1 | b`` and dropping the last bit is
``key >> 1``.  The guard bit makes lengths unambiguous ("0" != "00").
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, NamedTuple

from .errors import CapExceeded, MalformedCode, Underflow

CAP_BITS = 64

#: Packed representation of the empty string.
EMPTY_KEY = 1


def key_len(key: int) -> int:
    return key.bit_length() - 1


def key_append(key: int, bit: int) -> int:
    return (key << 1) | bit


def key_drop_last(key: int) -> int:
    return key >> 1


def key_concat(a: int, b: int) -> int:
    lb = key_len(b)
    return (a << lb) | (b ^ (1 << lb))


def key_prefix(key: int, n: int) -> int:
    return key >> (key_len(key) - n)


def key_bit(key: int, i: int) -> int:
    """Bit i counted from the front (i = 0 is the first bit written)."""
    return (key >> (key_len(key) - 1 - i)) & 1


def key_to_text(key: int) -> str:
    n = key_len(key)
    if n == 0:
        return "^"
    return format(key ^ (1 << n), f"0{n}b")


def key_from_text(text: str) -> int:
    if text in ("", "^"):
        return EMPTY_KEY
    if any(c not in "01" for c in text):
        raise ValueError(f"not a bit string: {text!r}")
    return (1 << len(text)) | int(text, 2)


def key_double(key: int) -> int:
    """Each payload bit repeated twice; used by the pair codec."""
    n = key_len(key)
    out = 1
    for i in range(n):
        b = (key >> (n - 1 - i)) & 1
        out = (out << 2) | (b << 1) | b
    return out


@dataclass(frozen=True, slots=True)
class BitString:
    """An immutable bit sequence of length 0..64.

    The empty string (the paper's lambda placeholder) renders as "^" in
    the canonical text form used by all reports and cache files.
    """

    key: int = EMPTY_KEY

    def __post_init__(self):
        if self.key < 1:
            raise ValueError("invalid packed key")
        if key_len(self.key) > CAP_BITS:
            raise CapExceeded(f"bit string longer than {CAP_BITS} bits")

    @classmethod
    def empty(cls) -> "BitString":
        return cls(EMPTY_KEY)

    @classmethod
    def from_text(cls, text: str) -> "BitString":
        return cls(key_from_text(text))

    @classmethod
    def from_bits(cls, bits) -> "BitString":
        key = EMPTY_KEY
        for b in bits:
            key = key_append(key, 1 if b else 0)
        return cls(key)

    def __len__(self) -> int:
        return key_len(self.key)

    def __iter__(self) -> Iterator[int]:
        n = len(self)
        return ((self.key >> (n - 1 - i)) & 1 for i in range(n))

    def __getitem__(self, i: int) -> int:
        n = len(self)
        if not -n <= i < n:
            raise IndexError(i)
        return key_bit(self.key, i % n)

    @property
    def text(self) -> str:
        return key_to_text(self.key)

    def __str__(self) -> str:
        return self.text

    def __repr__(self) -> str:
        return f"BitString({self.text!r})"

    def append(self, bit: int) -> "BitString":
        if len(self) >= CAP_BITS:
            raise CapExceeded("append past 64 bits")
        return BitString(key_append(self.key, 1 if bit else 0))

    def concat(self, other: "BitString") -> "BitString":
        if len(self) + len(other) > CAP_BITS:
            raise CapExceeded("concatenation past 64 bits")
        return BitString(key_concat(self.key, other.key))

    def prefix(self, n: int) -> "BitString":
        if not 0 <= n <= len(self):
            raise Underflow(f"prefix of length {n} from {len(self)} bits")
        return BitString(key_prefix(self.key, n))


class PairCode(NamedTuple):
    """Decoded pair: first component was stored doubled, second raw."""

    first: BitString
    second: BitString


def pair_encode(first: BitString, second: BitString) -> BitString:
    """Encode a pair as doubled-first + "01" terminator + raw second.

    The code length is exactly 2*|first| + 2 + |second|.  Changing one bit
    of ``first`` changes exactly two adjacent code bits, which is what
    keeps grid maps built through this codec Lipschitz.
    """
    total = 2 * len(first) + 2 + len(second)
    if total > CAP_BITS:
        raise CapExceeded(f"pair code would be {total} bits")
    key = key_double(first.key)
    key = key_append(key_append(key, 0), 1)
    return BitString(key_concat(key, second.key))


def pair_split_key(code_key: int) -> tuple[int, int] | None:
    """Packed-level pair decode; None if no terminator at an even offset."""
    n = key_len(code_key)
    first = EMPTY_KEY
    i = 0
    while i + 2 <= n:
        b0 = key_bit(code_key, i)
        b1 = key_bit(code_key, i + 1)
        if b0 == b1:
            first = key_append(first, b0)
            i += 2
            continue
        if b0 == 0 and b1 == 1:
            rest = n - i - 2
            second = (code_key & ((1 << rest) - 1)) | (1 << rest)
            return first, second
        return None  # "10" inside the doubled region
    return None


def pair_decode(code: BitString) -> PairCode:
    split = pair_split_key(code.key)
    if split is None:
        raise MalformedCode(f"no pair terminator in {code.text!r}")
    return PairCode(BitString(split[0]), BitString(split[1]))


def drop_last(s: BitString, k: int) -> BitString:
    """Prefix of s with the last k bits removed."""
    if k < 0 or k > len(s):
        raise Underflow(f"cannot drop {k} bits from {len(s)}")
    return BitString(s.key >> k)
