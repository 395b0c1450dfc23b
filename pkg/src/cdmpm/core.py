"""Alphabets, parameters and the r-ary split of the input into per-level substrings."""

import enum
from dataclasses import dataclass
from typing import List, Sequence

from .errors import InputValidationError


class Mode(enum.Enum):
    CDMPM = "cdmpm"
    MPM = "mpm"


@dataclass(frozen=True)
class Alphabet:
    """Ordered set of distinct byte values. Index 1 is ``symbols[0]``."""

    symbols: bytes

    def __post_init__(self):
        if not 1 <= len(self.symbols) <= 256:
            raise InputValidationError("alphabet must hold 1..256 symbols")
        if len(set(self.symbols)) != len(self.symbols):
            raise InputValidationError("alphabet symbols must be distinct")

    @property
    def size(self) -> int:
        return len(self.symbols)

    @property
    def first(self) -> int:
        """a_1, the symbol used to build fixed initial contexts."""
        return self.symbols[0]

    def index_table(self) -> List[int]:
        """Map byte value -> 0-based alphabet position, -1 for foreign bytes."""
        table = [-1] * 256
        for pos, sym in enumerate(self.symbols):
            table[sym] = pos
        return table

    def index(self, symbol: int) -> int:
        """1-based index of ``symbol``."""
        pos = self.symbols.find(bytes([symbol]))
        if pos < 0:
            raise InputValidationError(f"symbol 0x{symbol:02x} not in alphabet")
        return pos + 1

    def validate(self, x: bytes) -> None:
        foreign = set(x) - set(self.symbols)
        if foreign:
            raise InputValidationError(
                "input holds symbols outside the alphabet: "
                + ", ".join(f"0x{b:02x}" for b in sorted(foreign))
            )


@dataclass(frozen=True)
class Params:
    r: int = 2
    levels: int = 1
    mode: Mode = Mode.CDMPM

    def __post_init__(self):
        if self.r < 2:
            raise InputValidationError("r must be >= 2")
        if self.levels < 0:
            raise InputValidationError("level count must be >= 0")

    def effective_levels(self, n: int) -> int:
        return min(self.levels, max_levels(n, self.r))


def max_levels(n: int, r: int) -> int:
    """floor(log_r n), with 0 for n <= 1. Exact integer arithmetic."""
    k = 0
    p = r
    while p <= n:
        p *= r
        k += 1
    return k


def rary_expansion(n: int, r: int, levels: int) -> List[int]:
    """Split ``n`` by its base-``r`` digits into ``[n_I, ..., n_0]``.

    ``I`` is clamped to floor(log_r n). ``n_I`` gathers every digit at
    position >= I; each lower entry is ``h_i * r**i``.

    >>> rary_expansion(11, 2, 2)
    [8, 2, 1]
    >>> rary_expansion(5, 2, 3)
    [4, 0, 1]
    """
    if r < 2:
        raise InputValidationError("r must be >= 2")
    top = min(levels, max_levels(n, r)) if n >= 1 else 0
    lengths = []
    rest = n
    for i in range(0, top):
        digit = (rest // r**i) % r
        lengths.append(digit * r**i)
        rest -= digit * r**i
    lengths.append(rest)
    lengths.reverse()
    return lengths


def top_partition(x: Sequence, lengths: Sequence[int]) -> list:
    """Cut ``x`` into consecutive slices of the given lengths, highest level first."""
    if sum(lengths) != len(x):
        raise AssertionError(f"level lengths sum to {sum(lengths)}, input has {len(x)}")
    parts = []
    pos = 0
    for length in lengths:
        parts.append(x[pos:pos + length])
        pos += length
    return parts


def infer_alphabet(x: bytes) -> Alphabet:
    """Distinct bytes of ``x`` in ascending order; ``{0x00}`` for empty input."""
    present = sorted(set(x))
    if not present:
        present = [0]
    return Alphabet(bytes(present))
