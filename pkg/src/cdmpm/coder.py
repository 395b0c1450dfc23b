"""Adaptive count models and a 32-bit integer arithmetic coder.

Class models code the level >= 1 tokens of one (level, context class) pair
over ``[s, 1, ..., d]``; index 0 of the table is ``s``, index ``m`` is
``Repeat(m)``.  Level-0 models hold one table per context symbol over the
whole alphabet in index order.
"""

from bisect import bisect_right
from itertools import accumulate
from typing import Dict, Iterable, List, Sequence, Tuple

from .errors import DesyncError

MAX_TOTAL = 1 << 16

STATE_BITS = 32
FULL = (1 << STATE_BITS) - 1
HALF = 1 << (STATE_BITS - 1)
QUARTER = 1 << (STATE_BITS - 2)
THREE_QUARTERS = HALF + QUARTER

# decoder may read this many zero bits past the payload before calling it a desync
OVERREAD_LIMIT = STATE_BITS


class FrequencyTable:
    """Appendable count table with prefix sums and search.

    Small tables work on the plain list.  Larger ones also keep per-block
    sums over blocks of about sqrt(n) entries, so increments are O(1) and
    prefix sums / searches are two C-level passes of O(sqrt n).
    """

    SMALL = 32
    __slots__ = ("counts", "total", "_blocks", "_shift")

    def __init__(self, counts: Sequence[int]):
        self.counts = list(counts)
        self._rebuild()

    def _rebuild(self):
        counts = self.counts
        size = len(counts)
        self.total = sum(counts)
        if size <= self.SMALL:
            self._blocks = None
            return
        shift = max(4, (size.bit_length() + 1) // 2)
        width = 1 << shift
        self._shift = shift
        self._blocks = [sum(counts[lo:lo + width]) for lo in range(0, size, width)]

    def __len__(self):
        return len(self.counts)

    def cumulative(self, idx: int) -> int:
        """Sum of counts[0:idx]."""
        blocks = self._blocks
        if blocks is None:
            return sum(self.counts[:idx])
        b = idx >> self._shift
        return sum(blocks[:b]) + sum(self.counts[b << self._shift:idx])

    def interval(self, idx: int) -> Tuple[int, int]:
        return self.cumulative(idx), self.counts[idx]

    def add(self, idx: int, delta: int):
        self.counts[idx] += delta
        self.total += delta
        if self._blocks is not None:
            self._blocks[idx >> self._shift] += delta

    def append(self, count: int):
        counts = self.counts
        counts.append(count)
        self.total += count
        blocks = self._blocks
        if blocks is None:
            if len(counts) > self.SMALL:
                self._rebuild()
            return
        b = (len(counts) - 1) >> self._shift
        if b < len(blocks):
            blocks[b] += count
        elif b >= 4 << self._shift:
            self._rebuild()
        else:
            blocks.append(count)

    def find(self, target: int) -> Tuple[int, int, int]:
        """Index whose interval holds ``target``, with its (cum_low, count)."""
        counts = self.counts
        blocks = self._blocks
        if blocks is None:
            cum = list(accumulate(counts))
            pos = bisect_right(cum, target)
            c = counts[pos]
            return pos, cum[pos] - c, c
        ends = list(accumulate(blocks))
        b = bisect_right(ends, target)
        shift = self._shift
        lo = b << shift
        seg = counts[lo:lo + (1 << shift)]
        cum = list(accumulate(seg, initial=ends[b] - blocks[b]))
        k = bisect_right(cum, target) - 1
        return lo + k, cum[k], seg[k]

    def halve(self):
        self.counts = [(c + 1) >> 1 for c in self.counts]
        self._rebuild()


class ClassModel:
    """Counter table C(beta) of one context class, beta in {s, 1..d}.

    ``s`` sits at interval position 0 but its count is kept apart from the
    repeat counts, so the frequent S updates cost O(1).
    """

    __slots__ = ("level", "label", "count_s", "repeats")

    def __init__(self, level: int = 1, label: int = 1):
        self.level = level
        self.label = label
        self.count_s = 1
        self.repeats = FrequencyTable([1])

    @property
    def d(self) -> int:
        return len(self.repeats.counts)

    @property
    def repeat_counts(self) -> List[int]:
        return list(self.repeats.counts)

    @property
    def total(self) -> int:
        return self.count_s + self.repeats.total

    def intervals(self) -> List[Tuple[int, int, int, int]]:
        total = self.total
        out = [(0, 0, self.count_s, total)]
        cum = self.count_s
        for m, count in enumerate(self.repeats.counts, 1):
            out.append((m, cum, count, total))
            cum += count
        return out

    def interval(self, token: int) -> Tuple[int, int, int]:
        count_s = self.count_s
        repeats = self.repeats
        total = count_s + repeats.total
        if token == 0:
            return 0, count_s, total
        if not 0 < token <= len(repeats.counts):
            raise DesyncError(f"Repeat({token}) out of range, class has {self.d} distinct blocks")
        return count_s + repeats.cumulative(token - 1), repeats.counts[token - 1], total

    def find(self, target: int) -> Tuple[int, int, int]:
        count_s = self.count_s
        if target < count_s:
            return 0, 0, count_s
        idx, cum, count = self.repeats.find(target - count_s)
        return idx + 1, cum + count_s, count

    def update(self, token: int):
        repeats = self.repeats
        if not 0 <= token <= len(repeats.counts):
            raise DesyncError(f"Repeat({token}) out of range, class has {self.d} distinct blocks")
        grow = 2 if token == 0 else 1
        if self.count_s + repeats.total + grow > MAX_TOTAL:
            self.count_s = (self.count_s + 1) >> 1
            repeats.halve()
        if token == 0:
            self.count_s += 1
            repeats.append(1)
        else:
            repeats.add(token - 1, 1)

    def state(self) -> tuple:
        return (self.count_s, *self.repeats.counts)


class Level0Model:
    """Per-context symbol counters; every count starts at 1."""

    def __init__(self, size: int):
        self.size = size
        self.tables: Dict[int, FrequencyTable] = {}

    def table(self, context: int) -> FrequencyTable:
        t = self.tables.get(context)
        if t is None:
            t = self.tables[context] = FrequencyTable([1] * self.size)
        return t

    def intervals(self, context: int) -> List[Tuple[int, int, int, int]]:
        t = self.table(context)
        out = []
        cum = 0
        for idx, count in enumerate(t.counts):
            out.append((idx, cum, count, t.total))
            cum += count
        return out

    def interval(self, context: int, idx: int) -> Tuple[int, int, int]:
        t = self.table(context)
        if not 0 <= idx < self.size:
            raise AssertionError(f"symbol index {idx} outside alphabet of {self.size}")
        return t.cumulative(idx), t.counts[idx], t.total

    def update(self, context: int, idx: int):
        self.bump(self.table(context), idx)

    @staticmethod
    def bump(t: FrequencyTable, idx: int):
        if t.total + 1 > MAX_TOTAL:
            t.halve()
        t.add(idx, 1)

    def state(self, context: int) -> tuple:
        return tuple(self.table(context).counts)


class BitWriter:
    """MSB-first bit sink; the last byte is zero-padded."""

    def __init__(self):
        self.buf = bytearray()
        self._acc = 0
        self._n = 0
        self.bits = 0

    def write(self, bit: int):
        self.write_bits(bit, 1)

    def write_run(self, bit: int, follow: int):
        """Write ``bit`` then ``follow`` copies of its complement."""
        self.write_bits((1 << follow) if bit else (1 << follow) - 1, follow + 1)

    def write_bits(self, value: int, width: int):
        acc = (self._acc << width) | value
        n = self._n + width
        self.bits += width
        if n >= 64:
            rest = n & 7
            self.buf += (acc >> rest).to_bytes(n >> 3, "big")
            acc &= (1 << rest) - 1
            n = rest
        self._acc = acc
        self._n = n

    def getvalue(self) -> bytes:
        n = self._n
        if not n:
            return bytes(self.buf)
        pad = -n % 8
        return bytes(self.buf) + (self._acc << pad).to_bytes((n + pad) >> 3, "big")


class BitReader:
    """MSB-first bit source yielding zeros past the end, up to OVERREAD_LIMIT bits."""

    __slots__ = ("nbits", "data", "pos")

    def __init__(self, data: bytes):
        self.nbits = len(data) * 8
        self.data = bytes(data) + bytes(OVERREAD_LIMIT // 8 + 8)
        self.pos = 0

    def read_bits(self, width: int) -> int:
        pos = self.pos
        end = pos + width
        if end - self.nbits > OVERREAD_LIMIT:
            raise DesyncError("payload exhausted")
        self.pos = end
        b1 = (end + 7) >> 3
        chunk = int.from_bytes(self.data[pos >> 3:b1], "big")
        return (chunk >> (b1 * 8 - end)) & ((1 << width) - 1)

    def read(self) -> int:
        return self.read_bits(1)


class ArithmeticEncoder:
    def __init__(self):
        self.low = 0
        self.high = FULL
        self.pending = 0
        self.out = BitWriter()

    def encode(self, cum_low: int, count: int, total: int):
        self.encode_all(((cum_low, count, total),))

    def encode_all(self, triples: Iterable[Tuple[int, int, int]]):
        """Code every (cum_low, count, total) interval drawn from ``triples``."""
        low = self.low
        high = self.high
        pending = self.pending
        write_bits = self.out.write_bits
        try:
            for cum_low, count, total in triples:
                if count <= 0 or cum_low < 0 or cum_low + count > total or total > MAX_TOTAL:
                    raise ValueError(f"bad interval ({cum_low}, {count}, {total})")
                rng = high - low + 1
                high = low + rng * (cum_low + count) // total - 1
                low = low + rng * cum_low // total
                # leading bits shared by low and high are settled: emit them in
                # one go, the first one releasing any pending underflow bits
                k = STATE_BITS - (low ^ high).bit_length()
                if k:
                    settled = low >> (STATE_BITS - k)
                    if pending:
                        # first bit, then `pending` copies of its complement, then the rest
                        rest = k - 1
                        first = settled >> rest
                        run = 0 if first else (1 << pending) - 1
                        settled = (((first << pending) | run) << rest) | (settled & ((1 << rest) - 1))
                    write_bits(settled, k + pending)
                    pending = 0
                    low = (low << k) & FULL
                    high = ((high << k) & FULL) | ((1 << k) - 1)
                # low = 01..., high = 10...: straddling the midpoint, defer a bit
                while low >= QUARTER and high < THREE_QUARTERS:
                    pending += 1
                    low = (low - QUARTER) << 1
                    high = ((high - QUARTER) << 1) | 1
        finally:
            self.low = low
            self.high = high
            self.pending = pending

    def finish(self) -> bytes:
        """Emit the disambiguating tail bits and return the padded payload."""
        self.pending += 1
        self.out.write_run(0 if self.low < QUARTER else 1, self.pending)
        self.pending = 0
        return self.out.getvalue()

    @property
    def bits(self) -> int:
        return self.out.bits


class ArithmeticDecoder:
    __slots__ = ("reader", "low", "high", "value")

    def __init__(self, payload: bytes):
        self.reader = BitReader(payload)
        self.low = 0
        self.high = FULL
        self.value = self.reader.read_bits(STATE_BITS)

    def target(self, total: int) -> int:
        rng = self.high - self.low + 1
        t = ((self.value - self.low + 1) * total - 1) // rng
        if not 0 <= t < total:
            raise DesyncError("code value left the coding interval")
        return t

    def decode_from(self, table) -> Tuple[int, int, int]:
        """Decode one index coded against ``table``; returns (index, count, total).

        ``table`` is anything with ``total`` and ``find(target)``.
        """
        total = table.total
        low = self.low
        rng = self.high - low + 1
        t = ((self.value - low + 1) * total - 1) // rng
        if not 0 <= t < total:
            raise DesyncError("code value left the coding interval")
        idx, cum, count = table.find(t)
        # same steps as _narrow, inlined on the hot path
        high = low + rng * (cum + count) // total - 1
        low = low + rng * cum // total
        k = STATE_BITS - (low ^ high).bit_length()
        if k:
            low = (low << k) & FULL
            high = ((high << k) & FULL) | ((1 << k) - 1)
        e = 0
        while low >= QUARTER and high < THREE_QUARTERS:
            low = (low - QUARTER) << 1
            high = ((high - QUARTER) << 1) | 1
            e += 1
        self.low = low
        self.high = high
        width = k + e
        if width:
            reader = self.reader
            pos = reader.pos
            end = pos + width
            if end - reader.nbits > OVERREAD_LIMIT:
                raise DesyncError("payload exhausted")
            reader.pos = end
            last = (end + 7) >> 3
            bits = (int.from_bytes(reader.data[pos >> 3:last], "big") >> ((last << 3) - end)) & ((1 << width) - 1)
            self.value = (((self.value << k) & FULL) << e) - HALF * ((1 << e) - 1) + bits
        return idx, count, total

    def consume(self, cum_low: int, count: int, total: int):
        self._narrow(self.low, self.high - self.low + 1, cum_low, count, total)

    def _narrow(self, low, rng, cum_low, count, total):
        high = low + rng * (cum_low + count) // total - 1
        low = low + rng * cum_low // total
        k = STATE_BITS - (low ^ high).bit_length()
        if k:
            low = (low << k) & FULL
            high = ((high << k) & FULL) | ((1 << k) - 1)
        e = 0
        while low >= QUARTER and high < THREE_QUARTERS:
            low = (low - QUARTER) << 1
            high = ((high - QUARTER) << 1) | 1
            e += 1
        self.low = low
        self.high = high
        width = k + e
        if width:
            # k plain shifts, then e underflow steps x -> 2x - HALF, fed by one read
            value = ((self.value << k) & FULL) << e
            self.value = value - HALF * ((1 << e) - 1) + self.reader.read_bits(width)


def encode_intervals(triples) -> Tuple[bytes, int]:
    """Code a sequence of (cum_low, count, total); returns (payload, emitted bits)."""
    enc = ArithmeticEncoder()
    for cum, count, total in triples:
        enc.encode(cum, count, total)
    payload = enc.finish()
    return payload, enc.bits
