"""Container format, encoder and depth-first decoder.

Layout (big-endian)::

    0..3   magic b"CDMP"
    4      version (1)
    5      flags, bit 0 set = CDMPM, clear = MPM; other bits zero
    6      r (2..255)
    7      requested level count I (0..63)
    8..15  n, number of input symbols
    16..17 alphabet size minus one (0..255)
    ...    alphabet symbols in index order
    ...    arithmetic-coded payload, MSB-first, zero-padded
"""

import math
import struct
from dataclasses import dataclass
from itertools import repeat
from typing import Callable, List, NamedTuple, Optional, Tuple

from .coder import MAX_TOTAL, ArithmeticDecoder, ArithmeticEncoder, ClassModel, Level0Model
from .core import Alphabet, Mode, Params, infer_alphabet, rary_expansion
from .errors import CorruptContainerError, InputValidationError
from .transform import S, MultilevelRepresentation, build_multilevel

MAGIC = b"CDMP"
VERSION = 1
FLAG_CONTEXT = 0x01
MAX_LEVELS = 63
_FIXED = struct.Struct(">4sBBBBQH")


class CodingEvent(NamedTuple):
    """One coded token, reported after the model update."""

    level: int
    context: int
    token: int  # S / Repeat index at levels >= 1, alphabet position at level 0
    count: int
    total: int
    state: tuple


Observer = Callable[[CodingEvent], None]


@dataclass
class EncodeResult:
    container: bytes
    header_size: int
    payload_bits: int  # emitted by the coder, before byte padding
    ideal_bits: float  # sum of -log2(count/total) over coded tokens
    coded_tokens: int
    rep: MultilevelRepresentation

    @property
    def payload(self) -> bytes:
        return self.container[self.header_size:]


def write_header(params: Params, n: int, alphabet: Alphabet) -> bytes:
    if not 2 <= params.r <= 255:
        raise InputValidationError("r must be in 2..255 to fit the container")
    if not 0 <= params.levels <= MAX_LEVELS:
        raise InputValidationError(f"level count must be in 0..{MAX_LEVELS}")
    if n >= 1 << 64:
        raise InputValidationError("input too long for the container")
    flags = FLAG_CONTEXT if params.mode is Mode.CDMPM else 0
    return _FIXED.pack(MAGIC, VERSION, flags, params.r, params.levels, n, alphabet.size - 1) + alphabet.symbols


def _read_header(data: bytes) -> Tuple[Params, int, Alphabet, int]:
    if len(data) < _FIXED.size:
        raise CorruptContainerError("truncated header")
    magic, version, flags, r, levels, n, size_m1 = _FIXED.unpack_from(data)
    if magic != MAGIC:
        raise CorruptContainerError(f"bad magic {magic!r}")
    if version != VERSION:
        raise CorruptContainerError(f"unsupported container version {version}")
    if flags & ~FLAG_CONTEXT:
        raise CorruptContainerError(f"reserved flag bits set: 0x{flags:02x}")
    if r < 2:
        raise CorruptContainerError(f"bad branching factor r={r}")
    if levels > MAX_LEVELS:
        raise CorruptContainerError(f"bad level count {levels}")
    if size_m1 > 255:
        raise CorruptContainerError(f"bad alphabet size {size_m1 + 1}")
    end = _FIXED.size + size_m1 + 1
    if len(data) < end:
        raise CorruptContainerError("truncated alphabet table")
    try:
        alphabet = Alphabet(bytes(data[_FIXED.size:end]))
    except InputValidationError as exc:
        raise CorruptContainerError(str(exc)) from None
    mode = Mode.CDMPM if flags & FLAG_CONTEXT else Mode.MPM
    return Params(r, levels, mode), n, alphabet, end


def parse_header(data: bytes) -> Tuple[Params, int, Alphabet]:
    params, n, alphabet, _ = _read_header(data)
    return params, n, alphabet


def encode(x: bytes, params: Params, alphabet: Optional[Alphabet] = None,
           observer: Optional[Observer] = None) -> EncodeResult:
    x = bytes(x)
    if alphabet is None:
        alphabet = infer_alphabet(x)
    header = write_header(params, len(x), alphabet)
    rep = build_multilevel(x, params, alphabet)
    if not x:
        return EncodeResult(header, len(header), 0, 0.0, 0, rep)

    intervals, events = _level_intervals(rep, alphabet, observer)
    triples = _interleave(rep, intervals)
    expected = sum(len(seq) - seq.forced.count(True) for seq in rep.levels)
    if len(triples) != expected:
        raise AssertionError(f"interleaving produced {len(triples)} of {expected} intervals")
    enc = ArithmeticEncoder()
    enc.encode_all(triples)
    payload = enc.finish()
    if observer:
        for event in _interleave(rep, events):
            observer(event)
    log2 = math.log2
    ideal = sum(log2(total / count) for _, count, total in triples)
    return EncodeResult(header + payload, len(header), enc.bits, ideal, len(triples), rep)


def _level_intervals(rep, alphabet, observer):
    """Coding intervals of every level, in sequence order; None marks a forced S.

    Each model only ever sees the tokens of its own level in sequence order,
    so the intervals can be computed level by level and interleaved later.
    Returns (intervals, events) per level; events is None without an observer.
    """
    levels = rep.levels
    intervals: List[list] = [[] for _ in levels]
    events: Optional[List[list]] = [[] for _ in levels] if observer else None

    level0 = Level0Model(alphabet.size)
    tables = level0.tables
    index = alphabet.index_table()
    out = intervals[0]
    seq = levels[0]
    for context, sym in zip(seq.labels, seq.tokens):
        token = index[sym]
        table = tables.get(context) or level0.table(context)
        counts = table.counts
        total = table.total
        count = counts[token]
        if table._blocks is None:
            out.append((sum(counts[:token]), count, total))
        else:
            out.append((table.cumulative(token), count, total))
        if total >= MAX_TOTAL:
            table.halve()
        table.add(token, 1)
        if observer:
            events[0].append(CodingEvent(0, context, token, count, total, level0.state(context)))

    for i in range(1, len(levels)):
        seq = levels[i]
        out = intervals[i]
        # created on first coded token; a forced S only opens the class
        models = {}
        for label, token, forced in zip(seq.labels, seq.tokens, seq.forced):
            if forced:
                out.append(None)
                if observer:
                    events[i].append(None)
                continue
            model = models.get(label)
            if model is None:
                model = models[label] = ClassModel(i, label)
            triple = model.interval(token)
            out.append(triple)
            model.update(token)
            if observer:
                events[i].append(CodingEvent(i, label, token, triple[1], triple[2], model.state()))
    return intervals, events


def _interleave(rep, per_level) -> list:
    """Merge per-level items into depth-first coding order, dropping None."""
    r = rep.params.r
    levels = rep.levels
    l0 = per_level[0]
    out = []
    append = out.append
    extend = out.extend
    bases = [seq.child_base for seq in levels]
    stack = [ij for ij in reversed(rep.roots()) if ij[0]]
    pop = stack.pop
    push = stack.extend
    while stack:
        i, j = pop()
        item = per_level[i][j]
        if item is not None:
            append(item)
        base = bases[i][j]
        if base >= 0:
            if i == 1:
                extend(l0[base:base + r])
            else:
                push(zip(repeat(i - 1), range(base + r - 1, base - 1, -1)))
    extend(l0[levels[0].tail_start:])
    return out


def compress(x: bytes, params: Params, alphabet: Optional[Alphabet] = None) -> bytes:
    return encode(x, params, alphabet).container


def decompress(data: bytes, observer: Optional[Observer] = None) -> bytes:
    params, n, alphabet, offset = _read_header(data)
    if n == 0:
        return b""
    payload = bytes(data[offset:])
    r = params.r
    lengths = rary_expansion(n, r, params.levels)
    top = len(lengths) - 1
    context_free = params.mode is Mode.MPM
    a1 = alphabet.first
    symbols = alphabet.symbols
    dec = ArithmeticDecoder(payload)
    level0 = Level0Model(alphabet.size)
    tables = level0.tables
    decode_from = dec.decode_from
    initial = [bytes([a1]) * r ** i for i in range(top + 1)]
    prev = list(initial)
    prev0 = a1
    # per level: context -> [label, model or None, distinct contents]
    classes: List[dict] = [dict() for _ in range(top + 1)]

    def run(count):
        """Decode ``count`` consecutive level-0 symbols."""
        nonlocal prev0
        out = bytearray(count)
        ctx = prev0
        for k in range(count):
            if context_free:
                ctx = a1
            table = tables.get(ctx) or level0.table(ctx)
            idx, c, total = decode_from(table)
            if total >= MAX_TOTAL:
                table.halve()
            if table._blocks is None:
                table.counts[idx] += 1
                table.total += 1
            else:
                table.add(idx, 1)
            if observer:
                observer(CodingEvent(0, ctx, idx, c, total, level0.state(ctx)))
            ctx = out[k] = symbols[idx]
        prev0 = ctx
        return bytes(out)

    def block(i):
        ctx = initial[i] if context_free else prev[i]
        cls = classes[i].get(ctx)
        if cls is None:
            # a new class: its first block is a forced S, never coded
            distinct = []
            classes[i][ctx] = [len(classes[i]) + 1, None, distinct]
            token = S
        else:
            label, model, distinct = cls
            if model is None:
                model = cls[1] = ClassModel(i, label)
            token, count, total = decode_from(model)
            model.update(token)
            if observer:
                observer(CodingEvent(i, label, token, count, total, model.state()))
        if token == S:
            if i == 1:
                content = run(r)
            else:
                content = b"".join([block(i - 1) for _ in range(r)])
            distinct.append(content)
        else:
            content = distinct[token - 1]
        prev[i] = content
        return content

    out = []
    if top == 0:
        out.append(run(n))
    else:
        for _ in range(lengths[0] // r ** top):
            out.append(block(top))
    for depth in range(1, top + 1):
        i = top - depth
        if i == 0:
            out.append(run(lengths[depth]))
            break
        for _ in range(lengths[depth] // r ** i):
            out.append(block(i))
    result = b"".join(out)
    if len(result) != n:
        raise AssertionError(f"decoded {len(result)} symbols, header says {n}")
    return result
