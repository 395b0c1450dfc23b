"""The CDMPM(r, I) grammar transform.

Each level ``i`` cuts the data into blocks of ``r**i`` symbols.  A block's
context is the content of the block before it on the same level (a fixed
``a_1 * r**i`` block for the first one); blocks sharing a context form a
class.  Inside a class the first appearance of each distinct content gets
the token ``S`` and is split into ``r`` children on the level below, later
appearances get the integer ``m`` of that content in the class's
distinct-block list.  Level 0 keeps the raw symbols.

Tokens at levels >= 1 are plain ints: ``S == 0``, ``m >= 1`` is a repeat.
Level-0 tokens are byte values.
"""

from dataclasses import dataclass
from itertools import repeat
from typing import Dict, Iterator, List, NamedTuple, Optional, Union

from .core import Alphabet, Mode, Params, infer_alphabet, rary_expansion

S = 0

_BYTE = [bytes([b]) for b in range(256)]


class ContextClass:
    """Blocks of one level sharing a context; most classes hold a single block."""

    __slots__ = ("level", "label", "context", "distinct_blocks", "first_index", "lookup")

    def __init__(self, level: int, label: int, context: bytes, block: bytes, index: int):
        """Open the class with its first block, found at ``index`` in the level."""
        self.level = level
        self.label = label
        self.context = context
        self.distinct_blocks: List[bytes] = [block]
        # block index (within the level) where each distinct content first appears
        self.first_index: List[int] = [index]
        self.lookup: Dict[bytes, int] = {block: 1}

    def __repr__(self):
        return f"ContextClass(level={self.level}, label={self.label}, distinct={len(self.distinct_blocks)})"


@dataclass
class LevelSequence:
    level: int
    block_size: int
    starts: List[int]
    blocks: List[bytes]
    contexts: List[bytes]
    labels: List[int]
    tokens: List[int]
    forced: List[bool]
    # distinct index of every block inside its class; level 0 leaves it empty
    block_ids: List[int]
    # index into the level below of the first child, -1 for non-S blocks
    child_base: List[int]
    tail_start: int

    def __len__(self):
        return len(self.tokens)

    @property
    def s_count(self) -> int:
        if self.level == 0:
            return 0
        return sum(1 for t in self.tokens if t == S)


@dataclass
class MultilevelRepresentation:
    params: Params
    alphabet: Alphabet
    n: int
    level_lengths: List[int]
    levels: List[LevelSequence]  # indexed by level number
    classes: List[Dict[int, ContextClass]]  # per level, keyed by label; level 0 empty

    @property
    def top(self) -> int:
        return len(self.levels) - 1

    def roots(self) -> List[tuple]:
        """(level, index) of every depth-first root: top blocks, then tails downwards."""
        top = self.top
        out = [(top, j) for j in range(len(self.levels[top]))]
        for i in range(top - 1, -1, -1):
            seq = self.levels[i]
            out.extend((i, j) for j in range(seq.tail_start, len(seq)))
        return out


class Entry(NamedTuple):
    level: int
    index: int
    context: int  # class label at levels >= 1, context symbol at level 0
    token: int
    forced: bool


@dataclass
class FlatStream:
    entries: List[Entry]
    per_level: Dict[int, int]

    def __len__(self):
        return len(self.entries)

    def coded(self) -> List[Entry]:
        return [e for e in self.entries if not e.forced]


class Nonterminal(NamedTuple):
    level: int
    label: int
    index: int

    def __str__(self):
        return f"N({self.level},g{self.label},{self.index})"


GrammarSymbol = Union[Nonterminal, int]


@dataclass
class Grammar:
    start: List[GrammarSymbol]
    productions: Dict[Nonterminal, List[GrammarSymbol]]

    def expand(self) -> bytes:
        memo: Dict[Nonterminal, bytes] = {}

        def derive(sym):
            if not isinstance(sym, Nonterminal):
                return bytes([sym])
            if sym not in memo:
                memo[sym] = b"".join(derive(s) for s in self.productions[sym])
            return memo[sym]

        return b"".join(derive(s) for s in self.start)

    def render(self) -> str:
        def show(sym):
            return str(sym) if isinstance(sym, Nonterminal) else render_block(bytes([sym]))

        lines = ["start -> " + (" ".join(show(s) for s in self.start) or "eps")]
        for nt, rhs in self.productions.items():
            lines.append(f"{nt} -> " + " ".join(show(s) for s in rhs))
        return "\n".join(lines)


def build_multilevel(x: bytes, params: Params, alphabet: Optional[Alphabet] = None) -> MultilevelRepresentation:
    x = bytes(x)
    if alphabet is None:
        alphabet = infer_alphabet(x)
    alphabet.validate(x)
    n = len(x)
    r = params.r
    lengths = rary_expansion(n, r, params.levels)
    top = len(lengths) - 1
    context_free = params.mode is Mode.MPM
    a1 = alphabet.first

    seg_start = {}
    pos = 0
    for depth, length in enumerate(lengths):
        seg_start[top - depth] = pos
        pos += length

    levels: List[Optional[LevelSequence]] = [None] * (top + 1)
    classes: List[Dict[int, ContextClass]] = [dict() for _ in range(top + 1)]
    parent: Optional[LevelSequence] = None
    for i in range(top, -1, -1):
        size = r ** i
        starts: List[int] = []
        if parent is not None:
            child_base = parent.child_base
            for j, tok in enumerate(parent.tokens):
                if tok == S:
                    child_base[j] = len(starts)
                    s0 = parent.starts[j]
                    starts.extend(range(s0, s0 + r * size, size))
        tail_start = len(starts)
        lo = seg_start[i]
        starts.extend(range(lo, lo + lengths[top - i], size))

        if i == 0:
            levels[0] = _level_zero(x, starts, tail_start, a1, context_free)
        else:
            levels[i] = _label_level(x, i, size, starts, tail_start, a1, context_free, classes[i])
        parent = levels[i]

    return MultilevelRepresentation(params, alphabet, n, lengths, levels, classes)


def _label_level(x, i, size, starts, tail_start, a1, context_free, classes) -> LevelSequence:
    initial = bytes([a1]) * size
    blocks = [x[s:s + size] for s in starts]
    contexts = [initial] * len(blocks) if context_free else [initial] + blocks[:-1]
    opened: Dict[bytes, tuple] = {}  # context -> (label, class, its lookup)
    labels, tokens, forced, ids = [], [], [], []
    for j, (blk, ctx) in enumerate(zip(blocks, contexts)):
        entry = opened.get(ctx)
        if entry is None:
            label = len(opened) + 1
            cls = classes[label] = ContextClass(i, label, ctx, blk, j)
            opened[ctx] = (label, cls, cls.lookup)
            tokens.append(S)
            forced.append(True)
            ids.append(1)
            labels.append(label)
            continue
        label, cls, lookup = entry
        m = lookup.get(blk)
        if m is None:
            cls.distinct_blocks.append(blk)
            cls.first_index.append(j)
            m = lookup[blk] = len(cls.distinct_blocks)
            tokens.append(S)
        else:
            tokens.append(m)
        forced.append(False)
        ids.append(m)
        labels.append(label)
    return LevelSequence(i, size, starts, blocks, contexts, labels, tokens, forced, ids,
                         [-1] * len(tokens), tail_start)


def _level_zero(x, starts, tail_start, a1, context_free) -> LevelSequence:
    tokens = [x[s] for s in starts]
    if context_free:
        ctx_syms = [a1] * len(tokens)
    else:
        ctx_syms = ([a1] + tokens)[:len(tokens)]
    return LevelSequence(
        0, 1, starts,
        blocks=[_BYTE[t] for t in tokens],
        contexts=[_BYTE[c] for c in ctx_syms],
        labels=ctx_syms,
        tokens=tokens,
        forced=[False] * len(tokens),
        block_ids=[],
        child_base=[],
        tail_start=tail_start,
    )


def walk_entries(rep: MultilevelRepresentation) -> Iterator[tuple]:
    """Depth-first ``(level, index, context, token, forced)`` tuples.

    Every S block is followed by its r children; tail roots come after all
    higher-level work.  Blocks of each level surface in sequence order.
    """
    r = rep.params.r
    levels = rep.levels
    labels = [seq.labels for seq in levels]
    tokens = [seq.tokens for seq in levels]
    forced = [seq.forced for seq in levels]
    bases = [seq.child_base for seq in levels]
    expected = [0] * len(levels)
    stack = list(reversed(rep.roots()))
    pop = stack.pop
    push = stack.extend
    while stack:
        i, j = pop()
        if j != expected[i]:
            raise AssertionError(f"depth-first order broke level {i}: block {j}, expected {expected[i]}")
        expected[i] = j + 1
        yield i, j, labels[i][j], tokens[i][j], forced[i][j]
        if i:
            base = bases[i][j]
            if base >= 0:
                push(zip(repeat(i - 1), range(base + r - 1, base - 1, -1)))
    for i, seq in enumerate(levels):
        if expected[i] != len(seq):
            raise AssertionError(f"level {i}: visited {expected[i]} of {len(seq)} blocks")


def flatten(rep: MultilevelRepresentation) -> FlatStream:
    entries = [Entry._make(t) for t in walk_entries(rep)]
    return FlatStream(entries, {i: len(seq) for i, seq in enumerate(rep.levels)})


def _nonterminal(seq: LevelSequence, j: int) -> Nonterminal:
    return Nonterminal(seq.level, seq.labels[j], seq.block_ids[j])


def _symbol(rep, i, j) -> GrammarSymbol:
    seq = rep.levels[i]
    return seq.tokens[j] if i == 0 else _nonterminal(seq, j)


def grammar_dump(rep: MultilevelRepresentation) -> Grammar:
    r = rep.params.r
    productions: Dict[Nonterminal, List[GrammarSymbol]] = {}
    for i in range(rep.top, 0, -1):
        seq = rep.levels[i]
        for j, tok in enumerate(seq.tokens):
            if tok == S:
                base = seq.child_base[j]
                productions[_nonterminal(seq, j)] = [_symbol(rep, i - 1, base + c) for c in range(r)]
    start = [_symbol(rep, i, j) for i, j in rep.roots()]
    return Grammar(start, productions)


def expand(rep: MultilevelRepresentation) -> bytes:
    """Rebuild the input from tokens, child links and Repeat resolution alone."""
    r = rep.params.r
    levels = rep.levels
    memo: Dict[tuple, bytes] = {}

    def content(i, j):
        seq = levels[i]
        if i == 0:
            return bytes([seq.tokens[j]])
        tok = seq.tokens[j]
        if tok != S:
            cls = rep.classes[i][seq.labels[j]]
            if not 1 <= tok <= len(cls.first_index) or cls.first_index[tok - 1] >= j:
                raise AssertionError(f"dangling Repeat({tok}) at level {i} block {j}")
            j = cls.first_index[tok - 1]
        key = (i, j)
        if key not in memo:
            base = seq.child_base[j]
            memo[key] = b"".join(content(i - 1, base + c) for c in range(r))
        return memo[key]

    return b"".join(content(i, j) for i, j in rep.roots())


def render_block(block: bytes) -> str:
    return "".join(chr(b) if 33 <= b < 127 and b != 0x5C else f"\\x{b:02x}" for b in block)


def token_text(level: int, token: int, forced: bool) -> str:
    if level == 0:
        return render_block(bytes([token]))
    if token == S:
        return "s*" if forced else "s"
    return str(token)


def trace_text(rep: MultilevelRepresentation, stream: Optional[FlatStream] = None) -> str:
    """Per-level dump of blocks, context labels and tokens, then the coded L line."""
    if stream is None:
        stream = flatten(rep)
    lines = [f"n={rep.n} r={rep.params.r} levels={rep.top} mode={rep.params.mode.value} "
             f"alphabet={render_block(rep.alphabet.symbols)}"]
    for i in range(rep.top, -1, -1):
        seq = rep.levels[i]
        if i == 0:
            ctx = " ".join(render_block(bytes([c])) for c in seq.labels)
        else:
            ctx = " ".join(str(c) for c in seq.labels)
        lines.append(
            f"level {i} | X: {' '.join(render_block(b) for b in seq.blocks)}"
            f" | C: {ctx}"
            f" | T: {' '.join(token_text(i, t, f) for t, f in zip(seq.tokens, seq.forced))}"
        )
    lines.append("L: " + " ".join(token_text(e.level, e.token, False) for e in stream.coded()))
    return "\n".join(lines) + "\n"
