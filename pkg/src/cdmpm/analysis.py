"""Grammar entropy, order-1 empirical entropy and the redundancy bound checks.

All logarithms are base 2.  ``H_k`` for k >= 2 is never computed; ``k`` only
feeds the bound constant, and the per-symbol entropy reported is the order-1
conditional empirical entropy ``H_1``.
"""

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Dict, Hashable, Iterable, List, Optional

from .core import Alphabet, Params, infer_alphabet
from .transform import S, MultilevelRepresentation

# flush slack of the arithmetic coder
CODER_SLACK_BITS = 33


@dataclass
class LevelStats:
    level: int
    f_s: int  # S tokens in T_i, forced ones included
    l: int  # |T'_i|, tokens that are actually coded
    blocks: int
    classes: int


@dataclass
class EntropyReport:
    per_level: Dict[int, float]
    tallies: Dict[int, Dict[Hashable, Counter]] = field(repr=False)

    @property
    def h_g(self) -> float:
        return sum(self.per_level.values())


def level_entropy(tokens: Iterable[int], contexts: Iterable[Hashable], skip_s: bool = True) -> float:
    """Unnormalized conditional empirical entropy of tokens given their contexts.

    With ``skip_s`` the ``S`` tokens are dropped first (levels >= 1).
    """
    return _entropy_of(_tally(tokens, contexts, skip_s))


def _tally(tokens, contexts, skip_s) -> Dict[Hashable, Counter]:
    tally: Dict[Hashable, Counter] = defaultdict(Counter)
    for tok, ctx in zip(tokens, contexts):
        if skip_s and tok == S:
            continue
        tally[ctx][tok] += 1
    return dict(tally)


def _entropy_of(tally: Dict[Hashable, Counter]) -> float:
    bits = 0.0
    for counts in tally.values():
        in_class = sum(counts.values())
        for c in counts.values():
            bits += c * math.log2(in_class / c)
    return bits


def level_stats(rep: MultilevelRepresentation) -> List[LevelStats]:
    out = []
    for i in range(rep.top, -1, -1):
        seq = rep.levels[i]
        if i == 0:
            out.append(LevelStats(0, 0, len(seq), len(seq), len(set(seq.labels))))
        else:
            n_classes = len(rep.classes[i])
            out.append(LevelStats(i, seq.s_count, len(seq) - n_classes, len(seq), n_classes))
    return out


def grammar_entropy(rep: MultilevelRepresentation) -> EntropyReport:
    per_level = {}
    tallies = {}
    for i in range(rep.top, -1, -1):
        seq = rep.levels[i]
        tally = _tally(seq.tokens, seq.labels, skip_s=i > 0)
        tallies[i] = tally
        per_level[i] = _entropy_of(tally)
    return EntropyReport(per_level, tallies)


def order1_entropy(x: bytes, alphabet: Optional[Alphabet] = None) -> float:
    """Order-1 conditional empirical entropy in bits per symbol.

    The context of x_1 is a_1, the context of x_i is x_{i-1}.
    """
    n = len(x)
    if n <= 1:
        return 0.0
    if alphabet is None:
        alphabet = infer_alphabet(x)
    contexts = bytes([alphabet.first]) + x[:-1]
    return level_entropy(x, contexts, skip_s=False) / n


def theorem_constant(r: int, k: int, alphabet_size: int) -> Optional[float]:
    """20 r log|A| (r log k + r log|A| + |A|^2 + 2r + 1); None when |A| = 1."""
    if alphabet_size < 2:
        return None
    log_a = math.log2(alphabet_size)
    return 20 * r * log_a * (r * math.log2(k) + r * log_a + alphabet_size ** 2 + 2 * r + 1)


def lemma_bound(h_g: float, l: Iterable[int], alphabet_size: int) -> float:
    """H_G + 2 * sum(l_i over all levels) + |A|^2."""
    return h_g + 2 * sum(l) + alphabet_size ** 2


def lemma_bound_printed(h_g: float, l_by_level: Dict[int, int], alphabet_size: int) -> float:
    """The bound exactly as printed: H_G + 2 * sum_{i>=1} l_i - l_0 + |A|^2. Report only."""
    upper = sum(v for i, v in l_by_level.items() if i >= 1)
    return h_g + 2 * upper - l_by_level.get(0, 0) + alphabet_size ** 2


def sum_l_bound(r: int, alphabet_size: int, n: int) -> Optional[float]:
    if n < 2 or alphabet_size < 2:
        return None
    return 20 * r * r * math.log2(alphabet_size) * n / math.log2(n)


@dataclass
class RedundancyReport:
    n: int
    r: int
    i_eff: int
    mode: str
    k: int
    alphabet_size: int
    payload_bits: int
    ideal_bits: float
    h_g_bits: float
    h1_bits_per_symbol: float
    stats: List[LevelStats]
    theorem_c: Optional[float]

    @property
    def bits_per_symbol(self) -> float:
        return self.payload_bits / self.n if self.n else 0.0

    @property
    def sum_l(self) -> int:
        return sum(s.l for s in self.stats)

    @property
    def lemma_rhs_bits(self) -> float:
        return lemma_bound(self.h_g_bits, (s.l for s in self.stats), self.alphabet_size)

    @property
    def lemma_printed_rhs_bits(self) -> float:
        return lemma_bound_printed(self.h_g_bits, {s.level: s.l for s in self.stats}, self.alphabet_size)

    @property
    def lemma_pass(self) -> bool:
        return self.payload_bits <= self.lemma_rhs_bits + CODER_SLACK_BITS

    @property
    def redundancy(self) -> float:
        return self.bits_per_symbol - self.h1_bits_per_symbol

    @property
    def theorem_bound(self) -> Optional[float]:
        if self.theorem_c is None or self.n < 2:
            return None
        return self.theorem_c / math.log2(self.n)

    @property
    def theorem_pass(self) -> Optional[bool]:
        bound = self.theorem_bound
        return None if bound is None else self.redundancy <= bound

    @property
    def sum_l_bound(self) -> Optional[float]:
        return sum_l_bound(self.r, self.alphabet_size, self.n)

    @property
    def sum_l_pass(self) -> Optional[bool]:
        bound = self.sum_l_bound
        return None if bound is None else self.sum_l <= bound


def redundancy_report(x: bytes, params: Params, k: int = 1, alphabet: Optional[Alphabet] = None) -> RedundancyReport:
    from .codec import encode

    x = bytes(x)
    if alphabet is None:
        alphabet = infer_alphabet(x)
    res = encode(x, params, alphabet)
    return report_from_encoding(res, x, k)


def report_from_encoding(res, x: bytes, k: int = 1) -> RedundancyReport:
    rep = res.rep
    return RedundancyReport(
        n=rep.n,
        r=rep.params.r,
        i_eff=rep.top,
        mode=rep.params.mode.value,
        k=k,
        alphabet_size=rep.alphabet.size,
        payload_bits=res.payload_bits,
        ideal_bits=res.ideal_bits,
        h_g_bits=grammar_entropy(rep).h_g,
        h1_bits_per_symbol=order1_entropy(x, rep.alphabet),
        stats=level_stats(rep),
        theorem_c=theorem_constant(rep.params.r, k, rep.alphabet.size),
    )


def _fmt(value) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def report_text(report: RedundancyReport) -> str:
    rows = [
        ("n", report.n),
        ("r", report.r),
        ("i_eff", report.i_eff),
        ("mode", report.mode),
        ("k", report.k),
        ("alphabet_size", report.alphabet_size),
        ("payload_bits", report.payload_bits),
        ("ideal_bits", report.ideal_bits),
        ("bits_per_symbol", report.bits_per_symbol),
        ("h_g_bits", report.h_g_bits),
        ("h1_bits_per_symbol", report.h1_bits_per_symbol),
        ("lemma_rhs_bits", report.lemma_rhs_bits),
        ("lemma_printed_rhs_bits", report.lemma_printed_rhs_bits),
        ("lemma_pass", report.lemma_pass),
        ("theorem_c", report.theorem_c),
        ("theorem_bound", report.theorem_bound),
        ("redundancy", report.redundancy),
        ("theorem_pass", report.theorem_pass),
        ("sum_l", report.sum_l),
        ("sum_l_bound", report.sum_l_bound),
        ("sum_l_pass", report.sum_l_pass),
    ]
    for s in report.stats:
        rows.append((f"l_{s.level}", s.l))
        if s.level > 0:
            rows.append((f"fs_{s.level}", s.f_s))
    lines = [f"{key}: {_fmt(value)}" for key, value in rows]
    lines.append("note: h1 is the order-1 (k=1) entropy; k enters theorem_c only")
    return "\n".join(lines) + "\n"
