"""Deterministic test corpora built from a seeded linear congruential generator."""

import time
from dataclasses import dataclass
from typing import Callable, Dict, Iterator, List, Optional, Tuple

from .analysis import RedundancyReport, report_from_encoding
from .codec import decompress, encode
from .core import Mode, Params
from .errors import CDMPMError

# Numerical Recipes LCG: state <- (A * state + C) mod 2**32
LCG_A = 1664525
LCG_C = 1013904223
LCG_MASK = (1 << 32) - 1

MAX_LEVELS_REQUEST = 63  # clamped to floor(log_r n) by the transform


class LCG:
    def __init__(self, seed: int = 1):
        self.state = seed & LCG_MASK

    def next(self) -> int:
        self.state = (LCG_A * self.state + LCG_C) & LCG_MASK
        return self.state

    def below(self, k: int) -> int:
        """Uniform-ish integer in [0, k), from the high bits."""
        return (self.next() * k) >> 32

    def random(self) -> float:
        return self.next() / (1 << 32)


def _symbols(k: int) -> bytes:
    return bytes(range(97, 97 + k)) if k <= 26 else bytes(range(k))


def iid(n: int, k: int, seed: int = 1) -> bytes:
    rng = LCG(seed)
    syms = _symbols(k)
    return bytes(syms[rng.below(k)] for _ in range(n))


def markov(n: int, k: int = 4, bias: float = 0.9, seed: int = 7) -> bytes:
    """Order-1 chain: with probability ``bias`` step to the next symbol cyclically, else uniform."""
    rng = LCG(seed)
    syms = _symbols(k)
    out = bytearray()
    state = 0
    for _ in range(n):
        if rng.random() < bias:
            state = (state + 1) % k
        else:
            state = rng.below(k)
        out.append(syms[state])
    return bytes(out)


def periodic(n: int, pattern: bytes = b"ab") -> bytes:
    return (pattern * (n // len(pattern) + 1))[:n]


def constant(n: int, symbol: int = 97) -> bytes:
    return bytes([symbol]) * n


SOURCES = {
    "iid2": lambda n: iid(n, 2, seed=11),
    "iid16": lambda n: iid(n, 16, seed=13),
    "iid256": lambda n: iid(n, 256, seed=17),
    "markov": lambda n: markov(n),
    "periodic": periodic,
    "constant": constant,
}


@dataclass(frozen=True)
class Case:
    source: str
    n: int
    params: Params

    @property
    def name(self) -> str:
        p = self.params
        lv = "max" if p.levels == MAX_LEVELS_REQUEST else p.levels
        return f"{self.source}/n={self.n}/r={p.r}/I={lv}/{p.mode.value}"


def lengths_for(r: int, long_n: int = 65536) -> List[int]:
    ns = set(range(0, 18))
    for i in (1, 4):
        ns.update((r ** i - 1, r ** i, r ** i + 1))
    ns.add(long_n)
    return sorted(ns)


def cases(long_n: int = 65536, rs=(2, 3, 4), levels=(1, 4, MAX_LEVELS_REQUEST)) -> Iterator[Case]:
    for source in SOURCES:
        for r in rs:
            for n in lengths_for(r, long_n):
                for lv in levels:
                    for mode in Mode:
                        yield Case(source, n, Params(r, lv, mode))


class DataCache:
    """Memoizes generated inputs; the same (source, n) is shared by many cases."""

    def __init__(self):
        self._data: Dict[Tuple[str, int], bytes] = {}

    def get(self, source: str, n: int) -> bytes:
        key = (source, n)
        if key not in self._data:
            self._data[key] = SOURCES[source](n)
        return self._data[key]


@dataclass
class CaseResult:
    case: Case
    roundtrip_ok: bool
    seconds: float  # compress + decompress only
    report: RedundancyReport
    error: str = ""

    @property
    def lemma_ok(self) -> bool:
        return self.report.lemma_pass

    @property
    def theorem_ok(self) -> Optional[bool]:
        """None where the check does not apply (n < 1024 or |A| = 1)."""
        if self.case.n < THEOREM_MIN_N:
            return None
        return self.report.theorem_pass

    @property
    def ok(self) -> bool:
        return self.roundtrip_ok and self.lemma_ok and self.theorem_ok is not False


THEOREM_MIN_N = 1024


def run_case(case: Case, data: bytes) -> CaseResult:
    start = time.perf_counter()
    res = encode(data, case.params)
    error = ""
    try:
        back = decompress(res.container)
    except CDMPMError as exc:
        back, error = None, f"{type(exc).__name__}: {exc}"
    elapsed = time.perf_counter() - start
    if back is not None and back != data:
        error = "decoded bytes differ"
    return CaseResult(case, back == data, elapsed, report_from_encoding(res, data, k=1), error)


def run_suite(selected: Optional[List[Case]] = None,
              progress: Optional[Callable[[CaseResult], None]] = None) -> List[CaseResult]:
    cache = DataCache()
    results = []
    for case in (cases() if selected is None else selected):
        result = run_case(case, cache.get(case.source, case.n))
        results.append(result)
        if progress:
            progress(result)
    return results
