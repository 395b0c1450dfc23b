"""Command-line front end.

    cdmpm compress   [--r R] [--levels I] [--mode cdmpm|mpm] [-o OUT] IN
    cdmpm decompress [-o OUT] IN
    cdmpm analyze    [--r R] [--levels I] [--mode ...] [--k K] [--container] IN
    cdmpm trace      [--r R] [--levels I] [--mode ...] [--force] IN
    cdmpm selftest   [-v]

"-" reads stdin / writes stdout.  Exit codes: 0 ok, 1 usage, 2 corrupt
container, 3 I/O error, 4 self-test failure.
"""

import argparse
import sys
from dataclasses import dataclass
from typing import List, Optional

from .analysis import redundancy_report, report_text
from .codec import MAX_LEVELS, compress, decompress, parse_header
from .core import Mode, Params, max_levels
from .corpus import CaseResult, run_suite
from .errors import CorruptContainerError, InputValidationError
from .transform import build_multilevel, trace_text

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CORRUPT = 2
EXIT_IO = 3
EXIT_SELFTEST = 4

MAX_INPUT = 1 << 32
DEFAULT_LEVEL_CAP = 24
TRACE_LIMIT = 4096


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage, which we reserve for corrupt input
    def error(self, message):
        raise UsageError(message)


@dataclass(frozen=True)
class CliConfig:
    command: str
    input: str
    output: str
    r: int = 2
    levels: Optional[int] = None  # None: min(24, floor(log_r n))
    mode: Mode = Mode.CDMPM
    force: bool = False
    k: int = 1
    container: bool = False
    verbose: bool = False

    def params_for(self, n: int) -> Params:
        levels = self.levels
        if levels is None:
            levels = min(DEFAULT_LEVEL_CAP, max_levels(n, self.r))
        return Params(self.r, levels, self.mode)


def _build_parser() -> _Parser:
    parser = _Parser(prog="cdmpm", description="Context-dependent multilevel pattern matching compressor.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def transform_flags(p):
        p.add_argument("--r", type=int, default=2, help="branching factor, 2..255 (default 2)")
        p.add_argument("--levels", type=int, default=None,
                       help=f"number of levels I, 0..{MAX_LEVELS} (default min({DEFAULT_LEVEL_CAP}, floor(log_r n)))")
        p.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.CDMPM.value)

    p = sub.add_parser("compress", help="compress a file")
    transform_flags(p)
    p.add_argument("-o", "--output", default="-")
    p.add_argument("input")

    p = sub.add_parser("decompress", help="restore a compressed file")
    p.add_argument("-o", "--output", default="-")
    p.add_argument("input")

    p = sub.add_parser("analyze", help="compress and print the entropy / redundancy report")
    transform_flags(p)
    p.add_argument("--k", type=int, default=1, help="context order fed to the bound constant")
    p.add_argument("--container", action="store_true",
                   help="input is a container: decode it and analyze with its stored parameters")
    p.add_argument("input")

    p = sub.add_parser("trace", help="print the per-level transform trace")
    transform_flags(p)
    p.add_argument("--force", action="store_true", help=f"allow inputs longer than {TRACE_LIMIT} symbols")
    p.add_argument("input")

    p = sub.add_parser("selftest", help="round-trip the built-in corpus and check the bounds")
    p.add_argument("-v", "--verbose", action="store_true", help="one line per case")
    return parser


def parse_config(argv: List[str]) -> CliConfig:
    ns = _build_parser().parse_args(argv)
    cfg = CliConfig(
        command=ns.command,
        input=getattr(ns, "input", ""),
        output=getattr(ns, "output", "-"),
        r=getattr(ns, "r", 2),
        levels=getattr(ns, "levels", None),
        mode=Mode(getattr(ns, "mode", Mode.CDMPM.value)),
        force=getattr(ns, "force", False),
        k=getattr(ns, "k", 1),
        container=getattr(ns, "container", False),
        verbose=getattr(ns, "verbose", False),
    )
    if not 2 <= cfg.r <= 255:
        raise UsageError("--r must be in 2..255")
    if cfg.levels is not None and not 0 <= cfg.levels <= MAX_LEVELS:
        raise UsageError(f"--levels must be in 0..{MAX_LEVELS}")
    if cfg.k < 1:
        raise UsageError("--k must be at least 1")
    return cfg


def _read(path: str) -> bytes:
    if path == "-":
        data = sys.stdin.buffer.read(MAX_INPUT + 1)
    else:
        with open(path, "rb") as f:
            data = f.read(MAX_INPUT + 1)
    if len(data) > MAX_INPUT:
        raise UsageError(f"input larger than {MAX_INPUT} bytes")
    return data


def _write(path: str, data: bytes):
    if path == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
    else:
        with open(path, "wb") as f:
            f.write(data)


def _emit_text(text: str):
    sys.stdout.write(text)
    sys.stdout.flush()


def _selftest(verbose: bool) -> int:
    def show(res: CaseResult):
        if verbose or not res.ok:
            status = "ok" if res.ok else "FAIL"
            detail = f" {res.error}" if res.error else ""
            if not res.lemma_ok:
                detail += " lemma bound exceeded"
            if res.theorem_ok is False:
                detail += " theorem bound exceeded"
            print(f"{status} {res.case.name} {res.report.payload_bits} bits {res.seconds:.3f}s{detail}")

    results = run_suite(progress=show)
    failed = sum(not r.ok for r in results)
    seconds = sum(r.seconds for r in results)
    print(f"selftest: {len(results) - failed}/{len(results)} cases passed, round-trip time {seconds:.1f}s")
    return EXIT_SELFTEST if failed else EXIT_OK


def execute(cfg: CliConfig) -> int:
    if cfg.command == "selftest":
        return _selftest(cfg.verbose)

    data = _read(cfg.input)
    if cfg.command == "compress":
        _write(cfg.output, compress(data, cfg.params_for(len(data))))
    elif cfg.command == "decompress":
        _write(cfg.output, decompress(data))
    elif cfg.command == "analyze":
        params = cfg.params_for(len(data))
        if cfg.container:
            params, _, _ = parse_header(data)
            data = decompress(data)
        _emit_text(report_text(redundancy_report(data, params, k=cfg.k)))
    elif cfg.command == "trace":
        if len(data) > TRACE_LIMIT and not cfg.force:
            raise UsageError(f"trace of {len(data)} symbols refused; limit is {TRACE_LIMIT} without --force")
        _emit_text(trace_text(build_multilevel(data, cfg.params_for(len(data)))))
    return EXIT_OK


def run(argv: Optional[List[str]] = None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    try:
        return execute(parse_config(argv))
    except SystemExit as exc:  # --help
        return exc.code if isinstance(exc.code, int) else EXIT_OK
    except (UsageError, InputValidationError) as exc:
        print(f"cdmpm: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CorruptContainerError as exc:
        print(f"cdmpm: corrupt container: {exc}", file=sys.stderr)
        return EXIT_CORRUPT
    except OSError as exc:
        print(f"cdmpm: {exc}", file=sys.stderr)
        return EXIT_IO


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
