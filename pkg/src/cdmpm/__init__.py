"""Context-dependent multilevel pattern matching (CDMPM) grammar compression."""

from .core import Alphabet, Params, Mode, rary_expansion, top_partition, infer_alphabet
from .errors import CDMPMError, InputValidationError, CorruptContainerError, DesyncError
from .transform import build_multilevel, flatten, grammar_dump, expand
from .codec import compress, decompress, parse_header
from .analysis import grammar_entropy, order1_entropy, theorem_constant, redundancy_report

__all__ = [
    "Alphabet", "Params", "Mode", "rary_expansion", "top_partition", "infer_alphabet",
    "CDMPMError", "InputValidationError", "CorruptContainerError", "DesyncError",
    "build_multilevel", "flatten", "grammar_dump", "expand",
    "compress", "decompress", "parse_header",
    "grammar_entropy", "order1_entropy", "theorem_constant", "redundancy_report",
]

__version__ = "0.1.0"
