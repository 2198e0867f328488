"""Constants used by exlife"""

from typing import Final

__version__ = "0.4.2"

MODE_INTER: Final = "inter"
MODE_INTRA: Final = "intra"
MODES: Final = (MODE_INTER, MODE_INTRA)

DEFAULT_MODE: Final = MODE_INTER
DEFAULT_PATH_CAP: Final = 256
DEFAULT_CLAUSE_LIMIT: Final = 16
DEFAULT_LOOP_UNROLL: Final = 1

EXIR_SUFFIX: Final = ".exir"
SUMMARY_SUFFIX: Final = ".summary.json"
LIFECYCLE_FILE: Final = "lifecycle.json"
STATISTICS_FILE: Final = "statistics.json"
LIFECYCLE_TEXT_FILE: Final = "lifecycle.txt"

OPEN_VERSION: Final = "OPEN"

FLAG_UNCONDITIONAL: Final = "unconditional"
FLAG_TRUNCATED: Final = "truncated"
FLAG_CLAUSE_LIMIT: Final = "clause-limit"
FLAG_RECURSIVE: Final = "recursive-approx"
FLAG_IMPRECISE: Final = "imprecise"
FLAG_UNREACHABLE: Final = "unreachable"
FLAG_INFEASIBLE: Final = "infeasible"
FLAG_CONTRADICTORY: Final = "contradictory"

LINEAGE_ID_LENGTH: Final = 16
