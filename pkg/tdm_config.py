"""
Termination Database Miner - Configuration
Core constants and lookup tables shared by every module.

Proves termination of recursive definitions by reusing stored,
simplified termination schemes.
"""

from typing import Dict, FrozenSet

# =============================================================================
# TOOL METADATA
# =============================================================================

TOOL_NAME = "tdm"
VERSION = "1.0.0"
TOOL_DESCRIPTION = """
Termination proofs by subsumption against a database of justified schemes.
Mine a corpus | prove a definition | verify the certificate
"""

# =============================================================================
# FORMAT VERSIONS
# =============================================================================

# Stored schemes and queries must be simplified under the same theory.
THEORY_VERSION = "theory-v1"
DATABASE_FORMAT = 1
CERTIFICATE_FORMAT = 1

# The single supported well-founded relation.
WELL_FOUNDED_RELATION = "nat<"

# =============================================================================
# SYMBOLS
# =============================================================================

T = "t"
NIL = "nil"

# Fixed, closed builtin set with declared arities.
BUILTIN_ARITIES: Dict[str, int] = {
    "if": 3,
    "not": 1,
    "consp": 1,
    "atom": 1,
    "endp": 1,
    "null": 1,
    "eq": 2,
    "eql": 2,
    "equal": 2,
    "car": 1,
    "cdr": 1,
    "cons": 2,
    "zp": 1,
    "natp": 1,
    "integerp": 1,
    "<": 2,
    "+": 2,
    "-": 2,
    "acl2-count": 1,
}

# Builtins that never survive reading as application heads.
READER_ONLY_BUILTINS: FrozenSet[str] = frozenset({"list", "1-", "1+", "quote"})

CONSTANT_SYMBOLS: FrozenSet[str] = frozenset({T, NIL})

BUILTIN_NAMES: FrozenSet[str] = (
    frozenset(BUILTIN_ARITIES) | READER_ONLY_BUILTINS | CONSTANT_SYMBOLS
)

# Forms with binders; the term language has none.
BINDER_FORMS: FrozenSet[str] = frozenset({
    "let", "let*", "lambda", "flet", "mv-let", "b*",
})

STUB_PREFIX = "stub-"
SLOT_PREFIX = "v"

# c[ad]{2,4}r abbreviations are expanded by the reader.
MIN_CXR_DEPTH = 2
MAX_CXR_DEPTH = 4

# =============================================================================
# BOUNDS
# =============================================================================

DEFAULT_MAX_COUNT = 4
DEFAULT_MAX_SLOT_MAPPINGS = 64
DEFAULT_EVAL_FUEL = 1000

# =============================================================================
# EXIT CODES
# =============================================================================

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_REJECTED = 2
EXIT_NO_MATCH = 3
EXIT_VERIFY_REJECT = 4
