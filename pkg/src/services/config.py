import os

# === Logging ===
LOG_FORMAT: str = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
LOG_LEVEL: str = os.environ.get("FLIPSORT_LOG_LEVEL", "INFO").upper()
if LOG_LEVEL not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
    print(f"Warning: unknown FLIPSORT_LOG_LEVEL '{LOG_LEVEL}', using INFO")
    LOG_LEVEL = "INFO"

# === Verification Suite ===
try:
    VERIFY_DEFAULT_N: int = int(os.environ.get("FLIPSORT_VERIFY_N", "7"))
except ValueError as e:
    VERIFY_DEFAULT_N: int = 7
    print(f"Warning: Failed to read FLIPSORT_VERIFY_N: {e}")
MINIMIZED_REPORT_MAX_K: int = 8       # b_k recurrence report emitted by verify

# === Brute-Force Oracle Limits ===
ORACLE_MAX_N: int = 10              # Full S_n streams
IMAGE_MAX_N: int = 9                # Im(T^m) and pre-image sets
EXHAUSTIVE_CHECK_MAX_N: int = 8     # Worst-case verifiers over all of S_n

# === Permutation Formats ===
COMPACT_DIGIT_MAX_N: int = 9        # "3276145" style only below 10
INVERSIONS_MERGE_THRESHOLD: int = 10_000

# === Series / Generating Functions ===
DIAGONAL_MAX_K: int = 6
DIAGONAL_MAX_ORDER: int = 30
FUNCTIONAL_EQUATION_MAX_N: int = 10
STATE_TABLE_MAX_N: int = 12         # Dict-based (n, k, a, b, c) tables
BRIDGE_HALVING_MAX_N: int = 7

# === Worst-Case Machinery ===
HASSE_MAX_ELEMENTS: int = 10_000
SKEW_REPORT_MAX_N: int = 20

# === Diagram Emission ===
DIAGRAM_PRNG: str = "PCG64"         # numpy bit generator recorded in CSV metadata
DIAGRAM_DEFAULT_SEED: int = 0
