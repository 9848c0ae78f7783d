from dotenv import load_dotenv
import os

load_dotenv()

# Sampling & Hashing Defaults
DEFAULT_SEED = int(os.getenv("TLSH_SEED", "42"))
DEFAULT_RANK = int(os.getenv("TLSH_RANK", "4"))
DEFAULT_CODES = int(os.getenv("TLSH_CODES", "16"))

# Validation & Benchmarks
DEFAULT_TRIALS = int(os.getenv("TLSH_TRIALS", "50000"))
BENCH_REPEATS = int(os.getenv("TLSH_BENCH_REPEATS", "20"))
PARALLEL = os.getenv("TLSH_PARALLEL", "True").upper() == "TRUE"

# Output & Logging
OUTPUTS_DIR = os.getenv("TLSH_OUTPUTS_DIR", "outputs")
LOG_LEVEL = os.getenv("TLSH_LOG_LEVEL", "INFO").upper()
LOG_FILE = os.getenv("TLSH_LOG_FILE", "tensor_lsh.log")
