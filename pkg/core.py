import json
import logging
import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

import config
from benchmarks.timing import run_grid
from errors import ParameterError, UsageError
from hashing.families import FamilyKind, hash_k
from index.lsh_index import MANIFEST_NAME, IndexParams, LshIndex
from projections.sampler import Distribution
from tensors.formats import Shape
from tensors.tensor_io import FILE_SUFFIX, read_tensor, write_tensor
from validation.generators import (
    planted_angle_pair,
    planted_distance_pair,
    random_cp,
    random_dense,
    random_tt,
)
from validation.suite import run_suite

# --- Get a logger instance ---
logger = logging.getLogger(__name__)

COMMANDS = ("gen", "hash", "validate", "bench", "index-build", "index-query")
GEN_FORMATS = ("dense", "cp", "tt", "pair")
EXIT_OK, EXIT_VALIDATION_FAILED, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

# Field types a JSON config file must respect; None is allowed for the optional ones.
INT_FIELDS = ("seed", "rank", "codes", "bands", "trials", "count", "repeats")
OPTIONAL_NUMBER_FIELDS = ("width", "angle", "distance")
OPTIONAL_TEXT_FIELDS = ("out", "index")


def _is_int(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


@dataclass
class RunConfig:
    command: str
    inputs: list[str] = field(default_factory=list)
    out: Optional[str] = None
    seed: int = config.DEFAULT_SEED
    family: str = FamilyKind.CP_SRP.value
    rank: int = config.DEFAULT_RANK
    width: Optional[float] = None
    codes: int = config.DEFAULT_CODES
    bands: int = 8
    distribution: str = Distribution.RADEMACHER.value
    trials: int = config.DEFAULT_TRIALS
    families: Optional[list[str]] = None
    format: str = "dense"
    shape: Optional[list[int]] = None
    count: int = 1
    angle: Optional[float] = None
    distance: Optional[float] = None
    index: Optional[str] = None
    max_candidates: Optional[int] = None
    rerank: bool = True
    repeats: int = config.BENCH_REPEATS

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        self._check_types()
        try:
            FamilyKind(self.family)
            Distribution(self.distribution)
            for name in self.families or ():
                FamilyKind(name)
        except ValueError as e:
            raise UsageError(str(e)) from e

    def _check_types(self):
        bad = [name for name in INT_FIELDS if not _is_int(getattr(self, name))]
        bad += [
            name
            for name in OPTIONAL_NUMBER_FIELDS
            if getattr(self, name) is not None and not _is_number(getattr(self, name))
        ]
        bad += [
            name
            for name in OPTIONAL_TEXT_FIELDS
            if getattr(self, name) is not None and not isinstance(getattr(self, name), str)
        ]
        if self.max_candidates is not None and not _is_int(self.max_candidates):
            bad.append("max_candidates")
        if not isinstance(self.rerank, bool):
            bad.append("rerank")
        for name in ("family", "distribution", "format"):
            if not isinstance(getattr(self, name), str):
                bad.append(name)
        for name, element_ok in (
            ("inputs", lambda v: isinstance(v, str)),
            ("families", lambda v: isinstance(v, str)),
            ("shape", _is_int),
        ):
            value = getattr(self, name)
            if value is not None and not (
                isinstance(value, list) and all(element_ok(v) for v in value)
            ):
                bad.append(name)
        if bad:
            raise UsageError(f"config values have the wrong type: {sorted(set(bad))}")


def load_run_config(flags: dict, config_path: Optional[str] = None) -> RunConfig:
    """Merges a JSON config file with command-line flags; flags win on conflict."""
    values = {}
    if config_path:
        with open(config_path, "r", encoding="utf-8") as f:
            try:
                values = json.load(f)
            except json.JSONDecodeError as e:
                raise UsageError(f"could not decode JSON from '{config_path}': {e}") from e
        known = {f.name for f in fields(RunConfig)}
        unknown = set(values) - known
        if unknown:
            raise UsageError(f"unknown config keys in '{config_path}': {sorted(unknown)}")
        logger.debug(f"Loaded run config from '{config_path}': {values}")
    values.update({k: v for k, v in flags.items() if v not in (None, [])})
    return RunConfig(**values)


# --- Helper Functions ---
def _out_dir(cfg: RunConfig) -> Path:
    path = Path(cfg.out or config.OUTPUTS_DIR)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_text(path: Optional[str], text: str):
    if path:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
        logger.info(f"-> Output saved to {path}")


def _input_paths(cfg: RunConfig) -> list[Path]:
    if not cfg.inputs:
        raise UsageError(f"{cfg.command} needs at least one input file")
    paths = sorted((Path(p) for p in cfg.inputs), key=lambda p: p.stem)
    missing = [str(p) for p in paths if not p.exists()]
    if missing:
        raise FileNotFoundError(f"input files not found: {missing}")
    return paths


def _require_width(kind: FamilyKind, width: Optional[float]):
    if kind.is_e2lsh and width is None:
        raise UsageError(f"--width is required for {kind.value}")


def _require_shape(cfg: RunConfig) -> Shape:
    if not cfg.shape:
        raise UsageError(f"{cfg.command} needs --shape")
    try:
        return Shape(tuple(cfg.shape))
    except ValueError as e:
        raise UsageError(str(e)) from e


# --- Commands ---
def cmd_gen(cfg: RunConfig) -> list[Path]:
    """Writes random tensors (or a planted pair) in the binary tensor format."""
    if cfg.format not in GEN_FORMATS:
        raise UsageError(f"--format must be one of {GEN_FORMATS}, got {cfg.format!r}")
    shape = _require_shape(cfg)
    out_dir = _out_dir(cfg)
    written = []

    if cfg.format == "pair":
        if (cfg.angle is None) == (cfg.distance is None):
            raise UsageError("a pair needs exactly one of --angle or --distance")
        if cfg.angle is not None:
            x, y = planted_angle_pair(shape, cfg.angle, cfg.seed)
        else:
            x, y = planted_distance_pair(shape, cfg.distance, cfg.seed)
        written.append(write_tensor(out_dir / f"pair_a{FILE_SUFFIX}", x))
        written.append(write_tensor(out_dir / f"pair_b{FILE_SUFFIX}", y))
    else:
        if cfg.count < 1:
            raise UsageError(f"--count must be positive, got {cfg.count}")
        for i in range(cfg.count):
            item_seed = (cfg.seed, i)
            if cfg.format == "cp":
                tensor = random_cp(shape, cfg.rank, item_seed)
            elif cfg.format == "tt":
                tensor = random_tt(shape, cfg.rank, item_seed)
            else:
                tensor = random_dense(shape, item_seed)
            written.append(write_tensor(out_dir / f"{cfg.format}_{i:04d}{FILE_SUFFIX}", tensor))
    logger.info(f"Generated {len(written)} {cfg.format} tensor file(s) of shape {shape} in {out_dir}")
    return written


def cmd_hash(cfg: RunConfig) -> str:
    """One line per input: id followed by its K codes."""
    kind = FamilyKind(cfg.family)
    if cfg.codes < 1:
        raise UsageError(f"--codes must be positive, got {cfg.codes}")
    _require_width(kind, cfg.width)
    lines = []
    shape = Shape(tuple(cfg.shape)) if cfg.shape else None
    for path in _input_paths(cfg):
        tensor = read_tensor(path)
        shape = shape or tensor.shape
        vector = hash_k(
            kind, shape, cfg.rank, cfg.codes, cfg.width, cfg.seed, tensor, cfg.distribution
        )
        lines.append(" ".join([path.stem, *map(str, vector.codes)]))
        logger.debug(f"[{path.stem}] hashed with {kind.value}: {vector.codes}")
    listing = "\n".join(lines) + "\n"
    _write_text(cfg.out, listing)
    logger.info(f"Hashed {len(lines)} tensor(s) with {kind.value}, K={cfg.codes}.")
    return listing


def cmd_validate(cfg: RunConfig) -> tuple[int, list[Path]]:
    """Runs the acceptance suite and writes CSV + text reports; exit status 0 iff all pass."""
    if cfg.trials < 1:
        raise UsageError(f"--trials must be positive, got {cfg.trials}")
    families = [FamilyKind(f) for f in cfg.families] if cfg.families else None
    suite = run_suite(trials=cfg.trials, seed=cfg.seed, families=families)
    paths = list(suite.write(_out_dir(cfg)))
    for row in suite.rows:
        status = "PASS" if row["passed"] else ("FAIL" if row["asserted"] else "INFO")
        logger.info(f"[{status}] {row['check']} {row['family']} {row['setting']}")
    return (EXIT_OK if suite.all_passed else EXIT_VALIDATION_FAILED), paths


def cmd_bench(cfg: RunConfig) -> Path:
    frame = run_grid(repeats=cfg.repeats, seed=cfg.seed)
    path = _out_dir(cfg) / "bench.csv"
    frame.to_csv(path, index=False)
    logger.info(f"-> Timing table with {len(frame)} grid points saved to {path}")
    return path


def _index_params(cfg: RunConfig, shape: Shape) -> IndexParams:
    kind = FamilyKind(cfg.family)
    _require_width(kind, cfg.width)
    try:
        return IndexParams(
            family_kind=kind,
            shape=shape,
            rank=cfg.rank,
            K_per_band=cfg.codes,
            L_bands=cfg.bands,
            w=cfg.width,
            seed=cfg.seed,
            distribution=cfg.distribution,
            rerank=cfg.rerank,
        )
    except ParameterError as e:
        raise UsageError(str(e)) from e


def cmd_index_build(cfg: RunConfig) -> Path:
    """Inserts the inputs under ids 0..n-1 (sorted by file name), writing each through to disk."""
    paths = _input_paths(cfg)
    tensors = [read_tensor(p) for p in paths]
    params = _index_params(cfg, tensors[0].shape)
    index_dir = Path(cfg.index or cfg.out or os.path.join(config.OUTPUTS_DIR, "index"))
    index = LshIndex(params, directory=index_dir)
    for item_id, (path, tensor) in enumerate(zip(paths, tensors)):
        index.insert(item_id, tensor)
        logger.debug(f"Indexed {path.name} as item {item_id}")
    logger.info(f"Built index with {len(index)} items in {index_dir}")
    return index_dir / MANIFEST_NAME


def cmd_index_query(cfg: RunConfig) -> str:
    if not cfg.index:
        raise UsageError("index-query needs --index")
    index = LshIndex.load(cfg.index)
    lines = []
    for path in _input_paths(cfg):
        found = index.query(read_tensor(path), cfg.max_candidates, cfg.rerank)
        lines.append(" ".join([path.stem, *map(str, found)]))
        logger.info(f"[{path.stem}] {len(found)} candidate(s)")
    listing = "\n".join(lines) + "\n"
    _write_text(cfg.out, listing)
    return listing
