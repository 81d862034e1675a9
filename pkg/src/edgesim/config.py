"""Experiment configuration: YAML parsing and validation with field-path
diagnostics.

A config file has top-level keys `mode`, `dataset`, `sweep`, `fixed`,
`schemes`, `trials`/`seeds`, `learner`, `output` and optionally
`eval_every`, `workers`, `seed0` and `grid_db` (threshold grid search).
Every invalid field is reported by its path, and all problems are
collected before raising.
"""

import math
from dataclasses import dataclass

import yaml

SWEEP_AXES = ("N", "tx_snr_db", "threshold_db", "ratio", "K")
CENTRALIZED_SCHEMES = ("proposed", "equal_importance")
DISTRIBUTED_SCHEMES = ("proposed", "equal_allocation", "largest_only")

DEFAULT_GAMMA_HIGH_DB = 8.0
DEFAULT_GAMMA_LOW_DB = 2.0
DEFAULT_GAMMA_DB = 4.0


class ConfigError(ValueError):
    """Invalid configuration; `errors` lists one message per bad field."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.errors))


@dataclass(frozen=True)
class DatasetConfig:
    source: str = "synth"
    # synthetic blobs
    classes: int = 10
    dim: int = 784
    train_per_class: int = 200
    test_per_class: int = 100
    separation: float = 2.0
    # IDX files (paths may be relative to EDGESIM_DATA_DIR)
    train_images: str = None
    train_labels: str = None
    test_images: str = None
    test_labels: str = None
    train_size: int = 2000  # stratified subset size; 0 keeps the full set
    test_size: int = 1000


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str
    dataset: DatasetConfig
    sweep_axis: str
    sweep_values: tuple
    schemes: tuple
    seeds: tuple
    output: str
    n_blocks: int = 1000
    tx_snr_db: float = 4.0
    gamma_high_db: float = None
    gamma_low_db: float = None
    gamma_db: float = None
    split_mode: str = "random"
    k_devices: int = 2
    ratio: float = 1.0
    lam: float = 1e-4
    epochs: int = 1
    eval_every: int = 0
    workers: int = 1
    grid_db: tuple = None


def _is_num(x):
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def _is_int(x):
    return isinstance(x, int) and not isinstance(x, bool)


class _Checker:
    def __init__(self, data):
        self.data = data
        self.errors = []

    def error(self, path, msg):
        self.errors.append(f"{path}: {msg}")

    def section(self, key, default=None):
        value = self.data.get(key, default)
        if value is None:
            return {}
        if not isinstance(value, dict):
            self.error(key, "must be a mapping")
            return {}
        return value

    def check_unknown(self, mapping, allowed, prefix=""):
        for key in mapping:
            if key not in allowed:
                self.error(f"{prefix}{key}", "unknown key")


def _parse_dataset(chk, section):
    allowed = {
        "source", "classes", "dim", "train_per_class", "test_per_class",
        "separation", "train_images", "train_labels", "test_images",
        "test_labels", "train_size", "test_size",
    }
    chk.check_unknown(section, allowed, "dataset.")
    source = section.get("source", "synth")
    if source not in ("synth", "idx"):
        chk.error("dataset.source", f"must be 'synth' or 'idx', got {source!r}")
        source = "synth"
    kwargs = {"source": source}
    for key, lo in (("classes", 1), ("dim", 1), ("train_per_class", 1),
                    ("test_per_class", 1), ("train_size", 0), ("test_size", 0)):
        if key in section:
            v = section[key]
            if not _is_int(v) or v < lo:
                chk.error(f"dataset.{key}", f"must be an integer >= {lo}, got {v!r}")
            else:
                kwargs[key] = v
    if "separation" in section:
        v = section["separation"]
        if not _is_num(v) or v <= 0:
            chk.error("dataset.separation", f"must be a positive number, got {v!r}")
        else:
            kwargs["separation"] = float(v)
    if source == "idx":
        for key in ("train_images", "train_labels", "test_images", "test_labels"):
            v = section.get(key)
            if not isinstance(v, str) or not v:
                chk.error(f"dataset.{key}", "required path for source 'idx'")
            else:
                kwargs[key] = v
    return DatasetConfig(**kwargs)


def _check_sweep_value(chk, axis, value, path):
    if axis in ("N", "K"):
        if not _is_int(value) or value < 1:
            chk.error(path, f"must be an integer >= 1 for axis {axis}, got {value!r}")
            return None
        return int(value)
    if axis == "ratio":
        if not _is_num(value) or value <= 0:
            chk.error(path, f"must be a positive number for axis ratio, got {value!r}")
            return None
        return float(value)
    if not _is_num(value):
        chk.error(path, f"must be a finite number for axis {axis}, got {value!r}")
        return None
    return float(value)


def parse_config_data(data):
    """Validate a config mapping and return an ExperimentConfig."""
    if not isinstance(data, dict):
        raise ConfigError(["top level: config must be a mapping"])
    chk = _Checker(data)
    allowed_top = {
        "mode", "dataset", "sweep", "fixed", "schemes", "trials", "seed0",
        "seeds", "learner", "output", "eval_every", "workers", "grid_db",
    }
    chk.check_unknown(data, allowed_top)

    mode = data.get("mode")
    if mode not in ("centralized", "distributed"):
        chk.error("mode", f"must be 'centralized' or 'distributed', got {mode!r}")
        mode = "centralized"

    dataset = _parse_dataset(chk, chk.section("dataset"))

    sweep = chk.section("sweep")
    chk.check_unknown(sweep, {"axis", "values"}, "sweep.")
    axis = sweep.get("axis")
    if isinstance(axis, (list, tuple)):
        chk.error("sweep.axis", f"exactly one sweep axis required, got {list(axis)!r}")
        axis = axis[0] if axis else None
    if axis not in SWEEP_AXES:
        chk.error("sweep.axis", f"must be one of {SWEEP_AXES}, got {axis!r}")
        axis = "N"
    elif axis == "threshold_db" and mode != "centralized":
        chk.error("sweep.axis", "threshold_db sweeps apply to centralized mode only")
    elif axis in ("ratio", "K") and mode != "distributed":
        chk.error("sweep.axis", f"{axis} sweeps apply to distributed mode only")

    raw_values = sweep.get("values")
    values = []
    if not isinstance(raw_values, (list, tuple)) or not raw_values:
        chk.error("sweep.values", "must be a nonempty list")
    else:
        for i, v in enumerate(raw_values):
            parsed = _check_sweep_value(chk, axis, v, f"sweep.values[{i}]")
            if parsed is not None:
                values.append(parsed)

    valid_schemes = CENTRALIZED_SCHEMES if mode == "centralized" else DISTRIBUTED_SCHEMES
    schemes = data.get("schemes", ["proposed"])
    if not isinstance(schemes, (list, tuple)) or not schemes:
        chk.error("schemes", "must be a nonempty list")
        schemes = ["proposed"]
    for s in schemes:
        if s not in valid_schemes:
            chk.error("schemes", f"{s!r} is not valid for {mode} mode {valid_schemes}")
    schemes = tuple(s for s in schemes if s in valid_schemes) or ("proposed",)

    fixed = chk.section("fixed")
    allowed_fixed = {"N", "tx_snr_db", "gamma_high_db", "gamma_low_db", "gamma_db",
                     "split", "K", "ratio"}
    chk.check_unknown(fixed, allowed_fixed, "fixed.")

    n_blocks = fixed.get("N", 1000)
    if not _is_int(n_blocks) or n_blocks < 1:
        chk.error("fixed.N", f"must be an integer >= 1, got {n_blocks!r}")
        n_blocks = 1000
    tx_snr_db = fixed.get("tx_snr_db", 4.0)
    if not _is_num(tx_snr_db):
        chk.error("fixed.tx_snr_db", f"must be a finite number, got {tx_snr_db!r}")
        tx_snr_db = 4.0
    tx_snr_db = float(tx_snr_db)

    gamma_high_db = gamma_low_db = gamma_db = None
    if mode == "centralized":
        gamma_high_db = fixed.get("gamma_high_db")
        gamma_low_db = fixed.get("gamma_low_db")
        gamma_db = fixed.get("gamma_db")
        for key, v in (("gamma_high_db", gamma_high_db),
                       ("gamma_low_db", gamma_low_db), ("gamma_db", gamma_db)):
            if v is not None and not _is_num(v):
                chk.error(f"fixed.{key}", f"must be a finite number, got {v!r}")
        gamma_high_db = float(gamma_high_db) if _is_num(gamma_high_db) else None
        gamma_low_db = float(gamma_low_db) if _is_num(gamma_low_db) else None
        gamma_db = float(gamma_db) if _is_num(gamma_db) else None
        if axis == "threshold_db":
            if "proposed" in schemes:
                if (gamma_high_db is None) == (gamma_low_db is None):
                    chk.error(
                        "fixed",
                        "threshold_db sweeps need exactly one of gamma_high_db / "
                        "gamma_low_db fixed; the swept value supplies the other",
                    )
                else:
                    for i, v in enumerate(values):
                        if gamma_high_db is not None and v > gamma_high_db:
                            chk.error(
                                f"sweep.values[{i}]",
                                f"gamma_low {v} dB exceeds fixed gamma_high "
                                f"{gamma_high_db} dB; more-important data cannot "
                                "have a lower SNR threshold",
                            )
                        if gamma_low_db is not None and v < gamma_low_db:
                            chk.error(
                                f"sweep.values[{i}]",
                                f"gamma_high {v} dB is below fixed gamma_low "
                                f"{gamma_low_db} dB; more-important data cannot "
                                "have a lower SNR threshold",
                            )
        else:
            if gamma_high_db is None:
                gamma_high_db = DEFAULT_GAMMA_HIGH_DB
            if gamma_low_db is None:
                gamma_low_db = DEFAULT_GAMMA_LOW_DB
            if gamma_db is None:
                gamma_db = DEFAULT_GAMMA_DB
            if gamma_high_db < gamma_low_db:
                chk.error(
                    "fixed.gamma_high_db",
                    f"{gamma_high_db} dB is below gamma_low_db {gamma_low_db} dB; "
                    "more-important data cannot have a lower SNR threshold",
                )

    split_mode = fixed.get("split", "random")
    k_devices = fixed.get("K", 2)
    ratio = fixed.get("ratio", 1.0)
    if mode == "distributed":
        if split_mode not in ("random", "ratio"):
            chk.error("fixed.split", f"must be 'random' or 'ratio', got {split_mode!r}")
            split_mode = "random"
        if not _is_int(k_devices) or k_devices < 1:
            chk.error("fixed.K", f"must be an integer >= 1, got {k_devices!r}")
            k_devices = 2
        if not _is_num(ratio) or ratio <= 0:
            chk.error("fixed.ratio", f"must be a positive number, got {ratio!r}")
            ratio = 1.0
        ratio = float(ratio)
        if axis == "ratio":
            split_mode = "ratio"
            k_devices = 2
        elif axis == "K":
            split_mode = "random"
        if "equal_allocation" in schemes:
            ks = values if axis == "K" else [k_devices]
            ns = values if axis == "N" else [n_blocks]
            if ns and ks and min(ns) < max(ks):
                chk.error(
                    "fixed.N",
                    f"equal_allocation needs N >= K for every swept point "
                    f"(min N {min(ns)}, max K {max(ks)})",
                )

    seeds = data.get("seeds")
    if seeds is not None:
        if not isinstance(seeds, (list, tuple)) or not seeds:
            chk.error("seeds", "must be a nonempty list of integers")
            seeds = (0,)
        else:
            for i, s in enumerate(seeds):
                if not _is_int(s) or s < 0:
                    chk.error(f"seeds[{i}]", f"must be an integer >= 0, got {s!r}")
            seeds = tuple(s for s in seeds if _is_int(s) and s >= 0) or (0,)
    else:
        trials = data.get("trials", 10)
        seed0 = data.get("seed0", 0)
        if not _is_int(trials) or trials < 1:
            chk.error("trials", f"must be an integer >= 1, got {trials!r}")
            trials = 1
        if not _is_int(seed0) or seed0 < 0:
            chk.error("seed0", f"must be an integer >= 0, got {seed0!r}")
            seed0 = 0
        seeds = tuple(range(seed0, seed0 + trials))

    learner = chk.section("learner")
    chk.check_unknown(learner, {"lam", "epochs"}, "learner.")
    lam = learner.get("lam", 1e-4)
    if not _is_num(lam) or lam <= 0:
        chk.error("learner.lam", f"must be a positive number, got {lam!r}")
        lam = 1e-4
    epochs = learner.get("epochs", 1)
    if not _is_int(epochs) or epochs < 1:
        chk.error("learner.epochs", f"must be an integer >= 1, got {epochs!r}")
        epochs = 1

    eval_every = data.get("eval_every", 0)
    if not _is_int(eval_every) or eval_every < 0:
        chk.error("eval_every", f"must be an integer >= 0, got {eval_every!r}")
        eval_every = 0
    workers = data.get("workers", 1)
    if not _is_int(workers) or workers < 1:
        chk.error("workers", f"must be an integer >= 1, got {workers!r}")
        workers = 1

    output = data.get("output", "results.csv")
    if not isinstance(output, str) or not output:
        chk.error("output", "must be a nonempty path")
        output = "results.csv"

    grid_db = data.get("grid_db")
    if grid_db is not None:
        if not isinstance(grid_db, (list, tuple)) or not grid_db:
            chk.error("grid_db", "must be a nonempty list of dB values")
            grid_db = None
        else:
            for i, v in enumerate(grid_db):
                if not _is_num(v):
                    chk.error(f"grid_db[{i}]", f"must be a finite number, got {v!r}")
            grid_db = tuple(float(v) for v in grid_db if _is_num(v)) or None

    if chk.errors:
        raise ConfigError(chk.errors)

    return ExperimentConfig(
        mode=mode,
        dataset=dataset,
        sweep_axis=axis,
        sweep_values=tuple(values),
        schemes=schemes,
        seeds=seeds,
        output=output,
        n_blocks=int(n_blocks),
        tx_snr_db=tx_snr_db,
        gamma_high_db=gamma_high_db,
        gamma_low_db=gamma_low_db,
        gamma_db=gamma_db,
        split_mode=split_mode,
        k_devices=int(k_devices),
        ratio=float(ratio),
        lam=float(lam),
        epochs=int(epochs),
        eval_every=int(eval_every),
        workers=int(workers),
        grid_db=grid_db,
    )


def parse_config(path):
    """Load and validate a YAML config file."""
    with open(path) as f:
        try:
            data = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ConfigError([f"top level: not valid YAML ({e})"]) from e
    return parse_config_data(data)
