"""Versioned JSON experiment configuration and the replicate record schema."""
import json
import math
import os
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

from ..errors import ConfigurationError
from ..limitlaw import StatisticWindow, TailConstants
from ..models import model_from_config

SCHEMA_VERSION = 1

#: Fixed leading columns of every replicate CSV.
BASE_COLUMNS = ("replicate", "n", "T_n", "S_n", "max_spacing", "N_n")
EXTRA_COLUMNS = ("S_std", "rate_ratio", "scaled_spacing", "sup_raw")


def window_from_spec(w, n):
    """``{u, v, growth}`` or ``{u, v, alpha, beta}`` to a window for sample size ``n``."""
    u, v = float(w.get("u", 0.0)), float(w.get("v", 1.0))
    if "alpha" in w or "beta" in w:
        return StatisticWindow(u, v, float(w.get("alpha", 0.0)), float(w.get("beta", 0.0)))
    return StatisticWindow.default(n, u, v, float(w.get("growth", 1.0)))


@dataclass
class ZetaPipelineConfig:
    """Settings for the limiting-process pipeline.

    The refinement run simulates on ``step / 2`` and reads the same paths on
    ``step``; the sd oracle is an independent run on ``step / 4`` with twice
    the half width.
    """

    step: float = 1e-3
    half_width: float = 6.0
    n_paths: int = 400_000
    bin_width: float = 0.02
    fit_window: tuple = (1.0, 2.2)
    min_count: int = 50
    min_samples: int = 100_000
    oracle_paths: int = 20_000
    extremal_paths: int = 2_000
    extremal_u: float = 1.0
    deltas: tuple = (5.0, 10.0, 20.0)
    seed: int = 0

    def __post_init__(self):
        self.fit_window = tuple(float(x) for x in self.fit_window)
        self.deltas = tuple(float(x) for x in self.deltas)
        if self.n_paths < 1 or self.oracle_paths < 1 or self.extremal_paths < 1:
            raise ConfigurationError("path counts must be positive")
        if not self.step > 0 or self.half_width < 4:
            raise ConfigurationError("need step > 0 and half_width >= 4")

    @classmethod
    def smoke(cls, seed=0):
        return cls(step=1e-2, n_paths=10_000, fit_window=(0.8, 2.2), min_samples=10_000,
                   oracle_paths=2_000, extremal_paths=500, seed=seed)

    def to_dict(self):
        d = asdict(self)
        d["fit_window"] = list(self.fit_window)
        d["deltas"] = list(self.deltas)
        return d

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigurationError(f"unknown zeta settings: {sorted(unknown)}")
        return cls(**d)


@dataclass
class ExperimentConfig:
    """One experiment: model, sample sizes, replicates, window and tails.

    ``tails`` is ``{"source": "file", "path": ...}``, ``{"source":
    "zeta-fit"}`` (runs the pipeline described by ``zeta``) or ``{"source":
    "inline", "kappa": ..., "lambda": ...}``. ``window`` holds ``u``, ``v``
    and either ``growth`` or explicit ``alpha``/``beta`` offsets.
    """

    model: dict = field(default_factory=lambda: {"kind": "density", "c0": 1.5, "c1": 1.0})
    n: list = field(default_factory=lambda: [1000, 10000, 100000])
    replicates: int = 500
    window: dict = field(default_factory=lambda: {"u": 0.0, "v": 1.0, "growth": 1.0})
    seed: int = 0
    tails: Optional[dict] = None
    levels: list = field(default_factory=lambda: [0.5, 0.8, 0.9, 0.95])
    band_mode: str = "oracle"
    workers: int = 1
    out: str = "out"
    zeta: ZetaPipelineConfig = field(default_factory=ZetaPipelineConfig)
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        if isinstance(self.zeta, dict):
            self.zeta = ZetaPipelineConfig.from_dict(self.zeta)
        self.n = [int(x) for x in self.n]
        self.levels = [float(x) for x in self.levels]
        if self.schema_version != SCHEMA_VERSION:
            raise ConfigurationError(f"unsupported schema version {self.schema_version}")
        if self.replicates < 1:
            raise ConfigurationError("replicates must be at least 1")
        if not self.n or min(self.n) < 100:
            raise ConfigurationError("every n must be at least 100")
        if self.band_mode not in ("oracle", "plugin", "both"):
            raise ConfigurationError(f"unknown band mode {self.band_mode!r}")
        if any(not 0 < p < 1 for p in self.levels):
            raise ConfigurationError("levels must lie in (0, 1)")
        if self.workers < 1:
            raise ConfigurationError("workers must be at least 1")
        if self.tails is not None:
            src = self.tails.get("source")
            if src == "file":
                if not os.path.exists(self.tails.get("path", "")):
                    raise ConfigurationError(f"tails file {self.tails.get('path')!r} not found")
            elif src == "inline":
                if "kappa" not in self.tails or "lambda" not in self.tails:
                    raise ConfigurationError("inline tails need kappa and lambda")
            elif src != "zeta-fit":
                raise ConfigurationError(f"unknown tails source {src!r}")
        self.build_model()

    def build_model(self):
        return model_from_config(self.model)

    def build_window(self, n):
        return window_from_spec(self.window, n)

    def load_tails(self):
        """Tail constants from a file or inline values; ``None`` when unset or fitted."""
        if self.tails is None:
            return None
        src = self.tails["source"]
        if src == "file":
            with open(self.tails["path"]) as fh:
                return TailConstants.from_dict(json.load(fh))
        if src == "inline":
            return TailConstants(float(self.tails["kappa"]), float(self.tails["lambda"]), "inline")
        return None

    def to_dict(self):
        d = asdict(self)
        d["zeta"] = self.zeta.to_dict()
        return d

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def save(self, path):
        with open(path, "w", newline="\n") as fh:
            fh.write(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")


@dataclass
class ReplicateRecord:
    """Statistics of one replicate; fields not computed stay ``None``."""

    n: int
    replicate: int
    T_n: Optional[float]
    S_n: float
    max_spacing: float
    N_n: int
    S_std: Optional[float] = None
    rate_ratio: Optional[float] = None
    scaled_spacing: Optional[float] = None
    sup_raw: Optional[float] = None
    coverage: dict = field(default_factory=dict)

    def row(self, columns):
        vals = {"replicate": self.replicate, "n": self.n, "T_n": self.T_n, "S_n": self.S_n,
                "max_spacing": self.max_spacing, "N_n": self.N_n, "S_std": self.S_std,
                "rate_ratio": self.rate_ratio, "scaled_spacing": self.scaled_spacing,
                "sup_raw": self.sup_raw, **self.coverage}
        return [_fmt(vals.get(c)) for c in columns]


def coverage_column(level, mode="oracle"):
    tag = "" if mode == "oracle" else f"{mode}_"
    return f"coverage_hit_{tag}{level!r}"


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, int):
        return str(v)
    return repr(float(v))


def validate_row(header, row):
    """Check one CSV row against the record schema; raise ``ValueError`` if invalid."""
    if tuple(header[:len(BASE_COLUMNS)]) != BASE_COLUMNS:
        raise ValueError("CSV header does not start with the fixed columns")
    if len(row) != len(header):
        raise ValueError("row length does not match header")
    rec = dict(zip(header, row))
    for key in ("replicate", "n", "N_n"):
        if not rec[key].isdigit():
            raise ValueError(f"{key} must be a nonnegative integer")
    if int(rec["N_n"]) < 1:
        raise ValueError("N_n must be at least 1")
    for key, val in rec.items():
        if key in ("replicate", "n", "N_n") or val == "":
            continue
        if key.startswith("coverage_hit_"):
            if val not in ("0", "1"):
                raise ValueError(f"{key} must be 0 or 1")
            continue
        if not math.isfinite(float(val)):
            raise ValueError(f"{key} is not finite")
    return rec
