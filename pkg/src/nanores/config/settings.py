"""
Settings configuration for nanores.

This module handles configuration management for the reservoir simulator and
the experiment harness. Defaults reproduce the reference parameter set
(k_p = 0.001, k_d = 0.5, v_p = 1 V, T = 1024, 1500 wires of 40 +/- 14 nm).
"""

import os
from dataclasses import dataclass, field, fields, is_dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional

import psutil
import yaml
from dotenv import load_dotenv

from nanores.errors import ConfigError

CLASSIFIER_KINDS = ("LR", "LDA", "SVM")
SOLVERS = ("direct", "cg")
TASKS = ("sweep", "distance", "reduced_class", "ten_class", "subsample_bench", "speaker_gen")
SWEEPABLE = ("k_p", "k_d", "v_p", "eta_p", "eta_d")


@dataclass
class AssemblyConfig:
    """Monte Carlo self-assembly settings."""
    n_wires: int = 1500
    mean_length: float = 40.0  # nm
    std_length: float = 14.0  # nm
    substrate_side: Optional[float] = None  # nm; None means 7 x mean_length
    seed: int = 0
    max_retries: int = 16

    @property
    def side(self) -> float:
        if self.substrate_side is None:
            return 7.0 * self.mean_length
        return float(self.substrate_side)

    def validate(self) -> List[str]:
        errors = []
        if self.n_wires < 2:
            errors.append("assembly.n_wires must be at least 2")
        if self.mean_length <= 0:
            errors.append("assembly.mean_length must be positive")
        if self.std_length < 0:
            errors.append("assembly.std_length must be non-negative")
        if self.substrate_side is not None and self.substrate_side <= 0:
            errors.append("assembly.substrate_side must be positive")
        if self.max_retries < 0:
            errors.append("assembly.max_retries must be non-negative")
        return errors


@dataclass
class DynamicsParams:
    """Junction memory-state dynamics."""
    k_p: float = 0.001  # base potentiation rate, 1/timestep
    k_d: float = 0.5  # base depression rate, 1/timestep
    eta_p: float = 1.0  # 1/V
    eta_d: float = 1.0  # 1/V
    g_min: float = 0.001  # S
    g_max: float = 1.0  # S
    dt: float = 1.0  # timesteps
    signed: bool = False  # use signed v in the rate exponents instead of |v|

    def validate(self) -> List[str]:
        errors = []
        if self.k_p <= 0:
            errors.append("dynamics.k_p must be positive")
        if self.k_d <= 0:
            errors.append("dynamics.k_d must be positive")
        if self.dt <= 0:
            errors.append("dynamics.dt must be positive")
        if not 0 <= self.g_min < self.g_max:
            errors.append("dynamics requires 0 <= g_min < g_max")
        return errors


@dataclass
class ReservoirConfig:
    """Per-clip simulation settings."""
    assembly: AssemblyConfig = field(default_factory=AssemblyConfig)
    dynamics: DynamicsParams = field(default_factory=DynamicsParams)
    t: int = 1024
    v_p: float = 1.0
    fresh_topology_per_clip: bool = False
    solver: str = "direct"
    auto_substep: bool = True

    def validate(self) -> List[str]:
        errors = self.assembly.validate() + self.dynamics.validate()
        if self.t < 1:
            errors.append("reservoir.t must be at least 1")
        if self.v_p <= 0:
            errors.append("reservoir.v_p must be positive")
        if self.solver not in SOLVERS:
            errors.append(f"reservoir.solver must be one of: {list(SOLVERS)}")
        return errors


@dataclass
class ClassifierSettings:
    """Linear readout hyperparameters."""
    kind: str = "LR"
    l2: float = 1e-4  # logistic regression penalty
    c: float = 1.0  # SVM hinge weight
    shrinkage: float = 0.1  # LDA covariance shrinkage
    max_iter: int = 10000
    tol: float = 1e-6

    def validate(self) -> List[str]:
        errors = []
        if self.kind not in CLASSIFIER_KINDS:
            errors.append(f"classifier.kind must be one of: {list(CLASSIFIER_KINDS)}")
        if self.l2 < 0:
            errors.append("classifier.l2 must be non-negative")
        if self.c <= 0:
            errors.append("classifier.c must be positive")
        if not 0.0 <= self.shrinkage <= 1.0:
            errors.append("classifier.shrinkage must be between 0.0 and 1.0")
        if self.max_iter < 1:
            errors.append("classifier.max_iter must be at least 1")
        return errors


@dataclass
class SplitSettings:
    """Stratified train/test split."""
    test_fraction: float = 0.1
    repeats: int = 1  # consecutive split seeds starting at runtime.master_seed


@dataclass
class SweepSettings:
    parameter: str = "k_p"
    grid: List[float] = field(default_factory=lambda: [0.0001, 0.001, 0.01, 0.1, 0.5])
    clip_speaker: str = "george"
    clip_digit: int = 0
    clip_trial: int = 0


@dataclass
class ReducedClassSettings:
    speaker: str = "jackson"
    class_counts: List[int] = field(default_factory=lambda: [2, 3, 4, 5])
    combinations: int = 33
    subset_size: int = 32


@dataclass
class TenClassSettings:
    datasets: Dict[str, List[str]] = field(
        default_factory=lambda: {
            "jackson": ["jackson"],
            "lucas": ["lucas"],
            "jackson_lucas": ["jackson", "lucas"],
        }
    )
    classifiers: List[str] = field(default_factory=lambda: ["LR", "LDA", "SVM"])
    subset_size: int = 32


@dataclass
class BenchSettings:
    speakers: List[str] = field(default_factory=lambda: ["jackson"])
    subset_sizes: List[int] = field(default_factory=lambda: [2 ** i for i in range(11)])
    repetitions: int = 5
    classifiers: List[str] = field(default_factory=lambda: ["LR"])


@dataclass
class SpeakerGenSettings:
    train_speaker: str = "jackson"
    test_speakers: List[str] = field(default_factory=lambda: ["lucas", "george"])
    train_per_digit: int = 40
    test_per_digit: int = 10
    subset_size: int = 32


@dataclass
class TaskSettings:
    sweep: SweepSettings = field(default_factory=SweepSettings)
    reduced_class: ReducedClassSettings = field(default_factory=ReducedClassSettings)
    ten_class: TenClassSettings = field(default_factory=TenClassSettings)
    subsample_bench: BenchSettings = field(default_factory=BenchSettings)
    speaker_gen: SpeakerGenSettings = field(default_factory=SpeakerGenSettings)


@dataclass
class RuntimeSettings:
    master_seed: int = 0
    output_dir: Path = Path("results")
    threads: int = 0  # 0 = one worker per physical core


@dataclass
class LoggingSettings:
    """Logging configuration settings."""
    level: str = "INFO"
    format: str = "console"
    file_path: Optional[Path] = None


@dataclass
class Settings:
    """Main application settings."""

    task: str = "ten_class"
    debug: bool = False

    reservoir: ReservoirConfig = field(default_factory=ReservoirConfig)
    classifier: ClassifierSettings = field(default_factory=ClassifierSettings)
    split: SplitSettings = field(default_factory=SplitSettings)
    tasks: TaskSettings = field(default_factory=TaskSettings)
    runtime: RuntimeSettings = field(default_factory=RuntimeSettings)
    logging: LoggingSettings = field(default_factory=LoggingSettings)

    def __post_init__(self):
        """Post-initialization setup."""
        load_dotenv()
        self._load_from_env()

    def _load_from_env(self):
        """Load settings from environment variables."""
        if os.getenv("DEBUG"):
            self.debug = os.getenv("DEBUG", "false").lower() == "true"

        if os.getenv("NANORES_THREADS"):
            self.runtime.threads = int(os.getenv("NANORES_THREADS"))

        if os.getenv("NANORES_OUTPUT_DIR"):
            self.runtime.output_dir = Path(os.getenv("NANORES_OUTPUT_DIR"))

        if os.getenv("LOG_LEVEL"):
            self.logging.level = os.getenv("LOG_LEVEL").upper()

        if os.getenv("LOG_FILE"):
            self.logging.file_path = Path(os.getenv("LOG_FILE"))

    @classmethod
    def from_file(cls, config_path: Path) -> "Settings":
        """
        Load settings from a YAML or JSON configuration file.

        Args:
            config_path: Path to the configuration file

        Returns:
            Settings instance
        """
        if not config_path.exists():
            raise ConfigError(f"Configuration file not found: {config_path}")

        with open(config_path, "r") as f:
            try:
                config_data = yaml.safe_load(f) or {}
            except yaml.YAMLError as e:
                raise ConfigError(f"Configuration file is not valid YAML/JSON: {e}")

        if not isinstance(config_data, dict):
            raise ConfigError("Configuration document must be a mapping")

        settings = cls()
        settings._update_from_dict(config_data)
        # environment wins over the file
        settings._load_from_env()
        return settings

    def apply_overrides(self, overrides: Dict[str, Any]) -> None:
        """
        Apply dotted-key overrides, e.g. ``{"reservoir.dynamics.k_p": "0.01"}``.

        String values are parsed as YAML scalars so "0.01", "true" and "[1, 2]"
        arrive typed.
        """
        for dotted, raw in overrides.items():
            value = yaml.safe_load(raw) if isinstance(raw, str) else raw
            nested: Dict[str, Any] = {}
            cursor = nested
            parts = dotted.split(".")
            for part in parts[:-1]:
                cursor = cursor.setdefault(part, {})
            cursor[parts[-1]] = value
            self._update_from_dict(nested)

    def _update_from_dict(self, config_data: dict, target: Any = None, prefix: str = ""):
        """Update settings from a dictionary; unknown keys are rejected by dotted name."""
        target = self if target is None else target
        known = {f.name for f in fields(target)}
        for key, value in config_data.items():
            dotted = f"{prefix}{key}"
            if key not in known:
                raise ConfigError(f"Unknown configuration key '{dotted}'", key=dotted)
            current = getattr(target, key)
            if is_dataclass(current):
                if not isinstance(value, dict):
                    raise ConfigError(f"Configuration key '{dotted}' must be a mapping", key=dotted)
                self._update_from_dict(value, current, prefix=f"{dotted}.")
            else:
                setattr(target, key, _coerce(current, value, dotted))

    def to_dict(self) -> dict:
        """Convert settings to a JSON/YAML-serializable dictionary."""
        return _plain(self)

    def save_to_file(self, config_path: Path) -> None:
        """
        Save settings to a YAML configuration file.

        Args:
            config_path: Path to save the configuration file
        """
        config_data = self.to_dict()
        config_path.parent.mkdir(parents=True, exist_ok=True)
        with open(config_path, "w") as f:
            yaml.dump(config_data, f, default_flow_style=False, indent=2, sort_keys=True)

    def worker_count(self) -> int:
        """Resolved worker cap: runtime.threads, or one per physical core when 0."""
        if self.runtime.threads > 0:
            return self.runtime.threads
        return psutil.cpu_count(logical=False) or psutil.cpu_count() or 1

    def validate(self) -> list:
        """
        Validate settings and return any errors.

        Returns:
            List of validation errors (empty if valid)
        """
        errors = self.reservoir.validate() + self.classifier.validate()

        if self.task not in TASKS:
            errors.append(f"task must be one of: {list(TASKS)}")

        if not 0.0 < self.split.test_fraction < 1.0:
            errors.append("split.test_fraction must be between 0.0 and 1.0 (exclusive)")
        if self.split.repeats < 1:
            errors.append("split.repeats must be at least 1")

        if self.tasks.sweep.parameter not in SWEEPABLE:
            errors.append(f"tasks.sweep.parameter must be one of: {list(SWEEPABLE)}")
        if not self.tasks.sweep.grid:
            errors.append("tasks.sweep.grid must not be empty")

        for k in self.tasks.reduced_class.class_counts:
            if not 2 <= k <= 10:
                errors.append("tasks.reduced_class.class_counts must lie in 2..10")
                break
        for section in ("ten_class", "subsample_bench"):
            kinds = getattr(self.tasks, section).classifiers
            if any(kind not in CLASSIFIER_KINDS for kind in kinds):
                errors.append(f"tasks.{section}.classifiers entries must be in {list(CLASSIFIER_KINDS)}")
        if not self.tasks.subsample_bench.classifiers:
            errors.append("tasks.subsample_bench.classifiers must not be empty")
        if self.tasks.subsample_bench.repetitions < 1:
            errors.append("tasks.subsample_bench.repetitions must be at least 1")

        sizes = [
            self.tasks.reduced_class.subset_size,
            self.tasks.ten_class.subset_size,
            self.tasks.speaker_gen.subset_size,
            *self.tasks.subsample_bench.subset_sizes,
        ]
        for k in sizes:
            if k < 1 or k & (k - 1) or k > self.reservoir.t:
                errors.append(f"subset size {k} must be a power of 2 no larger than reservoir.t")
                break

        gen = self.tasks.speaker_gen
        if gen.train_speaker in gen.test_speakers:
            errors.append("tasks.speaker_gen.test_speakers must not include the train speaker")

        if self.runtime.threads < 0:
            errors.append("runtime.threads must be non-negative")

        valid_log_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        if self.logging.level not in valid_log_levels:
            errors.append(f"Log level must be one of: {valid_log_levels}")
        if self.logging.format not in ("json", "console"):
            errors.append("logging.format must be 'json' or 'console'")

        return errors

    def require_valid(self) -> "Settings":
        errors = self.validate()
        if errors:
            raise ConfigError("Invalid configuration: " + "; ".join(errors), errors=errors)
        return self


def _coerce(current: Any, value: Any, key: str) -> Any:
    """Coerce a config value to the type of the field's current value."""
    if value is None:
        return None
    try:
        if isinstance(current, bool):
            if not isinstance(value, bool):
                raise TypeError("expected a boolean")
            return value
        if isinstance(current, Path) or key.endswith(("file_path", "output_dir")):
            return Path(value)
        if isinstance(current, int):
            if isinstance(value, float) and not value.is_integer():
                raise TypeError("expected an integer")
            return int(value)
        if isinstance(current, float) or key.endswith("substrate_side"):
            return float(value)
        if isinstance(current, str):
            return str(value)
        if isinstance(current, list):
            if not isinstance(value, list):
                raise TypeError("expected a list")
            return list(value)
        if isinstance(current, dict):
            if not isinstance(value, dict):
                raise TypeError("expected a mapping")
            return dict(value)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Invalid value for configuration key '{key}': {e}", key=key)
    return value


def _plain(obj: Any) -> Any:
    if is_dataclass(obj):
        return {f.name: _plain(getattr(obj, f.name)) for f in fields(obj)}
    if isinstance(obj, Path):
        return str(obj)
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj
