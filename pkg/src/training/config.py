"""
Training run configuration.
"""

from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Any, Dict, Optional

from core.errors import ConfigurationError
from boosting.tree import TreeParams
from dataset.binning import DEFAULT_MAX_BINS


class TrainMode(str, Enum):
    """How tree builds are scheduled"""
    SERIAL = "serial"  # one loop, no workers
    VIRTUAL = "virtual"  # deterministic event scheduler in virtual time
    THREADS = "threads"  # real worker threads


@dataclass(frozen=True)
class TrainConfig:
    """
    Parameters of one training run.

    ``max_staleness`` of None means twice the worker count unless
    ``unbounded`` is set. ``build_time``, ``target_time`` and
    ``build_jitter`` only affect the virtual scheduler.
    """
    n_trees: int = 100
    step: float = 0.01
    rate: float = 1.0
    tree: TreeParams = field(default_factory=TreeParams)
    n_workers: int = 1
    max_staleness: Optional[int] = None
    unbounded: bool = False
    mode: TrainMode = TrainMode.VIRTUAL
    schedule_seed: int = 0
    sample_seed: int = 0
    build_time: float = 10.0
    target_time: float = 1.0
    build_jitter: float = 0.0
    max_bins: int = DEFAULT_MAX_BINS
    progress_every: int = 50

    def __post_init__(self):
        object.__setattr__(self, "mode", TrainMode(self.mode))
        if self.n_trees < 0:
            raise ConfigurationError(f"n_trees must be >= 0, got {self.n_trees}")
        if not self.step > 0:
            raise ConfigurationError(f"step must be positive, got {self.step}")
        if not 0.0 < self.rate <= 1.0:
            raise ConfigurationError(f"rate must be in (0, 1], got {self.rate}")
        if self.n_workers < 1:
            raise ConfigurationError(f"n_workers must be >= 1, got {self.n_workers}")
        if self.max_staleness is not None and self.max_staleness < 0:
            raise ConfigurationError(f"max_staleness must be >= 0, got {self.max_staleness}")
        if self.mode is TrainMode.SERIAL and self.n_workers != 1:
            raise ConfigurationError("serial mode runs exactly one worker")
        if not self.build_time > 0:
            raise ConfigurationError(f"build_time must be positive, got {self.build_time}")
        if self.target_time < 0 or self.build_jitter < 0:
            raise ConfigurationError("target_time and build_jitter must be >= 0")
        if self.max_bins < 2:
            raise ConfigurationError(f"max_bins must be >= 2, got {self.max_bins}")
        if self.progress_every < 0:
            raise ConfigurationError(f"progress_every must be >= 0, got {self.progress_every}")

    @property
    def staleness_limit(self) -> Optional[int]:
        """Effective bound on staleness; None when unbounded."""
        if self.unbounded:
            return None
        if self.max_staleness is None:
            return 2 * self.n_workers
        return self.max_staleness

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["mode"] = self.mode.value
        return data
