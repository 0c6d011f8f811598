"""
YAML run configuration.

A run file has the sections ``data``, ``sampling``, ``tree``, ``training``,
``sweep`` and ``output``. Unknown keys are rejected. ``section.key=value``
overrides are applied on top of the file before validation, and a run's
``manifest.yaml`` can be used as a run file again (its ``config`` entry is read).

Keys left out of the file take ``max_bins``, the sampling and schedule seeds
and ``progress_every`` from ``core.config.Settings``.
"""

import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field

from core.config import get_settings
from core.errors import ConfigurationError
from boosting.tree import TreeParams
from dataset.libsvm import read_libsvm
from dataset.models import SparseDataset
from dataset.preprocessing import deduplicate, split_train_test
from dataset.synthetic import SYNTHETIC_PREFIX, make_highdiv, make_lowdiv
from training.config import TrainConfig, TrainMode
from training.sweep import SweepAxis


logger = logging.getLogger(__name__)


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", validate_default=True)


class DataSection(_Section):
    train: str = "synthetic:lowdiv"
    test: Optional[str] = None
    test_fraction: Optional[float] = Field(default=None, gt=0, lt=1)
    split_seed: int = 0
    n_features: Optional[int] = Field(default=None, ge=1)
    max_bins: int = Field(default_factory=lambda: get_settings().max_bins, ge=2)
    # synthetic generators
    scale: float = Field(default=0.01, gt=0)
    n_samples: int = Field(default=2000, ge=1)
    synthetic_features: int = Field(default=100, ge=2)
    synthetic_seed: int = 0


class SamplingSection(_Section):
    rate: float = Field(default=1.0, gt=0, le=1)
    seed: int = Field(default_factory=lambda: get_settings().default_seed)


class TreeSection(_Section):
    max_leaves: int = Field(default=100, ge=1)
    min_samples_leaf: float = Field(default=1.0, gt=0)
    feature_fraction: float = Field(default=1.0, gt=0, le=1)
    feature_seed: int = 0


class TrainingSection(_Section):
    n_trees: int = Field(default=100, ge=0)
    step: float = Field(default=0.01, gt=0)
    n_workers: int = Field(default=1, ge=1)
    max_staleness: Optional[int] = Field(default=None, ge=0)
    unbounded: bool = False
    mode: TrainMode = TrainMode.VIRTUAL
    schedule_seed: int = Field(default_factory=lambda: get_settings().default_seed)
    build_time: float = Field(default=10.0, gt=0)
    target_time: float = Field(default=1.0, ge=0)
    build_jitter: float = Field(default=0.0, ge=0)
    progress_every: int = Field(default_factory=lambda: get_settings().progress_every, ge=0)


class SweepSection(_Section):
    axis: SweepAxis = SweepAxis.WORKERS
    values: List[float] = Field(default_factory=lambda: [1, 4, 16])
    threshold: Optional[float] = None


class OutputSection(_Section):
    dir: Optional[str] = None


class RunConfig(_Section):
    data: DataSection = Field(default_factory=DataSection)
    sampling: SamplingSection = Field(default_factory=SamplingSection)
    tree: TreeSection = Field(default_factory=TreeSection)
    training: TrainingSection = Field(default_factory=TrainingSection)
    sweep: SweepSection = Field(default_factory=SweepSection)
    output: OutputSection = Field(default_factory=OutputSection)

    def to_train_config(self) -> TrainConfig:
        t = self.training
        return TrainConfig(
            n_trees=t.n_trees,
            step=t.step,
            rate=self.sampling.rate,
            tree=TreeParams(
                max_leaves=self.tree.max_leaves,
                min_samples_leaf=self.tree.min_samples_leaf,
                feature_fraction=self.tree.feature_fraction,
                feature_seed=self.tree.feature_seed,
            ),
            n_workers=t.n_workers,
            max_staleness=t.max_staleness,
            unbounded=t.unbounded,
            mode=t.mode,
            schedule_seed=t.schedule_seed,
            sample_seed=self.sampling.seed,
            build_time=t.build_time,
            target_time=t.target_time,
            build_jitter=t.build_jitter,
            max_bins=self.data.max_bins,
            progress_every=t.progress_every,
        )

    def echo(self) -> Dict[str, Any]:
        """Plain-data form written to manifests."""
        return self.model_dump(mode="json")


def apply_overrides(raw: Dict[str, Any], overrides: List[str]) -> Dict[str, Any]:
    """Apply ``section.key=value`` strings; values are parsed as YAML scalars."""
    for item in overrides:
        path, sep, value = item.partition("=")
        parts = path.strip().split(".")
        if not sep or len(parts) != 2 or not all(parts):
            raise ConfigurationError(f"override must look like section.key=value, got {item!r}")
        section, key = parts
        target = raw.setdefault(section, {})
        if not isinstance(target, dict):
            raise ConfigurationError(f"section {section!r} is not a mapping")
        target[key] = yaml.safe_load(value) if value.strip() else None
    return raw


def load_run_config(
    path: Optional[Union[str, Path]] = None,
    overrides: Optional[List[str]] = None,
) -> RunConfig:
    raw: Dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigurationError(f"config file not found: {path}")
        with path.open("r", encoding="utf-8") as handle:
            loaded = yaml.safe_load(handle) or {}
        if not isinstance(loaded, dict):
            raise ConfigurationError(f"{path} does not contain a mapping")
        raw = loaded.get("config", loaded)
    return RunConfig.model_validate(apply_overrides(dict(raw), overrides or []))


def load_dataset(source: str, data: DataSection) -> SparseDataset:
    """Load ``synthetic:lowdiv``, ``synthetic:highdiv`` or a LIBSVM file, deduplicated."""
    if source.startswith(SYNTHETIC_PREFIX):
        name = source[len(SYNTHETIC_PREFIX):]
        if name == "lowdiv":
            return make_lowdiv(scale=data.scale)
        if name == "highdiv":
            return make_highdiv(
                n_samples=data.n_samples,
                n_features=data.synthetic_features,
                seed=data.synthetic_seed,
            )
        raise ConfigurationError(f"unknown synthetic dataset: {source!r}")
    return deduplicate(read_libsvm(source, n_features=data.n_features))


def load_train_test(data: DataSection):
    """Training set and optional test set, splitting ``train`` when ``test_fraction`` is set."""
    train = load_dataset(data.train, data)
    if data.test is not None:
        return train, load_dataset(data.test, data)
    if data.test_fraction is not None:
        return split_train_test(train, data.test_fraction, data.split_seed)
    return train, None
