"""Project configuration: defaults live in pydantic models, overridden by archsearch.toml (or JSON)."""

import json
import logging
import tomllib
from pathlib import Path
from typing import Any, Dict, Optional, Union

from pydantic import BaseModel, Field, ValidationError

from archsearch_mip.exceptions import ArchSearchError
from archsearch_mip.harness.bo_loop import RunConfig

log = logging.getLogger(__name__)

DEFAULT_CONFIG_FILE = "archsearch.toml"


class KernelCompareConfig(BaseModel):
    train_n: int = Field(default=50, ge=2, description="Training architectures per replication")
    test_n: int = Field(default=400, ge=1, description="Test architectures per replication")
    reps: int = Field(default=20, ge=1, description="Replications")
    seed: int = 0


class VerifyConfig(BaseModel):
    n_max: int = Field(default=3, ge=1, le=5, description="Largest graph size to certify")
    n5_sample: Optional[int] = Field(default=None, ge=1, description="Random subset of n=5 graphs; all when unset")
    seed: int = 0


class ArchSearchConfig(BaseModel):
    run: RunConfig = Field(default_factory=RunConfig)
    kernel_compare: KernelCompareConfig = Field(default_factory=KernelCompareConfig)
    verify: VerifyConfig = Field(default_factory=VerifyConfig)


def _read(path: Path) -> Dict[str, Any]:
    if path.suffix == ".toml":
        with path.open("rb") as handle:
            return tomllib.load(handle)
    if path.suffix == ".json":
        return json.loads(path.read_text())
    raise ArchSearchError(f"unsupported config format {path.suffix!r}, use .toml or .json")


def load_config(path: Optional[Union[str, Path]] = None) -> ArchSearchConfig:
    """Read ``path``, or ``archsearch.toml`` in the working directory when present, else the defaults."""
    if path is None:
        default = Path(DEFAULT_CONFIG_FILE)
        if not default.exists():
            return ArchSearchConfig()
        path = default
    path = Path(path)
    if not path.exists():
        raise ArchSearchError(f"config file {path} does not exist")
    try:
        data = _read(path)
    except (tomllib.TOMLDecodeError, json.JSONDecodeError) as exc:
        raise ArchSearchError(f"cannot parse {path}: {exc}") from exc
    try:
        config = ArchSearchConfig.model_validate(data)
    except ValidationError as exc:
        raise ArchSearchError(f"invalid configuration in {path}: {exc}") from exc
    log.debug("Loaded configuration from %s", path)
    return config
