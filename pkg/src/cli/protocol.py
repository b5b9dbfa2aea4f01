"""
Experiment protocols

A protocol file fixes one validation run: the dataset, the reconstruction
mode and its parameters, and where results go. Paths inside a protocol are
relative to the protocol file.
"""

from pathlib import Path
from typing import Any, List, Literal, Optional, Union
import logging

from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator
import yaml

from src.core.errors import ConfigurationError
from src.pca.model import CENTERING_ALIASES, Centering

logger = logging.getLogger(__name__)

Mode = Literal["full", "bands", "lincomb"]


class LinCombSpec(BaseModel):
    """Reference bands and the bands predicted from them"""

    source_nm: List[float]
    targets_nm: List[float]

    @model_validator(mode="after")
    def _targets_not_sources(self) -> "LinCombSpec":
        if not self.source_nm:
            raise ValueError("source_nm is empty")
        if not self.targets_nm:
            raise ValueError("targets_nm is empty")
        overlap = sorted(set(self.source_nm) & set(self.targets_nm))
        if overlap:
            raise ValueError(f"targets_nm {overlap} are also source bands")
        return self


class ProtocolFile(BaseModel):
    """One validation run"""

    name: str
    description: Optional[str] = None
    dataset: Path
    mode: Mode = "full"
    centering: Centering = Centering.CENTERED
    components: Union[int, List[int]] = 6
    bands_nm: Optional[List[float]] = None
    lincomb: Optional[LinCombSpec] = None
    output_dir: Path = Path("results")
    snap: bool = False
    workers: Optional[int] = Field(default=None, ge=1)
    base_dir: Path = Field(default=Path("."), exclude=True)

    @field_validator("centering", mode="before")
    @classmethod
    def _centering_alias(cls, value: Any) -> Any:
        return CENTERING_ALIASES.get(value, value) if isinstance(value, str) else value

    @field_validator("components")
    @classmethod
    def _positive_components(cls, value: Union[int, List[int]]) -> Union[int, List[int]]:
        values = value if isinstance(value, list) else [value]
        if not values:
            raise ValueError("components list is empty")
        if any(m < 1 for m in values):
            raise ValueError(f"components must be >= 1, got {values}")
        return value

    @model_validator(mode="after")
    def _mode_fields(self) -> "ProtocolFile":
        if self.mode == "bands":
            if not self.bands_nm:
                raise ValueError("bands_nm is required in bands mode")
            if isinstance(self.components, list):
                raise ValueError("components must be a single integer in bands mode")
        if self.mode == "lincomb" and self.lincomb is None:
            raise ValueError("lincomb is required in lincomb mode")
        return self

    @property
    def component_list(self) -> List[int]:
        return list(self.components) if isinstance(self.components, list) else [self.components]

    @property
    def is_sweep(self) -> bool:
        return self.mode == "full" and len(self.component_list) > 1

    def resolve(self, path: Path) -> Path:
        return path if path.is_absolute() else self.base_dir / path

    @property
    def dataset_path(self) -> Path:
        return self.resolve(self.dataset)

    @property
    def output_path(self) -> Path:
        return self.resolve(self.output_dir)


def read_protocol(path: Union[str, Path]) -> ProtocolFile:
    """Load and validate a protocol YAML file"""

    path = Path(path)
    try:
        with open(path) as f:
            data = yaml.safe_load(f)
    except OSError as e:
        raise ConfigurationError(f"{path}: {e}") from e
    except yaml.YAMLError as e:
        raise ConfigurationError(f"{path}: invalid YAML: {e}") from e

    if not isinstance(data, dict):
        raise ConfigurationError(f"{path}: protocol must be a mapping")
    try:
        protocol = ProtocolFile(**data)
    except ValidationError as e:
        raise ConfigurationError(f"{path}: invalid protocol: {e}") from e

    protocol.base_dir = path.parent
    logger.debug(f"Read protocol '{protocol.name}' ({protocol.mode}) from {path}")
    return protocol
