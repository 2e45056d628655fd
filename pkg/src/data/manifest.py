"""
Per-dataset manifests.

A manifest is a small YAML key-value file describing where a raw UCI file
lives and how to turn it into a Dataset (label column, header flag,
delimiter, columns to drop, optional label relabelling).
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import yaml

from src.common.error_categorization import DataError
from src.data.dataset import Dataset, load_csv

MANIFEST_FIELDS = {
    "name": {"type": str, "required": True},
    "path": {"type": str, "required": True},
    "url": {"type": str, "default": None},
    "sha256": {"type": str, "default": None},
    "label_column": {"type": (int, str), "default": -1},
    "header": {"type": bool, "default": False},
    "delimiter": {"type": str, "default": "comma"},
    "drop_columns": {"type": list, "default": []},
    "label_map": {"type": dict, "default": None},
    "description": {"type": str, "default": ""},
}


@dataclass(frozen=True)
class DatasetManifest:
    """How to load one raw dataset file."""
    name: str
    path: str
    url: Optional[str] = None
    sha256: Optional[str] = None
    label_column: Union[int, str] = -1
    header: bool = False
    delimiter: str = "comma"
    drop_columns: List[Union[int, str]] = field(default_factory=list)
    label_map: Optional[Dict[str, str]] = None
    description: str = ""
    source: Optional[str] = None

    def resolved_path(self) -> Path:
        """Data path; relative paths resolve against the working directory."""
        return Path(self.path).expanduser()


def _parse_manifest(raw: Dict[str, Any], source: str) -> DatasetManifest:
    unknown = set(raw) - set(MANIFEST_FIELDS)
    if unknown:
        raise DataError(f"Unknown manifest key(s) in {source}: {', '.join(sorted(unknown))}")

    values: Dict[str, Any] = {}
    for key, schema in MANIFEST_FIELDS.items():
        if key in raw and raw[key] is not None:
            value = raw[key]
            if isinstance(value, bool) and schema["type"] is not bool:
                raise DataError(f"Invalid type for {key} in {source}")
            if not isinstance(value, schema["type"]):
                raise DataError(f"Invalid type for {key} in {source}: got {type(value).__name__}")
            values[key] = value
        elif schema.get("required"):
            raise DataError(f"Missing required manifest key '{key}' in {source}")
        else:
            default = schema["default"]
            values[key] = list(default) if isinstance(default, list) else default

    if values["label_map"] is not None:
        values["label_map"] = {str(k): str(v) for k, v in values["label_map"].items()}
    if values["delimiter"] not in ("comma", "whitespace"):
        raise DataError(f"delimiter must be 'comma' or 'whitespace' in {source}")
    return DatasetManifest(source=source, **values)


def load_manifest(path: Union[str, Path]) -> DatasetManifest:
    """
    Parse a manifest file.

    Raises:
        DataError: missing file, malformed YAML, unknown or missing keys
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"Manifest not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            raw = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise DataError(f"Invalid YAML format in {path}: {e}")
    if not isinstance(raw, dict):
        raise DataError(f"Manifest {path} must be a YAML mapping")
    return _parse_manifest(raw, str(path))


def resolve_manifest(name_or_path: str, manifest_dir: Union[str, Path]) -> Path:
    """Accept either a manifest file path or a bare dataset name."""
    candidate = Path(name_or_path)
    if candidate.suffix in (".yaml", ".yml") or candidate.is_file():
        return candidate
    return Path(manifest_dir) / f"{name_or_path}.yaml"


def load_dataset(manifest: DatasetManifest) -> Dataset:
    """Load the dataset a manifest describes."""
    return load_csv(
        manifest.resolved_path(),
        label_column=manifest.label_column,
        header=manifest.header,
        delimiter=manifest.delimiter,
        drop_columns=manifest.drop_columns,
        label_map=manifest.label_map,
        name=manifest.name,
    )
