"""
Tests for dataset manifests.
"""
from pathlib import Path

import pytest
import yaml

from src.common.error_categorization import DataError
from src.data.manifest import load_dataset, load_manifest, resolve_manifest

MANIFEST_DIR = Path("config/datasets")


class TestLoadManifest:
    """Test suite for load_manifest."""

    def write(self, tmp_path, content):
        path = tmp_path / "ds.yaml"
        path.write_text(yaml.safe_dump(content))
        return path

    def test_defaults_applied(self, tmp_path):
        """Test optional keys receive defaults."""
        manifest = load_manifest(self.write(tmp_path, {"name": "toy", "path": "toy.csv"}))
        assert manifest.label_column == -1
        assert manifest.header is False
        assert manifest.delimiter == "comma"
        assert manifest.drop_columns == []
        assert manifest.sha256 is None

    def test_unknown_key_rejected(self, tmp_path):
        """Test typos are reported."""
        with pytest.raises(DataError, match="Unknown manifest key"):
            load_manifest(self.write(tmp_path, {"name": "t", "path": "t.csv", "lable_column": 0}))

    def test_missing_required_key(self, tmp_path):
        """Test that name and path are required."""
        with pytest.raises(DataError, match="Missing required manifest key 'path'"):
            load_manifest(self.write(tmp_path, {"name": "t"}))

    def test_bad_delimiter(self, tmp_path):
        """Test the delimiter vocabulary."""
        with pytest.raises(DataError, match="delimiter"):
            load_manifest(self.write(tmp_path, {"name": "t", "path": "t.csv", "delimiter": "tab"}))

    def test_label_map_keys_are_strings(self, tmp_path):
        """Test YAML integer keys become strings."""
        manifest = load_manifest(self.write(
            tmp_path, {"name": "t", "path": "t.csv", "label_map": {1: "a", 2: "b"}}
        ))
        assert manifest.label_map == {"1": "a", "2": "b"}

    def test_missing_manifest_file(self, tmp_path):
        """Test absent manifests raise DataError."""
        with pytest.raises(DataError, match="Manifest not found"):
            load_manifest(tmp_path / "absent.yaml")


class TestResolveAndLoad:
    """Test suite for manifest resolution and dataset loading."""

    def test_bare_name_resolves_into_manifest_dir(self):
        """Test names map to <dir>/<name>.yaml."""
        assert resolve_manifest("wine", "config/datasets") == Path("config/datasets/wine.yaml")

    def test_explicit_path_is_kept(self, tmp_path):
        """Test manifest paths are used as given."""
        path = tmp_path / "custom.yaml"
        assert resolve_manifest(str(path), "config/datasets") == path

    def test_load_dataset_through_manifest(self, tmp_path):
        """Test the manifest drives the CSV loader."""
        data = tmp_path / "toy.csv"
        data.write_text("10,1.0,2.0,a\n11,3.0,4.0,b\n12,5.0,6.0,a\n")
        manifest_path = tmp_path / "toy.yaml"
        manifest_path.write_text(yaml.safe_dump({
            "name": "toy", "path": str(data), "drop_columns": [0], "label_column": -1,
        }))
        ds = load_dataset(load_manifest(manifest_path))
        assert ds.name == "toy"
        assert ds.n_features == 2
        assert ds.class_names == ("a", "b")

    @pytest.mark.parametrize("name", ["cmc", "glass", "glass_binary", "seeds", "sonar", "wine"])
    def test_shipped_manifests_parse(self, name):
        """Test every shipped manifest is valid and names its source URL."""
        manifest = load_manifest(MANIFEST_DIR / f"{name}.yaml")
        assert manifest.name == name
        assert manifest.url.startswith("https://")
