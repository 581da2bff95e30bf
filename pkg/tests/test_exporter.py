"""Tests for JSON and CSV report export."""

import csv
import json

import numpy as np
import pytest

from pbarrier import __version__
from pbarrier.core import PParams, ScalarField
from pbarrier.exporter import (
    REPORT_SCHEMA,
    export_cert_points,
    export_csv,
    export_grid_solution,
    export_json,
    export_mask,
)
from pbarrier.geometry.domains import make_domain
from pbarrier.residual import certify
from pbarrier.solver import solve_masked
from pbarrier.solver.marching import cylinder_mask


@pytest.fixture
def temp_output_dir(tmp_path):
    """Create a temporary output directory."""
    output_dir = tmp_path / "exports"
    output_dir.mkdir()
    return output_dir


@pytest.fixture
def small_mask():
    return cylinder_mask((0.0, 1.0), 0.05, 0.25, levels=2)


def _data_lines(path):
    with open(path, encoding="utf-8") as f:
        return [line for line in f if not line.startswith("#")]


def _comment_lines(path):
    with open(path, encoding="utf-8") as f:
        return [line.rstrip("\n") for line in f if line.startswith("#")]


def _heat_field():
    return ScalarField(
        lambda X, T: np.exp(-T) * np.sin(X[:, 0]),
        1,
        dt=lambda X, T: -np.exp(-T) * np.sin(X[:, 0]),
        grad=lambda X, T: (np.exp(-T) * np.cos(X[:, 0]))[:, None],
        hessian=lambda X, T: (-np.exp(-T) * np.sin(X[:, 0]))[:, None, None],
        label="heat",
    )


class TestJSONExport:
    """Test JSON export functionality."""

    def test_metadata_header(self, temp_output_dir):
        """JSON export wraps the body under an export_metadata header."""
        path = export_json({"answer": 42}, temp_output_dir / "report.json", "abc123")

        with open(path, encoding="utf-8") as f:
            data = json.load(f)

        meta = data["export_metadata"]
        assert meta["schema"] == REPORT_SCHEMA
        assert meta["config_checksum"] == "abc123"
        assert meta["generator"] == f"pbarrier {__version__}"
        assert "exported_at" in meta
        assert data["report"] == {"answer": 42}

    def test_pydantic_models_are_dumped(self, temp_output_dir):
        path = export_json({"params": PParams(p=3)}, temp_output_dir / "params.json")

        data = json.loads(path.read_text(encoding="utf-8"))
        assert data["report"]["params"] == {"p": 3.0, "n": 1, "a": 1.0}
        assert data["export_metadata"]["config_checksum"] is None

    def test_creates_parent_directories(self, tmp_path):
        path = export_json({}, tmp_path / "nested" / "deeper" / "r.json")
        assert path.exists()


class TestCSVExport:
    """Test CSV export functionality."""

    def test_comments_then_header(self, temp_output_dir):
        """CSV starts with '#' metadata lines followed by one header row."""
        path = export_csv(
            ["r", "h", "deviation"],
            [[0.5, 0.25, 1e-3], [0.25, 0.25, ""]],
            temp_output_dir / "table.csv",
            comments=["domain: cylinder"],
            config_checksum="abc123",
        )

        comments = _comment_lines(path)
        assert comments[0] == f"# schema: {REPORT_SCHEMA}"
        assert "# config_checksum: abc123" in comments
        assert comments[-1] == "# domain: cylinder"

        rows = list(csv.reader(_data_lines(path)))
        assert rows[0] == ["r", "h", "deviation"]
        assert len(rows) == 3
        assert rows[2][2] == ""

    def test_no_checksum_line_without_checksum(self, temp_output_dir):
        path = export_csv(["a"], [], temp_output_dir / "empty.csv")
        assert not any("config_checksum" in line for line in _comment_lines(path))
        assert list(csv.reader(_data_lines(path))) == [["a"]]


class TestCertPointExport:
    """Test per-point certification export."""

    def test_point_rows(self, temp_output_dir):
        domain = make_domain({"kind": "box", "lower": [0.0], "upper": [1.0]})
        report = certify(_heat_field(), PParams(p=2), domain, samples=20, per_point=True)

        path = export_cert_points(report, 1, temp_output_dir / "points.csv")

        rows = list(csv.DictReader(_data_lines(path)))
        assert len(rows) == 20
        assert set(rows[0]) == {"x_0", "t", "residual", "status"}
        assert {row["status"] for row in rows} == {"pass"}
        assert "# field: heat" in _comment_lines(path)

    def test_requires_records(self, temp_output_dir):
        domain = make_domain({"kind": "box", "lower": [0.0], "upper": [1.0]})
        report = certify(_heat_field(), PParams(p=2), domain, samples=5)

        with pytest.raises(ValueError, match="per_point=True"):
            export_cert_points(report, 1, temp_output_dir / "points.csv")


class TestGridExport:
    """Test mask and grid-solution export."""

    def test_mask_header(self, small_mask, temp_output_dir):
        path = export_mask(small_mask, temp_output_dir / "mask.csv")

        rows = list(csv.reader(_data_lines(path)))
        assert rows[0] == ["t_index", "cell_index_0", "active", "exposed", "final_time"]
        assert len(rows) > 1
        assert f"# checksum: {small_mask.checksum()}" in _comment_lines(path)

    def test_grid_solution_pair(self, small_mask, temp_output_dir):
        sol = solve_masked(PParams(p=3), small_mask, lambda X, T: X[:, 0])

        csv_path, json_path = export_grid_solution(sol, temp_output_dir, "run", "abc123")

        assert csv_path.name == "run.csv"
        assert json_path.name == "run.json"
        rows = list(csv.reader(_data_lines(csv_path)))
        assert rows[0] == ["t_index", "cell_index_0", "value"]
        # three active cells on each of two levels
        assert len(rows) == 1 + 6
        manifest = json.loads(json_path.read_text(encoding="utf-8"))["report"]
        assert manifest["mask_checksum"] == small_mask.checksum()
        assert manifest["steps"] == sol.steps
