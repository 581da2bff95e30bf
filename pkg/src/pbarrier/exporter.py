"""Report export in JSON and CSV formats.

JSON reports carry an export_metadata header (schema, export time,
config checksum, generator). CSV files start with '#'-prefixed metadata
lines followed by one fixed header row, so external plotting tools can
skip the comments and read the table.
"""

from __future__ import annotations

import csv
import json
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterable, Sequence

from pydantic import BaseModel

from pbarrier import __version__
from pbarrier.geometry.mask import SpaceTimeMask
from pbarrier.residual.certify import CertReport
from pbarrier.solver.grid import GridSolution

logger = logging.getLogger(__name__)

REPORT_SCHEMA = "pbl-report/1"


def export_metadata(config_checksum: str | None = None, **extra: Any) -> dict[str, Any]:
    metadata = {
        "exported_at": datetime.now(timezone.utc).isoformat(),
        "schema": REPORT_SCHEMA,
        "config_checksum": config_checksum,
        "generator": f"pbarrier {__version__}",
    }
    metadata.update(extra)
    return metadata


def _jsonable(body: Any) -> Any:
    if isinstance(body, BaseModel):
        return json.loads(body.model_dump_json())
    if isinstance(body, dict):
        return {k: _jsonable(v) for k, v in body.items()}
    if isinstance(body, (list, tuple)):
        return [_jsonable(v) for v in body]
    return body


def export_json(
    body: dict[str, Any] | BaseModel,
    output_path: str | Path,
    config_checksum: str | None = None,
) -> Path:
    """Write a report body under an export_metadata header.

    Args:
        body: Report fields; pydantic models are dumped in JSON mode
        output_path: Path to save the JSON file
        config_checksum: Checksum of the config that produced the report
    """
    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    export_data = {
        "export_metadata": export_metadata(config_checksum),
        "report": _jsonable(body),
    }
    with open(output_path, "w", encoding="utf-8") as f:
        json.dump(export_data, f, indent=2, ensure_ascii=False, default=float)
    logger.info(f"Wrote {output_path}")
    return output_path


def export_csv(
    header: Sequence[str],
    rows: Iterable[Sequence[Any]],
    output_path: str | Path,
    comments: Sequence[str] = (),
    config_checksum: str | None = None,
) -> Path:
    """Write '#' metadata lines, the header row and the data rows."""
    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with open(output_path, "w", encoding="utf-8", newline="") as f:
        # plain writes so the comment lines are never quoted
        f.write(f"# schema: {REPORT_SCHEMA}\n")
        f.write(f"# generator: pbarrier {__version__}\n")
        if config_checksum:
            f.write(f"# config_checksum: {config_checksum}\n")
        for line in comments:
            f.write(f"# {line}\n")
        writer = csv.writer(f)
        writer.writerow(list(header))
        for row in rows:
            writer.writerow(list(row))
            count += 1
    logger.info(f"Wrote {count} rows to {output_path}")
    return output_path


def cert_csv_header(n: int) -> list[str]:
    return [f"x_{i}" for i in range(n)] + ["t", "residual", "status"]


def export_cert_points(
    report: CertReport, n: int, output_path: str | Path, config_checksum: str | None = None
) -> Path:
    """Per-point certification rows x_0..x_{n-1},t,residual,status.

    Raises:
        ValueError: If the report was produced without per-point records
    """
    if report.records is None:
        raise ValueError("report has no per-point records; certify with per_point=True")
    rows = (
        [*rec.x, rec.t, "" if rec.residual is None else rec.residual, rec.status]
        for rec in report.records
    )
    return export_csv(
        cert_csv_header(n),
        rows,
        output_path,
        comments=[f"field: {report.label}", f"sense: {report.sense}", f"tol: {report.tol:g}"],
        config_checksum=config_checksum,
    )


def export_mask(
    mask: SpaceTimeMask, output_path: str | Path, config_checksum: str | None = None
) -> Path:
    header = ["t_index"] + [f"cell_index_{i}" for i in range(mask.n)] + [
        "active",
        "exposed",
        "final_time",
    ]
    return export_csv(
        header,
        mask.rows(),
        output_path,
        comments=[f"mask: {mask.label}", f"h: {mask.h:g}", f"checksum: {mask.checksum()}"],
        config_checksum=config_checksum,
    )


def export_grid_solution(
    solution: GridSolution,
    output_dir: str | Path,
    stem: str,
    config_checksum: str | None = None,
) -> tuple[Path, Path]:
    """Write <stem>.csv with the active values and <stem>.json with the run manifest."""
    output_dir = Path(output_dir)
    csv_path = export_csv(
        solution.csv_header(),
        solution.rows(),
        output_dir / f"{stem}.csv",
        comments=[f"solution: {solution.label}"],
        config_checksum=config_checksum,
    )
    json_path = export_json(solution.manifest(), output_dir / f"{stem}.json", config_checksum)
    return csv_path, json_path
