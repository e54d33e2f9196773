"""
CSV and JSON writers for experiment results
"""

import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from .config import ADZSettings
from .models import ExperimentConfig

logger = logging.getLogger(__name__)

LINE_END = "\r\n"
# Not recorded in the preamble; data rows do not depend on them.
VOLATILE_CONFIG_FIELDS = {"output", "threads", "format", "check"}
RECORDED_SETTINGS = ("sphere_resolution", "radial_order", "radial_panel_width", "gauss_jacobi_count")


@dataclass
class ExperimentResult:
    """
    Table produced by one subcommand.

    Attributes:
        command: Subcommand name
        columns: Column names in output order
        rows: One dict per row; missing keys are written empty
        summary: Scalar summary fields
        notes: Free-text header notes
        failures: Self-check failures, one message each
    """

    command: str
    columns: List[str]
    rows: List[Dict[str, Any]] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)
    failures: List[str] = field(default_factory=list)


def format_value(value: Any) -> str:
    """Shortest round-trip text for a cell value; None is empty."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    return str(value)


def _json_value(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _json_value(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_value(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else format_value(value)
    return value


def provenance(
    result: ExperimentResult,
    config: ExperimentConfig,
    settings: ADZSettings,
    version: str,
    runtime: Optional[float] = None,
) -> Dict[str, Any]:
    """Header block: library version, command, seed, resolved config and numerical settings."""
    block: Dict[str, Any] = {
        "library": "adz",
        "version": version,
        "command": result.command,
        "seed": config.seed,
        "config": config.model_dump(mode="json", exclude=VOLATILE_CONFIG_FIELDS),
        "settings": {name: getattr(settings, name) for name in RECORDED_SETTINGS},
    }
    if runtime is not None and settings.record_runtime:
        block["runtime_seconds"] = runtime
    return block


def render_csv(result: ExperimentResult, header: Dict[str, Any]) -> str:
    """RFC-4180 CSV with a #-prefixed preamble of provenance, notes and summary lines."""
    buffer = io.StringIO(newline="")
    for key, value in header.items():
        text = json.dumps(_json_value(value), sort_keys=True, separators=(",", ":")) if isinstance(value, dict) else format_value(value)
        buffer.write(f"# {key}: {text}{LINE_END}")
    for note in result.notes:
        buffer.write(f"# note: {note}{LINE_END}")
    for key, value in result.summary.items():
        buffer.write(f"# summary.{key}: {format_value(value)}{LINE_END}")
    writer = csv.writer(buffer, lineterminator=LINE_END)
    writer.writerow(result.columns)
    for row in result.rows:
        writer.writerow([format_value(row.get(column)) for column in result.columns])
    return buffer.getvalue()


def render_json(result: ExperimentResult, header: Dict[str, Any]) -> str:
    """Same payload as the CSV: provenance, notes, summary, columns and rows."""
    payload = {
        "provenance": _json_value(header),
        "notes": list(result.notes),
        "summary": _json_value(result.summary),
        "columns": list(result.columns),
        "rows": [{column: _json_value(row.get(column)) for column in result.columns} for row in result.rows],
    }
    return json.dumps(payload, indent=2) + "\n"


def write_result(
    result: ExperimentResult,
    config: ExperimentConfig,
    settings: ADZSettings,
    version: str,
    runtime: Optional[float] = None,
) -> str:
    """
    Render the result in the configured format and write it to config.output or stdout.

    Returns:
        The rendered text
    """
    header = provenance(result, config, settings, version, runtime)
    text = render_json(result, header) if config.format == "json" else render_csv(result, header)
    if config.output:
        path = Path(config.output)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        logger.info(f"Wrote {len(result.rows)} rows to {path}")
    else:
        sys.stdout.write(text)
        sys.stdout.flush()
    return text
