"""
Report factory for structured results and plot-ready curves.
Supports YAML and JSON documents with a versioned schema.
"""

import json
import logging
import math
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Union

import numpy as np
import pandas as pd
import yaml

from .. import __version__
from ..estimation import CandidateFit, ClickStatistics, as_arrays
from ..photon_statistics import EpdcModel, click_probability
from ..selection import SelectionReport
from ..sweep import SweepResult, boundary_spacings, crossover_table, regime_boundaries
from ..utils.exceptions import ValidationError

logger = logging.getLogger(__name__)

REPORT_SCHEMA_VERSION = 1
REPORT_FORMATS = ("yaml", "json")
CURVE_POINTS = 200
CROSSOVER_NOTE = (
    "crossover mu solves p_i c_i(mu) = p_j c_j(mu); for p_1 = 0.06, p_2 = 0.37 this gives "
    "2 p_1 / p_2 = 0.3243, not the often quoted 0.16, which drops the 1/2! factor"
)

Result = Union[CandidateFit, SelectionReport, SweepResult]


def _float(value: float) -> Optional[float]:
    value = float(value)
    return value if math.isfinite(value) else None


def _model_entry(model: EpdcModel) -> Dict[str, Any]:
    return model.to_dict()


def _parameters(fit: CandidateFit) -> Dict[str, Dict[str, Any]]:
    errors = fit.standard_error_map()
    values = dict(zip(fit.model.parameter_names(), fit.model.parameter_vector().tolist()))
    return {
        name: {
            "value": float(value),
            "error": _float(errors[name]) if name in errors else 0.0,
            "free": name in errors,
            "at_bound": name in fit.at_bound,
        }
        for name, value in values.items()
    }


def _fit_entry(fit: CandidateFit) -> Dict[str, Any]:
    return {
        "i_max": fit.i_max,
        "model": _model_entry(fit.model),
        "parameters": _parameters(fit),
        "chi2": _float(fit.chi2),
        "chi2_reduced": _float(fit.chi2_reduced),
        "n_points": fit.n_points,
        "n_free": fit.n_free,
        "dof": fit.dof,
        "converged": bool(fit.converged),
        "iterations": int(fit.iterations),
        "termination": fit.termination,
        "estimator": fit.estimator,
        "at_bound": list(fit.at_bound),
        "singular_parameters": list(fit.singular_parameters),
        "covariance": [[_float(v) for v in row] for row in np.asarray(fit.covariance).tolist()],
    }


def _crossovers(model: EpdcModel) -> Dict[str, Any]:
    return {"note": CROSSOVER_NOTE, "pairs": crossover_table(model)}


def _selection_entry(report: SelectionReport) -> Dict[str, Any]:
    entry: Dict[str, Any] = {
        "rule": report.rule,
        "selected_i_max": report.selected_i_max,
        "ladder": [
            {"i_max": f.i_max, "chi2": _float(f.chi2), "chi2_reduced": _float(f.chi2_reduced),
             "n_free": f.n_free, "converged": bool(f.converged), "model": _model_entry(f.model)}
            for f in report.candidates
        ],
        "rule_trace": [
            {"i_max": t.i_max, "chi2_reduced": _float(t.chi2_reduced), "accepted": bool(t.accepted), "reason": t.reason}
            for t in report.rule_trace
        ],
    }
    if report.selected_i_max is not None:
        selected = report.selected
        entry["selected"] = _fit_entry(selected)
        entry["crossovers"] = _crossovers(selected.model)
    return entry


def build_report(result: Result) -> Dict[str, Any]:
    """
    Serializable document for a fit, a selection or a sweep.

    Contains no timestamps, so equal inputs give byte-identical output.
    """
    document: Dict[str, Any] = {"schema_version": REPORT_SCHEMA_VERSION}
    if isinstance(result, CandidateFit):
        document["kind"] = "candidate_fit"
        document.update(_fit_entry(result))
        document["crossovers"] = _crossovers(result.model)
    elif isinstance(result, SelectionReport):
        document["kind"] = "selection"
        document.update(_selection_entry(result))
    elif isinstance(result, SweepResult):
        document["kind"] = "sweep"
        document["dominance_threshold"] = result.config.dominance_threshold
        points = []
        for pt in result.points:
            entry: Dict[str, Any] = {"bias_current_uA": pt.bias_current, "error": pt.error}
            if pt.report is not None:
                entry.update(_selection_entry(pt.report))
            points.append(entry)
        document["points"] = points
        document["dominant_orders"] = result.dominant_orders()
        boundaries = regime_boundaries(result) if len(result.points) >= 3 else []
        document["regime_boundaries_uA"] = boundaries
        document["boundary_spacings_uA"] = boundary_spacings(boundaries)
    else:
        raise ValidationError(f"cannot build a report for {type(result).__name__}")
    return document


def _dump(document: Dict[str, Any], path: Path, fmt: str) -> None:
    fmt = fmt.lower()
    with open(path, "w", encoding="utf-8") as f:
        if fmt == "yaml":
            yaml.safe_dump(document, f, sort_keys=False)
        elif fmt == "json":
            json.dump(document, f, indent=2)
            f.write("\n")
        else:
            raise ValidationError(
                f"Unsupported report format: {fmt}. "
                f"Supported formats: {', '.join(REPORT_FORMATS)}"
            )


def write_curves(
    model: EpdcModel,
    data: Sequence[ClickStatistics],
    output_dir: Path,
    stem: str,
) -> List[Path]:
    """
    Write ``<stem>_measured.tsv`` (N, R, sigma) and ``<stem>_model.tsv``
    (N, R on a log grid spanning the measured range).
    """
    arrays = as_arrays(data)
    measured = pd.DataFrame({"N": arrays.mean_photons, "R": arrays.rate, "sigma": arrays.sigma})
    positive = arrays.mean_photons[arrays.mean_photons > 0.0]
    grid = np.geomspace(positive.min(), positive.max(), CURVE_POINTS)
    curve = pd.DataFrame({"N": grid, "R": click_probability(model, grid)})

    paths = [output_dir / f"{stem}_measured.tsv", output_dir / f"{stem}_model.tsv"]
    for frame, path in zip((measured, curve), paths):
        frame.to_csv(path, sep="\t", index=False, float_format="%.17g")
    return paths


def emit_report(
    result: Result,
    output_dir: Union[str, Path],
    stem: str = "report",
    fmt: str = "yaml",
    data: Optional[Union[Sequence[ClickStatistics], Mapping[float, Sequence[ClickStatistics]]]] = None,
) -> List[Path]:
    """
    Write a structured report, curves and a metadata sidecar.

    Args:
        result: CandidateFit, SelectionReport or SweepResult
        output_dir: Destination directory (created if missing)
        stem: File name stem
        fmt: ``yaml`` or ``json``
        data: Measured statistics behind the result, for the curve files;
            a bias-current mapping for sweeps

    Returns:
        Paths of every file written

    Raises:
        OSError: If the destination is not writable
    """
    fmt = fmt.lower()
    if fmt not in REPORT_FORMATS:
        raise ValidationError(
            f"Unsupported report format: {fmt}. Supported formats: {', '.join(REPORT_FORMATS)}"
        )
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)

    report_path = output_dir / f"{stem}.{fmt}"
    _dump(build_report(result), report_path, fmt)
    written = [report_path]

    if isinstance(result, SweepResult):
        table_path = output_dir / f"{stem}_table.csv"
        result.table().to_csv(table_path, index=False, float_format="%.17g")
        written.append(table_path)
        if data is not None:
            for pt in result.points:
                if pt.ok and pt.bias_current in data:
                    written += write_curves(
                        pt.selected.model, data[pt.bias_current], output_dir, f"{stem}_{pt.bias_current:g}uA"
                    )
    elif data is not None:
        fit = result if isinstance(result, CandidateFit) else result.selected
        written += write_curves(fit.model, data, output_dir, stem)

    meta_path = output_dir / f"{stem}.meta.yaml"
    with open(meta_path, "w", encoding="utf-8") as f:
        yaml.safe_dump(
            {
                "created": datetime.now(timezone.utc).isoformat(),
                "toolkit_version": __version__,
                "files": [p.name for p in written],
            },
            f,
            sort_keys=False,
        )
    written.append(meta_path)
    logger.info("wrote %s report to %s", fmt, report_path)
    return written


def load_report(path: Union[str, Path]) -> Dict[str, Any]:
    """Read a report document, choosing the parser by file extension."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Report not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        if path.suffix.lower() == ".json":
            document = json.load(f)
        else:
            document = yaml.safe_load(f)
    if not isinstance(document, dict) or document.get("schema_version") != REPORT_SCHEMA_VERSION:
        raise ValidationError(f"{path}: not a version {REPORT_SCHEMA_VERSION} report")
    return document


def load_model(report: Union[str, Path, Dict[str, Any]]) -> EpdcModel:
    """The fitted (or selected) model stored in a fit or selection report."""
    document = report if isinstance(report, dict) else load_report(report)
    kind = document.get("kind")
    if kind == "candidate_fit":
        return EpdcModel.from_dict(document["model"])
    if kind == "selection" and "selected" in document:
        return EpdcModel.from_dict(document["selected"]["model"])
    raise ValidationError(f"report of kind {kind!r} holds no single selected model")


def load_models(report: Union[str, Path, Dict[str, Any]]) -> Dict[float, EpdcModel]:
    """Selected model per bias current of a sweep report."""
    document = report if isinstance(report, dict) else load_report(report)
    if document.get("kind") != "sweep":
        raise ValidationError("expected a sweep report")
    return {
        float(pt["bias_current_uA"]): EpdcModel.from_dict(pt["selected"]["model"])
        for pt in document["points"]
        if "selected" in pt
    }
