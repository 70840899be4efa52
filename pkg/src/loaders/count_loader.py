"""
Count-rate file loader.
Turns bias-current / probe-power / count tables into click statistics.
"""

import logging
import math
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import pandas as pd

from ..estimation import ClickStatistics
from ..utils.exceptions import ArityError, ParseError, UnitError, ValidationError
from .optics import OpticalConfig, power_to_mean_photons

logger = logging.getLogger(__name__)

BIAS_UNITS = {"bias_current_uA": 1.0, "bias_current_mA": 1e3, "bias_current_A": 1e6}
POWER_UNITS = {"power_W": 1.0, "power_mW": 1e-3, "power_uW": 1e-6, "power_nW": 1e-9, "power_pW": 1e-12}
PROBE_COLUMNS = ("mean_photons",) + tuple(POWER_UNITS)
COUNT_COLUMNS = ("clicks", "trials")
RATE_COLUMNS = ("count_rate_Hz", "integration_time_s")
SEPARATORS = {"csv": ",", "tsv": "\t"}

Dataset = Dict[float, List[ClickStatistics]]


def _parse_number(text: str, column: str, line: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"column {column!r}: cannot parse {text!r} as a number", line=line)
    if not math.isfinite(value):
        raise ParseError(f"column {column!r}: value must be finite, got {text!r}", line=line)
    return value


def _parse_count(text: str, column: str, line: int) -> int:
    try:
        value = int(text)
    except ValueError:
        number = _parse_number(text, column, line)
        if not number.is_integer():
            raise ParseError(f"column {column!r}: expected an integer count, got {text!r}", line=line)
        value = int(number)
    if value < 0:
        raise ParseError(f"column {column!r}: counts must be nonnegative, got {text!r}", line=line)
    return value


class CountRateLoader:
    """
    Loader for measured click tables.

    Every header must name its unit. Recognized columns: one bias current
    column (``bias_current_uA|mA|A``), exactly one probe column
    (``mean_photons`` or ``power_W|mW|uW|nW|pW``) and either
    ``clicks, trials`` or ``count_rate_Hz, integration_time_s``.
    """

    def __init__(
        self,
        optics: Optional[OpticalConfig] = None,
        weight_scheme: str = "poisson",
        supported_formats: Optional[List[str]] = None,
    ):
        """
        Initialize count loader.

        Args:
            optics: Used to convert power columns and count rates
            weight_scheme: Sigma scheme for the resulting statistics
            supported_formats: Defaults to ['csv', 'tsv']
        """
        if supported_formats is None:
            supported_formats = list(SEPARATORS)

        self.optics = optics or OpticalConfig()
        self.weight_scheme = weight_scheme
        self.supported_formats = supported_formats
        self.rejected_rows: List[Tuple[int, str]] = []

    def load_file(self, file_path: Union[str, Path], fmt: Optional[str] = None) -> Dataset:
        """
        Load one count table.

        Args:
            file_path: Path to the table
            fmt: ``csv`` or ``tsv``; defaults to the file extension

        Returns:
            Bias current (uA) to statistics sorted by mean photon number

        Raises:
            FileNotFoundError: If file does not exist
            UnitError: On missing, unknown or mixed unit headers
            ParseError: On a malformed row, with its line number
            ArityError: If the file holds no usable rows
        """
        path = Path(file_path)

        if not path.exists():
            raise FileNotFoundError(f"File not found: {file_path}")

        fmt = (fmt or path.suffix.lstrip(".") or "csv").lower()
        if fmt not in self.supported_formats:
            raise ValidationError(
                f"Unsupported file format: {fmt}. "
                f"Supported formats: {', '.join(self.supported_formats)}"
            )

        try:
            frame = pd.read_csv(
                path,
                sep=SEPARATORS[fmt],
                dtype=str,
                keep_default_na=False,
                skip_blank_lines=False,
                skipinitialspace=True,
            )
        except pd.errors.EmptyDataError:
            raise ArityError(f"{path}: file is empty")
        except pd.errors.ParserError as e:
            raise ParseError(f"{path}: {e}")

        frame.columns = [str(name).strip() for name in frame.columns]
        self.rejected_rows = []
        dataset = self._to_dataset(frame)
        if not dataset:
            raise ArityError(f"{path}: no usable data rows")
        logger.info(
            "loaded %s: %d bias currents, %d points",
            path, len(dataset), sum(len(points) for points in dataset.values()),
        )
        return dataset

    def _columns(self, columns: Sequence[str]) -> Tuple[str, str, Tuple[str, str]]:
        unknown = [name for name in columns
                   if name not in BIAS_UNITS and name not in PROBE_COLUMNS
                   and name not in COUNT_COLUMNS and name not in RATE_COLUMNS]
        if unknown:
            raise UnitError(f"unrecognized column(s) {unknown}; every header must carry a known unit")

        bias = [name for name in columns if name in BIAS_UNITS]
        if len(bias) != 1:
            raise UnitError(f"need exactly one bias current column of {list(BIAS_UNITS)}, got {bias}")

        probe = [name for name in columns if name in PROBE_COLUMNS]
        if len(probe) != 1:
            raise UnitError(f"need exactly one of {list(PROBE_COLUMNS)}, got {probe}")

        has_counts = [name in columns for name in COUNT_COLUMNS]
        has_rates = [name in columns for name in RATE_COLUMNS]
        if all(has_counts) and not any(has_rates):
            counts = COUNT_COLUMNS
        elif all(has_rates) and not any(has_counts):
            counts = RATE_COLUMNS
        else:
            raise UnitError(
                f"need either {list(COUNT_COLUMNS)} or {list(RATE_COLUMNS)}, not a mixture"
            )
        return bias[0], probe[0], counts

    def _to_dataset(self, frame: pd.DataFrame) -> Dataset:
        bias_col, probe_col, count_cols = self._columns(list(frame.columns))
        merged: Dict[float, Dict[float, List[int]]] = {}

        for index, row in frame.iterrows():
            line = int(index) + 2
            cells = {name: "" if pd.isna(row[name]) else str(row[name]).strip() for name in frame.columns}
            if not any(cells.values()):
                continue

            bias = _parse_number(cells[bias_col], bias_col, line) * BIAS_UNITS[bias_col]
            probe = _parse_number(cells[probe_col], probe_col, line)
            if probe < 0.0:
                raise ParseError(f"column {probe_col!r}: must be nonnegative, got {probe}", line=line)
            if probe_col == "mean_photons":
                mean_photons = probe
            else:
                mean_photons = power_to_mean_photons(probe * POWER_UNITS[probe_col], self.optics)

            if count_cols == COUNT_COLUMNS:
                clicks = _parse_count(cells["clicks"], "clicks", line)
                trials = _parse_count(cells["trials"], "trials", line)
            else:
                rate = _parse_number(cells["count_rate_Hz"], "count_rate_Hz", line)
                seconds = _parse_number(cells["integration_time_s"], "integration_time_s", line)
                if rate < 0.0 or seconds < 0.0:
                    raise ParseError("count rate and integration time must be nonnegative", line=line)
                clicks = int(round(rate * seconds))
                trials = int(round(self.optics.repetition_rate * seconds))

            if trials == 0:
                reason = "trials = 0"
                logger.warning("line %d rejected: %s", line, reason)
                self.rejected_rows.append((line, reason))
                continue
            if clicks > trials:
                raise ParseError(f"clicks {clicks} exceed trials {trials}", line=line)

            totals = merged.setdefault(bias, {}).setdefault(mean_photons, [0, 0])
            totals[0] += clicks
            totals[1] += trials

        return {
            bias: [
                ClickStatistics.from_counts(n, clicks, trials, self.weight_scheme)
                for n, (clicks, trials) in sorted(points.items())
            ]
            for bias, points in sorted(merged.items())
        }


def ingest(
    path: Union[str, Path],
    fmt: Optional[str] = None,
    optics: Optional[OpticalConfig] = None,
    weight_scheme: str = "poisson",
) -> Dataset:
    """Load a count table with a one-off :class:`CountRateLoader`."""
    return CountRateLoader(optics=optics, weight_scheme=weight_scheme).load_file(path, fmt)


def write_dataset(datasets: Mapping[float, Sequence[ClickStatistics]], path: Union[str, Path]) -> Path:
    """
    Write click statistics as a loader-readable CSV.

    Columns are ``bias_current_uA, mean_photons, clicks, trials`` with
    floats at 17 significant digits so a reload reproduces them exactly.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = [
        {
            "bias_current_uA": float(bias),
            "mean_photons": point.mean_photons,
            "clicks": point.clicks,
            "trials": point.trials,
        }
        for bias in sorted(datasets, key=float)
        for point in datasets[bias]
    ]
    frame = pd.DataFrame(rows, columns=["bias_current_uA", "mean_photons", "clicks", "trials"])
    sep = SEPARATORS.get(path.suffix.lstrip(".").lower(), ",")
    frame.to_csv(path, sep=sep, index=False, float_format="%.17g")
    return path
