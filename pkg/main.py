"""
Main entry point for the EPDC Toolkit.

Verbs:
1. synth   - scenario file to synthetic count table
2. fit     - count table and i_max to one candidate fit
3. select  - count table to the minimal adequate model
4. sweep   - multi-current count table to parameters versus bias current
5. convert - optical power to mean photon number, and back
"""

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence

# Add src to path for imports
sys.path.insert(0, str(Path(__file__).parent / "src"))

from src.config import Config, load_config
from src.estimation import ClickStatistics, fit_candidate
from src.loaders import CountRateLoader, mean_photons_to_power, power_to_mean_photons, write_dataset
from src.reports import emit_report
from src.selection import select_model
from src.sweep import analyze_sweep
from src.synthetic import generate_dataset, read_scenarios
from src.utils import EpdcError, ValidationError, ensure_directories, setup_logging, validate_config

logger = logging.getLogger("epdc")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="epdc",
        description="Detector characterization from click statistics under coherent probing.",
    )
    parser.add_argument("--config", default=None, help="Configuration file (default: config.yaml)")
    parser.add_argument("--seed", type=int, default=None, help="Seed for simulation and multi-start")
    parser.add_argument("--output", default=None, help="Output directory (default: paths.reports)")
    parser.add_argument("--format", choices=["yaml", "json"], default=None, help="Report format")
    parser.add_argument("--stem", default=None, help="Output file name stem")
    parser.add_argument("--threads", type=int, default=None, help="Worker threads (default: all cores)")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING, ERROR")

    verbs = parser.add_subparsers(dest="verb", required=True)

    synth = verbs.add_parser("synth", help="Simulate a count table from a scenario file")
    synth.add_argument("scenarios", help="YAML scenario file")

    fit = verbs.add_parser("fit", help="Fit one truncation order")
    fit.add_argument("data", help="Count table (csv or tsv)")
    fit.add_argument("--i-max", type=int, required=True)
    fit.add_argument("--bias-current", type=float, default=None, help="Current (uA) to use from a sweep file")

    select = verbs.add_parser("select", help="Run the model ladder")
    select.add_argument("data", help="Count table (csv or tsv)")
    select.add_argument("--i-max-min", type=int, default=None)
    select.add_argument("--i-max-max", type=int, default=None)
    select.add_argument("--rule", choices=["chi2", "aic", "bic"], default=None)
    select.add_argument("--bias-current", type=float, default=None, help="Current (uA) to use from a sweep file")

    sweep = verbs.add_parser("sweep", help="Model selection at every bias current")
    sweep.add_argument("data", help="Count table with a bias current column")

    convert = verbs.add_parser("convert", help="Power <-> mean photon number per pulse")
    convert.add_argument("value", type=float)
    convert.add_argument("--from", dest="source", choices=["power", "photons"], default="power",
                         help="Interpret value as watts (power) or photons per pulse")
    return parser


def _pick_dataset(datasets: Dict[float, List[ClickStatistics]], bias_current: Optional[float]):
    if bias_current is None:
        if len(datasets) != 1:
            raise ValidationError(
                f"file holds {len(datasets)} bias currents {sorted(datasets)}; pass --bias-current"
            )
        return next(iter(datasets.values()))
    if bias_current not in datasets:
        raise ValidationError(f"bias current {bias_current} uA not in file; available: {sorted(datasets)}")
    return datasets[bias_current]


def _load_counts(config: Config, path: str, weight_scheme: str):
    loader = CountRateLoader(optics=config.get_optics_config(), weight_scheme=weight_scheme)
    return loader.load_file(path)


def run_synth(args, config: Config, output_dir: Path, fmt: str) -> List[Path]:
    scenarios = read_scenarios(args.scenarios, defaults=config.get_synthesis_config())
    datasets = {}
    for index, scenario in enumerate(scenarios):
        if args.seed is not None:
            scenario = replace(scenario, seed=args.seed + index)
        current = 0.0 if scenario.bias_current is None else float(scenario.bias_current)
        if current in datasets:
            raise ValidationError(f"two scenarios share bias current {current} uA")
        datasets[current] = generate_dataset(scenario, threads=args.threads)
        logger.info("scenario %d: %d points at %g uA", index, len(datasets[current]), current)
    path = write_dataset(datasets, output_dir / f"{args.stem or 'synthetic'}.csv")
    return [path]


def run_fit(args, config: Config, output_dir: Path, fmt: str) -> List[Path]:
    fit_config = config.get_fit_config().with_overrides(seed=args.seed, threads=args.threads)
    data = _pick_dataset(_load_counts(config, args.data, fit_config.weight_scheme), args.bias_current)
    fit = fit_candidate(data, args.i_max, fit_config)
    return emit_report(fit, output_dir, args.stem or "fit", fmt, data=data)


def run_select(args, config: Config, output_dir: Path, fmt: str) -> List[Path]:
    fit_config = config.get_fit_config().with_overrides(seed=args.seed, threads=args.threads)
    selection_config = config.get_selection_config()
    selection_config = replace(
        selection_config,
        **{k: v for k, v in (("i_max_min", args.i_max_min), ("i_max_max", args.i_max_max), ("rule", args.rule))
           if v is not None},
    )
    data = _pick_dataset(_load_counts(config, args.data, fit_config.weight_scheme), args.bias_current)
    report = select_model(data, config=selection_config, fit_config=fit_config, threads=args.threads)
    return emit_report(report, output_dir, args.stem or "selection", fmt, data=data)


def run_sweep(args, config: Config, output_dir: Path, fmt: str) -> List[Path]:
    fit_config = config.get_fit_config().with_overrides(seed=args.seed, threads=args.threads)
    datasets = _load_counts(config, args.data, fit_config.weight_scheme)
    result = analyze_sweep(
        datasets,
        selection_config=config.get_selection_config(),
        fit_config=fit_config,
        sweep_config=config.get_sweep_config(),
        threads=args.threads,
    )
    return emit_report(result, output_dir, args.stem or "sweep", fmt, data=datasets)


def run_convert(args, config: Config) -> None:
    optics = config.get_optics_config()
    if args.source == "power":
        print(f"{power_to_mean_photons(args.value, optics):.10g}")
    else:
        print(f"{mean_photons_to_power(args.value, optics):.10g}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main execution function."""
    args = build_parser().parse_args(argv)

    try:
        # Load configuration
        config = load_config(args.config)
        validate_config(config.as_dict())

        # Setup logging
        logging_config = config.get_logging_config()
        setup_logging(
            level=args.log_level or logging_config.get("level", "INFO"),
            log_format=logging_config.get("format"),
            log_file=logging_config.get("file"),
        )

        if args.verb == "convert":
            run_convert(args, config)
            return 0

        report_config = config.get_report_config()
        fmt = args.format or report_config.get("format", "yaml")
        output_dir = Path(args.output or config.get_paths_config().get("reports", "data/reports"))
        ensure_directories({"reports": str(output_dir)})

        handlers = {"synth": run_synth, "fit": run_fit, "select": run_select, "sweep": run_sweep}
        written = handlers[args.verb](args, config, output_dir, fmt)
        for path in written:
            print(path)
        return 0

    except EpdcError as e:
        logger.error("%s: %s", type(e).__name__, e)
        return e.exit_code
    except OSError as e:
        logger.error("I/O failure: %s", e)
        return 1


if __name__ == "__main__":
    sys.exit(main())
