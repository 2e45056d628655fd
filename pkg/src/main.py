"""
Command-line entry point.

    python main.py run [--config PATH] [--dataset NAME ...] [--seeds LIST] ...
    python main.py fetch [--dataset NAME ...] [--checksums] [--force]
    python main.py inspect-committee PATH

Exit codes: 0 when every requested dataset completed, 1 when some dataset
failed, 2 on usage or configuration errors.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from rich.console import Console

from src.common.config_manager import ConfigManager, ConfigValidationError
from src.common.error_categorization import ConfigurationError, GdmError, categorize_error
from src.common.structured_logging import setup_logging
from src.core.committee_io import load_committee
from src.core.ensemble import RatingMode, WeightProtocol
from src.core.metrics import AccuracyMode
from src.data.manifest import load_manifest, resolve_manifest
from src.learners.base import LearnerSpec
from src.learners.registry import LEARNER_KINDS, PUBLISHED_ROSTER, all_help_text
from src.services.dataset_fetcher import DatasetFetcher
from src.services.experiment_runner import REPORT_FORMATS, ExperimentConfig, ExperimentRunner
from src.services.report_formatter import create_committee_table, create_summary_table, write_reports

CONFIG_PATH = "config/config.yaml"

EXIT_OK = 0
EXIT_DATASET_FAILED = 1
EXIT_USAGE = 2

logger = logging.getLogger(__name__)


def parse_int_list(text: str) -> List[int]:
    """'0,1,2', '0-9' or a mix such as '0-3,7'."""
    values: List[int] = []
    try:
        for part in text.split(","):
            part = part.strip()
            if not part:
                continue
            start, sep, end = part.partition("-")
            if sep and start:
                values.extend(range(int(start), int(end) + 1))
            else:
                values.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer list '{text}'")
    if not values:
        raise argparse.ArgumentTypeError("empty integer list")
    return values


def parse_name_list(text: str) -> List[str]:
    return [name.strip() for name in text.split(",") if name.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gdm-ensemble",
        description="Group-decision-making ensemble classifier experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Run the benchmark protocol and write reports")
    run.add_argument("--config", default=CONFIG_PATH, help="experiment YAML file")
    run.add_argument("--dataset", nargs="+", help="dataset manifest names or paths")
    run.add_argument("--seeds", type=parse_int_list, help="seed list, e.g. 0-9 or 1,2,3")
    run.add_argument("--split", type=float, help="training fraction in (0, 1)")
    run.add_argument("--learners", type=parse_name_list, help="comma-separated learner names or kinds")
    run.add_argument("--weight-protocol", help="validation:F | resubstitution | external-test")
    run.add_argument("--rating", choices=[mode.value for mode in RatingMode])
    run.add_argument("--accuracy-mode", choices=["overall", "ovr"])
    run.add_argument("--out", help="output directory")
    run.add_argument("--format", nargs="+", choices=REPORT_FORMATS, dest="formats")
    run.add_argument("--max-workers", type=int)
    run.add_argument("--paper-protocol", action="store_true",
                     help="single seed, external-test weights, one-hot ratings, six-learner roster "
                          "(leaks test labels into the weights)")
    run.add_argument("--save-committees", action="store_true", help="write every fitted committee")
    run.add_argument("--list-learners", action="store_true", help="print learner kinds and exit")

    fetch = sub.add_parser("fetch", help="Download raw dataset files named by manifests")
    fetch.add_argument("--config", default=CONFIG_PATH, help="experiment YAML file")
    fetch.add_argument("--dataset", nargs="+", help="dataset manifest names or paths")
    fetch.add_argument("--manifest-dir", help="directory of dataset manifests")
    fetch.add_argument("--checksums", action="store_true", help="print the SHA-256 of every file")
    fetch.add_argument("--force", action="store_true", help="download even when the file exists")

    inspect = sub.add_parser("inspect-committee", help="Print a saved committee's weights")
    inspect.add_argument("path", help="committee file written by run --save-committees")
    return parser


def _resolve_learners(names: Sequence[str], configured: Dict[str, LearnerSpec]) -> List[LearnerSpec]:
    """Configured learner names win; otherwise a bare kind gets its default hyperparameters."""
    specs = []
    for name in names:
        if name in configured:
            specs.append(configured[name])
        elif name in LEARNER_KINDS:
            specs.append(LearnerSpec(kind=name))
        else:
            raise ConfigurationError(
                f"unknown learner '{name}': not configured and not one of {sorted(LEARNER_KINDS)}",
                field="learners",
            )
    return specs


def build_experiment_config(args: argparse.Namespace, cm: ConfigManager) -> ExperimentConfig:
    """Config file values overridden by command-line flags."""
    cfg = ExperimentConfig.from_config_manager(cm)
    configured = {spec.label: spec for spec in cfg.learners}

    if args.dataset:
        cfg.datasets = list(args.dataset)
    if args.seeds:
        cfg.seeds = list(args.seeds)
    if args.split is not None:
        cfg.split_fraction = args.split
    if args.learners:
        cfg.learners = _resolve_learners(args.learners, configured)
    try:
        if args.weight_protocol:
            cfg.weight_protocol = WeightProtocol.parse(args.weight_protocol)
    except GdmError as e:
        raise ConfigurationError(str(e), field="weight_protocol") from e
    if args.rating:
        cfg.rating_mode = RatingMode(args.rating)
    if args.accuracy_mode:
        cfg.accuracy_mode = AccuracyMode(args.accuracy_mode)
    if args.out:
        cfg.output_dir = args.out
    if args.formats:
        cfg.formats = list(args.formats)
    if args.max_workers is not None:
        cfg.max_workers = args.max_workers
    if args.save_committees:
        cfg.save_committees = True

    if args.paper_protocol:
        cfg.seeds = cfg.seeds[:1]
        cfg.weight_protocol = WeightProtocol("external")
        cfg.rating_mode = RatingMode.ONEHOT
        if not args.learners:
            cfg.learners = _resolve_learners(PUBLISHED_ROSTER, configured)

    cfg.validate()
    return cfg


def cmd_run(args: argparse.Namespace, console: Console) -> int:
    if args.list_learners:
        for text in all_help_text():
            console.print(text, highlight=False)
        return EXIT_OK

    cm = ConfigManager(args.config)
    setup_logging(cm.get_section("logging"))
    cfg = build_experiment_config(args, cm)

    runner = ExperimentRunner(cfg)
    report = runner.run()
    for path in write_reports(report, cfg.output_dir, cfg.formats):
        logger.info(f"Report written: {path}")

    console.print(create_summary_table(report))
    if report.leaky:
        console.print("[yellow]external-test protocol: weights were measured on the test split[/yellow]")
    for name, reason in report.failed_datasets.items():
        console.print(f"[bold red]{name} failed:[/bold red] {reason}", highlight=False)
    logger.info(f"Run summary: {runner.get_performance_summary()}")
    return EXIT_OK if report.all_completed else EXIT_DATASET_FAILED


def _fetch_targets(args: argparse.Namespace) -> List[Path]:
    manifest_dir = args.manifest_dir
    datasets = args.dataset
    if Path(args.config).is_file():
        cm = ConfigManager(args.config)
        setup_logging(cm.get_section("logging"))
        manifest_dir = manifest_dir or cm.get("experiment.manifest_dir")
        datasets = datasets or cm.get("experiment.datasets")
    else:
        setup_logging({"path": None})
    manifest_dir = manifest_dir or "config/datasets"
    if datasets:
        return [resolve_manifest(str(name), manifest_dir) for name in datasets]
    return sorted(Path(manifest_dir).glob("*.yaml"))


def cmd_fetch(args: argparse.Namespace, console: Console) -> int:
    fetcher = DatasetFetcher()
    failures = 0
    for manifest_path in _fetch_targets(args):
        try:
            manifest = load_manifest(manifest_path)
            result = fetcher.fetch(manifest, force=args.force)
        except Exception as e:
            category, _ = categorize_error(e)
            logger.error(f"Fetch failed for {manifest_path}: {e} (category={category.value})")
            console.print(f"[bold red]failed[/bold red] {manifest_path}: {e}", highlight=False)
            failures += 1
            continue
        status = "downloaded" if result.downloaded else "present"
        if result.verified is False:
            status += ", checksum mismatch"
        elif result.verified:
            status += ", verified"
        console.print(f"{result.name}: {status} ({result.path})", highlight=False)
        if args.checksums:
            console.print(f"{result.sha256}  {result.path}", highlight=False)
    return EXIT_OK if failures == 0 else EXIT_DATASET_FAILED


def cmd_inspect_committee(args: argparse.Namespace, console: Console) -> int:
    committee = load_committee(args.path)
    console.print(create_committee_table(committee))
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "fetch": cmd_fetch,
    "inspect-committee": cmd_inspect_committee,
}


def main(argv: Optional[Sequence[str]] = None, console: Optional[Console] = None) -> int:
    """Parse arguments, dispatch and map failures to exit codes."""
    console = console or Console()
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE

    try:
        return COMMANDS[args.command](args, console)
    except (ConfigValidationError, ConfigurationError) as e:
        console.print(f"[bold red]Configuration error:[/bold red] {e}", highlight=False)
        return EXIT_USAGE
    except GdmError as e:
        console.print(f"[bold red]Error:[/bold red] {e}", highlight=False)
        return EXIT_DATASET_FAILED
    except KeyboardInterrupt:
        logging.info("Interrupted.")
        return EXIT_DATASET_FAILED


if __name__ == "__main__":
    sys.exit(main())
