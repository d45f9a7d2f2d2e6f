#!/usr/bin/env python3
"""
Command-line entry point for the LIWC bias audit toolkit.

    python main.py pipeline                      # offline demo with mock providers
    python main.py --config run.yaml rewrite --models claude,mistral
    python main.py --out results compare --alpha 0.01 --equal-var
"""
import argparse
import json
import logging
import sys
from pathlib import Path

# Add project root to Python path
project_root = Path(__file__).resolve().parent
sys.path.insert(0, str(project_root))

from config.run_config import load_run_config  # noqa: E402
from config.settings import DEBUG_MODE, LOG_FILE_PATH, LOG_LEVEL, get_settings_summary  # noqa: E402
from src.handlers.pipeline_handler import STAGES, PipelineHandler, cmd_import_csv  # noqa: E402
from src.utils.errors import AuditError  # noqa: E402
from src.utils.logger import setup_logging  # noqa: E402

logger = logging.getLogger("liwc_audit")


def _model_list(value):
    names = [name.strip() for name in value.split(",") if name.strip()]
    if not names:
        raise argparse.ArgumentTypeError("expected a comma-separated list of provider names")
    return names


def _add_stage_flags(parser):
    parser.add_argument('--models', type=_model_list, metavar='NAME,...',
                        help='Only use these providers (names from the config)')
    parser.add_argument('--alpha', type=float, help='Significance level (default: from config)')
    parser.add_argument('--equal-var', action='store_true', default=None,
                        help='Pooled-variance Student t-test instead of Welch')
    parser.add_argument('--bonferroni', action='store_true', default=None,
                        help='Divide alpha by the number of features')
    parser.add_argument('--threshold', type=float,
                        help='Gender-inference threshold in (0.5, 1]')
    parser.add_argument('--max-in-flight', type=int,
                        help='Outstanding rewrite requests per provider')
    parser.add_argument('--workers', type=int, help='Feature-extraction threads')
    parser.add_argument('--force', action='store_true',
                        help='Run the stage even when its outputs are up to date')


def parse_args(argv=None):
    """Parse command line arguments."""
    parser = argparse.ArgumentParser(
        prog='liwc-audit',
        description='Audit gender-linked language features in human and LLM-rewritten abstracts'
    )
    parser.add_argument('--config', type=Path,
                        help='Run config YAML (default: bundled offline demo)')
    parser.add_argument('--out', type=Path, help='Output directory (overrides the config)')
    parser.add_argument('--log-level', help=f'Logging level (default: {LOG_LEVEL})')
    parser.add_argument('--debug', action='store_true', help='Enable debug logging')

    subparsers = parser.add_subparsers(dest='command', required=True)
    descriptions = {
        'gender': 'Label each record by author gender',
        'rewrite': 'Rewrite abstracts with each provider',
        'extract': 'Extract LIWC-style feature tables',
        'compare': 'Correlations and gender t-tests',
        'report': 'Tables, heatmaps and manifest',
        'pipeline': 'Run every stage in order',
    }
    for name in STAGES + ('pipeline',):
        _add_stage_flags(subparsers.add_parser(name, help=descriptions[name]))

    importer = subparsers.add_parser('import-csv', help='Convert a CSV corpus to JSON lines')
    importer.add_argument('csv_path', type=Path, help='CSV with id,title,abstract,authors columns')
    importer.add_argument('output_path', type=Path, help='JSON-lines corpus to write')

    subparsers.add_parser('settings', help='Show effective environment settings')
    return parser.parse_args(argv)


def build_config(args):
    """RunConfig from --config with CLI overrides applied."""
    config = load_run_config(args.config)
    config = config.with_overrides(
        output_dir=args.out,
        alpha=args.alpha,
        equal_var=args.equal_var,
        bonferroni=args.bonferroni,
        gender_threshold=args.threshold,
        max_in_flight=args.max_in_flight,
        workers=args.workers,
    )
    return config.select_providers(args.models)


def run(args):
    """Run one subcommand and return its counts."""
    if args.command == 'settings':
        return get_settings_summary()
    if args.command == 'import-csv':
        return cmd_import_csv(args.csv_path, args.output_path)

    config = build_config(args)
    logger.info(f"📁 Output directory: {config.output_dir}")
    handler = PipelineHandler(config, force=args.force)
    return getattr(handler, f"cmd_{args.command}")()


def main(argv=None):
    args = parse_args(argv)
    log_level = 'DEBUG' if (args.debug or DEBUG_MODE) else args.log_level
    setup_logging(log_level=log_level, log_file=LOG_FILE_PATH)

    try:
        result = run(args)
    except AuditError as e:
        stage = f" [{e.stage}]" if e.stage else ""
        logger.error(f"❌{stage} {e}")
        print(f"error{stage}: {e}", file=sys.stderr)
        return e.exit_code
    except KeyboardInterrupt:
        logger.info("👋 Interrupted")
        return 130
    except Exception as e:
        logger.exception(f"💥 Unexpected error: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 1

    print(json.dumps(result, indent=2, sort_keys=True, ensure_ascii=False, default=str))
    return 0


if __name__ == "__main__":
    sys.exit(main())
