"""
Pipeline stages for the audit: gender -> rewrite -> extract -> compare -> report.

Every stage reads its inputs from disk, writes its outputs atomically under the
run output directory and records an input fingerprint, so a stage whose inputs
and outputs are unchanged is skipped on the next run.
"""
import asyncio
import logging
import math
import time
from dataclasses import replace
from pathlib import Path

from config.credentials import log_credential_status
from src.client.llm_client import AiohttpTransport, create_client
from src.handlers.rewrite_handler import (
    PROMPT_TEMPLATE, RewriteStatus, read_variants, rewrite_corpus, summarize_results,
    write_variants,
)
from src.services.corpus import import_csv, read_corpus, write_corpus
from src.services.extractor import (
    DICTIONARY_FEATURES, FeatureTable, extract_corpus, load_composites, validate_composites,
)
from src.services.gender_detector import NameLexicon, label_record, summarize_gender_distribution
from src.services.lexicon import load_dictionary
from src.services.matcher import compile_matcher
from src.services.report_writer import (
    HUMAN_LABEL, emit_correlation_table, emit_gap_shift_table, emit_group_summary,
    emit_ttest_table, read_correlations, read_ttests, write_correlations, write_manifest,
    write_ttests,
)
from src.services.statistics import (
    correlation_matrix, diagonal_alignment, effective_alpha, gender_gap_tests,
)
from src.services.svg_charts import emit_heatmap, emit_significant_t_barchart
from src.utils.errors import CompositeError, ConfigError, InputError, MissingIntermediateError
from src.utils.file_utils import atomic_write_json, fingerprint, read_json, sha256_file
from src.utils.logger import log_statistics
from src.utils.response_cache import ResponseCache
from src.utils.state_manager import PipelineState
from src.utils.time_utils import format_duration

logger = logging.getLogger(__name__)

STAGES = ("gender", "rewrite", "extract", "compare", "report")
HUMAN_VARIANT = "human"


def _finite_or_none(value):
    return None if value is None or (isinstance(value, float) and math.isnan(value)) else value


class PipelineHandler:
    """Runs pipeline stages for one RunConfig with hash-checked stage skipping."""

    def __init__(self, config, force=False, transport=None):
        """
        Initialize the handler.

        Args:
            config: RunConfig (already filtered by --models and CLI overrides)
            force: Run every requested stage even when it is up to date
            transport: Transport for live providers (default: a shared aiohttp session)
        """
        self.config = config
        self.output_dir = Path(config.output_dir)
        self.force = force
        self.transport = transport
        self.state = PipelineState(self.output_dir)
        self.stats = {
            'stages_run': 0,
            'stages_skipped': 0,
        }

    # ========================================================================
    # LAYOUT
    # ========================================================================

    @property
    def annotated_path(self):
        return self.output_dir / "corpus_annotated.jsonl"

    @property
    def gender_summary_path(self):
        return self.output_dir / "gender_distribution.json"

    @property
    def rewrite_report_path(self):
        return self.output_dir / "rewrite_report.json"

    @property
    def ttests_path(self):
        return self.output_dir / "compare" / "ttests.csv"

    @property
    def compare_summary_path(self):
        return self.output_dir / "compare" / "summary.json"

    @property
    def report_dir(self):
        return self.output_dir / "report"

    def variants_path(self, provider_name):
        return self.output_dir / "variants" / f"{provider_name}.jsonl"

    def features_path(self, variant):
        return self.output_dir / "features" / f"{variant}.csv"

    def correlations_path(self, provider_name):
        return self.output_dir / "compare" / f"{provider_name}_correlations.csv"

    def _require(self, path, stage):
        if not Path(path).exists():
            raise MissingIntermediateError(path, stage=stage)
        return path

    def _require_providers(self, stage):
        if not self.config.providers:
            raise ConfigError("No providers configured", stage=stage)
        return self.config.providers

    # ========================================================================
    # STAGE RUNNER
    # ========================================================================

    def _run_stage(self, stage, payload, action):
        """
        Run one stage unless its fingerprint and recorded outputs are current.

        Args:
            payload: JSON-able description of everything the stage's output depends on
            action: callable returning (output paths, counts)

        Returns:
            dict: the stage's counts (recorded ones when skipped)
        """
        key = fingerprint({"stage": stage, **payload})
        if not self.force and self.state.is_up_to_date(stage, key):
            logger.info(f"⏭️ Stage '{stage}' is up to date, skipping")
            self.stats['stages_skipped'] += 1
            return self.state.get_stage(stage).get('counts', {})

        logger.info(f"▶️ Running stage '{stage}'")
        started = time.monotonic()
        try:
            outputs, counts = action()
        except Exception as e:
            # no record survives a failed run
            self.state.invalidate(stage)
            if isinstance(e, InputError):
                e.stage = e.stage or stage
            raise
        self.state.record_stage(stage, key, outputs, counts)
        self.stats['stages_run'] += 1
        logger.info(f"✅ Stage '{stage}' finished in {format_duration(time.monotonic() - started)}")
        log_statistics(logger, f"{stage} stage", counts)
        return counts

    # ========================================================================
    # GENDER
    # ========================================================================

    def cmd_gender(self):
        """Label every record Female / Male / MixedGender / Unknown and count the labels."""
        config = self.config
        payload = {
            "corpus": sha256_file(config.corpus),
            "name_lexicon": sha256_file(config.name_lexicon),
            "threshold": config.gender_threshold,
        }

        def action():
            records = read_corpus(config.corpus)
            lexicon = NameLexicon.load(config.name_lexicon)
            labeled = [
                r.with_gender(label_record(r.authors, lexicon, config.gender_threshold))
                for r in records
            ]
            write_corpus(self.annotated_path, labeled)
            distribution = summarize_gender_distribution(labeled)
            atomic_write_json(self.gender_summary_path, distribution)
            return [self.annotated_path, self.gender_summary_path], {"records": len(labeled), **distribution}

        return self._run_stage("gender", payload, action)

    # ========================================================================
    # REWRITE
    # ========================================================================

    async def _rewrite_all(self, records, cache):
        providers = self.config.providers
        log_credential_status(providers)
        live = any(p.kind != "mock" for p in providers)
        transport = self.transport or (AiohttpTransport() if live else None)
        try:
            clients = [
                create_client(p, transport=transport, prompt_prefix=PROMPT_TEMPLATE)
                for p in providers
            ]
            return await rewrite_corpus(
                clients, records, cache,
                max_in_flight=self.config.max_in_flight,
                refusal_phrases=self.config.refusal_phrases,
            )
        finally:
            if transport is not None and self.transport is None:
                await transport.close()

    def cmd_rewrite(self):
        """Rewrite every abstract with every configured provider; one variants file per provider."""
        config = self.config
        providers = self._require_providers("rewrite")
        self._require(self.annotated_path, "rewrite")
        payload = {
            "corpus": sha256_file(self.annotated_path),
            "providers": [p.fingerprint_payload() for p in providers],
            "prompt": PROMPT_TEMPLATE,
            "refusal_phrases": list(config.refusal_phrases),
        }

        def action():
            records = read_corpus(self.annotated_path)
            cache = ResponseCache(config.cache_dir)
            results = asyncio.run(self._rewrite_all(records, cache))
            outputs = []
            for provider in providers:
                path = self.variants_path(provider.name)
                write_variants(path, [r for r in results if r.provider == provider.name])
                outputs.append(path)
            summary = summarize_results(results)
            report = {
                name: {k: counts[k] for k in ("ok", "refused", "failed")}
                for name, counts in summary.items()
            }
            atomic_write_json(self.rewrite_report_path, report)
            outputs.append(self.rewrite_report_path)
            counts = {
                f"{name}_{status}": value
                for name, statuses in report.items() for status, value in statuses.items()
            }
            counts["cache_hits"] = sum(c["cached"] for c in summary.values())
            return outputs, counts

        return self._run_stage("rewrite", payload, action)

    # ========================================================================
    # EXTRACT
    # ========================================================================

    def _load_extractor(self):
        config = self.config
        lexicon = load_dictionary(config.dictionary)
        composites = load_composites(config.composites)
        try:
            validate_composites(composites, lexicon)
        except CompositeError as e:
            raise InputError(f"{Path(config.composites).name}: {e}") from e
        uncovered = [f for f in DICTIONARY_FEATURES if f not in lexicon.category_names]
        if uncovered:
            logger.warning(
                f"⚠️ Dictionary has no category for {len(uncovered)} feature(s), "
                f"they will be 0: {', '.join(uncovered)}"
            )
        return compile_matcher(lexicon), composites

    def cmd_extract(self):
        """Feature tables for the human abstracts and for each provider's rewrites."""
        config = self.config
        providers = self._require_providers("extract")
        for provider in providers:
            self._require(self.variants_path(provider.name), "extract")
        payload = {
            "corpus": sha256_file(config.corpus),
            "dictionary": sha256_file(config.dictionary),
            "composites": sha256_file(config.composites),
            "variants": {p.name: sha256_file(self.variants_path(p.name)) for p in providers},
        }

        def action():
            matcher, composites = self._load_extractor()
            records = read_corpus(config.corpus)
            documents = [(r.id, HUMAN_VARIANT, r.abstract) for r in records]
            human = extract_corpus(matcher, composites, documents, workers=config.workers)
            human.write_csv(self.features_path(HUMAN_VARIANT))
            outputs = [self.features_path(HUMAN_VARIANT)]
            counts = {HUMAN_VARIANT: len(human), "degenerate": sum(v.degenerate for v in human)}

            for provider in providers:
                results = read_variants(self.variants_path(provider.name))
                documents = [
                    (r.record_id, provider.name, r.text)
                    for r in results if r.status is RewriteStatus.OK
                ]
                table = extract_corpus(matcher, composites, documents, workers=config.workers)
                table.write_csv(self.features_path(provider.name))
                outputs.append(self.features_path(provider.name))
                counts[provider.name] = len(table)
                counts["degenerate"] += sum(v.degenerate for v in table)
            return outputs, counts

        return self._run_stage("extract", payload, action)

    # ========================================================================
    # COMPARE
    # ========================================================================

    def cmd_compare(self):
        """Human-vs-model correlation matrices and female-vs-male t-tests per variant."""
        config = self.config
        providers = self._require_providers("compare")
        variants = [HUMAN_VARIANT] + [p.name for p in providers]
        for variant in variants:
            self._require(self.features_path(variant), "compare")
        self._require(self.annotated_path, "compare")
        payload = {
            "features": {v: sha256_file(self.features_path(v)) for v in variants},
            "annotated": sha256_file(self.annotated_path),
            "alpha": config.alpha,
            "equal_var": config.equal_var,
            "bonferroni": config.bonferroni,
        }

        def action():
            human = FeatureTable.read_csv(self.features_path(HUMAN_VARIANT))
            genders = {r.id: r.gender for r in read_corpus(self.annotated_path)}
            tables = {HUMAN_LABEL: human}
            models = {}
            outputs = []
            for provider in providers:
                table = FeatureTable.read_csv(self.features_path(provider.name))
                try:
                    matrix = correlation_matrix(human, table)
                except ValueError as e:
                    raise InputError(f"{provider.name}: {e}") from e
                write_correlations(self.correlations_path(provider.name), matrix)
                outputs.append(self.correlations_path(provider.name))
                sizes = [n for row in matrix.cell_sizes() for n in row]
                alignment = diagonal_alignment(matrix)
                models[provider.name] = {
                    "shared_records": len(matrix.record_ids),
                    "n_min": min(sizes),
                    "n_max": max(sizes),
                    **{k: _finite_or_none(v) for k, v in alignment.items()},
                }
                tables[provider.name] = table

            results = gender_gap_tests(
                tables, genders, alpha=config.alpha, equal_var=config.equal_var,
                bonferroni=config.bonferroni,
            )
            write_ttests(self.ttests_path, results)
            outputs.append(self.ttests_path)

            significant = {v: sum(r.significant for r in rs) for v, rs in results.items()}
            summary = {
                "alpha": effective_alpha(config.alpha, config.bonferroni),
                "equal_var": config.equal_var,
                "models": models,
                "significant": significant,
            }
            atomic_write_json(self.compare_summary_path, summary)
            outputs.append(self.compare_summary_path)
            counts = {f"{v}_significant": n for v, n in significant.items()}
            counts.update({f"{name}_shared_records": m["shared_records"] for name, m in models.items()})
            return outputs, counts

        return self._run_stage("compare", payload, action)

    # ========================================================================
    # REPORT
    # ========================================================================

    def _manifest_inputs(self):
        config = self.config
        config_hash = (
            sha256_file(config.config_path) if config.config_path else fingerprint(config.to_dict())
        )
        return {
            "config": config_hash,
            "corpus": sha256_file(config.corpus),
            "dictionary": sha256_file(config.dictionary),
            "composites": sha256_file(config.composites),
            "name_lexicon": sha256_file(config.name_lexicon),
        }

    def cmd_report(self):
        """Tables, heatmaps, the significant-feature bar chart and the manifest."""
        config = self.config
        providers = self._require_providers("report")
        compare_files = [self.correlations_path(p.name) for p in providers]
        compare_files += [self.ttests_path, self.compare_summary_path]
        for path in compare_files:
            self._require(path, "report")
        alpha = effective_alpha(config.alpha, config.bonferroni)
        payload = {
            "compare": {Path(p).name: sha256_file(p) for p in compare_files},
            "alpha": alpha,
            "inputs": self._manifest_inputs(),
        }

        def action():
            report_dir = self.report_dir
            matrices = {p.name: read_correlations(self.correlations_path(p.name)) for p in providers}
            ttests = {
                variant: [replace(r, alpha=alpha) for r in results]
                for variant, results in read_ttests(self.ttests_path).items()
            }
            diagonals = {name: matrix.diagonal() for name, matrix in matrices.items()}

            outputs = [
                report_dir / "table_correlation.csv",
                report_dir / "table_ttest.csv",
                report_dir / "table_gap_shift.csv",
                report_dir / "table_group_summary.csv",
            ]
            emit_correlation_table(diagonals, path=outputs[0])
            emit_ttest_table(ttests, alpha, path=outputs[1])
            emit_gap_shift_table(ttests, path=outputs[2])
            emit_group_summary(diagonals, alpha, path=outputs[3])

            for name, matrix in matrices.items():
                labels = list(matrix.features)
                r_path = report_dir / f"heatmap_r_{name}.svg"
                p_path = report_dir / f"heatmap_p_{name}.svg"
                emit_heatmap(matrix.r_grid(), labels, labels, r_path, scale="r", alpha=alpha,
                             title=f"Pearson r: human vs {name}", significance=matrix.p_grid())
                emit_heatmap(matrix.p_grid(), labels, labels, p_path, scale="p", alpha=alpha,
                             title=f"p-value: human vs {name}")
                outputs += [r_path, p_path]

            chart = emit_significant_t_barchart(ttests, alpha, report_dir / "ttest_significant.svg")
            outputs.append(report_dir / "ttest_significant.svg")

            stage_counts = {}
            for stage in STAGES[:-1]:
                record = self.state.get_stage(stage) or {}
                stage_counts[stage] = record.get("counts", {})
            compare_summary = read_json(self.compare_summary_path)
            manifest_counts = {
                "stages": stage_counts,
                "correlation_cells": compare_summary.get("models", {}),
                "significant_features": chart["features"],
            }
            manifest_path = report_dir / "manifest.json"
            write_manifest(manifest_path, self.output_dir, outputs, self._manifest_inputs(), manifest_counts)
            outputs.append(manifest_path)
            counts = {
                "files": len(outputs),
                "heatmaps": 2 * len(matrices),
                "significant_features": len(chart["features"]),
            }
            return outputs, counts

        return self._run_stage("report", payload, action)

    # ========================================================================
    # WHOLE PIPELINE
    # ========================================================================

    def cmd_pipeline(self):
        """Run gender, rewrite, extract, compare and report in order; the first failure aborts."""
        counts = {}
        for stage in STAGES:
            counts[stage] = getattr(self, f"cmd_{stage}")()
        logger.info(
            f"✅ Pipeline finished: {self.stats['stages_run']} stage(s) run, "
            f"{self.stats['stages_skipped']} skipped"
        )
        return counts

    def get_statistics(self):
        return self.stats.copy()


# ============================================================================
# MODULE-LEVEL COMMANDS
# ============================================================================

def cmd_gender(config, force=False):
    return PipelineHandler(config, force=force).cmd_gender()


def cmd_rewrite(config, force=False, transport=None):
    return PipelineHandler(config, force=force, transport=transport).cmd_rewrite()


def cmd_extract(config, force=False):
    return PipelineHandler(config, force=force).cmd_extract()


def cmd_compare(config, force=False):
    return PipelineHandler(config, force=force).cmd_compare()


def cmd_report(config, force=False):
    return PipelineHandler(config, force=force).cmd_report()


def cmd_pipeline(config, force=False, transport=None):
    return PipelineHandler(config, force=force, transport=transport).cmd_pipeline()


def cmd_import_csv(csv_path, output_path):
    """Convert an id,title,abstract,authors CSV into a JSON-lines corpus."""
    records = import_csv(csv_path)
    write_corpus(output_path, records)
    return {"records": len(records)}


__all__ = [
    'STAGES', 'HUMAN_VARIANT', 'PipelineHandler', 'cmd_gender', 'cmd_rewrite', 'cmd_extract',
    'cmd_compare', 'cmd_report', 'cmd_pipeline', 'cmd_import_csv'
]
