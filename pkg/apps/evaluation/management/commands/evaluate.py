"""
Evaluate classification, extraction and latency on one or more datasets.

Usage:
    python manage.py evaluate --data apps/datasets/data/holdout.jsonl --mode two-step --backend mock
    python manage.py evaluate --data easy.jsonl --data hard.jsonl --format text
"""
import threading
from dataclasses import dataclass
from pathlib import Path

from apps.datasets.services import BUNDLE_DIR, read_samples
from apps.evaluation.reports import (
    classification_text,
    extraction_text,
    latency_text,
    robustness_text,
)
from apps.evaluation.services import (
    ClassificationReport,
    ExtractionReport,
    LatencyReport,
    classify_samples,
    evaluate_classification,
    evaluate_extraction,
    latency_stats,
    load_synonyms,
)
from apps.registry.services import ToolCategory
from apps.routing.commands import MODE_CHOICES, RuntimeCommand, mode_from_option
from apps.routing.runtime import RouterRuntime
from apps.routing.services import TWO_STEP


@dataclass
class DatasetRun:
    dataset: str
    mode: str
    classification: ClassificationReport
    classification_latency: LatencyReport = None
    extraction: ExtractionReport = None
    route_latency: LatencyReport = None

    def to_dict(self):
        return {
            'dataset': self.dataset,
            'mode': self.mode,
            'classification': self.classification.to_dict(),
            'classification_latency': self.classification_latency.to_dict() if self.classification_latency else None,
            'extraction': self.extraction.to_dict() if self.extraction else None,
            'route_latency': self.route_latency.to_dict() if self.route_latency else None,
        }


class Command(RuntimeCommand):
    help = 'Report accuracy, F1, extraction pass rate and latency per dataset'

    def add_arguments(self, parser):
        parser.add_argument('--data', action='append', help='Labeled JSONL; repeat for a robustness table')
        parser.add_argument('--mode', choices=MODE_CHOICES, default='two-step')
        parser.add_argument('--format', choices=('json', 'text'), default='json')
        parser.add_argument('--parallelism', type=int, help='Concurrent route calls (ROUTER_PARALLELISM)')
        parser.add_argument('--synonyms', dest='synonyms_path', help='Synonym table JSON (ROUTER_SYNONYMS_PATH)')
        parser.add_argument('--exact', action='store_true', help='Match entities without the synonym table')
        parser.add_argument('--skip-extraction', action='store_true', help='Two-step classification metrics only')
        self.add_runtime_arguments(parser)

    def _extract(self, runtime, samples, mode, synonyms):
        seconds, lock = [], threading.Lock()

        def route(query):
            result = runtime.route(query, mode)
            with lock:
                seconds.append(result.timings.total_seconds)
            return result

        report = evaluate_extraction(
            samples, route,
            registry=runtime.registry,
            synonyms=synonyms,
            parallelism=runtime.settings.parallelism,
        )
        return report, latency_stats(seconds) if seconds else None

    def _evaluate(self, runtime, path, mode, synonyms, skip_extraction):
        samples = read_samples(path, runtime.registry)
        if mode == TWO_STEP:
            run = classify_samples(runtime.model, samples)
            dataset_run = DatasetRun(str(path), mode, run.report, classification_latency=run.latency)
            if not skip_extraction:
                dataset_run.extraction, dataset_run.route_latency = self._extract(runtime, samples, mode, synonyms)
            return dataset_run

        extraction, route_latency = self._extract(runtime, samples, mode, synonyms)
        # Single-step labels come from the composite completion; failed routes count as others.
        classification = evaluate_classification([
            (outcome.gold_tool, outcome.predicted_tool or ToolCategory.OTHERS)
            for outcome in extraction.per_sample
        ])
        return DatasetRun(str(path), mode, classification, extraction=extraction, route_latency=route_latency)

    def _text(self, runs):
        blocks = []
        for run in runs:
            blocks.append(f'== {run.dataset} ({run.mode})')
            blocks.append(classification_text(run.classification))
            if run.classification_latency:
                blocks.append(latency_text(run.classification_latency, title='classify'))
            if run.extraction:
                blocks.append(extraction_text(run.extraction))
            if run.route_latency:
                blocks.append(latency_text(run.route_latency, title='route'))
        if len(runs) > 1:
            blocks.append(robustness_text([run.to_dict() for run in runs]))
        return '\n\n'.join(blocks)

    def handle(self, *args, **options):
        settings = self.runtime_settings(
            options,
            parallelism=options['parallelism'],
            synonyms_path=options['synonyms_path'],
        )
        runtime = RouterRuntime.from_settings(settings)
        mode = mode_from_option(options['mode'])
        synonyms = None if options['exact'] else load_synonyms(settings.synonyms_path or None)
        paths = [Path(path) for path in options['data'] or [BUNDLE_DIR / 'holdout.jsonl']]

        runs = [self._evaluate(runtime, path, mode, synonyms, options['skip_extraction']) for path in paths]
        if options['format'] == 'text':
            self.stdout.write(self._text(runs))
        else:
            self.write_json({'mode': mode, 'datasets': [run.to_dict() for run in runs]})
