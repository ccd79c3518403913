"""
Compare two-step and single-step routing latency on a query set.

Usage:
    python manage.py compare
    python manage.py compare --data apps/datasets/data/holdout.jsonl --latency-base 0.005 --latency-per-token 0.0005
"""
from apps.datasets.services import load_desk_dataset, read_samples
from apps.evaluation.reports import comparison_text
from apps.extraction.backends import LatencyModel
from apps.routing.commands import RuntimeCommand
from apps.routing.runtime import RouterRuntime, build_backend
from apps.routing.services import compare_modes


class Command(RuntimeCommand):
    help = 'Measure two-step vs single-step latency and tool agreement'

    def add_arguments(self, parser):
        parser.add_argument(
            '--data', action='append',
            help='JSONL dataset(s) of queries; defaults to the bundled holdout and canonical sets',
        )
        parser.add_argument('--latency-base', type=float, default=0.005, help='Mock delay per request, seconds')
        parser.add_argument('--latency-per-token', type=float, default=0.0005, help='Mock delay per prompt token, seconds')
        parser.add_argument('--real-sleep', action='store_true', help='Sleep for the mock delay instead of simulating it')
        parser.add_argument('--format', choices=('json', 'text'), default='json')
        self.add_runtime_arguments(parser)

    def _queries(self, runtime, paths):
        if paths:
            return [sample.query for path in paths for sample in read_samples(path, runtime.registry)]
        desk = load_desk_dataset(registry=runtime.registry)
        return [sample.query for sample in desk.holdout + desk.canonical]

    def handle(self, *args, **options):
        settings = self.runtime_settings(options)
        runtime = RouterRuntime.from_settings(settings)
        queries = self._queries(runtime, options['data'])

        # The mock backend is rebuilt inside compare_modes so its delays use the latency model.
        backend = None if settings.backend == 'mock' else build_backend(settings, runtime.model, runtime.registry)
        comparison = compare_modes(
            queries,
            runtime.model,
            runtime.pool,
            runtime.registry,
            latency=LatencyModel(options['latency_base'], options['latency_per_token']),
            backend=backend,
            settings=settings.inference,
            real_sleep=options['real_sleep'],
        )
        if options['format'] == 'text':
            self.stdout.write(comparison_text(comparison))
        else:
            self.write_json(comparison.to_dict())
