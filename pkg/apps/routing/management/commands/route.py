"""
Route one query and print the tool plus entities as JSON.

Usage:
    python manage.py route --query "Replace brake pads for my Toyota Corolla 2015." --backend mock
    python manage.py route --query "..." --mode single-step --timings
"""
import json

from apps.routing.commands import MODE_CHOICES, RuntimeCommand, mode_from_option
from apps.routing.runtime import RouterRuntime


class Command(RuntimeCommand):
    help = 'Route a query to its tool and extract the tool entities'

    def add_arguments(self, parser):
        parser.add_argument('--query', required=True, help='User query to route')
        parser.add_argument('--mode', choices=MODE_CHOICES, default='two-step')
        parser.add_argument('--timings', action='store_true', help='Include _timings in the output')
        parser.add_argument('--diagnostics', action='store_true', help='Log parse status and probabilities to stderr')
        self.add_runtime_arguments(parser)

    def handle(self, *args, **options):
        runtime = RouterRuntime.from_settings(self.runtime_settings(options))
        result = runtime.route(options['query'], mode_from_option(options['mode']))

        if options['diagnostics']:
            self.stderr.write(json.dumps(result.diagnostics(), ensure_ascii=False))
        self.write_json(result.to_public(include_timings=options['timings']))
        if result.backend_failed:
            self.fail(result.error)
