"""
Generate pending training samples from seed samples.

Usage:
    python manage.py gen_data --count 10 --out generated.jsonl
    python manage.py gen_data --counts tsb=25 --counts nhtsa=10 --seeds-per-prompt 1 --backend http
"""
from django.core.management.base import CommandError

from apps.datagen.services import MockGenerationBackend, generate
from apps.datasets.services import BUNDLE_DIR, read_samples, write_samples
from apps.extraction.backends import HttpChatBackend, InferenceSettings
from apps.registry.services import ToolCategory, default_registry, parse_tool
from apps.routing.config import BACKEND_KINDS, ServiceSettings
from query_router.commands import RouterCommand


class Command(RouterCommand):
    help = 'Generate synthetic samples per tool and write them as pending JSONL'

    def add_arguments(self, parser):
        parser.add_argument('--seeds', default=str(BUNDLE_DIR / 'train.jsonl'), help='Seed JSONL')
        parser.add_argument('--out', required=True, help='Output JSONL')
        parser.add_argument('--count', type=int, help='Samples requested for every tool')
        parser.add_argument('--counts', action='append', default=[], help='Per-tool request, e.g. tsb=25; repeatable')
        parser.add_argument('--seed', type=int, default=0)
        parser.add_argument('--seeds-per-prompt', dest='seeds_per_prompt', type=int,
                            help='Seeds shown per prompt (1 for one-shot); all when omitted')
        parser.add_argument('--backend', choices=BACKEND_KINDS, default='mock')
        parser.add_argument('--temperature', type=float, default=0.7)
        parser.add_argument('--max-tokens', dest='max_tokens', type=int, default=4096)
        parser.add_argument('--parallelism', type=int, default=4)

    def _counts(self, options):
        counts = {tool: options['count'] for tool in ToolCategory} if options['count'] else {}
        for item in options['counts']:
            name, _, value = item.partition('=')
            if not value.isdigit():
                raise CommandError(f'--counts expects tool=N, got {item!r}')
            counts[parse_tool(name.strip())] = int(value)
        if not counts:
            raise CommandError('Pass --count or at least one --counts tool=N')
        return counts

    def _backend(self, options):
        if options['backend'] == 'mock':
            return MockGenerationBackend(seed=options['seed'])
        return HttpChatBackend(ServiceSettings.from_django(backend='http').endpoint)

    def handle(self, *args, **options):
        registry = default_registry()
        seeds = read_samples(options['seeds'], registry)
        outcome = generate(
            self._backend(options),
            seeds,
            self._counts(options),
            seed=options['seed'],
            seeds_per_prompt=options['seeds_per_prompt'],
            settings=InferenceSettings(temperature=options['temperature'], max_tokens=options['max_tokens']),
            registry=registry,
            parallelism=options['parallelism'],
        )
        out = write_samples(options['out'], outcome.samples)
        self.write_json({
            'out': str(out),
            'written': len(outcome.samples),
            'dropped': outcome.dropped,
            'errors': outcome.errors,
        })
        if outcome.errors and not outcome.samples:
            self.fail(outcome.errors[0])
