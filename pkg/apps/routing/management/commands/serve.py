"""
Load the router and serve the HTTP API.

Usage:
    python manage.py serve --bind 0.0.0.0:8080

The model, prompt pool and backend are loaded once before the server
starts; restart the process to pick up a new model or prompt pool.
"""
from django.core.management import call_command

from apps.routing.commands import RuntimeCommand
from apps.routing.runtime import load_runtime


class Command(RuntimeCommand):
    help = 'Serve /v1/route, /v1/classify and /healthz'

    def add_arguments(self, parser):
        parser.add_argument('--bind', help='host:port to listen on (ROUTER_BIND)')
        parser.add_argument('--parallelism', type=int, help='Concurrent route calls allowed (ROUTER_PARALLELISM)')
        self.add_runtime_arguments(parser)

    def handle(self, *args, **options):
        settings = self.runtime_settings(options, bind=options['bind'], parallelism=options['parallelism'])
        load_runtime(settings)
        self.stdout.write(self.style.SUCCESS(f'Router loaded, serving on {settings.bind}'))
        call_command('runserver', settings.bind, use_reloader=False, use_threading=True)
