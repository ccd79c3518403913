"""
Base class for the router's management commands
Turns domain and I/O errors into a JSON error object on stderr and a
nonzero exit status instead of a stack trace.
"""
import json
import logging
import sys

from django.core.management.base import BaseCommand, CommandError

from .exceptions import QueryRouterError

logger = logging.getLogger(__name__)


class RouterCommand(BaseCommand):
    """Management command that reports failures as machine-readable JSON."""

    def execute(self, *args, **options):
        try:
            return super().execute(*args, **options)
        except QueryRouterError as exc:
            self.fail(exc.to_dict())
        except CommandError as exc:
            self.fail({'code': 'command_error', 'message': str(exc), 'retryable': False})
        except OSError as exc:
            self.fail({
                'code': 'io_error',
                'message': f'{exc.strerror or exc}: {exc.filename}' if exc.filename else str(exc),
                'retryable': False,
            })

    def fail(self, error):
        logger.debug(f"Command failed: {error}")
        self.stderr.write(json.dumps({'error': error}, ensure_ascii=False))
        sys.exit(1)

    def write_json(self, payload):
        """Write one JSON document to stdout."""
        self.stdout.write(json.dumps(payload, ensure_ascii=False, indent=2))
