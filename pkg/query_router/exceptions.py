"""
Shared error base for the query router
Every named error carries a stable code so the CLI and the HTTP service
can report it as JSON.
"""


class QueryRouterError(Exception):
    """Base class for all domain errors raised by the router apps."""

    code = 'query_router_error'
    retryable = False

    def __init__(self, message='', **details):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self):
        payload = {
            'code': self.code,
            'message': self.message,
            'retryable': self.retryable,
        }
        payload.update(self.details)
        return payload


class ConfigurationError(QueryRouterError):
    """Settings or flags that cannot be resolved at startup."""

    code = 'configuration_error'
