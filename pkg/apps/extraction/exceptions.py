"""
Extraction errors
Structured-output failures are reported as data on ExtractionResult;
backend failures are raised and carry a retryable flag.
"""
from query_router.exceptions import QueryRouterError


class StructuredOutputError(QueryRouterError):
    code = 'structured_output_error'


class NoJsonFound(StructuredOutputError):
    code = 'no_json_found'


class UnbalancedBraces(StructuredOutputError):
    code = 'unbalanced_braces'


class ParseError(StructuredOutputError):
    code = 'parse_error'

    def __init__(self, message, offset):
        super().__init__(message, offset=offset)
        self.offset = offset


class BackendError(QueryRouterError):
    code = 'backend_error'
    retryable = True


class BackendTimeout(BackendError):
    code = 'backend_timeout'


class BackendTransportError(BackendError):
    code = 'backend_transport_error'


class HttpStatusError(BackendError):
    code = 'http_status_error'

    def __init__(self, status_code, body):
        excerpt = (body or '')[:200]
        super().__init__(f'Backend answered HTTP {status_code}', status_code=status_code, body=excerpt)
        self.status_code = status_code
        self.retryable = status_code >= 500
