"""
Routing errors
"""
from query_router.exceptions import QueryRouterError


class InvalidQuery(QueryRouterError):
    code = 'invalid_query'


class UnknownToolLabel(QueryRouterError):
    """A single-step completion named a tool outside the closed set."""
    code = 'unknown_tool_label'


class RouterNotReady(QueryRouterError):
    code = 'router_not_ready'
    retryable = True
