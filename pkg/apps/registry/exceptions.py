"""
Registry errors
"""
from query_router.exceptions import QueryRouterError


class UnknownToolCategory(QueryRouterError):
    code = 'unknown_tool_category'


class SchemaFileError(QueryRouterError):
    code = 'schema_file_error'


class SchemaViolationError(QueryRouterError):
    """
    One or more fields of an entity map broke the tool's schema.
    Carries every violation plus the null-filled map built from the
    fields that did validate.
    """
    code = 'schema_violation'

    def __init__(self, tool, violations, partial):
        reasons = '; '.join(f'{v.field}: {v.reason}' for v in violations)
        super().__init__(
            f'{len(violations)} schema violation(s) for {tool}: {reasons}',
            tool=str(tool),
            violations=[v.to_dict() for v in violations],
        )
        self.tool = tool
        self.violations = violations
        self.partial = partial
