"""
Evaluation errors
"""
from query_router.exceptions import QueryRouterError


class EmptyInput(QueryRouterError):
    code = 'empty_input'


class SchemaMismatch(QueryRouterError):
    code = 'schema_mismatch'


class SynonymFileError(QueryRouterError):
    code = 'synonym_file_error'
