"""
Prompt pool errors
"""
from query_router.exceptions import QueryRouterError


class NoPromptForOthers(QueryRouterError):
    code = 'no_prompt_for_others'


class MissingTemplate(QueryRouterError):
    code = 'missing_template'


class PromptFileError(QueryRouterError):
    """A .prompt file that cannot be parsed or whose few-shot outputs break the schema."""
    code = 'prompt_file_error'
