"""
Dataset errors
"""
from query_router.exceptions import QueryRouterError


class DatasetFormatError(QueryRouterError):
    code = 'dataset_format_error'


class CorruptBundle(QueryRouterError):
    code = 'corrupt_bundle'

    def __init__(self, check, message):
        super().__init__(f'Desk dataset bundle failed {check}: {message}', check=check)
        self.check = check
