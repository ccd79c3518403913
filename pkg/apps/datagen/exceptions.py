"""
Datagen errors
"""
from query_router.exceptions import QueryRouterError


class EmptySeeds(QueryRouterError):
    code = 'empty_seeds'


class MixedSeedTools(QueryRouterError):
    """Seeds for one generation prompt must all belong to the prompt's tool."""
    code = 'mixed_seed_tools'
