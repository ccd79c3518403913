"""
Embedding errors
"""
from query_router.exceptions import QueryRouterError


class InvalidEmbedderConfig(QueryRouterError):
    code = 'invalid_embedder_config'


class DimensionMismatch(QueryRouterError):
    code = 'dimension_mismatch'


class EmbeddingNotFound(QueryRouterError):
    code = 'embedding_not_found'


class VectorFileError(QueryRouterError):
    code = 'vector_file_error'
