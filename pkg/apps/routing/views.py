"""
Routing app views
POST /v1/route, POST /v1/classify and GET /healthz
"""
import logging

from drf_spectacular.types import OpenApiTypes
from drf_spectacular.utils import extend_schema
from rest_framework import status, viewsets
from rest_framework.decorators import action, api_view
from rest_framework.exceptions import ParseError
from rest_framework.response import Response

from apps.extraction.exceptions import BackendError
from query_router.exceptions import QueryRouterError

from .runtime import get_runtime
from .serializers import (
    ClassifyResponseSerializer,
    QuerySerializer,
    RouteRequestSerializer,
    RouteResponseSerializer,
)

logger = logging.getLogger(__name__)


class RouterViewSet(viewsets.ViewSet):
    """
    Query routing endpoints
    """

    def _validated(self, request, serializer_class):
        """Return (data, error response)."""
        try:
            payload = request.data
        except ParseError as exc:
            return None, Response({'error': {'code': 'malformed_json', 'message': str(exc.detail)}},
                                  status=status.HTTP_422_UNPROCESSABLE_ENTITY)
        serializer = serializer_class(data=payload)
        if not serializer.is_valid():
            return None, Response({'error': {'code': 'invalid_query', 'message': serializer.errors}},
                                  status=status.HTTP_400_BAD_REQUEST)
        return serializer.validated_data, None

    def _runtime_or_503(self):
        runtime = get_runtime()
        if runtime is None:
            return None, Response({'error': {'code': 'router_not_ready', 'message': 'Model and prompt pool are not loaded'}},
                                  status=status.HTTP_503_SERVICE_UNAVAILABLE)
        return runtime, None

    @extend_schema(request=RouteRequestSerializer, responses={200: RouteResponseSerializer})
    @action(detail=False, methods=['post'], url_path='route')
    def route(self, request):
        """
        Classify a query and extract its entities
        POST /v1/route
        """
        data, error = self._validated(request, RouteRequestSerializer)
        if error:
            return error
        runtime, error = self._runtime_or_503()
        if error:
            return error

        query = data['query']
        try:
            result = runtime.route(query, mode=data['mode'])
        except BackendError as exc:
            logger.error(f"Single-step backend failure for {query[:60]!r}: {exc.message}")
            return Response({'error': exc.to_dict()}, status=status.HTTP_502_BAD_GATEWAY)
        except QueryRouterError as exc:
            return Response({'error': exc.to_dict()}, status=status.HTTP_400_BAD_REQUEST)

        payload = result.to_public(include_timings=True)
        if result.backend_failed:
            payload['error'] = result.error
            return Response(payload, status=status.HTTP_502_BAD_GATEWAY)
        return Response(payload)

    @extend_schema(request=QuerySerializer, responses={200: ClassifyResponseSerializer})
    @action(detail=False, methods=['post'], url_path='classify')
    def classify(self, request):
        """
        Predict the tool category only
        POST /v1/classify
        """
        data, error = self._validated(request, QuerySerializer)
        if error:
            return error
        runtime, error = self._runtime_or_503()
        if error:
            return error

        prediction = runtime.classify(data['query'])
        return Response({
            'tool_category': prediction.tool.value,
            'probabilities': prediction.probability_map(),
        })


@extend_schema(responses={200: OpenApiTypes.OBJECT, 503: OpenApiTypes.OBJECT})
@api_view(['GET'])
def healthz(request):
    """
    Liveness and readiness
    GET /healthz
    """
    runtime = get_runtime()
    if runtime is None:
        return Response({'status': 'loading'}, status=status.HTTP_503_SERVICE_UNAVAILABLE)
    return Response({
        'status': 'ok',
        'backend': runtime.settings.backend,
        'labels': [label.value for label in runtime.model.labels],
        'prompt_tools': [tool.value for tool in runtime.pool.tools()],
    })
