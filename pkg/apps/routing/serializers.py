"""
Routing serializers
"""
from django.conf import settings
from rest_framework import serializers

from .services import MODES, TWO_STEP


class QuerySerializer(serializers.Serializer):
    query = serializers.CharField(trim_whitespace=False, allow_blank=False)

    def validate_query(self, value):
        if not value.strip():
            raise serializers.ValidationError('Query must not be blank.')
        limit = settings.QUERY_ROUTER.get('MAX_QUERY_BYTES', 4096)
        size = len(value.encode('utf-8'))
        if size > limit:
            raise serializers.ValidationError(f'Query is {size} bytes; the limit is {limit}.')
        return value


class RouteRequestSerializer(QuerySerializer):
    mode = serializers.ChoiceField(choices=MODES, default=TWO_STEP)


class TimingsSerializer(serializers.Serializer):
    classify_seconds = serializers.FloatField()
    extract_seconds = serializers.FloatField()
    total_seconds = serializers.FloatField()


class RouteResponseSerializer(serializers.Serializer):
    tool_category = serializers.CharField()
    entities = serializers.DictField()
    _timings = TimingsSerializer()


class ClassifyResponseSerializer(serializers.Serializer):
    tool_category = serializers.CharField()
    probabilities = serializers.DictField(child=serializers.FloatField())
