"""
Chat-completion backends
HttpChatBackend speaks the chat-completions JSON wire format with
bounded retries; MockChatBackend answers deterministically from the
prompt text, so the whole pipeline runs without a model server.
"""
import json
import logging
import re
import threading
import time
import uuid
from dataclasses import dataclass, field

import requests

from apps.classifier.services import predict
from apps.prompts.services import token_count
from apps.registry.services import ToolCategory, default_registry, parse_tool
from query_router.exceptions import ConfigurationError

from .exceptions import BackendTimeout, BackendTransportError, HttpStatusError
from .mock import mock_extract

logger = logging.getLogger(__name__)

TOOL_LINE = re.compile(r'^Tool: (\w+)\s*$', re.MULTILINE)
QUERY_MARKER = 'Query: '
ANSWER_MARKER = '\nJSON:'


@dataclass(frozen=True)
class InferenceSettings:
    temperature: float = 0.01
    max_tokens: int = 1024

    def __post_init__(self):
        if self.temperature < 0:
            raise ConfigurationError(f'temperature must be >= 0, got {self.temperature}')
        if self.max_tokens < 1:
            raise ConfigurationError(f'max_tokens must be >= 1, got {self.max_tokens}')


@dataclass(frozen=True)
class ChatRequest:
    prompt: str
    settings: InferenceSettings = field(default_factory=InferenceSettings)
    request_id: str = field(default_factory=lambda: uuid.uuid4().hex)

    def __post_init__(self):
        if not self.prompt or not self.prompt.strip():
            raise ValueError('ChatRequest prompt must not be empty')


@dataclass(frozen=True)
class EndpointConfig:
    url: str
    model_name: str
    api_key: str = ''
    timeout_seconds: float = 30.0
    max_retries: int = 2
    backoff_seconds: float = 0.5
    prompt_role: str = 'user'


class ChatBackend:
    """send(ChatRequest) -> completion text; implementations allow concurrent sends."""

    name = 'base'

    @property
    def model_id(self):
        return self.name

    def send(self, request):
        raise NotImplementedError


class HttpChatBackend(ChatBackend):
    name = 'http'

    def __init__(self, endpoint, sleep=time.sleep):
        self.endpoint = endpoint
        self.sleep = sleep

    @property
    def model_id(self):
        return self.endpoint.model_name

    def _payload(self, request):
        return {
            'model': self.endpoint.model_name,
            'messages': [{'role': self.endpoint.prompt_role, 'content': request.prompt}],
            'temperature': request.settings.temperature,
            'max_tokens': request.settings.max_tokens,
        }

    def _headers(self):
        headers = {'Content-Type': 'application/json'}
        if self.endpoint.api_key:
            headers['Authorization'] = f'Bearer {self.endpoint.api_key}'
        return headers

    def _attempt(self, request):
        try:
            response = requests.post(
                self.endpoint.url,
                json=self._payload(request),
                headers=self._headers(),
                timeout=self.endpoint.timeout_seconds,
            )
        except requests.Timeout as exc:
            raise BackendTimeout(f'Request timed out after {self.endpoint.timeout_seconds}s: {exc}')
        except requests.RequestException as exc:
            raise BackendTransportError(f'Request to {self.endpoint.url} failed: {exc}')

        if response.status_code >= 400:
            raise HttpStatusError(response.status_code, response.text)
        try:
            return response.json()['choices'][0]['message']['content']
        except (ValueError, KeyError, IndexError, TypeError):
            raise BackendTransportError('Malformed chat-completions response', body=response.text[:200])

    def send(self, request):
        attempts = self.endpoint.max_retries + 1
        for attempt in range(attempts):
            try:
                return self._attempt(request)
            except (BackendTimeout, BackendTransportError, HttpStatusError) as exc:
                if not exc.retryable or attempt == attempts - 1:
                    logger.error(f"Chat request {request.request_id} failed: {exc.message}")
                    raise
                delay = self.endpoint.backoff_seconds * (2 ** attempt)
                logger.info(
                    f"Chat request {request.request_id} attempt {attempt + 1}/{attempts} failed "
                    f"({exc.code}); retrying in {delay:.2f}s"
                )
                self.sleep(delay)


@dataclass(frozen=True)
class LatencyModel:
    """Synthetic delay of base + per_token * token_count(prompt) seconds."""
    base_seconds: float = 0.0
    per_token_seconds: float = 0.0

    def delay(self, prompt):
        return self.base_seconds + self.per_token_seconds * token_count(prompt)


def prompt_query(prompt):
    """The query a rendered prompt asks about: text after the last 'Query: ' marker."""
    start = prompt.rfind(QUERY_MARKER)
    if start < 0:
        return ''
    start += len(QUERY_MARKER)
    end = prompt.rfind(ANSWER_MARKER)
    return prompt[start:end] if end >= start else prompt[start:]


class MockChatBackend(ChatBackend):
    """
    Deterministic stand-in for the extraction model.

    A per-tool prompt (one carrying a 'Tool: <id>' line) is answered with
    the gazetteer extraction. A composite prompt is answered by
    classifying the query with the given classifier first, then running
    the same extraction, so both modes agree on desk data.
    """

    name = 'mock'

    def __init__(self, model=None, registry=None, latency=None, sleep=time.sleep):
        self.model = model
        self.registry = registry or default_registry()
        self.latency = latency or LatencyModel()
        self.sleep = sleep
        self._lock = threading.Lock()
        self.requests_sent = 0

    def _classify(self, query):
        if self.model is None:
            raise ConfigurationError('Mock backend needs a classifier model to answer single-step prompts')
        return predict(self.model, query).tool

    def send(self, request):
        with self._lock:
            self.requests_sent += 1
        prompt = request.prompt
        query = prompt_query(prompt)
        tool_line = TOOL_LINE.search(prompt)

        if tool_line:
            tool = parse_tool(tool_line.group(1))
            completion = json.dumps(mock_extract(query, tool, self.registry), ensure_ascii=False)
        else:
            tool = self._classify(query)
            entities = {} if tool == ToolCategory.OTHERS else mock_extract(query, tool, self.registry)
            completion = json.dumps({'tool_category': tool.value, 'entities': entities}, ensure_ascii=False)

        delay = self.latency.delay(prompt)
        if delay > 0:
            self.sleep(delay)
        return completion
