"""
Entity extraction stage
Render the tool's prompt, send one request, parse the completion and
validate it against the tool's schema.
"""
import logging
from dataclasses import dataclass, field

from apps.prompts.services import render, select
from apps.registry.exceptions import SchemaViolationError
from apps.registry.services import ToolCategory

from .backends import ChatRequest, InferenceSettings
from .exceptions import StructuredOutputError
from .parsing import FAILED, parse_structured

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExtractionResult:
    tool: ToolCategory
    entities: dict
    raw_text: str
    parse_status: str
    error: dict = None
    violations: tuple = field(default_factory=tuple)

    @property
    def failed(self):
        return self.parse_status == FAILED


def _failed(tool, raw_text, error, violations=()):
    return ExtractionResult(
        tool=tool,
        entities={},
        raw_text=raw_text,
        parse_status=FAILED,
        error=error,
        violations=tuple(violations),
    )


def validate_completion(registry, tool, raw_text, unwrap=None):
    """
    Parse a completion and validate its entity map. Parse and schema
    failures come back as a failed ExtractionResult.
    """
    try:
        parsed = parse_structured(raw_text)
    except StructuredOutputError as exc:
        logger.warning(f"Unparseable completion for {tool}: {exc.message}")
        return _failed(tool, raw_text, exc.to_dict())

    value = unwrap(parsed.value) if unwrap else parsed.value
    try:
        entities = registry.validate_entities(tool, value)
    except SchemaViolationError as exc:
        logger.warning(f"Completion for {tool} broke its schema: {exc.message}")
        return _failed(tool, raw_text, exc.to_dict(), exc.violations)
    return ExtractionResult(tool=tool, entities=entities, raw_text=raw_text, parse_status=parsed.status)


def extract_entities(backend, pool, registry, tool, query, settings=None):
    """
    One extraction request for an entity-bearing tool.
    Backend errors propagate; everything after the completion is data.
    """
    template = select(pool, tool)
    request = ChatRequest(prompt=render(template, query), settings=settings or InferenceSettings())
    raw_text = backend.send(request)
    return validate_completion(registry, template.tool, raw_text)
