"""
Routing pipelines
Two-step routing (classify, select prompt, extract, validate), the
single-step baseline, and the latency comparison between the two.
"""
import logging
import threading
import time
from dataclasses import dataclass, field

from apps.classifier.services import predict
from apps.evaluation.services import latency_stats
from apps.extraction.backends import ChatRequest, InferenceSettings, MockChatBackend
from apps.extraction.exceptions import (
    BackendError,
    BackendTimeout,
    BackendTransportError,
    HttpStatusError,
    StructuredOutputError,
)
from apps.extraction.parsing import FAILED, parse_structured
from apps.extraction.services import extract_entities
from apps.prompts.services import composite_prompt
from apps.registry.exceptions import SchemaViolationError, UnknownToolCategory
from apps.registry.services import ToolCategory, parse_tool

from .exceptions import InvalidQuery, UnknownToolLabel

logger = logging.getLogger(__name__)

TWO_STEP = 'two_step'
SINGLE_STEP = 'single_step'
MODES = (TWO_STEP, SINGLE_STEP)

BACKEND_ERROR_CODES = frozenset(
    error.code for error in (BackendError, BackendTimeout, BackendTransportError, HttpStatusError)
)


@dataclass(frozen=True)
class StageTimings:
    classify_seconds: float = 0.0
    extract_seconds: float = 0.0
    total_seconds: float = 0.0

    def to_dict(self):
        return {
            'classify_seconds': self.classify_seconds,
            'extract_seconds': self.extract_seconds,
            'total_seconds': self.total_seconds,
        }


@dataclass(frozen=True)
class RouteResult:
    tool: ToolCategory
    entities: dict
    timings: StageTimings
    mode: str
    parse_status: str = None
    probabilities: dict = None
    error: dict = None

    @property
    def ok(self):
        return self.error is None

    @property
    def backend_failed(self):
        return bool(self.error) and self.error.get('code') in BACKEND_ERROR_CODES

    def to_public(self, include_timings=False):
        """The serialized result: {tool_category, entities} plus optional _timings."""
        payload = {'tool_category': self.tool.value, 'entities': self.entities}
        if include_timings:
            payload['_timings'] = self.timings.to_dict()
        return payload

    def diagnostics(self):
        return {
            'mode': self.mode,
            'parse_status': self.parse_status,
            'probabilities': self.probabilities,
            'error': self.error,
        }


class SimulatedClock:
    """
    Monotonic clock whose sleep() advances time instead of blocking.
    Lets latency experiments charge synthetic backend delays without waiting.
    """

    def __init__(self, base=time.perf_counter):
        self._base = base
        self._offset = 0.0
        self._lock = threading.Lock()

    def __call__(self):
        with self._lock:
            return self._base() + self._offset

    def sleep(self, seconds):
        with self._lock:
            self._offset += seconds


def check_query(query):
    if not isinstance(query, str) or not query.strip():
        raise InvalidQuery('Query must be a non-empty string')
    return query


def route_two_step(query, model, pool, registry, backend, settings=None, clock=time.perf_counter):
    """
    Classify, then extract with the tool's own prompt. Queries classified
    as others skip extraction. A failing backend leaves the tool in place
    with empty entities and the error recorded.
    """
    check_query(query)
    started = clock()
    prediction = predict(model, query)
    classified = clock()
    tool = prediction.tool
    probabilities = prediction.probability_map()

    if tool == ToolCategory.OTHERS:
        return RouteResult(
            tool=tool,
            entities={},
            timings=StageTimings(classified - started, 0.0, clock() - started),
            mode=TWO_STEP,
            probabilities=probabilities,
        )

    error = None
    try:
        extraction = extract_entities(backend, pool, registry, tool, query, settings)
        entities, parse_status, error = extraction.entities, extraction.parse_status, extraction.error
    except BackendError as exc:
        logger.error(f"Extraction backend failed for {tool} ({exc.code}): {exc.message}")
        entities, parse_status, error = {}, FAILED, exc.to_dict()
    finished = clock()

    return RouteResult(
        tool=tool,
        entities=entities,
        timings=StageTimings(classified - started, finished - classified, finished - started),
        mode=TWO_STEP,
        parse_status=parse_status,
        probabilities=probabilities,
        error=error,
    )


def _single_step_timings(tool, elapsed):
    """The joint call counts as classification when it routes to others."""
    if tool == ToolCategory.OTHERS:
        return StageTimings(elapsed, 0.0, elapsed)
    return StageTimings(0.0, elapsed, elapsed)


def _single_step_failure(started, clock, error, parse_status=FAILED):
    return RouteResult(
        tool=ToolCategory.OTHERS,
        entities={},
        timings=_single_step_timings(ToolCategory.OTHERS, clock() - started),
        mode=SINGLE_STEP,
        parse_status=parse_status,
        error=error,
    )


def route_single_step(query, pool, registry, backend, settings=None, clock=time.perf_counter):
    """
    One composite prompt that classifies and extracts at once. The
    completion's entities are validated against the tool it names; an
    unknown tool name routes to others.
    """
    check_query(query)
    started = clock()
    request = ChatRequest(prompt=composite_prompt(pool, registry, query), settings=settings or InferenceSettings())
    raw_text = backend.send(request)

    try:
        parsed = parse_structured(raw_text)
    except StructuredOutputError as exc:
        logger.warning(f"Unparseable single-step completion: {exc.message}")
        return _single_step_failure(started, clock, exc.to_dict())

    value = parsed.value
    label = value.get('tool_category')
    try:
        tool = parse_tool(label)
    except UnknownToolCategory:
        error = UnknownToolLabel(f'Completion named unknown tool {label!r}', label=str(label))
        logger.warning(error.message)
        return _single_step_failure(started, clock, error.to_dict())

    try:
        entities = registry.validate_entities(tool, value.get('entities'))
        parse_status, error = parsed.status, None
    except SchemaViolationError as exc:
        logger.warning(f"Single-step entities broke the {tool} schema: {exc.message}")
        entities, parse_status, error = {}, FAILED, exc.to_dict()

    elapsed = clock() - started
    return RouteResult(
        tool=tool,
        entities=entities,
        timings=_single_step_timings(tool, elapsed),
        mode=SINGLE_STEP,
        parse_status=parse_status,
        error=error,
    )


@dataclass(frozen=True)
class ModeLatency:
    mode: str
    latency: object

    def to_dict(self):
        return {'mode': self.mode, **self.latency.to_dict()}


@dataclass(frozen=True)
class ModeComparison:
    n: int
    modes: list = field(default_factory=list)
    agreement_rate: float = None

    def to_dict(self):
        return {
            'n': self.n,
            'modes': [row.to_dict() for row in self.modes],
            'agreement_rate': self.agreement_rate,
        }


def compare_modes(queries, model, pool, registry, latency=None, backend=None, settings=None, real_sleep=False):
    """
    Run both modes over the queries and report latency per mode plus the
    tool-label agreement rate. Without a backend, a mock one is built on
    the latency model; its delays go to a simulated clock unless
    real_sleep is set.
    """
    if not queries:
        return ModeComparison(n=0)

    if backend is None:
        clock = time.perf_counter if real_sleep else SimulatedClock()
        sleep = time.sleep if real_sleep else clock.sleep
        backend = MockChatBackend(model=model, registry=registry, latency=latency, sleep=sleep)
    else:
        clock = time.perf_counter

    seconds = {TWO_STEP: [], SINGLE_STEP: []}
    agreements = 0
    for query in queries:
        two_step = route_two_step(query, model, pool, registry, backend, settings, clock=clock)
        single_step = route_single_step(query, pool, registry, backend, settings, clock=clock)
        seconds[TWO_STEP].append(two_step.timings.total_seconds)
        seconds[SINGLE_STEP].append(single_step.timings.total_seconds)
        agreements += two_step.tool == single_step.tool

    rows = [ModeLatency(mode, latency_stats(seconds[mode])) for mode in MODES]
    comparison = ModeComparison(n=len(queries), modes=rows, agreement_rate=agreements / len(queries))
    logger.info(
        f"Compared modes on {len(queries)} queries: "
        + ', '.join(f"{row.mode} mean {row.latency.mean_seconds:.4f}s" for row in rows)
    )
    return comparison
