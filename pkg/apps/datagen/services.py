"""
Synthetic sample generation
Few-shot generation prompts built from seed samples, parsing and
validation of the generated JSON lines, dedup against seeds, and the
review bookkeeping every generated sample starts with.
"""
import json
import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from django.utils import timezone

from apps.datasets.exceptions import DatasetFormatError
from apps.datasets.services import GeneratedSample, normalized_query, sample_from_record
from apps.extraction.backends import ChatBackend, ChatRequest, InferenceSettings
from apps.extraction.exceptions import BackendError, StructuredOutputError
from apps.extraction.parsing import parse_structured
from apps.registry.exceptions import SchemaViolationError
from apps.registry.services import ToolCategory, default_registry, parse_tool

from .exceptions import EmptySeeds, MixedSeedTools

logger = logging.getLogger(__name__)

TARGET_TOOL_LINE = re.compile(r'^Target tool: (\w+)\s*$', re.MULTILINE)
COUNT_LINE = re.compile(r'^Generate (\d+) new samples', re.MULTILINE)
EXAMPLE_PREFIX = 'Example: '


def build_generation_prompt(seeds, tool, count, registry=None):
    """Deterministic few-shot prompt asking for `count` new samples of one tool as JSON lines."""
    registry = registry or default_registry()
    if not seeds:
        raise EmptySeeds('At least one seed sample is needed to build a generation prompt')
    tool = parse_tool(tool)
    others = sorted({str(seed.tool) for seed in seeds if seed.tool != tool})
    if others:
        raise MixedSeedTools(f'Seeds for {tool} include other tools: {", ".join(others)}', tool=str(tool))

    fields = registry.schema_for(tool).field_names
    lines = [
        'You write new training samples for an automotive query router.',
        f'Target tool: {tool.value}',
        f'Description: {tool.description}',
        f'Entities: {", ".join(fields) if fields else "none"}',
        'Each sample is one JSON object on its own line with the keys '
        'query, tool_category, entities and reasoning. Entities use exactly the listed keys, null when absent.',
        '',
    ]
    for seed in seeds:
        lines.append(EXAMPLE_PREFIX + json.dumps(seed.to_record(), ensure_ascii=False))
    lines.append('')
    lines.append(
        f'Generate {count} new samples for this tool as JSON lines. '
        'Vary the vehicles, wording and details; do not repeat the examples.'
    )
    return '\n'.join(lines)


def dedup(samples, seeds=()):
    """Drop samples whose normalized query repeats a seed or an earlier sample."""
    seen = {normalized_query(seed.query) for seed in seeds}
    kept = []
    for sample in samples:
        key = normalized_query(sample.query)
        if key in seen:
            continue
        seen.add(key)
        kept.append(sample)
    return kept


@dataclass
class GenerationOutcome:
    samples: list = field(default_factory=list)
    dropped: dict = field(default_factory=dict)
    errors: list = field(default_factory=list)

    def drop(self, reason, count=1):
        self.dropped[reason] = self.dropped.get(reason, 0) + count

    @property
    def dropped_total(self):
        return sum(self.dropped.values())


def _choose_seeds(tool_seeds, seeds_per_prompt, seed, tool):
    if not seeds_per_prompt or seeds_per_prompt >= len(tool_seeds):
        return list(range(len(tool_seeds)))
    rng = np.random.default_rng([seed, tool.position])
    return sorted(int(i) for i in rng.choice(len(tool_seeds), size=seeds_per_prompt, replace=False))


def _parse_candidates(tool, text, registry, outcome):
    candidates = []
    for line in text.splitlines():
        if not line.strip():
            continue
        try:
            record = parse_structured(line).value
            sample = sample_from_record(record, registry)
        except (StructuredOutputError, DatasetFormatError):
            outcome.drop('malformed')
            continue
        except SchemaViolationError:
            outcome.drop('schema')
            continue
        if sample.tool != tool:
            outcome.drop('wrong_tool')
            continue
        candidates.append(sample)
    return candidates


def _generate_for_tool(backend, tool, tool_seeds, count, seed, seeds_per_prompt, settings, registry, stamp):
    outcome = GenerationOutcome()
    indices = _choose_seeds(tool_seeds, seeds_per_prompt, seed, tool)
    prompt = build_generation_prompt([tool_seeds[i] for i in indices], tool, count, registry)
    try:
        text = backend.send(ChatRequest(prompt=prompt, settings=settings))
    except BackendError as exc:
        logger.error(f"Generation for {tool} failed: {exc.message}")
        outcome.errors.append({'tool': tool.value, **exc.to_dict()})
        return outcome

    provenance = {
        'generator': backend.model_id,
        'seed_indices': indices,
        'seed': seed,
        'timestamp': stamp,
    }
    for candidate in _parse_candidates(tool, text, registry, outcome)[:count]:
        outcome.samples.append(GeneratedSample(
            query=candidate.query,
            tool=tool,
            entities=candidate.entities,
            reasoning=candidate.reasoning,
            review_status='pending',
            provenance=provenance,
        ))
    return outcome


def generate(backend, seeds, per_tool_counts, seed=0, seeds_per_prompt=None, settings=None,
             registry=None, timestamp=None, parallelism=4):
    """
    Generate pending samples per tool. Tools run concurrently; results
    merge in registry order, then generation order. Counts may come up
    short after parse and dedup losses; nothing is padded.
    """
    registry = registry or default_registry()
    settings = settings or InferenceSettings()
    stamp = timestamp or timezone.now().isoformat()
    requested = {parse_tool(tool): int(count) for tool, count in per_tool_counts.items() if int(count) > 0}
    merged = GenerationOutcome()
    if not requested:
        return merged

    jobs = {}
    with ThreadPoolExecutor(max_workers=max(1, parallelism)) as pool:
        for tool in ToolCategory:
            if tool not in requested:
                continue
            tool_seeds = [sample for sample in seeds if sample.tool == tool]
            if not tool_seeds:
                merged.errors.append({'tool': tool.value, **EmptySeeds(f'No seeds for {tool}').to_dict()})
                continue
            jobs[tool] = pool.submit(
                _generate_for_tool, backend, tool, tool_seeds, requested[tool],
                seed, seeds_per_prompt, settings, registry, stamp,
            )

    generated = []
    for tool in ToolCategory:
        if tool not in jobs:
            continue
        outcome = jobs[tool].result()
        generated.extend(outcome.samples)
        merged.errors.extend(outcome.errors)
        for reason, count in outcome.dropped.items():
            merged.drop(reason, count)

    merged.samples = dedup(generated, seeds)
    if len(merged.samples) < len(generated):
        merged.drop('duplicate', len(generated) - len(merged.samples))
    logger.info(
        f"Generated {len(merged.samples)} samples for {len(requested)} tools "
        f"({merged.dropped_total} dropped, {len(merged.errors)} errors)"
    )
    return merged


class MockGenerationBackend(ChatBackend):
    """
    Deterministic generator for tests and dry runs: rewrites the prompt's
    examples with fresh vehicles and phrasings, keeping entities in sync.
    """

    name = 'mock-generator'

    VEHICLES = (
        ('Toyota', 'Highlander'), ('Honda', 'Pilot'), ('Ford', 'Explorer'), ('Chevrolet', 'Equinox'),
        ('Nissan', 'Rogue'), ('Hyundai', 'Tucson'), ('Subaru', 'Crosstrek'), ('Kia', 'Sportage'),
        ('Mazda', 'CX-5'), ('Volkswagen', 'Tiguan'), ('Jeep', 'Cherokee'), ('GMC', 'Sierra'),
    )
    FRAMES = (
        '{query}',
        'Quick question: {query}',
        '{query} Thanks in advance.',
        'Hi there, {query}',
        'Could you check this for me? {query}',
        '{query} Need it for a customer today.',
    )

    def __init__(self, seed=0):
        self.seed = seed

    def _rewrite(self, record, vehicle, frame):
        query = record['query']
        entities = dict(record.get('entities') or {})
        make, model = entities.get('make'), entities.get('model')
        if make and model and make in query and model in query:
            query = query.replace(make, vehicle[0], 1).replace(model, vehicle[1], 1)
            entities['make'], entities['model'] = vehicle
        return {
            'query': frame.format(query=query),
            'tool_category': record['tool_category'],
            'entities': entities,
            'reasoning': record.get('reasoning'),
        }

    def send(self, request):
        prompt = request.prompt
        tool_match = TARGET_TOOL_LINE.search(prompt)
        count_match = COUNT_LINE.search(prompt)
        examples = [
            json.loads(line[len(EXAMPLE_PREFIX):])
            for line in prompt.splitlines()
            if line.startswith(EXAMPLE_PREFIX)
        ]
        if not tool_match or not count_match or not examples:
            return ''
        count = int(count_match.group(1))
        tool = parse_tool(tool_match.group(1))

        rng = np.random.default_rng([self.seed, tool.position])
        seen = {normalized_query(example['query']) for example in examples}
        lines = []
        plan = rng.permutation(len(self.VEHICLES) * len(self.FRAMES) * len(examples))
        for slot in plan:
            if len(lines) == count:
                break
            slot = int(slot)
            example = examples[slot % len(examples)]
            vehicle = self.VEHICLES[(slot // len(examples)) % len(self.VEHICLES)]
            frame = self.FRAMES[slot // (len(examples) * len(self.VEHICLES))]
            candidate = self._rewrite(example, vehicle, frame)
            key = normalized_query(candidate['query'])
            if key in seen:
                continue
            seen.add(key)
            lines.append(json.dumps(candidate, ensure_ascii=False))
        return '\n'.join(lines)
