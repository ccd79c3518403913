"""
Dataset records and the bundled desk dataset
One JSONL format is shared by classifier training, evaluation and data
generation: {"query", "tool_category", "entities", "reasoning"?,
"review_status"?, "provenance"?}.
"""
import json
import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from apps.classifier.services import LabeledExample
from apps.registry.exceptions import SchemaViolationError, UnknownToolCategory
from apps.registry.services import ToolCategory, default_registry, parse_tool

from .exceptions import CorruptBundle, DatasetFormatError

logger = logging.getLogger(__name__)

BUNDLE_DIR = Path(__file__).resolve().parent / 'data'

TRAIN_PER_TOOL = 20
HOLDOUT_SIZE = 40

REVIEW_STATUSES = ('pending', 'approved', 'rejected')

PUNCTUATION = re.compile(r'[^\w\s]')
WHITESPACE_RUN = re.compile(r'\s+')


def normalized_query(query):
    """Lowercase, punctuation stripped, whitespace collapsed; the dedup/disjointness key."""
    return WHITESPACE_RUN.sub(' ', PUNCTUATION.sub(' ', query.lower())).strip()


@dataclass
class SeedSample:
    query: str
    tool: ToolCategory
    entities: dict = field(default_factory=dict)
    reasoning: str = None

    def to_record(self):
        record = {
            'query': self.query,
            'tool_category': str(self.tool),
            'entities': self.entities,
        }
        if self.reasoning:
            record['reasoning'] = self.reasoning
        return record


@dataclass
class GeneratedSample(SeedSample):
    review_status: str = 'pending'
    provenance: dict = field(default_factory=dict)

    def to_record(self):
        record = super().to_record()
        record['review_status'] = self.review_status
        record['provenance'] = self.provenance
        return record


def sample_from_record(record, registry=None, validate=True):
    """Build a SeedSample (or GeneratedSample when review fields exist) from a JSON record."""
    registry = registry or default_registry()
    if not isinstance(record, dict):
        raise DatasetFormatError('record must be a JSON object')
    query = record.get('query')
    if not isinstance(query, str) or not query.strip():
        raise DatasetFormatError('record needs a non-empty "query"')
    try:
        tool = parse_tool(record.get('tool_category'))
    except UnknownToolCategory as exc:
        raise DatasetFormatError(exc.message)

    entities = record.get('entities') or {}
    if validate:
        entities = registry.validate_entities(tool, entities)

    kwargs = {
        'query': query,
        'tool': tool,
        'entities': entities,
        'reasoning': record.get('reasoning'),
    }
    if 'review_status' in record or 'provenance' in record:
        status = record.get('review_status', 'pending')
        if status not in REVIEW_STATUSES:
            raise DatasetFormatError(f'unknown review_status {status!r}')
        return GeneratedSample(review_status=status, provenance=record.get('provenance') or {}, **kwargs)
    return SeedSample(**kwargs)


def iter_records(path):
    """Yield (line number, parsed object) for each non-blank JSONL line."""
    path = Path(path)
    with path.open(encoding='utf-8') as handle:
        for line_number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                yield line_number, json.loads(line)
            except ValueError as exc:
                raise DatasetFormatError(f'{path}:{line_number}: invalid JSON ({exc})', path=str(path), line=line_number)


def read_samples(path, registry=None, validate=True):
    samples = []
    for line_number, record in iter_records(path):
        try:
            samples.append(sample_from_record(record, registry, validate=validate))
        except DatasetFormatError as exc:
            raise DatasetFormatError(f'{path}:{line_number}: {exc.message}', path=str(path), line=line_number)
        except SchemaViolationError as exc:
            raise DatasetFormatError(
                f'{path}:{line_number}: {exc.message}',
                path=str(path),
                line=line_number,
                violations=[v.to_dict() for v in exc.violations],
            )
    logger.debug(f"Read {len(samples)} samples from {path}")
    return samples


def read_labeled_examples(path):
    """Classifier training view of a dataset file; entities are ignored."""
    return [
        LabeledExample(query=sample.query, tool=sample.tool)
        for sample in read_samples(path, validate=False)
    ]


def write_samples(path, samples):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', encoding='utf-8') as handle:
        for sample in samples:
            handle.write(json.dumps(sample.to_record(), ensure_ascii=False) + '\n')
    logger.info(f"Wrote {len(samples)} samples to {path}")
    return path


@dataclass
class DeskDataset:
    train: list
    holdout: list
    canonical: list

    def train_examples(self):
        return [LabeledExample(query=s.query, tool=s.tool) for s in self.train]


def _read_bundle_file(path, registry):
    try:
        return read_samples(path, registry)
    except DatasetFormatError as exc:
        raise CorruptBundle('record validation', exc.message)
    except OSError as exc:
        raise CorruptBundle('file presence', f'cannot read {path}: {exc}')


def load_desk_dataset(data_dir=None, registry=None):
    """
    Load the bundled desk dataset and verify its invariants: sizes, exact
    class balance in train, train/holdout disjointness, one canonical
    fixture per tool.
    """
    data_dir = Path(data_dir or BUNDLE_DIR)
    registry = registry or default_registry()
    train = _read_bundle_file(data_dir / 'train.jsonl', registry)
    holdout = _read_bundle_file(data_dir / 'holdout.jsonl', registry)
    canonical = _read_bundle_file(data_dir / 'canonical.jsonl', registry)

    expected_train = TRAIN_PER_TOOL * len(ToolCategory)
    if len(train) != expected_train:
        raise CorruptBundle('train size', f'expected {expected_train} samples, found {len(train)}')
    counts = Counter(sample.tool for sample in train)
    unbalanced = {str(tool): counts.get(tool, 0) for tool in ToolCategory if counts.get(tool, 0) != TRAIN_PER_TOOL}
    if unbalanced:
        raise CorruptBundle('train class balance', f'per-tool counts off: {unbalanced}')
    if len(holdout) != HOLDOUT_SIZE:
        raise CorruptBundle('holdout size', f'expected {HOLDOUT_SIZE} samples, found {len(holdout)}')

    train_keys = {normalized_query(sample.query) for sample in train}
    overlap = [sample.query for sample in holdout if normalized_query(sample.query) in train_keys]
    if overlap:
        raise CorruptBundle('train/holdout disjointness', f'{len(overlap)} holdout queries also in train')

    canonical_tools = [sample.tool for sample in canonical]
    if sorted(canonical_tools, key=lambda tool: tool.position) != list(ToolCategory):
        raise CorruptBundle('canonical coverage', 'expected exactly one fixture per tool category')

    logger.info(f"Loaded desk dataset: {len(train)} train, {len(holdout)} holdout, {len(canonical)} canonical")
    return DeskDataset(train=train, holdout=holdout, canonical=canonical)
