"""
Tool registry
Owns the eight tool categories, their entity schemas, and the
validation/normalization of entity maps against a schema.
"""
import json
import logging
import re
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

from django.db import models
from jsonschema import Draft202012Validator

from .exceptions import SchemaFileError, SchemaViolationError, UnknownToolCategory

logger = logging.getLogger(__name__)

BUNDLED_SCHEMA_PATH = Path(__file__).resolve().parent / 'data' / 'tool_schemas.json'

VALUE_KINDS = ('string', 'integer')

YEAR_PATTERN = re.compile(r'^\d{4}$')


class ToolCategory(models.TextChoices):
    """
    The closed set of routing targets, in the registry's fixed order.
    OTHERS is the fallback for out-of-scope queries.
    """
    TSB = 'tsb', 'Fetches official technical service bulletins (TSB) issued by OEMs for known issues associated with a specific vehicle.'
    NHTSA = 'nhtsa', 'Returns government-reported safety recalls and customer complaints related to a specific issue for a vehicle.'
    TECHDOC = 'techdoc', 'Provides OEM repair procedures and technical specifications (e.g., torque, capacity) for specific components or systems, based on "how to" or "what is" questions answered by the service manual.'
    SMART_INSIGHTS = 'smart_insights', 'Offers diagnostic insights, causes, and possible repairs based on symptoms described by the user.'
    PARTS_CATALOG = 'parts_catalog', 'Retrieves parts information such as part numbers, prices, images, and PNC for a specified vehicle component.'
    REPAIR_TO_PARTS = 'repair_to_parts', 'Determines the parts needed for performing a specific repair on a vehicle.'
    SERVICE_TO_PARTS = 'service_to_parts', 'Identifies parts required for routine maintenance services based on time or mileage intervals.'
    OTHERS = 'others', 'Handles queries outside the scope of all defined tools, including vague, irrelevant, or unsupported requests.'

    @property
    def description(self):
        return self.label

    @property
    def position(self):
        """Index in the fixed registry order; used for deterministic tie-breaking."""
        return list(ToolCategory).index(self)


def parse_tool(value):
    """Map a wire value to a ToolCategory, raising UnknownToolCategory otherwise."""
    if isinstance(value, ToolCategory):
        return value
    try:
        return ToolCategory(value)
    except ValueError:
        raise UnknownToolCategory(f'Unknown tool category: {value!r}', value=str(value))


@dataclass(frozen=True)
class EntityFieldSpec:
    name: str
    value_kind: str
    description: str = ''
    nullable: bool = True

    def to_dict(self):
        return {'name': self.name, 'value_kind': self.value_kind, 'description': self.description}


@dataclass(frozen=True)
class EntitySchema:
    tool: ToolCategory
    fields: tuple

    @property
    def field_names(self):
        return [f.name for f in self.fields]

    def field(self, name):
        for spec in self.fields:
            if spec.name == name:
                return spec
        return None

    def json_schema(self):
        """Draft 2020-12 schema: known fields only, each a nullable scalar of its kind."""
        return {
            '$schema': 'https://json-schema.org/draft/2020-12/schema',
            'type': 'object',
            'properties': {spec.name: {'type': [spec.value_kind, 'null']} for spec in self.fields},
            'additionalProperties': False,
        }


@dataclass(frozen=True)
class SchemaViolation:
    field: str
    reason: str

    def to_dict(self):
        return {'field': self.field, 'reason': self.reason}


class ToolRegistry:
    """
    Immutable view over the tool categories and their entity schemas.
    """

    def __init__(self, schemas):
        self._schemas = dict(schemas)
        self._validators = {tool: Draft202012Validator(schema.json_schema()) for tool, schema in self._schemas.items()}

    @classmethod
    def from_json(cls, path):
        """
        Load schemas from a JSON file of the form
        {tool: [{name, value_kind, description}]}.
        Tools missing from the file get an empty schema.
        """
        path = Path(path)
        try:
            raw = json.loads(path.read_text(encoding='utf-8'))
        except (OSError, ValueError) as exc:
            raise SchemaFileError(f'Cannot read schema file {path}: {exc}', path=str(path))
        if not isinstance(raw, dict):
            raise SchemaFileError(f'Schema file {path} must hold a JSON object', path=str(path))

        schemas = {}
        for key, field_list in raw.items():
            tool = parse_tool(key)
            if not isinstance(field_list, list):
                raise SchemaFileError(f'Schema for {key} must be a list of fields', path=str(path))
            fields = []
            seen = set()
            for entry in field_list:
                name = entry.get('name') if isinstance(entry, dict) else None
                kind = entry.get('value_kind') if isinstance(entry, dict) else None
                if not name or kind not in VALUE_KINDS:
                    raise SchemaFileError(f'Malformed field {entry!r} in schema for {key}', path=str(path))
                if name in seen:
                    raise SchemaFileError(f'Duplicate field {name!r} in schema for {key}', path=str(path))
                seen.add(name)
                fields.append(EntityFieldSpec(name=name, value_kind=kind, description=entry.get('description', '')))
            schemas[tool] = EntitySchema(tool=tool, fields=tuple(fields))

        for tool in ToolCategory:
            schemas.setdefault(tool, EntitySchema(tool=tool, fields=()))
        logger.debug(f"Loaded entity schemas from {path}")
        return cls(schemas)

    def all_tools(self):
        """The eight categories in registry order."""
        return list(ToolCategory)

    def schema_for(self, tool):
        tool = parse_tool(tool)
        return self._schemas[tool]

    def entity_tools(self):
        """Tools that carry a non-empty schema."""
        return [tool for tool in ToolCategory if self._schemas[tool].fields]

    def validate_entities(self, tool, raw):
        """
        Normalize an entity map against the tool's schema.

        Returns a dict holding exactly the schema fields in schema order.
        Raises SchemaViolationError listing every violation at once.
        """
        schema = self.schema_for(tool)
        candidate = _normalize(schema, {} if raw is None else raw)

        violations = []
        for error in self._validators[schema.tool].iter_errors(candidate):
            violations.extend(_violations_from(error, schema))
        order = {name: index for index, name in enumerate(schema.field_names)}
        violations.sort(key=lambda v: (order.get(v.field, len(order)), v.field))

        failed = {v.field for v in violations}
        source = candidate if isinstance(candidate, dict) else {}
        normalized = {name: None if name in failed else source.get(name) for name in schema.field_names}
        if violations:
            raise SchemaViolationError(schema.tool, violations, normalized)
        return normalized


def _normalize(schema, raw):
    """Trim strings, blank to null, four-digit strings to integers; everything else is left for the validator."""
    if not isinstance(raw, dict):
        return raw
    candidate = dict(raw)
    for spec in schema.fields:
        value = candidate.get(spec.name)
        if isinstance(value, bool) or value is None:
            continue
        if isinstance(value, str):
            value = value.strip() or None
            if value and spec.value_kind == 'integer' and YEAR_PATTERN.match(value):
                value = int(value)
        elif spec.value_kind == 'integer' and isinstance(value, float) and value.is_integer():
            value = int(value)
        elif spec.value_kind == 'string' and isinstance(value, (int, float)):
            value = str(value)
        candidate[spec.name] = value
    return candidate


def _violations_from(error, schema):
    if error.validator == 'additionalProperties':
        known = set(schema.field_names)
        return [SchemaViolation(str(key), 'unknown field') for key in error.instance if key not in known]
    field = str(error.absolute_path[0]) if error.absolute_path else '$'
    return [SchemaViolation(field, error.message)]


@lru_cache(maxsize=8)
def load_registry(path=None):
    """Registry from a schema file; the bundled schemas when path is empty."""
    return ToolRegistry.from_json(path or BUNDLED_SCHEMA_PATH)


def default_registry():
    return load_registry(None)
