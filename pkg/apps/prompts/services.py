"""
Prompt pool
Per-tool few-shot extraction prompts plus the composite single-step
prompt, loaded from editable .prompt files.

File format: a JSON front-matter object {tool, fewshot: [{query, output}]},
a line holding only '---', then the body. The body holds '{{query}}'
exactly once and may hold '{{examples}}', which is filled with the
rendered few-shot block when the file is loaded.
"""
import json
import logging
import re
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

from apps.registry.exceptions import SchemaViolationError, UnknownToolCategory
from apps.registry.services import ToolCategory, default_registry, parse_tool

from .exceptions import MissingTemplate, NoPromptForOthers, PromptFileError

logger = logging.getLogger(__name__)

BUNDLED_POOL_DIR = Path(__file__).resolve().parent / 'pool'
COMPOSITE_FILE = '_composite.prompt'

QUERY_PLACEHOLDER = '{{query}}'
FRONT_MATTER_SEPARATOR = '---'
MARKER_PATTERN = re.compile(r'\{\{(query|examples|tools)\}\}')


@dataclass(frozen=True)
class FewShotExample:
    query: str
    output: dict

    def render(self):
        return f'Query: {self.query}\nJSON: {json.dumps(self.output, ensure_ascii=False)}'


@dataclass(frozen=True)
class PromptTemplate:
    tool: ToolCategory
    text: str
    fewshot: tuple

    @property
    def placeholder(self):
        return QUERY_PLACEHOLDER


@dataclass(frozen=True)
class PromptPool:
    templates: dict
    composite_header: str
    composite_fewshot: tuple = ()
    directory: str = ''

    def tools(self):
        return [tool for tool in ToolCategory if tool in self.templates]


def substitute(text, values):
    """
    Replace {{name}} markers in one pass; inserted values are never
    re-scanned, so braces inside a query stay verbatim.
    """
    def replace(match):
        name = match.group(1)
        return values[name] if name in values else match.group(0)

    return MARKER_PATTERN.sub(replace, text)


def token_count(text):
    return len(text.split())


def _split_front_matter(path, raw):
    lines = raw.splitlines(keepends=True)
    for index, line in enumerate(lines):
        if line.strip() == FRONT_MATTER_SEPARATOR:
            head = ''.join(lines[:index])
            body = ''.join(lines[index + 1:])
            try:
                meta = json.loads(head)
            except ValueError as exc:
                raise PromptFileError(f'{path}: front matter is not valid JSON ({exc})', path=str(path))
            if not isinstance(meta, dict):
                raise PromptFileError(f'{path}: front matter must be a JSON object', path=str(path))
            return meta, body.rstrip('\n') + '\n'
    raise PromptFileError(f'{path}: missing "{FRONT_MATTER_SEPARATOR}" separator', path=str(path))


def _read_fewshot(path, meta, tool, registry):
    examples = []
    for index, entry in enumerate(meta.get('fewshot') or []):
        if not isinstance(entry, dict) or not entry.get('query') or not isinstance(entry.get('output'), dict):
            raise PromptFileError(f'{path}: fewshot[{index}] needs a query and an output object', path=str(path))
        output = entry['output']
        if tool is not None:
            try:
                output = registry.validate_entities(tool, output)
            except SchemaViolationError as exc:
                raise PromptFileError(f'{path}: fewshot[{index}] {exc.message}', path=str(path))
        examples.append(FewShotExample(query=entry['query'], output=output))
    return tuple(examples)


def load_template(path, registry=None):
    """Parse one <tool>.prompt file into a PromptTemplate."""
    registry = registry or default_registry()
    path = Path(path)
    meta, body = _split_front_matter(path, path.read_text(encoding='utf-8'))
    try:
        tool = parse_tool(meta.get('tool'))
    except UnknownToolCategory as exc:
        raise PromptFileError(f'{path}: {exc.message}', path=str(path))
    if tool == ToolCategory.OTHERS:
        raise PromptFileError(f'{path}: others has no extraction prompt', path=str(path))
    if body.count(QUERY_PLACEHOLDER) != 1:
        raise PromptFileError(f'{path}: body must contain {QUERY_PLACEHOLDER} exactly once', path=str(path))

    fewshot = _read_fewshot(path, meta, tool, registry)
    block = '\n\n'.join(example.render() for example in fewshot)
    text = substitute(body, {'examples': block})
    return PromptTemplate(tool=tool, text=text, fewshot=fewshot)


def load_prompt_pool(directory=None, registry=None):
    """
    Load every <tool>.prompt in a directory plus the composite header.
    Missing tool files are allowed here; select() reports them.
    """
    registry = registry or default_registry()
    directory = Path(directory or BUNDLED_POOL_DIR)
    if not directory.is_dir():
        raise PromptFileError(f'Prompt pool directory not found: {directory}', path=str(directory))

    templates = {}
    for tool in registry.entity_tools():
        path = directory / f'{tool.value}.prompt'
        if path.exists():
            templates[tool] = load_template(path, registry)

    composite_path = directory / COMPOSITE_FILE
    if not composite_path.exists():
        raise PromptFileError(f'Prompt pool {directory} has no {COMPOSITE_FILE}', path=str(composite_path))
    meta, header = _split_front_matter(composite_path, composite_path.read_text(encoding='utf-8'))
    if header.count(QUERY_PLACEHOLDER) != 1:
        raise PromptFileError(f'{composite_path}: body must contain {QUERY_PLACEHOLDER} exactly once', path=str(composite_path))
    composite_fewshot = _read_fewshot(composite_path, meta, None, registry)

    missing = [str(tool) for tool in registry.entity_tools() if tool not in templates]
    if missing:
        logger.warning(f"Prompt pool {directory} has no template for: {', '.join(missing)}")
    logger.info(f"Loaded prompt pool from {directory} ({len(templates)} templates)")
    return PromptPool(
        templates=templates,
        composite_header=header,
        composite_fewshot=composite_fewshot,
        directory=str(directory),
    )


@lru_cache(maxsize=1)
def default_prompt_pool():
    return load_prompt_pool()


def select(pool, tool):
    tool = parse_tool(tool)
    if tool == ToolCategory.OTHERS:
        raise NoPromptForOthers('Queries routed to others skip extraction')
    try:
        return pool.templates[tool]
    except KeyError:
        raise MissingTemplate(f'No prompt template for {tool} in {pool.directory or "the pool"}', tool=str(tool))


def render(template, query):
    """Insert the raw query at the template's single placeholder."""
    return substitute(template.text, {'query': query})


def _tools_block(registry):
    lines = []
    for tool in registry.all_tools():
        lines.append(f'- {tool.value}: {tool.description}')
        fields = registry.schema_for(tool).fields
        if not fields:
            lines.append('  parameters: none')
        for spec in fields:
            lines.append(f'  - {spec.name} ({spec.value_kind}): {spec.description}')
    return '\n'.join(lines)


def _composite_examples(pool, registry):
    examples = []
    for tool in registry.all_tools():
        if tool in pool.templates and pool.templates[tool].fewshot:
            example = pool.templates[tool].fewshot[0]
            output = {'tool_category': tool.value, 'entities': example.output}
            examples.append(FewShotExample(query=example.query, output=output))
    examples.extend(pool.composite_fewshot)
    return '\n\n'.join(example.render() for example in examples)


def composite_prompt(pool, registry, query):
    """
    Single-step prompt: every tool with its description and parameters,
    one example per tool, then the query.
    """
    return substitute(pool.composite_header, {
        'tools': _tools_block(registry),
        'examples': _composite_examples(pool, registry),
        'query': query,
    })
