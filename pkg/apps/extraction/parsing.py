"""
Structured-output parsing for model completions
Repairs are limited to code-fence stripping, dropping prose around the
object, and picking the first balanced top-level {...} block.
"""
import json
import logging
import re
from dataclasses import dataclass

from .exceptions import NoJsonFound, ParseError, UnbalancedBraces

logger = logging.getLogger(__name__)

CLEAN = 'clean'
REPAIRED = 'repaired'
FAILED = 'failed'

FENCE_OPEN = re.compile(r'```[A-Za-z]*[ \t]*\n?')


@dataclass(frozen=True)
class ParsedObject:
    value: dict
    status: str


def _byte_offset(text, char_index):
    return len(text[:char_index].encode('utf-8'))


def _strip_fence(text):
    """
    Return (content, char offset of content in text, stripped?). Only a
    fence opening before the first brace counts; the closing fence is
    left for the brace scan to treat as trailing prose.
    """
    match = FENCE_OPEN.search(text)
    first_brace = text.find('{')
    if not match or (0 <= first_brace < match.start()):
        return text, 0, False
    return text[match.end():], match.end(), True


def _balanced_end(text, start):
    """Index just past the brace closing the object opened at start, or None."""
    depth = 0
    in_string = False
    escaped = False
    for index in range(start, len(text)):
        char = text[index]
        if in_string:
            if escaped:
                escaped = False
            elif char == '\\':
                escaped = True
            elif char == '"':
                in_string = False
            continue
        if char == '"':
            in_string = True
        elif char == '{':
            depth += 1
        elif char == '}':
            depth -= 1
            if depth == 0:
                return index + 1
    return None


def parse_structured(text):
    """
    Parse the first JSON object in a completion.

    Raises NoJsonFound, UnbalancedBraces, or ParseError (with the byte
    offset of the failure in the original text).
    """
    text = text or ''
    content, base, repaired = _strip_fence(text)

    start = content.find('{')
    if start < 0:
        raise NoJsonFound(f'No JSON object in completion: {text[:80]!r}')
    end = _balanced_end(content, start)
    if end is None:
        raise UnbalancedBraces(
            'Completion opens a JSON object that never closes',
            offset=_byte_offset(text, base + start),
        )

    if content[:start].strip() or content[end:].strip():
        repaired = True
    block = content[start:end]
    try:
        value = json.loads(block)
    except json.JSONDecodeError as exc:
        offset = _byte_offset(text, base + start + exc.pos)
        raise ParseError(f'Invalid JSON at byte {offset}: {exc.msg}', offset=offset)

    status = REPAIRED if repaired else CLEAN
    if repaired:
        logger.debug(f"Repaired completion into JSON object ({len(block)} chars)")
    return ParsedObject(value=value, status=status)
