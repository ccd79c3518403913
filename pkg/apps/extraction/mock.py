"""
Rule-based entity extraction over a bundled gazetteer
Deterministic test double for the extraction model. Every result is
shaped by the tool's schema, so it validates by construction.
"""
import json
import logging
import re
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

from apps.registry.services import ToolCategory, default_registry

logger = logging.getLogger(__name__)

BUNDLED_GAZETTEER_PATH = Path(__file__).resolve().parent / 'data' / 'gazetteer.json'

YEAR_PATTERN = re.compile(r'(?<![\d,.])(\d{4})(?![\d,])')
MIN_YEAR, MAX_YEAR = 1950, 2035
MILEAGE_PATTERN = re.compile(r'(?<![\w,])(\d{1,3}(?:,\d{3})+|\d+k?)\s*(?:miles|mi)\b', re.IGNORECASE)
MILE_SERVICE_PATTERN = re.compile(r'(?<![\w,])(\d{1,3}(?:,\d{3})+|\d+)-mile\b', re.IGNORECASE)
MONTH_SERVICE_PATTERN = re.compile(r'(?<![\w,])(\d+)(?:-month\b|\s+months\b)', re.IGNORECASE)
WARRANTY_PATTERN = re.compile(r'\b((?:lifetime|\d+-year|\d+-month)\s+warranty)\b', re.IGNORECASE)
PNC_PATTERN = re.compile(r'\bPNC\s+(\d[\w-]*)', re.IGNORECASE)


def _phrase_pattern(phrases, ignore_case=True):
    """Leftmost, then longest, whole-phrase match over a lexicon."""
    ordered = sorted(set(phrases), key=lambda phrase: (-len(phrase), phrase))
    alternation = '|'.join(re.escape(phrase) for phrase in ordered)
    flags = re.IGNORECASE if ignore_case else 0
    return re.compile(rf'(?<![\w-])(?:{alternation})(?![\w-])', flags)


class Lexicon:
    def __init__(self, phrases, ignore_case=True):
        self.canonical = {phrase.lower(): phrase for phrase in phrases}
        self.pattern = _phrase_pattern(phrases, ignore_case) if phrases else None

    def search(self, text, start=0):
        if self.pattern is None:
            return None
        return self.pattern.search(text, start)

    def find(self, text):
        """Canonical lexicon form of the first match, or None."""
        match = self.search(text)
        return self.canonical[match.group(0).lower()] if match else None


@dataclass
class Gazetteer:
    makes: Lexicon
    make_aliases: dict
    models: dict
    all_models: Lexicon
    components: Lexicon
    systems: Lexicon
    issues: Lexicon
    symptoms: Lexicon
    brands: Lexicon
    labor_actions: Lexicon
    procedure_cues: Lexicon
    specification_cues: Lexicon
    driving_patterns: dict


@lru_cache(maxsize=4)
def load_gazetteer(path=None):
    path = Path(path or BUNDLED_GAZETTEER_PATH)
    raw = json.loads(path.read_text(encoding='utf-8'))
    aliases = {}
    for make, names in raw['makes'].items():
        for name in names:
            aliases[name.lower()] = make
    models = {make: (Lexicon(names), Lexicon(names, ignore_case=False)) for make, names in raw['models'].items()}
    everything = [name for names in raw['models'].values() for name in names]
    cue_patterns = {pattern: Lexicon(cues) for pattern, cues in raw['driving_patterns'].items()}
    logger.debug(f"Loaded gazetteer from {path}: {len(raw['makes'])} makes, {len(everything)} models")
    return Gazetteer(
        makes=Lexicon([name for names in raw['makes'].values() for name in names]),
        make_aliases=aliases,
        models=models,
        all_models=Lexicon(everything, ignore_case=False),
        components=Lexicon(raw['components']),
        systems=Lexicon(raw['systems']),
        issues=Lexicon(raw['issues']),
        symptoms=Lexicon(raw['symptoms']),
        brands=Lexicon(raw['brands']),
        labor_actions=Lexicon(raw['labor_actions']),
        procedure_cues=Lexicon(raw['procedure_cues']),
        specification_cues=Lexicon(raw['specification_cues']),
        driving_patterns=cue_patterns,
    )


def find_year(query):
    for match in YEAR_PATTERN.finditer(query):
        year = int(match.group(1))
        if MIN_YEAR <= year <= MAX_YEAR:
            return year
    return None


def find_vehicle(query, gazetteer):
    """
    (make, model) as written in the query. The model is taken right after
    the make when it is a known model of that make, else anywhere in the
    query; with no make, any capitalized known model counts.
    """
    make_match = gazetteer.makes.search(query)
    if not make_match:
        model_match = gazetteer.all_models.search(query)
        return None, (model_match.group(0) if model_match else None)

    make = make_match.group(0)
    canonical = gazetteer.make_aliases[make.lower()]
    if canonical not in gazetteer.models:
        return make, None
    loose, strict = gazetteer.models[canonical]
    rest = query[make_match.end():]
    adjacent = loose.pattern.match(rest.lstrip()) if loose.pattern else None
    if adjacent:
        return make, adjacent.group(0)
    anywhere = strict.search(query)
    return make, (anywhere.group(0) if anywhere else None)


def find_mileage(query):
    match = MILEAGE_PATTERN.search(query)
    return f'{match.group(1)} miles' if match else None


def find_query_type(query, gazetteer):
    lowered = query.lower()
    if 'how to' in lowered:
        return 'procedure'
    if 'what is' in lowered:
        return 'specification'
    if gazetteer.procedure_cues.find(query):
        return 'procedure'
    if gazetteer.specification_cues.find(query):
        return 'specification'
    return None


def find_service(query):
    """(service_name, service_type, service_unit)"""
    match = MILE_SERVICE_PATTERN.search(query)
    if match:
        return f'{match.group(1)}-mile service', 'mileage', 'miles'
    match = MONTH_SERVICE_PATTERN.search(query)
    if match:
        return f'{match.group(1)}-month service', 'time', 'months'
    if 'oil change' in query.lower():
        return 'oil change', None, None
    return None, None, None


def find_driving_pattern(query, gazetteer):
    hits = []
    for pattern, cues in gazetteer.driving_patterns.items():
        match = cues.search(query)
        if match:
            hits.append((match.start(), pattern))
    return min(hits)[1] if hits else None


def mock_extract(query, tool, registry=None, gazetteer=None):
    """Fill the tool's schema from the query; unmatched fields stay null."""
    registry = registry or default_registry()
    gazetteer = gazetteer or load_gazetteer()
    schema = registry.schema_for(tool)
    if tool == ToolCategory.OTHERS or not schema.fields:
        return {}

    make, model = find_vehicle(query, gazetteer)
    service_name, service_type, service_unit = find_service(query)
    labor = gazetteer.labor_actions.search(query)
    warranty = WARRANTY_PATTERN.search(query)
    pnc = PNC_PATTERN.search(query)

    if tool == ToolCategory.SMART_INSIGHTS:
        issue = gazetteer.symptoms.find(query) or gazetteer.issues.find(query)
    else:
        issue = gazetteer.issues.find(query)

    found = {
        'make': make,
        'model': model,
        'year': find_year(query),
        'mileage': find_mileage(query),
        'issue': issue,
        'query_type': find_query_type(query, gazetteer),
        'component': gazetteer.components.find(query),
        'system': gazetteer.systems.find(query),
        'brand': gazetteer.brands.find(query),
        'warranty': warranty.group(1).lower() if warranty else None,
        'pnc': pnc.group(1) if pnc else None,
        'labor_action': labor.group(0).lower() if labor else None,
        'service_name': service_name,
        'service_type': service_type,
        'service_unit': service_unit,
        'driving_pattern': find_driving_pattern(query, gazetteer),
    }
    return {name: found.get(name) for name in schema.field_names}
