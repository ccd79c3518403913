"""
Deterministic text embedders
Signed feature hashing of word unigrams and within-word character
n-grams (64-bit FNV-1a), plus a lookup embedder over precomputed vectors.
"""
import json
import logging
import re
from dataclasses import dataclass, asdict
from functools import lru_cache
from pathlib import Path

import numpy as np

from .exceptions import DimensionMismatch, EmbeddingNotFound, InvalidEmbedderConfig, VectorFileError

logger = logging.getLogger(__name__)

FNV_OFFSET_BASIS = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
MASK_64 = 0xFFFFFFFFFFFFFFFF
SIGN_BIT = 1 << 63

EMBEDDER_KINDS = ('hashed_ngram', 'external')

WHITESPACE_RUN = re.compile(r'\s+')
WORD_PATTERN = re.compile(r'\w+')


@dataclass(frozen=True)
class EmbedderConfig:
    kind: str = 'hashed_ngram'
    dim: int = 512
    ngram_min: int = 3
    ngram_max: int = 5
    use_word_unigrams: bool = True
    hash_algorithm: str = 'fnv1a64'
    vectors_path: str = ''

    def __post_init__(self):
        if self.kind not in EMBEDDER_KINDS:
            raise InvalidEmbedderConfig(f'Unknown embedder kind: {self.kind!r}')
        if self.dim < 8:
            raise InvalidEmbedderConfig(f'dim must be at least 8, got {self.dim}')
        if self.ngram_min < 1 or self.ngram_min > self.ngram_max:
            raise InvalidEmbedderConfig(f'Invalid n-gram range {self.ngram_min}..{self.ngram_max}')
        if self.hash_algorithm != 'fnv1a64':
            raise InvalidEmbedderConfig(f'Unsupported hash algorithm: {self.hash_algorithm!r}')
        if self.kind == 'external' and not self.vectors_path:
            raise InvalidEmbedderConfig('external embedder needs vectors_path')

    @property
    def char_ngram_range(self):
        return (self.ngram_min, self.ngram_max)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        return cls(**data)


@dataclass(frozen=True, eq=False)
class Embedding:
    vector: np.ndarray
    norm: float

    @property
    def dim(self):
        return self.vector.shape[0]

    def is_zero(self):
        return not np.any(self.vector)

    def __eq__(self, other):
        if not isinstance(other, Embedding):
            return NotImplemented
        return np.array_equal(self.vector, other.vector)

    __hash__ = None


def normalize_text(text):
    """Lowercase, collapse whitespace runs, trim."""
    return WHITESPACE_RUN.sub(' ', text.lower()).strip()


@lru_cache(maxsize=65536)
def fnv1a64(feature):
    value = FNV_OFFSET_BASIS
    for byte in feature.encode('utf-8'):
        value ^= byte
        value = (value * FNV_PRIME) & MASK_64
    return value


def extract_features(config, text):
    """
    Features of a normalized text: 'w:<word>' for each word and
    'c:<gram>' for each character n-gram inside a word.
    """
    words = WORD_PATTERN.findall(normalize_text(text))
    features = []
    if config.use_word_unigrams:
        features.extend(f'w:{word}' for word in words)
    for word in words:
        for n in range(config.ngram_min, config.ngram_max + 1):
            for start in range(len(word) - n + 1):
                features.append(f'c:{word[start:start + n]}')
    return features


def _hashed_vector(config, text):
    vector = np.zeros(config.dim, dtype=np.float64)
    for feature in extract_features(config, text):
        hashed = fnv1a64(feature)
        index = hashed % config.dim
        vector[index] += -1.0 if hashed & SIGN_BIT else 1.0
    return vector


@lru_cache(maxsize=4)
def _load_vectors(path, dim):
    """Precomputed vectors keyed by normalized text."""
    table = {}
    with Path(path).open(encoding='utf-8') as handle:
        for line_number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                text = record['text']
                vector = np.asarray(record['vector'], dtype=np.float64)
            except (ValueError, TypeError, KeyError) as exc:
                raise VectorFileError(
                    f'{path}:{line_number}: expected {{"text", "vector"}} with numeric values ({exc})',
                    path=str(path),
                    line=line_number,
                )
            if not isinstance(text, str):
                raise VectorFileError(
                    f'{path}:{line_number}: "text" must be a string', path=str(path), line=line_number
                )
            if vector.shape != (dim,):
                raise DimensionMismatch(
                    f'{path}:{line_number}: vector has {vector.size} values, expected {dim}'
                )
            table[normalize_text(text)] = vector
    logger.info(f"Loaded {len(table)} precomputed vectors from {path}")
    return table


def _external_vector(config, text):
    table = _load_vectors(config.vectors_path, config.dim)
    key = normalize_text(text)
    if key not in table:
        raise EmbeddingNotFound(f'No precomputed vector for {key[:80]!r}', path=config.vectors_path)
    return table[key].copy()


def embed(config, text):
    """Embed one text as a unit vector, or the zero vector when it has no features."""
    if config.kind == 'external':
        vector = _external_vector(config, text)
    else:
        vector = _hashed_vector(config, text)
    norm = np.linalg.norm(vector)
    if norm > 0.0:
        vector = vector / norm
    return Embedding(vector=vector, norm=float(np.linalg.norm(vector)))


def embed_batch(config, texts):
    return [embed(config, text) for text in texts]


def embed_matrix(config, texts):
    """Stack embeddings row-wise into an (n, dim) array."""
    if not texts:
        return np.zeros((0, config.dim), dtype=np.float64)
    return np.vstack([embed(config, text).vector for text in texts])


def cosine(a, b):
    if a.dim != b.dim:
        raise DimensionMismatch(f'Cannot compare embeddings of dim {a.dim} and {b.dim}')
    norm_a = np.linalg.norm(a.vector)
    norm_b = np.linalg.norm(b.vector)
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    value = float(np.dot(a.vector, b.vector) / (norm_a * norm_b))
    return max(-1.0, min(1.0, value))
