import json

import numpy as np
import pytest

from apps.embed.exceptions import DimensionMismatch, EmbeddingNotFound, InvalidEmbedderConfig, VectorFileError
from apps.embed.services import (
    EmbedderConfig,
    Embedding,
    cosine,
    embed,
    embed_batch,
    embed_matrix,
    extract_features,
    fnv1a64,
)

CONFIG = EmbedderConfig()


def _reference_fnv(text):
    value = 0xCBF29CE484222325
    for byte in text.encode('utf-8'):
        value = ((value ^ byte) * 0x100000001B3) % 2 ** 64
    return value


def _reference_vector(config, text):
    vector = np.zeros(config.dim)
    for feature in extract_features(config, text):
        hashed = _reference_fnv(feature)
        vector[hashed % config.dim] += -1.0 if hashed >> 63 else 1.0
    return vector / np.linalg.norm(vector)


def test_fnv1a64_matches_published_vectors():
    assert fnv1a64('') == 0xCBF29CE484222325
    assert fnv1a64('a') == 0xAF63DC4C8601EC8C
    assert fnv1a64('foobar') == 0x85944171F73967E8


def test_empty_text_embeds_to_zero_vector():
    embedding = embed(CONFIG, '')
    assert embedding.dim == 512
    assert embedding.is_zero()
    assert embedding.norm == 0.0


def test_whitespace_and_case_do_not_change_the_embedding():
    assert embed(CONFIG, 'Brake Pads') == embed(CONFIG, '  brake   pads ')


def test_features_cover_words_and_in_word_ngrams():
    features = extract_features(EmbedderConfig(ngram_min=3, ngram_max=3), 'Spark plug')
    assert features == ['w:spark', 'w:plug', 'c:spa', 'c:par', 'c:ark', 'c:plu', 'c:lug']
    no_words = extract_features(EmbedderConfig(use_word_unigrams=False, ngram_min=4, ngram_max=4), 'plug')
    assert no_words == ['c:plug']


def test_embedding_matches_hand_computed_hash_positions():
    embedding = embed(CONFIG, 'spark plug fouling')
    assert abs(np.linalg.norm(embedding.vector) - 1.0) < 1e-6
    np.testing.assert_allclose(embedding.vector, _reference_vector(CONFIG, 'spark plug fouling'))
    assert np.array_equal(embedding.vector, embed(CONFIG, 'spark plug fouling').vector)


def test_batch_equals_serial_embedding():
    texts = [f'Any recalls on a {2000 + i} Honda Civic?' for i in range(50)]
    assert embed_batch(CONFIG, []) == []
    first, second = embed_batch(CONFIG, ['a', 'a'])
    assert first == second
    assert embed_batch(CONFIG, texts) == [embed(CONFIG, text) for text in texts]
    assert embed_matrix(CONFIG, texts).shape == (50, 512)
    assert embed_matrix(CONFIG, []).shape == (0, 512)


def test_distinct_strings_do_not_collide():
    # only one token varies, so no two strings are word permutations of each other
    corpus = [f'vin{i:04d}x part lookup' for i in range(1000)]
    vectors = {embed(CONFIG, text).vector.tobytes() for text in corpus}
    assert len(vectors) == len(corpus)


def test_cosine_conventions():
    a = embed(CONFIG, 'oil change interval')
    b = embed(CONFIG, 'brake rotor torque')
    zero = embed(CONFIG, '')
    assert cosine(a, a) == pytest.approx(1.0, abs=1e-9)
    assert cosine(a, zero) == 0.0
    assert cosine(a, b) == cosine(b, a)
    expected = np.dot(a.vector, b.vector) / (np.linalg.norm(a.vector) * np.linalg.norm(b.vector))
    assert cosine(a, b) == pytest.approx(expected, abs=1e-12)


def test_cosine_rejects_mismatched_dimensions():
    small = Embedding(vector=np.ones(8) / np.sqrt(8), norm=1.0)
    with pytest.raises(DimensionMismatch):
        cosine(small, embed(CONFIG, 'oil'))


@pytest.mark.parametrize('kwargs', [
    {'dim': 4},
    {'ngram_min': 4, 'ngram_max': 3},
    {'ngram_min': 0},
    {'kind': 'bert'},
    {'hash_algorithm': 'md5'},
    {'kind': 'external'},
])
def test_invalid_configs_are_rejected(kwargs):
    with pytest.raises(InvalidEmbedderConfig):
        EmbedderConfig(**kwargs)


def test_external_vectors_are_looked_up_by_normalized_text(tmp_path):
    path = tmp_path / 'vectors.jsonl'
    rows = [
        {'text': 'Oil  Change', 'vector': [3.0, 4.0] + [0.0] * 6},
        {'text': 'brake pads', 'vector': [0.0] * 7 + [2.0]},
    ]
    path.write_text('\n'.join(json.dumps(row) for row in rows) + '\n', encoding='utf-8')
    config = EmbedderConfig(kind='external', dim=8, vectors_path=str(path))

    embedding = embed(config, 'oil change')
    np.testing.assert_allclose(embedding.vector[:2], [0.6, 0.8])
    with pytest.raises(EmbeddingNotFound):
        embed(config, 'spark plugs')


def test_external_vectors_with_wrong_width_are_rejected(tmp_path):
    path = tmp_path / 'vectors.jsonl'
    path.write_text(json.dumps({'text': 'oil', 'vector': [1.0, 2.0]}) + '\n', encoding='utf-8')
    with pytest.raises(DimensionMismatch):
        embed(EmbedderConfig(kind='external', dim=8, vectors_path=str(path)), 'oil')


@pytest.mark.parametrize('line', [
    '{"text": "oil", "vector": [1.0, 2.0',
    '{"vector": [1.0, 0, 0, 0, 0, 0, 0, 0]}',
    '{"text": "oil"}',
    '{"text": "oil", "vector": ["a", 0, 0, 0, 0, 0, 0, 0]}',
    '{"text": 7, "vector": [1.0, 0, 0, 0, 0, 0, 0, 0]}',
    '["oil", [1.0]]',
])
def test_malformed_vector_lines_name_the_file_and_line(tmp_path, line):
    path = tmp_path / 'vectors.jsonl'
    path.write_text(json.dumps({'text': 'brake', 'vector': [1.0] + [0.0] * 7}) + '\n' + line + '\n', encoding='utf-8')
    with pytest.raises(VectorFileError) as excinfo:
        embed(EmbedderConfig(kind='external', dim=8, vectors_path=str(path)), 'brake')
    assert excinfo.value.details == {'path': str(path), 'line': 2}
