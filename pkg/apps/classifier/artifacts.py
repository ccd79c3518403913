"""
Classifier artifact persistence
Versioned JSON: {artifact_version, embedder, labels, projection,
head_weights, head_bias, train_config}; matrices stored row-major.
"""
import json
import logging
from pathlib import Path

import numpy as np

from apps.embed.exceptions import InvalidEmbedderConfig
from apps.embed.services import EmbedderConfig
from apps.registry.exceptions import UnknownToolCategory
from apps.registry.services import parse_tool

from .exceptions import InvalidTrainConfig, MalformedArtifact, VersionMismatch
from .services import ARTIFACT_VERSION, ClassifierModel, TrainConfig

logger = logging.getLogger(__name__)


def model_to_dict(model):
    return {
        'artifact_version': model.artifact_version,
        'embedder': model.embedder.to_dict(),
        'labels': [str(label) for label in model.labels],
        'projection': model.projection.tolist(),
        'head_weights': model.head_weights.tolist(),
        'head_bias': model.head_bias.tolist(),
        'train_config': model.train_config.to_dict(),
    }


def dumps_model(model):
    return json.dumps(model_to_dict(model), separators=(',', ':')) + '\n'


def save_model(model, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_model(model), encoding='utf-8')
    logger.info(f"Saved classifier artifact to {path}")
    return path


def _matrix(data, key, shape):
    try:
        matrix = np.asarray(data[key], dtype=np.float64)
    except KeyError:
        raise MalformedArtifact(key, 'missing')
    except (TypeError, ValueError):
        raise MalformedArtifact(key, 'not a numeric array')
    if matrix.shape != shape:
        raise MalformedArtifact(key, f'expected shape {shape}, got {matrix.shape}')
    if not np.all(np.isfinite(matrix)):
        raise MalformedArtifact(key, 'contains non-finite values')
    return matrix


def model_from_dict(data):
    if not isinstance(data, dict):
        raise MalformedArtifact('$', 'artifact must be a JSON object')
    version = data.get('artifact_version')
    if version is None:
        raise MalformedArtifact('artifact_version', 'missing')
    if version != ARTIFACT_VERSION:
        raise VersionMismatch(
            f'Artifact version {version} is not supported (expected {ARTIFACT_VERSION})',
            found=version,
            expected=ARTIFACT_VERSION,
        )

    try:
        embedder = EmbedderConfig.from_dict(data['embedder'])
    except KeyError:
        raise MalformedArtifact('embedder', 'missing')
    except (TypeError, InvalidEmbedderConfig) as exc:
        raise MalformedArtifact('embedder', str(exc))

    try:
        train_config = TrainConfig.from_dict(data['train_config'])
    except KeyError:
        raise MalformedArtifact('train_config', 'missing')
    except (TypeError, InvalidTrainConfig) as exc:
        raise MalformedArtifact('train_config', str(exc))

    raw_labels = data.get('labels')
    if not isinstance(raw_labels, list) or not raw_labels:
        raise MalformedArtifact('labels', 'expected a non-empty list')
    labels = []
    for index, value in enumerate(raw_labels):
        try:
            labels.append(parse_tool(value))
        except UnknownToolCategory:
            raise MalformedArtifact(f'labels[{index}]', f'unknown tool category {value!r}')

    num_classes = len(labels)
    projection = _matrix(data, 'projection', (train_config.projection_dim, embedder.dim))
    head_weights = _matrix(data, 'head_weights', (num_classes, train_config.projection_dim))
    head_bias = _matrix(data, 'head_bias', (num_classes,))

    return ClassifierModel(
        embedder=embedder,
        projection=projection,
        head_weights=head_weights,
        head_bias=head_bias,
        labels=tuple(labels),
        train_config=train_config,
        artifact_version=version,
    )


def load_model(path):
    path = Path(path)
    text = path.read_text(encoding='utf-8')
    try:
        data = json.loads(text)
    except ValueError as exc:
        raise MalformedArtifact('$', f'invalid JSON ({exc})')
    model = model_from_dict(data)
    logger.info(f"Loaded classifier artifact from {path} ({model.num_classes} labels)")
    return model
