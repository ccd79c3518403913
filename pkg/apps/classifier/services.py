"""
Few-shot tool classifier
Contrastive pair generation, contrastive training of a linear projection
over frozen embeddings, a multinomial logistic head, and prediction.
"""
import logging
import math
from dataclasses import dataclass, field, asdict

import numpy as np

from apps.embed.services import EmbedderConfig, embed, embed_matrix, normalize_text
from apps.registry.services import ToolCategory, parse_tool

from .exceptions import InsufficientClassData, InvalidTrainConfig, NonFiniteLoss

logger = logging.getLogger(__name__)

ARTIFACT_VERSION = 1


@dataclass(frozen=True)
class LabeledExample:
    query: str
    tool: ToolCategory

    def __post_init__(self):
        if not normalize_text(self.query):
            raise ValueError('LabeledExample query must not be empty')
        object.__setattr__(self, 'tool', parse_tool(self.tool))


@dataclass(frozen=True)
class ContrastivePair:
    anchor_index: int
    other_index: int
    label: float


@dataclass(frozen=True)
class TrainConfig:
    iterations: int = 30
    learning_rate: float = 2e-5
    warmup_ratio: float = 0.1
    batch_size: int = 16
    epochs: int = 1
    projection_dim: int = 256
    head_iterations: int = 500
    head_learning_rate: float = 0.1
    seed: int = 42

    def __post_init__(self):
        for name in ('iterations', 'batch_size', 'epochs', 'projection_dim', 'head_iterations'):
            if getattr(self, name) < 1:
                raise InvalidTrainConfig(f'{name} must be positive, got {getattr(self, name)}')
        if self.learning_rate <= 0 or self.head_learning_rate <= 0:
            raise InvalidTrainConfig('learning rates must be positive')
        if not 0.0 <= self.warmup_ratio <= 1.0:
            raise InvalidTrainConfig(f'warmup_ratio must be within [0, 1], got {self.warmup_ratio}')
        if not 0 <= self.seed < 2 ** 64:
            raise InvalidTrainConfig(f'seed must be a non-negative 64-bit integer, got {self.seed}')

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        return cls(**data)


@dataclass(frozen=True, eq=False)
class ClassifierModel:
    embedder: EmbedderConfig
    projection: np.ndarray
    head_weights: np.ndarray
    head_bias: np.ndarray
    labels: tuple
    train_config: TrainConfig = field(default_factory=TrainConfig)
    artifact_version: int = ARTIFACT_VERSION

    @property
    def num_classes(self):
        return len(self.labels)


@dataclass(frozen=True, eq=False)
class Prediction:
    tool: ToolCategory
    probabilities: np.ndarray
    labels: tuple

    def probability_map(self):
        return {str(label): float(p) for label, p in zip(self.labels, self.probabilities)}


def _class_members(labels):
    members = {}
    for index, label in enumerate(labels):
        members.setdefault(label, []).append(index)
    return {label: np.asarray(indices) for label, indices in members.items()}


def _check_class_data(labels):
    members = _class_members(labels)
    if len(members) < 2:
        raise InsufficientClassData(
            f'Need at least 2 classes, got {len(members)}',
            classes=sorted(str(label) for label in members),
        )
    thin = sorted(str(label) for label, indices in members.items() if len(indices) < 2)
    if thin:
        raise InsufficientClassData(f'Classes with fewer than 2 examples: {", ".join(thin)}', classes=thin)
    return members


def generate_pairs(examples, iterations, seed):
    """
    For every iteration and every example emit one positive pair (same
    class, never itself) and one negative pair (other class), sampled
    uniformly; 2 * iterations * len(examples) pairs in total.
    """
    labels = [example.tool for example in examples]
    members = _check_class_data(labels)
    n = len(labels)
    everyone = np.arange(n)
    positives = [members[labels[i]][members[labels[i]] != i] for i in range(n)]
    negatives = {label: everyone[np.isin(everyone, indices, invert=True)] for label, indices in members.items()}

    rng = np.random.default_rng([seed, 0])
    pairs = []
    for _ in range(iterations):
        for i in range(n):
            same = positives[i]
            other = negatives[labels[i]]
            j = int(same[rng.integers(len(same))])
            k = int(other[rng.integers(len(other))])
            pairs.append(ContrastivePair(i, j, 1.0))
            pairs.append(ContrastivePair(i, k, 0.0))
    return pairs


def pair_arrays(pairs):
    anchors = np.fromiter((p.anchor_index for p in pairs), dtype=np.int64, count=len(pairs))
    others = np.fromiter((p.other_index for p in pairs), dtype=np.int64, count=len(pairs))
    targets = np.fromiter((p.label for p in pairs), dtype=np.float64, count=len(pairs))
    return anchors, others, targets


def _cosine_loss(projection, anchor_vectors, other_vectors, targets):
    """Mean squared error between projected cosine and target, with its gradient."""
    batch = anchor_vectors.shape[0]
    u = anchor_vectors @ projection.T
    v = other_vectors @ projection.T
    norm_u = np.linalg.norm(u, axis=1)
    norm_v = np.linalg.norm(v, axis=1)
    valid = (norm_u > 0.0) & (norm_v > 0.0)
    safe_u = np.where(valid, norm_u, 1.0)
    safe_v = np.where(valid, norm_v, 1.0)

    cos = np.where(valid, np.sum(u * v, axis=1) / (safe_u * safe_v), 0.0)
    residual = cos - targets
    loss = float(np.mean(residual ** 2))

    # d(cos)/du = v / (|u||v|) - cos * u / |u|^2, symmetric for v
    coef = np.where(valid, 2.0 * residual / batch, 0.0)
    inv = 1.0 / (safe_u * safe_v)
    d_u = v * inv[:, None] - u * (cos / safe_u ** 2)[:, None]
    d_v = u * inv[:, None] - v * (cos / safe_v ** 2)[:, None]
    grad = (coef[:, None] * d_u).T @ anchor_vectors + (coef[:, None] * d_v).T @ other_vectors
    return loss, grad


def contrastive_loss(projection, pair_batch, embeddings):
    """
    Loss and gradient w.r.t. the projection for a batch of ContrastivePair
    over an (n, dim) embedding matrix.
    """
    anchors, others, targets = pair_arrays(pair_batch)
    return _cosine_loss(projection, embeddings[anchors], embeddings[others], targets)


def _softmax(logits):
    shifted = logits - np.max(logits, axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / np.sum(exp, axis=-1, keepdims=True)


def _train_projection(embeddings, pairs, config, rng):
    dim = embeddings.shape[1]
    bound = 1.0 / math.sqrt(dim)
    projection = rng.uniform(-bound, bound, size=(config.projection_dim, dim))

    anchors, others, targets = pair_arrays(pairs)
    steps_per_epoch = math.ceil(len(pairs) / config.batch_size)
    total_steps = config.epochs * steps_per_epoch
    warmup_steps = math.ceil(config.warmup_ratio * total_steps)

    step = 0
    for epoch in range(config.epochs):
        order = rng.permutation(len(pairs))
        epoch_loss = 0.0
        for start in range(0, len(pairs), config.batch_size):
            batch = order[start:start + config.batch_size]
            loss, grad = _cosine_loss(
                projection, embeddings[anchors[batch]], embeddings[others[batch]], targets[batch]
            )
            if not math.isfinite(loss) or not np.all(np.isfinite(grad)):
                raise NonFiniteLoss('projection training', step)
            if step < warmup_steps:
                rate = config.learning_rate * (step + 1) / warmup_steps
            else:
                rate = config.learning_rate
            projection -= rate * grad
            epoch_loss += loss
            step += 1
        logger.info(f"Projection epoch {epoch + 1}/{config.epochs}: mean loss {epoch_loss / steps_per_epoch:.6f}")
    return projection


def _train_head(features, targets, num_classes, config):
    """
    Full-batch softmax regression on per-dimension standardized features;
    the scaling is folded back so the head applies to raw projected
    features. The step halves whenever the loss goes up.
    """
    n, width = features.shape
    center = features.mean(axis=0)
    scale = features.std(axis=0)
    scale[scale == 0.0] = 1.0
    standardized = (features - center) / scale

    one_hot = np.zeros((n, num_classes))
    one_hot[np.arange(n), targets] = 1.0
    weights = np.zeros((num_classes, width))
    bias = np.zeros(num_classes)
    rate = config.head_learning_rate
    previous = math.inf

    for iteration in range(config.head_iterations):
        probs = _softmax(standardized @ weights.T + bias)
        loss = -float(np.sum(one_hot * np.log(np.clip(probs, 1e-300, None)))) / n
        if not math.isfinite(loss):
            raise NonFiniteLoss('head training', iteration)
        if loss > previous:
            rate *= 0.5
        previous = loss
        error = probs - one_hot
        weights -= rate * (error.T @ standardized) / n
        bias -= rate * np.sum(error, axis=0) / n
    logger.info(f"Head trained for {config.head_iterations} iterations, final loss {loss:.6f}")

    raw_weights = weights / scale
    return raw_weights, bias - raw_weights @ center


def train(examples, config=None, embedder=None):
    """
    Phase 1 adapts a linear projection with the pair loss; phase 2 freezes
    it and fits a softmax head by full-batch gradient descent.
    """
    config = config or TrainConfig()
    embedder = embedder or EmbedderConfig()
    pairs = generate_pairs(examples, config.iterations, config.seed)

    labels = tuple(sorted({example.tool for example in examples}, key=lambda tool: tool.position))
    label_index = {label: index for index, label in enumerate(labels)}
    targets = np.asarray([label_index[example.tool] for example in examples])

    logger.info(
        f"Training classifier on {len(examples)} examples, {len(labels)} classes, {len(pairs)} pairs"
    )
    embeddings = embed_matrix(embedder, [example.query for example in examples])
    rng = np.random.default_rng([config.seed, 1])
    projection = _train_projection(embeddings, pairs, config, rng)
    weights, bias = _train_head(embeddings @ projection.T, targets, len(labels), config)

    return ClassifierModel(
        embedder=embedder,
        projection=projection,
        head_weights=weights,
        head_bias=bias,
        labels=labels,
        train_config=config,
    )


def predict(model, query):
    """Softmax over the head; argmax ties go to the earlier label in registry order."""
    vector = embed(model.embedder, query).vector
    logits = model.head_weights @ (model.projection @ vector) + model.head_bias
    probabilities = _softmax(logits)
    return Prediction(
        tool=model.labels[int(np.argmax(probabilities))],
        probabilities=probabilities,
        labels=model.labels,
    )


def accuracy(model, examples):
    if not examples:
        return 0.0
    hits = sum(1 for example in examples if predict(model, example.query).tool == example.tool)
    return hits / len(examples)
