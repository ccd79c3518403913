"""
Train the tool classifier on a JSONL dataset and write the artifact.

Usage:
    python manage.py train
    python manage.py train --data train.jsonl --out model.json --seed 7
    python manage.py train --batch-size 8 --epochs 2
"""
from django.conf import settings

from apps.classifier.artifacts import save_model
from apps.classifier.services import TrainConfig, accuracy, train
from apps.datasets.services import BUNDLE_DIR, read_labeled_examples
from apps.embed.services import EmbedderConfig
from query_router.commands import RouterCommand

TRAIN_FLAGS = (
    ('iterations', int, 'Pair-generation rounds per example (R)'),
    ('learning_rate', float, 'Peak learning rate of the projection phase'),
    ('warmup_ratio', float, 'Share of steps spent in linear warmup'),
    ('batch_size', int, 'Pairs per projection update'),
    ('epochs', int, 'Passes over the pair set'),
    ('projection_dim', int, 'Output size of the learned projection'),
    ('head_iterations', int, 'Gradient steps for the softmax head'),
    ('head_learning_rate', float, 'Learning rate of the softmax head'),
    ('seed', int, 'Seed for pair sampling and initialization'),
)


class Command(RouterCommand):
    help = 'Train the tool classifier and save its JSON artifact'

    def add_arguments(self, parser):
        parser.add_argument('--data', default=str(BUNDLE_DIR / 'train.jsonl'), help='Training JSONL')
        parser.add_argument('--out', help='Artifact path (defaults to ROUTER_MODEL_PATH)')
        for name, kind, text in TRAIN_FLAGS:
            parser.add_argument(f'--{name.replace("_", "-")}', dest=name, type=kind, help=text)
        parser.add_argument('--dim', type=int, help='Hashed embedding width')
        parser.add_argument('--ngram-min', dest='ngram_min', type=int)
        parser.add_argument('--ngram-max', dest='ngram_max', type=int)
        parser.add_argument('--no-word-unigrams', dest='use_word_unigrams', action='store_false', default=None)
        parser.add_argument('--vectors', dest='vectors_path', help='Precomputed query vectors (external embedder)')

    def handle(self, *args, **options):
        config = TrainConfig(**{
            name: options[name] for name, _, _ in TRAIN_FLAGS if options.get(name) is not None
        })
        embedder_options = {
            name: options[name]
            for name in ('dim', 'ngram_min', 'ngram_max', 'use_word_unigrams', 'vectors_path')
            if options.get(name) is not None
        }
        if embedder_options.get('vectors_path'):
            embedder_options['kind'] = 'external'
        embedder = EmbedderConfig(**embedder_options)

        examples = read_labeled_examples(options['data'])
        model = train(examples, config, embedder)
        out = save_model(model, options['out'] or settings.QUERY_ROUTER['MODEL_PATH'])

        self.write_json({
            'artifact': str(out),
            'examples': len(examples),
            'labels': [str(label) for label in model.labels],
            'train_accuracy': accuracy(model, examples),
            'train_config': config.to_dict(),
        })
