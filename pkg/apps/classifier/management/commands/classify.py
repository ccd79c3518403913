"""
Classify one query with the trained classifier.

Usage:
    python manage.py classify --query "Any recalls for a 2017 Kia Optima?"
"""
from apps.classifier.artifacts import load_model
from apps.classifier.services import predict
from apps.routing.config import ServiceSettings
from apps.routing.services import check_query
from query_router.commands import RouterCommand


class Command(RouterCommand):
    help = 'Print the predicted tool and the probability of every tool'

    def add_arguments(self, parser):
        parser.add_argument('--query', required=True)
        parser.add_argument('--model', dest='model_path', help='Classifier artifact (ROUTER_MODEL_PATH)')

    def handle(self, *args, **options):
        settings = ServiceSettings.from_django(model_path=options['model_path'])
        settings.check_paths()
        model = load_model(settings.model_path)
        prediction = predict(model, check_query(options['query']))
        self.write_json({
            'tool_category': prediction.tool.value,
            'probabilities': prediction.probability_map(),
        })
