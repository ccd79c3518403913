"""
Classifier errors
"""
from query_router.exceptions import QueryRouterError


class InsufficientClassData(QueryRouterError):
    code = 'insufficient_class_data'


class NonFiniteLoss(QueryRouterError):
    code = 'non_finite_loss'

    def __init__(self, phase, step):
        super().__init__(f'Loss became non-finite during {phase} at step {step}', phase=phase, step=step)
        self.step = step


class InvalidTrainConfig(QueryRouterError):
    code = 'invalid_train_config'


class VersionMismatch(QueryRouterError):
    code = 'version_mismatch'


class MalformedArtifact(QueryRouterError):
    code = 'malformed_artifact'

    def __init__(self, field_path, reason):
        super().__init__(f'Malformed model artifact at {field_path}: {reason}', field=field_path)
        self.field_path = field_path
