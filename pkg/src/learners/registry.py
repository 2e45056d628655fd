"""
Learner registry and the module-level fit / predict entry points.
"""
import logging
from typing import Dict, List

import numpy as np

from src.common.error_categorization import LearnerError
from src.data.dataset import Dataset
from src.learners import elm, knn, linear_svm, logreg, mlp, random_forest, tree
from src.learners.base import LearnerKind, LearnerSpec, TrainedModel, validate_hyperparameters

logger = logging.getLogger(__name__)

LEARNER_KINDS: Dict[str, LearnerKind] = {
    entry.kind: entry
    for entry in (knn.KIND, logreg.KIND, random_forest.KIND, elm.KIND, mlp.KIND, linear_svm.KIND, tree.KIND)
}

MANDATORY_ROSTER = ("knn", "logreg", "random_forest", "elm")
PUBLISHED_ROSTER = ("mlp_bp", "elm", "logreg", "linear_svm", "random_forest", "knn")


def get_kind(kind: str) -> LearnerKind:
    try:
        return LEARNER_KINDS[kind]
    except KeyError:
        raise LearnerError(
            f"unknown learner kind '{kind}', expected one of {sorted(LEARNER_KINDS)}", kind=kind
        )


def resolve_spec(spec: LearnerSpec) -> LearnerSpec:
    """Return the spec with defaults filled in, validating every hyperparameter."""
    entry = get_kind(spec.kind)
    return LearnerSpec(
        kind=spec.kind,
        hyperparameters=validate_hyperparameters(entry, spec.hyperparameters),
        seed=spec.seed,
        name=spec.name,
    )


def fit(spec: LearnerSpec, train: Dataset) -> TrainedModel:
    """
    Train one base learner.

    Deterministic given (spec, train): all randomness comes from the spec seed.

    Raises:
        LearnerError: unknown kind, invalid or degenerate hyperparameters
    """
    entry = get_kind(spec.kind)
    hp = validate_hyperparameters(entry, spec.hyperparameters)
    model = entry.train(hp, train.features, train.labels, train.n_classes, int(spec.seed))
    logger.debug(f"Trained {spec.label} on n={train.n_samples} d={train.n_features}")
    return model


def predict_scores(model: TrainedModel, instance: np.ndarray) -> np.ndarray:
    return model.predict_scores(instance)


def predict(model: TrainedModel, instance: np.ndarray) -> int:
    return model.predict(instance)


def help_text(kind: str) -> str:
    """Human-readable hyperparameter schema with defaults for one kind."""
    entry = get_kind(kind)
    lines = [f"{entry.kind}: {entry.summary}"]
    for key, rule in entry.schema.items():
        type_name = rule["type"].__name__
        extra = f", one of {rule['choices']}" if "choices" in rule else ""
        lines.append(f"  {key} ({type_name}{extra}, default {rule['default']!r}): {rule.get('help', '')}")
    return "\n".join(lines)


def all_help_text() -> List[str]:
    return [help_text(kind) for kind in LEARNER_KINDS]


def model_class(kind: str):
    return get_kind(kind).model_cls
