"""
Group-decision-making combiner.

Each trained base learner is a decision maker that rates every class
(alternative) for an instance. A member's per-class weight is
W = P + R + A measured under a weight protocol, and the committee picks
the class with the highest weighted rating sum, ties going to the
smallest class index.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from src.common.error_categorization import CommitteeError, DataError, categorize_error
from src.common.seeding import derive_seed
from src.common.structured_logging import LogContext, get_structured_logger
from src.core.metrics import (
    AccuracyMode,
    PerClassMetrics,
    WeightVector,
    confusion_matrix,
    learner_weights,
    per_class_metrics,
)
from src.data.dataset import Dataset, stratified_split
from src.learners.base import LearnerSpec, TrainedModel
from src.learners.registry import fit

logger = get_structured_logger(__name__)

ArrayLike = Union[np.ndarray, Sequence[float]]


class RatingMode(Enum):
    """How a member turns an instance into per-class ratings."""
    ONEHOT = "onehot"  # 1 at the predicted class: weighted majority vote
    SCORES = "scores"  # predict_scores verbatim: soft voting


@dataclass(frozen=True, eq=False)
class RatingRow:
    """One member's ratings of the m classes for one instance."""
    x: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=np.float64, copy=True)
        if x.ndim != 1:
            raise CommitteeError(f"rating row must be a vector, got shape {x.shape}")
        if not np.all(np.isfinite(x)) or np.any(x < 0.0) or np.any(x > 1.0):
            raise CommitteeError("ratings must be finite and within [0, 1]")
        x.setflags(write=False)
        object.__setattr__(self, "x", x)


def _ratings_from_scores(scores: np.ndarray, mode: RatingMode) -> np.ndarray:
    if mode is RatingMode.SCORES:
        return scores
    onehot = np.zeros_like(scores)
    onehot[np.arange(scores.shape[0]), np.argmax(scores, axis=1)] = 1.0
    return onehot


def rate(model: TrainedModel, instance: ArrayLike, mode: RatingMode = RatingMode.SCORES) -> RatingRow:
    """Rating row of one model for one instance."""
    scores = model.predict_scores(np.asarray(instance, dtype=np.float64))
    return RatingRow(_ratings_from_scores(scores[None, :], mode)[0])


def rate_batch(model: TrainedModel, X: np.ndarray, mode: RatingMode = RatingMode.SCORES) -> np.ndarray:
    """n x m rating matrix for every row of X."""
    return _ratings_from_scores(model.predict_scores_batch(X), mode)


def _as_vector(value: Union[RatingRow, WeightVector, ArrayLike]) -> np.ndarray:
    if isinstance(value, RatingRow):
        return value.x
    if isinstance(value, WeightVector):
        return value.w
    return np.asarray(value, dtype=np.float64)


def _member_sum(contributions: np.ndarray) -> np.ndarray:
    """
    Sum K x ... contributions over the member axis in ascending value order,
    so any reordering of members yields bit-identical totals.
    """
    ordered = np.sort(contributions, axis=0)
    total = ordered[0].copy()
    for k in range(1, ordered.shape[0]):
        total += ordered[k]
    return total


def aggregate(
    ratings: Sequence[Union[RatingRow, ArrayLike]],
    weights: Sequence[Union[WeightVector, ArrayLike]],
) -> int:
    """
    Weighted-sum argmax: score[j] = sum_k ratings_k[j] * weights_k[j].

    Raises:
        CommitteeError: no members, length mismatch or non-finite input
    """
    if len(ratings) == 0:
        raise CommitteeError("aggregate needs at least one rating row")
    if len(ratings) != len(weights):
        raise CommitteeError(f"{len(ratings)} rating rows but {len(weights)} weight vectors")

    rows = [_as_vector(r) for r in ratings]
    ws = [_as_vector(w) for w in weights]
    m = rows[0].shape[0]
    for r, w in zip(rows, ws):
        if r.shape != (m,) or w.shape != (m,):
            raise CommitteeError(f"every rating and weight vector must have length {m}")
        if not (np.all(np.isfinite(r)) and np.all(np.isfinite(w))):
            raise CommitteeError("non-finite rating or weight")
    scores = _member_sum(np.stack(rows) * np.stack(ws))
    return int(np.argmax(scores))


def aggregate_batch(rating_stack: np.ndarray, weight_matrix: np.ndarray) -> np.ndarray:
    """
    Vectorized aggregate over instances.

    Args:
        rating_stack: K x n x m ratings
        weight_matrix: K x m weights

    Returns:
        Length-n class indices, identical to calling aggregate row by row
    """
    if rating_stack.ndim != 3 or weight_matrix.shape != (rating_stack.shape[0], rating_stack.shape[2]):
        raise CommitteeError(
            f"shape mismatch: ratings {rating_stack.shape}, weights {weight_matrix.shape}"
        )
    if rating_stack.shape[0] == 0:
        raise CommitteeError("aggregate_batch needs at least one member")
    scores = _member_sum(rating_stack * weight_matrix[:, None, :])
    return np.argmax(scores, axis=1)


@dataclass(frozen=True)
class WeightProtocol:
    """
    Where member weights are measured.

    validation: hold `fraction` of the training set out, measure there, then
        refit on the full training set.
    resubstitution: measure on the training set itself.
    external: measure on a caller-supplied set (the test set in the
        published protocol, which leaks test labels into the weights).
    """
    kind: str = "validation"
    fraction: float = 0.25

    KINDS = ("validation", "resubstitution", "external")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise CommitteeError(f"unknown weight protocol '{self.kind}'")
        if self.kind == "validation" and not 0.0 < self.fraction < 1.0:
            raise CommitteeError(f"validation fraction must be in (0, 1), got {self.fraction}")

    @classmethod
    def parse(cls, text: str) -> "WeightProtocol":
        """Accepts 'validation:F', 'validation', 'resubstitution', 'external-test'."""
        text = text.strip().lower()
        if text == "validation":
            return cls("validation")
        if text.startswith("validation:"):
            frac = text[len("validation:"):]
            try:
                return cls("validation", float(frac))
            except ValueError:
                raise CommitteeError(f"invalid validation fraction in '{text}'")
        if text == "resubstitution":
            return cls("resubstitution")
        if text in ("external", "external-test"):
            return cls("external")
        raise CommitteeError(
            f"unknown weight protocol '{text}', expected validation:F, resubstitution or external-test"
        )

    def __str__(self) -> str:
        if self.kind == "validation":
            return f"validation:{self.fraction!r}"
        if self.kind == "external":
            return "external-test"
        return self.kind


@dataclass(frozen=True, eq=False)
class CommitteeMember:
    """A decision maker: trained model, its spec and its per-class weight."""
    spec: LearnerSpec
    model: TrainedModel
    weights: WeightVector
    metrics: Optional[PerClassMetrics] = None

    @property
    def label(self) -> str:
        return self.spec.label


@dataclass(frozen=True, eq=False)
class Committee:
    """K weighted decision makers over m classes."""
    members: Tuple[CommitteeMember, ...]
    n_classes: int
    rating_mode: RatingMode = RatingMode.SCORES
    class_names: Tuple[str, ...] = ()
    dropped: Tuple[Tuple[str, str], ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        if len(self.members) < 1:
            raise CommitteeError("a committee needs at least one member")
        for member in self.members:
            if member.model.n_classes != self.n_classes or member.weights.n_classes != self.n_classes:
                raise CommitteeError(f"member {member.label} does not have {self.n_classes} classes")
            w = member.weights.w
            if not np.all(np.isfinite(w)) or np.any(w < 0.0) or np.any(w > 3.0):
                raise CommitteeError(f"member {member.label} weights must be finite and within [0, 3]")
        if self.class_names and len(self.class_names) != self.n_classes:
            raise CommitteeError("class_names length does not match n_classes")

    @property
    def size(self) -> int:
        return len(self.members)

    def weight_matrix(self) -> np.ndarray:
        return np.stack([member.weights.w for member in self.members])


def predict_committee(c: Committee, instance: ArrayLike) -> int:
    """aggregate(rate(member, instance) for each member, member weights)."""
    ratings = [rate(member.model, instance, c.rating_mode) for member in c.members]
    return aggregate(ratings, [member.weights for member in c.members])


def predict_committee_batch(c: Committee, X: np.ndarray) -> np.ndarray:
    """Committee decision for every row of X, in row order."""
    stack = np.stack([rate_batch(member.model, X, c.rating_mode) for member in c.members])
    return aggregate_batch(stack, c.weight_matrix())


def _evaluation_split(
    train: Dataset, protocol: WeightProtocol, seed: int, external: Optional[Dataset]
) -> Tuple[Dataset, Dataset]:
    """(fit portion, evaluation portion) for weight measurement."""
    if protocol.kind == "resubstitution":
        return train, train
    if protocol.kind == "external":
        if external is None:
            raise CommitteeError("the external weight protocol needs an evaluation dataset")
        if external.n_classes != train.n_classes or external.n_features != train.n_features:
            raise CommitteeError("external evaluation set does not match the training set shape")
        return train, external
    try:
        split = stratified_split(train, 1.0 - protocol.fraction, derive_seed(seed, "validation"))
    except DataError as e:
        raise CommitteeError(f"validation fraction {protocol.fraction} leaves a class empty: {e}") from e
    return split.train, split.test


def fit_committee(
    train: Dataset,
    specs: Sequence[LearnerSpec],
    protocol: WeightProtocol = WeightProtocol(),
    seed: int = 0,
    rating_mode: RatingMode = RatingMode.SCORES,
    external: Optional[Dataset] = None,
    accuracy_mode: AccuracyMode = AccuracyMode.OVERALL,
    max_workers: int = 1,
    on_member_error: str = "raise",
) -> Committee:
    """
    Train every member, measure its weights under `protocol` and assemble
    the committee.

    Members may train concurrently; the result is ordered by `specs`.

    Args:
        on_member_error: "raise" propagates the first learner failure, "drop"
            removes failing members with a warning

    Raises:
        CommitteeError: no specs, protocol cannot be applied, or every member failed
    """
    if not specs:
        raise CommitteeError("fit_committee needs at least one learner spec")
    if on_member_error not in ("raise", "drop"):
        raise CommitteeError(f"on_member_error must be 'raise' or 'drop', got {on_member_error!r}")

    fit_part, eval_part = _evaluation_split(train, protocol, seed, external)

    def build(spec: LearnerSpec) -> CommitteeMember:
        model = fit(spec, fit_part)
        cm = confusion_matrix(eval_part.labels, model.predict_batch(eval_part.features), train.n_classes)
        metrics = per_class_metrics(cm, accuracy_mode)
        if protocol.kind == "validation":
            model = fit(spec, train)
        return CommitteeMember(spec=spec, model=model, weights=learner_weights(metrics), metrics=metrics)

    with ThreadPoolExecutor(max_workers=max(1, max_workers)) as executor:
        futures = [executor.submit(build, spec) for spec in specs]

    members: List[CommitteeMember] = []
    dropped: List[Tuple[str, str]] = []
    for spec, future in zip(specs, futures):
        try:
            members.append(future.result())
        except Exception as e:
            if on_member_error == "raise":
                raise
            category, _ = categorize_error(e)
            logger.warning(
                f"Dropping committee member: {e}",
                LogContext(learner=spec.label, operation="fit_committee",
                           extra_data={"category": category.value}),
            )
            dropped.append((spec.label, str(e)))

    if not members:
        raise CommitteeError("every committee member failed to train")

    logger.info(
        f"Committee fitted with {len(members)} member(s)",
        LogContext(operation="fit_committee",
                   extra_data={"protocol": str(protocol), "rating_mode": rating_mode.value}),
    )
    return Committee(
        members=tuple(members),
        n_classes=train.n_classes,
        rating_mode=rating_mode,
        class_names=train.class_names,
        dropped=tuple(dropped),
    )
