"""
Committee persistence in a versioned, line-oriented text format.

    gdm-committee 1
    K <members>
    m <classes>
    d <features>
    rating_mode <onehot|scores>
    class_names <json list>
    member <index>
    kind <kind>
    name <json string or null>
    seed <int>
    hyperparameters <json object>
    weights <m floats>
    precision|recall|accuracy <m floats>      (optional)
    param <name> <float64|int64> <shape> <values...>
    end
    ...

Floats are written with their shortest round-trip repr, so weights and
parameters reload bit-for-bit.
"""
import json
import logging
from pathlib import Path
from typing import Dict, Iterator, List, Tuple, Union

import numpy as np

from src.common.error_categorization import CommitteeError, GdmError
from src.core.ensemble import Committee, CommitteeMember, RatingMode
from src.core.metrics import PerClassMetrics, WeightVector
from src.learners.base import LearnerSpec
from src.learners.registry import model_class

logger = logging.getLogger(__name__)

FORMAT_NAME = "gdm-committee"
FORMAT_VERSION = 1


def _floats(values: np.ndarray) -> str:
    return " ".join(repr(float(v)) for v in np.ravel(values))


def _encode_param(name: str, array: np.ndarray) -> str:
    array = np.asarray(array)
    if " " in name:
        raise CommitteeError(f"parameter name '{name}' must not contain spaces")
    if np.issubdtype(array.dtype, np.integer):
        dtype, body = "int64", " ".join(str(int(v)) for v in np.ravel(array))
    else:
        dtype, body = "float64", _floats(array)
    shape = ",".join(str(s) for s in array.shape) or "scalar"
    return f"param {name} {dtype} {shape} {body}".rstrip()


def _decode_param(fields: List[str]) -> Tuple[str, np.ndarray]:
    if len(fields) < 3:
        raise CommitteeError("malformed param line")
    name, dtype, shape_text = fields[0], fields[1], fields[2]
    shape = () if shape_text == "scalar" else tuple(int(s) for s in shape_text.split(","))
    if dtype == "int64":
        values = np.array([int(v) for v in fields[3:]], dtype=np.int64)
    elif dtype == "float64":
        values = np.array([float(v) for v in fields[3:]], dtype=np.float64)
    else:
        raise CommitteeError(f"unsupported parameter dtype '{dtype}'")
    expected = int(np.prod(shape)) if shape else 1
    if values.size != expected:
        raise CommitteeError(f"parameter {name}: {values.size} values for shape {shape}")
    return name, values.reshape(shape)


def dumps_committee(committee: Committee) -> str:
    """Serialize a committee to text."""
    first = committee.members[0].model
    lines = [
        f"{FORMAT_NAME} {FORMAT_VERSION}",
        f"K {committee.size}",
        f"m {committee.n_classes}",
        f"d {first.n_features}",
        f"rating_mode {committee.rating_mode.value}",
        f"class_names {json.dumps(list(committee.class_names))}",
    ]
    for index, member in enumerate(committee.members):
        lines.append(f"member {index}")
        lines.append(f"kind {member.spec.kind}")
        lines.append(f"name {json.dumps(member.spec.name)}")
        lines.append(f"seed {int(member.spec.seed)}")
        lines.append(f"hyperparameters {json.dumps(dict(member.model.hyperparameters), sort_keys=True)}")
        lines.append(f"weights {_floats(member.weights.w)}")
        if member.metrics is not None:
            lines.append(f"precision {_floats(member.metrics.precision)}")
            lines.append(f"recall {_floats(member.metrics.recall)}")
            lines.append(f"accuracy {_floats(member.metrics.accuracy)}")
        for name, array in sorted(member.model.get_params().items()):
            lines.append(_encode_param(name, array))
        lines.append("end")
    return "\n".join(lines) + "\n"


def _tokens(text: str) -> Iterator[Tuple[int, str, str]]:
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        key, _, rest = line.partition(" ")
        yield number, key, rest


def loads_committee(text: str) -> Committee:
    """
    Parse committee text produced by `dumps_committee`.

    Raises:
        CommitteeError: unknown format/version or malformed content
    """
    tokens = list(_tokens(text))
    header: Dict[str, str] = {}
    pos = 0
    while pos < len(tokens) and tokens[pos][1] != "member":
        header[tokens[pos][1]] = tokens[pos][2]
        pos += 1

    if header.get(FORMAT_NAME) != str(FORMAT_VERSION):
        raise CommitteeError(f"not a {FORMAT_NAME} version {FORMAT_VERSION} file")
    try:
        k = int(header["K"])
        m = int(header["m"])
        d = int(header["d"])
        rating_mode = RatingMode(header["rating_mode"])
        class_names = tuple(json.loads(header.get("class_names", "[]")))
    except (KeyError, ValueError) as e:
        raise CommitteeError(f"malformed committee header: {e}") from e

    members: List[CommitteeMember] = []
    while pos < len(tokens):
        number, key, _ = tokens[pos]
        if key != "member":
            raise CommitteeError(f"line {number}: expected 'member', got '{key}'")
        pos += 1
        fields: Dict[str, str] = {}
        params: Dict[str, np.ndarray] = {}
        while pos < len(tokens) and tokens[pos][1] != "end":
            number, key, rest = tokens[pos]
            try:
                if key == "param":
                    name, array = _decode_param(rest.split())
                    params[name] = array
                else:
                    fields[key] = rest
            except ValueError as e:
                raise CommitteeError(f"line {number}: {e}") from e
            pos += 1
        if pos >= len(tokens):
            raise CommitteeError("unterminated member block")
        pos += 1
        members.append(_build_member(fields, params, m, d))

    if len(members) != k:
        raise CommitteeError(f"header declares {k} members, file holds {len(members)}")
    return Committee(members=tuple(members), n_classes=m, rating_mode=rating_mode, class_names=class_names)


def _vector(text: str) -> np.ndarray:
    return np.array([float(v) for v in text.split()], dtype=np.float64)


def _build_member(fields: Dict[str, str], params: Dict[str, np.ndarray], m: int, d: int) -> CommitteeMember:
    try:
        kind = fields["kind"]
        hyperparameters = json.loads(fields["hyperparameters"])
        spec = LearnerSpec(
            kind=kind,
            hyperparameters=hyperparameters,
            seed=int(fields["seed"]),
            name=json.loads(fields.get("name", "null")),
        )
        weights = WeightVector(_vector(fields["weights"]))
        metrics = None
        if "precision" in fields:
            metrics = PerClassMetrics(
                precision=_vector(fields["precision"]),
                recall=_vector(fields["recall"]),
                accuracy=_vector(fields["accuracy"]),
            )
    except (KeyError, ValueError) as e:
        raise CommitteeError(f"malformed member block: {e}") from e
    try:
        model = model_class(kind).from_params(m, d, hyperparameters, params)
    except (GdmError, KeyError, ValueError) as e:
        raise CommitteeError(f"member {spec.label}: bad parameters ({e!r})") from e
    return CommitteeMember(spec=spec, model=model, weights=weights, metrics=metrics)


def save_committee(committee: Committee, path: Union[str, Path]) -> None:
    Path(path).write_text(dumps_committee(committee), encoding="utf-8")
    logger.info(f"Committee with {committee.size} member(s) written to {path}")


def load_committee(path: Union[str, Path]) -> Committee:
    path = Path(path)
    if not path.is_file():
        raise CommitteeError(f"Committee file not found: {path}")
    return loads_committee(path.read_text(encoding="utf-8"))
