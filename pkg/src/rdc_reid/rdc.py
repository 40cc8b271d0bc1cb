"""Relational divergence classification.

Every SPD matrix is described by its mean Stein divergence to each training
class (its *similarity vector*; larger entries mean less similar). LDA maps
those vectors to a low-dimensional space where a nearest-neighbour rule
ranks the classes. ``classify_direct_stein`` is the plain nearest-neighbour
baseline on Stein divergences.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np

from .divergence import pairwise_stein, stein_to_many
from .errors import DimensionMismatch, FormatError, SingletonOwnClass, TooFewSamples
from .lda import LdaModel, fit_lda, project
from .spd import SpdMatrix, format_matrix, parse_matrix

Ranking = list[tuple[Hashable, float]]


@dataclass(frozen=True, eq=False)
class TrainingSet:
    """Labelled SPD matrices. Classes are ordered by sorting their labels."""

    points: tuple[SpdMatrix, ...]
    labels: tuple
    classes: tuple = field(init=False)
    class_index: np.ndarray = field(init=False, repr=False)
    counts: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        points = tuple(self.points)
        labels = tuple(self.labels)
        if len(points) != len(labels):
            raise DimensionMismatch(f"{len(points)} points but {len(labels)} labels")
        if not points:
            raise TooFewSamples("training set is empty")
        dims = {p.dim for p in points}
        if len(dims) != 1:
            raise DimensionMismatch(f"mixed matrix dimensions {sorted(dims)}")
        classes = tuple(sorted(set(labels)))
        lookup = {c: i for i, c in enumerate(classes)}
        idx = np.array([lookup[y] for y in labels], dtype=np.intp)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "classes", classes)
        object.__setattr__(self, "class_index", idx)
        object.__setattr__(self, "counts", np.bincount(idx, minlength=len(classes)))

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def m(self) -> int:
        return len(self.classes)

    @property
    def dim(self) -> int:
        return self.points[0].dim

    def without(self, i: int) -> TrainingSet:
        """Copy with the ``i``-th point removed."""
        keep = [j for j in range(self.n) if j != i]
        return TrainingSet([self.points[j] for j in keep], [self.labels[j] for j in keep])


def _class_means(divs: np.ndarray, class_index: np.ndarray, m: int, denom: np.ndarray) -> np.ndarray:
    sums = np.zeros(m)
    for l in range(m):
        sums[l] = np.sum(divs[class_index == l])
    return sums / denom


def similarity_train(training: TrainingSet, i: int) -> np.ndarray:
    """Similarity vector of training point ``i``, excluding ``i`` itself.

    The own-class mean divides by ``n_l - 1``; a singleton own class
    raises :class:`SingletonOwnClass`.
    """
    own = training.class_index[i]
    if training.counts[own] < 2:
        raise SingletonOwnClass(
            f"class {training.classes[own]!r} has a single member; need at least 2"
        )
    others = [j for j in range(training.n) if j != i]
    divs = stein_to_many(training.points[i], [training.points[j] for j in others])
    denom = training.counts.astype(np.float64)
    denom[own] -= 1
    return _class_means(divs, training.class_index[others], training.m, denom)


def similarity_query(training: TrainingSet, xq: SpdMatrix) -> np.ndarray:
    """Similarity vector of a matrix that is not part of the training set."""
    if xq.dim != training.dim:
        raise DimensionMismatch(f"query dim {xq.dim} != training dim {training.dim}")
    divs = stein_to_many(xq, training.points)
    return _class_means(divs, training.class_index, training.m, training.counts.astype(np.float64))


def similarity_matrix(training: TrainingSet) -> np.ndarray:
    """Similarity vectors of all training points, shape ``(n, m)``.

    Uses one pairwise divergence matrix; row ``i`` equals
    ``similarity_train(training, i)``.
    """
    if np.any(training.counts < 2):
        bad = [c for c, k in zip(training.classes, training.counts) if k < 2]
        raise SingletonOwnClass(f"classes with a single member: {bad}")
    d = pairwise_stein(training.points)
    out = np.empty((training.n, training.m))
    for i in range(training.n):
        mask = np.arange(training.n) != i
        denom = training.counts.astype(np.float64)
        denom[training.class_index[i]] -= 1
        out[i] = _class_means(d[i, mask], training.class_index[mask], training.m, denom)
    return out


def _rank(scores: np.ndarray, classes: Sequence[Hashable]) -> Ranking:
    order = sorted(range(len(classes)), key=lambda l: (scores[l], classes[l]))
    return [(classes[l], float(scores[l])) for l in order]


def _min_per_class(dist: np.ndarray, class_index: np.ndarray, m: int) -> np.ndarray:
    scores = np.full(m, np.inf)
    np.minimum.at(scores, class_index, dist)
    return scores


@dataclass(frozen=True, eq=False)
class RdcClassifier:
    training: TrainingSet
    lda: LdaModel

    @classmethod
    def fit(cls, training: TrainingSet) -> RdcClassifier:
        vectors = similarity_matrix(training)
        return cls(training, fit_lda(vectors, training.labels))

    @classmethod
    def from_model(cls, training: TrainingSet, model: LdaModel) -> RdcClassifier:
        """Pair a stored model with the gallery it was fitted on."""
        if tuple(model.labels) != training.labels:
            raise DimensionMismatch("model labels do not match the training set")
        if model.input_dim != training.m:
            raise DimensionMismatch(f"model expects {model.input_dim} classes, gallery has {training.m}")
        return cls(training, model)

    def embed(self, xq: SpdMatrix) -> np.ndarray:
        return project(self.lda, similarity_query(self.training, xq))

    def classify(self, xq: SpdMatrix) -> Ranking:
        """Classes ranked by nearest projected training point (ascending distance)."""
        x = self.embed(xq)
        dist = np.sqrt(np.sum((self.lda.projected_training - x) ** 2, axis=1))
        scores = _min_per_class(dist, self.training.class_index, self.training.m)
        return _rank(scores, self.training.classes)


def classify(classifier: RdcClassifier, xq: SpdMatrix) -> Ranking:
    return classifier.classify(xq)


def classify_direct_stein(training: TrainingSet, xq: SpdMatrix) -> Ranking:
    """Classes ranked by the smallest Stein divergence to any of their members."""
    if xq.dim != training.dim:
        raise DimensionMismatch(f"query dim {xq.dim} != training dim {training.dim}")
    divs = stein_to_many(xq, training.points)
    scores = _min_per_class(divs, training.class_index, training.m)
    return _rank(scores, training.classes)


# -- model file --------------------------------------------------------------

MODEL_MAGIC = "rdc-model"
MODEL_VERSION = "v1"


def format_model(model: LdaModel, d: int) -> str:
    m, k = model.projection.shape
    n = len(model.labels)
    buf = io.StringIO()
    buf.write(f"{MODEL_MAGIC} {MODEL_VERSION} d={d} m={m} k={k} n={n} "
              f"gamma={model.scatter_regularizer:.17g}\n")
    ev = ",".join(f"{v:.17g}" for v in model.eigenvalues)
    buf.write(format_matrix(model.projection, comments=[f"eigenvalues={ev}"]))
    for label, row in zip(model.labels, model.projected_training):
        label = str(label)
        if not label or any(ch.isspace() for ch in label):
            raise FormatError(f"label {label!r} cannot be written to a model file")
        buf.write(label + " " + " ".join(f"{v:.17g}" for v in row) + "\n")
    return buf.getvalue()


def parse_model(text: str) -> tuple[LdaModel, int]:
    """Inverse of :func:`format_model`. Returns ``(model, d)``; labels come back as strings."""
    lines = text.splitlines()
    if not lines:
        raise FormatError("empty model file")
    head = lines[0].split()
    if len(head) < 2 or head[0] != MODEL_MAGIC or head[1] != MODEL_VERSION:
        raise FormatError(f"not an {MODEL_MAGIC} {MODEL_VERSION} file")
    try:
        fields = dict(tok.split("=", 1) for tok in head[2:])
        d, m, k, n = (int(fields[key]) for key in ("d", "m", "k", "n"))
        gamma = float(fields["gamma"])
    except (KeyError, ValueError):
        raise FormatError(f"bad model header {lines[0]!r}") from None

    rest = lines[1:]
    # projection block: comments, the row count, then m rows
    pos = 0
    ev = None
    while pos < len(rest) and (not rest[pos].strip() or rest[pos].lstrip().startswith("#")):
        line = rest[pos].strip().lstrip("#").strip()
        if line.startswith("eigenvalues="):
            vals = line.split("=", 1)[1]
            ev = np.array([float(v) for v in vals.split(",") if v]) if vals else np.zeros(0)
        pos += 1
    block = rest[pos : pos + m + 1]
    w = parse_matrix("\n".join(block), ncols=k)
    if w.shape != (m, k):
        raise FormatError("projection block has the wrong shape")
    rows = [r for r in rest[pos + m + 1 :] if r.strip() and not r.lstrip().startswith("#")]
    if len(rows) != n:
        raise FormatError(f"expected {n} training rows, found {len(rows)}")
    labels = []
    coords = np.empty((n, k))
    for i, r in enumerate(rows):
        toks = r.split()
        if len(toks) != k + 1:
            raise FormatError(f"training row {i + 1} has {len(toks) - 1} coordinates, expected {k}")
        labels.append(toks[0])
        try:
            coords[i] = [float(t) for t in toks[1:]]
        except ValueError:
            raise FormatError(f"bad coordinate in training row {i + 1}") from None
    if ev is None:
        ev = np.full(k, np.nan)
    model = LdaModel(w, coords, tuple(labels), gamma, ev)
    return model, d


def save_model(path: str | os.PathLike, classifier: RdcClassifier) -> None:
    with open(path, "w") as fh:
        fh.write(format_model(classifier.lda, classifier.training.dim))


def load_model(path: str | os.PathLike) -> tuple[LdaModel, int]:
    with open(path) as fh:
        text = fh.read()
    try:
        return parse_model(text)
    except FormatError as exc:
        raise FormatError(f"{path}: {exc}") from None
