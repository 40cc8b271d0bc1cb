"""Gallery/probe splitting, CMC curves, repeated experiments and synthetic data."""

from __future__ import annotations

import io
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from .descriptor import DEFAULT_EPS, CovarianceDescriptor, describe_file
from .errors import DataError, MalformedRankList, NoEligibleIdentities
from .rdc import RdcClassifier, TrainingSet, classify_direct_stein
from .rng import stream
from .spd import SINGULAR_DET, SpdMatrix, congruence, format_matrix

log = logging.getLogger(__name__)

METHODS = ("rdc", "direct-stein")
# stream labels, kept distinct so synthetic data and splits never share a stream
_SPLIT_STREAM = 1
_SYNTH_STREAM = 2


@dataclass(frozen=True, eq=False)
class Dataset:
    """Descriptors grouped by person id. Identities are kept sorted by id."""

    identities: Mapping[str, Sequence[SpdMatrix]]

    def __post_init__(self):
        ids = sorted(self.identities)
        if not ids:
            raise DataError("dataset has no identities")
        frozen = {}
        dims = set()
        for pid in ids:
            mats = tuple(self.identities[pid])
            if not mats:
                raise DataError(f"identity {pid!r} has no descriptors")
            dims.update(m.dim for m in mats)
            frozen[pid] = mats
        if len(dims) != 1:
            raise DataError(f"descriptors have mixed dimensions {sorted(dims)}")
        object.__setattr__(self, "identities", frozen)

    @property
    def ids(self) -> list[str]:
        return list(self.identities)

    @property
    def d(self) -> int:
        return next(iter(self.identities.values()))[0].dim

    def __len__(self):
        return len(self.identities)


@dataclass(frozen=True, eq=False)
class Split:
    gallery: TrainingSet
    probes: list[tuple[SpdMatrix, str]]
    excluded: list[str]


@dataclass(frozen=True)
class Experiment:
    gallery_size: int
    repetitions: int = 10
    seed: int = 0
    method: str = "rdc"

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.repetitions < 1:
            raise ValueError("repetitions must be at least 1")
        min_n = 2 if self.method == "rdc" else 1
        if self.gallery_size < min_n:
            raise ValueError(f"gallery size must be at least {min_n} for method {self.method}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")


# preset configurations matching the usual protocols
ILIDS = dict(gallery_size=3, repetitions=10)
ETHZ = dict(gallery_size=10, repetitions=10)


@dataclass(frozen=True, eq=False)
class CmcCurve:
    rates: np.ndarray

    def rank1(self) -> float:
        return float(self.rates[0])


@dataclass(frozen=True, eq=False)
class ExperimentResult:
    mean: CmcCurve
    repetitions: list[CmcCurve]
    excluded: list[str] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        reps = len(self.repetitions)
        buf.write(",".join(["rank", "mean_rate"] + [f"rep{r + 1}" for r in range(reps)]) + "\n")
        for k, mean in enumerate(self.mean.rates):
            row = [str(k + 1), f"{mean:.6f}"] + [f"{c.rates[k]:.6f}" for c in self.repetitions]
            buf.write(",".join(row) + "\n")
        return buf.getvalue()


def split(dataset: Dataset, gallery_size: int, seed: int, repetition: int = 0) -> Split:
    """Draw ``gallery_size`` descriptors per identity for the gallery.

    The draw for each identity comes from its own stream keyed by
    ``(seed, repetition, position of the id in sorted order)``. Identities
    with ``gallery_size`` or fewer descriptors are excluded (no probe would
    remain) and reported in ``Split.excluded``.
    """
    points, labels, probes, excluded = [], [], [], []
    for idx, pid in enumerate(dataset.ids):
        mats = dataset.identities[pid]
        if len(mats) <= gallery_size:
            excluded.append(pid)
            continue
        rng = stream(_SPLIT_STREAM, seed, repetition, idx)
        chosen = set(rng.permutation(len(mats))[:gallery_size].tolist())
        for j, mat in enumerate(mats):
            if j in chosen:
                points.append(mat)
                labels.append(pid)
            else:
                probes.append((mat, pid))
    if not points:
        raise NoEligibleIdentities(
            f"no identity has more than {gallery_size} descriptors"
        )
    return Split(TrainingSet(points, labels), probes, excluded)


def cmc(rank_lists: Iterable[tuple[Sequence[Hashable], Hashable]],
        classes: Iterable[Hashable] | None = None) -> CmcCurve:
    """Cumulative match characteristic.

    ``rank_lists`` holds ``(ranked ids, true id)`` pairs. Every ranked list
    must be a permutation of the gallery ids (``classes``, or the ids of the
    first list when omitted). ``rates[k-1]`` is the fraction of probes whose
    true id is ranked ``k`` or better.
    """
    rank_lists = [(list(r), t) for r, t in rank_lists]
    if not rank_lists:
        raise MalformedRankList("no rank lists given")
    gallery = set(classes) if classes is not None else set(rank_lists[0][0])
    m = len(gallery)
    hits = np.zeros(m, dtype=np.int64)
    for ranked, true_id in rank_lists:
        if len(ranked) != m or set(ranked) != gallery:
            raise MalformedRankList("rank list is not a permutation of the gallery ids")
        if true_id not in gallery:
            raise MalformedRankList(f"true id {true_id!r} is not in the gallery")
        hits[ranked.index(true_id)] += 1
    rates = np.cumsum(hits) / len(rank_lists)
    return CmcCurve(rates)


def _run_repetition(dataset: Dataset, experiment: Experiment, repetition: int) -> CmcCurve:
    sp = split(dataset, experiment.gallery_size, experiment.seed, repetition)
    if experiment.method == "rdc":
        clf = RdcClassifier.fit(sp.gallery)
        rank = clf.classify
    else:
        def rank(x):
            return classify_direct_stein(sp.gallery, x)
    lists = [([c for c, _ in rank(x)], pid) for x, pid in sp.probes]
    return cmc(lists, sp.gallery.classes)


def run_experiment(dataset: Dataset, experiment: Experiment, workers: int = 1) -> ExperimentResult:
    """Run every repetition and average the CMC curves pointwise.

    Repetition ``r`` (1-based) draws its split from streams keyed by
    ``(seed, r)``, so results do not depend on ``workers`` or on the
    method.
    """
    reps = range(1, experiment.repetitions + 1)
    excluded = [pid for pid in dataset.ids
                if len(dataset.identities[pid]) <= experiment.gallery_size]
    if excluded:
        log.warning("excluding %d identities with <= %d descriptors: %s",
                    len(excluded), experiment.gallery_size, ", ".join(excluded))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            curves = list(pool.map(lambda r: _run_repetition(dataset, experiment, r), reps))
    else:
        curves = [_run_repetition(dataset, experiment, r) for r in reps]
    mean = np.mean(np.stack([c.rates for c in curves]), axis=0)
    return ExperimentResult(CmcCurve(mean), curves, excluded)


def generate_synthetic(m: int, per_class: int, d: int, spread: float, seed: int) -> Dataset:
    """Random SPD classes: a centre ``G G^T + I`` per class, samples ``X C X^T``.

    ``X = I + spread * E`` with ``E`` standard normal, redrawn until
    invertible. Person ids are ``p000``, ``p001``, ...
    """
    if m < 2 or per_class < 3 or d < 2:
        raise ValueError("need m >= 2, per_class >= 3 and d >= 2")
    if spread < 0:
        raise ValueError("spread must be non-negative")
    rng = stream(_SYNTH_STREAM, seed)
    width = max(3, len(str(m - 1)))
    eye = np.eye(d)
    identities = {}
    for c in range(m):
        g = rng.standard_normal((d, d))
        centre = SpdMatrix(0.5 * (g @ g.T + (g @ g.T).T) + eye)
        samples = []
        for _ in range(per_class):
            while True:
                x = eye + spread * rng.standard_normal((d, d))
                if abs(np.linalg.det(x)) > SINGULAR_DET:
                    break
            samples.append(centre if spread == 0 else congruence(centre, x))
        identities[f"p{c:0{width}d}"] = samples
    return Dataset(identities)


# -- dataset directories -----------------------------------------------------
#
#   <root>/<person-id>/<image>.ppm
#   <root>/<person-id>/<image>.mask.pgm   optional foreground mask
#   <root>/<person-id>/<image>.cov        cached (or synthetic) descriptor


def _stems(person_dir: Path) -> list[str]:
    stems = set()
    for p in person_dir.iterdir():
        if not p.is_file():
            continue
        if p.suffix == ".ppm":
            stems.add(p.name[: -len(".ppm")])
        elif p.suffix == ".cov":
            stems.add(p.name[: -len(".cov")])
    return sorted(stems)


def _person_dirs(root: Path) -> list[Path]:
    if not root.is_dir():
        raise DataError(f"{root} is not a directory")
    return sorted(p for p in root.iterdir() if p.is_dir())


def describe_tree(root: str | os.PathLike, eps: float = DEFAULT_EPS) -> list[Path]:
    """Compute and write a ``.cov`` descriptor next to every ``.ppm`` image."""
    written = []
    for person in _person_dirs(Path(root)):
        for img in sorted(person.glob("*.ppm")):
            stem = img.name[: -len(".ppm")]
            mask = person / f"{stem}.mask.pgm"
            desc = describe_file(img, mask if mask.exists() else None, eps)
            out = person / f"{stem}.cov"
            desc.save(out)
            written.append(out)
    return written


def _is_fresh(cov: Path, *sources: Path) -> bool:
    if not cov.exists():
        return False
    t = cov.stat().st_mtime
    return all(not s.exists() or s.stat().st_mtime <= t for s in sources)


def load_dataset(root: str | os.PathLike, eps: float = DEFAULT_EPS,
                 write_cache: bool = True) -> Dataset:
    """Read a dataset directory, describing images whose cache is missing or stale."""
    identities = {}
    for person in _person_dirs(Path(root)):
        mats = []
        for stem in _stems(person):
            img = person / f"{stem}.ppm"
            mask = person / f"{stem}.mask.pgm"
            cov = person / f"{stem}.cov"
            if _is_fresh(cov, img, mask):
                mats.append(CovarianceDescriptor.load(cov).matrix)
                continue
            desc = describe_file(img, mask if mask.exists() else None, eps)
            if write_cache:
                desc.save(cov)
            mats.append(desc.matrix)
        if mats:
            identities[person.name] = mats
    if not identities:
        raise DataError(f"no descriptors or images found under {root}")
    return Dataset(identities)


def save_dataset(dataset: Dataset, root: str | os.PathLike) -> None:
    """Write every descriptor as ``<root>/<id>/<nnn>.cov``."""
    root = Path(root)
    for pid, mats in dataset.identities.items():
        person = root / pid
        person.mkdir(parents=True, exist_ok=True)
        width = max(3, len(str(len(mats) - 1)))
        for j, mat in enumerate(mats):
            with open(person / f"{j:0{width}d}.cov", "w") as fh:
                fh.write(format_matrix(mat.values))
