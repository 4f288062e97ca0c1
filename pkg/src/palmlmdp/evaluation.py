"""Verification (EER), identification (rank-1) and DPN statistics."""

from __future__ import annotations

import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import lmdp
from .descriptor import Descriptor, chi_square
from .errors import InputError
from .filter_bank import FilterBank
from .response_field import convolve_responses


@dataclass(frozen=True)
class MatchTrial:
    score: float
    genuine: bool
    i: int = -1
    j: int = -1


@dataclass(frozen=True)
class RocPoint:
    threshold: float
    far: float
    frr: float


@dataclass(frozen=True)
class RocCurve:
    points: tuple

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)


@dataclass
class EvalReport:
    eer: float | None = None
    rank1: dict = field(default_factory=dict)
    n_genuine: int = 0
    n_impostor: int = 0
    n_queries: dict = field(default_factory=dict)


@dataclass(frozen=True)
class DpnStats:
    pct_dpn1: float
    pct_dpn2: float
    pct_dpn3plus: float
    pct_dpn0: float
    n_pixels: int


def _check_samples(samples):
    samples = list(samples)
    for s in samples:
        if len(s) != 2 or not isinstance(s[1], Descriptor):
            raise InputError("samples must be (identity, Descriptor) pairs")
    return samples


def _row_scores(descs: Sequence[Descriptor], i: int) -> list:
    return [chi_square(descs[i], descs[j]) for j in range(i + 1, len(descs))]


def all_pairs_verification(samples: Iterable, jobs: int = 1) -> list:
    """Score every unordered pair of ``(identity, descriptor)`` samples."""
    samples = _check_samples(samples)
    if len(samples) < 2:
        raise InputError(f"need at least 2 samples, got {len(samples)}")
    ids = [s[0] for s in samples]
    if len(set(ids)) < 2:
        raise InputError("need at least 2 distinct identities")
    descs = [s[1] for s in samples]
    rows = range(len(descs) - 1)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            scored = list(pool.map(lambda i: _row_scores(descs, i), rows))
    else:
        scored = [_row_scores(descs, i) for i in rows]
    trials = []
    for i, row in zip(rows, scored):
        for offset, score in enumerate(row):
            j = i + 1 + offset
            trials.append(MatchTrial(score=score, genuine=ids[i] == ids[j], i=i, j=j))
    return trials


def roc_curve(genuine: np.ndarray, impostor: np.ndarray) -> RocCurve:
    """FAR/FRR at every distinct score, accepting when ``score <= threshold``.

    The first point (threshold -inf) accepts nothing.
    """
    genuine = np.sort(np.asarray(genuine, dtype=np.float64))
    impostor = np.sort(np.asarray(impostor, dtype=np.float64))
    thresholds = np.unique(np.concatenate([genuine, impostor]))
    accepted_imp = np.searchsorted(impostor, thresholds, side="right")
    accepted_gen = np.searchsorted(genuine, thresholds, side="right")
    far = accepted_imp / impostor.size
    frr = 1.0 - accepted_gen / genuine.size
    points = [RocPoint(float("-inf"), 0.0, 1.0)]
    points += [RocPoint(float(t), float(a), float(r)) for t, a, r in zip(thresholds, far, frr)]
    return RocCurve(tuple(points))


def compute_eer(trials: Iterable[MatchTrial]) -> tuple:
    """Equal error rate and the ROC it was read from.

    Linear interpolation between the two ROC points that bracket the
    FAR = FRR crossing.
    """
    trials = list(trials)
    genuine = [t.score for t in trials if t.genuine]
    impostor = [t.score for t in trials if not t.genuine]
    if not genuine or not impostor:
        raise InputError(
            f"EER needs both classes, got {len(genuine)} genuine / {len(impostor)} impostor"
        )
    roc = roc_curve(genuine, impostor)
    pts = roc.points
    prev = pts[0]
    for p in pts[1:]:
        d = p.far - p.frr
        if d >= 0:
            d_prev = prev.far - prev.frr
            alpha = -d_prev / (d - d_prev)
            eer = prev.far + alpha * (p.far - prev.far)
            return float(eer), roc
        prev = p
    raise AssertionError("ROC ends at FAR=1, FRR=0; a crossing always exists")


def identification(samples: Iterable, train_k: int) -> tuple:
    """Rank-1 nearest-neighbour accuracy.

    The first ``train_k`` samples of each identity, in the given order,
    are templates; the rest are queries. Returns ``(accuracy, n_queries)``.
    """
    samples = _check_samples(samples)
    if train_k < 1:
        raise InputError(f"train_k must be >= 1, got {train_k}")
    by_id = {}
    for identity, desc in samples:
        by_id.setdefault(identity, []).append(desc)
    if len(by_id) < 2:
        raise InputError("identification needs at least 2 identities")
    short = sorted(k for k, v in by_id.items() if len(v) <= train_k)
    if short:
        raise InputError(
            f"identities need more than {train_k} samples; too few for: {', '.join(short[:5])}"
        )
    templates = [(ident, d) for ident, descs in by_id.items() for d in descs[:train_k]]
    correct = total = 0
    for ident, descs in by_id.items():
        for query in descs[train_k:]:
            best_id, best = None, np.inf
            for t_id, t in templates:
                s = chi_square(query, t)
                if s < best:
                    best_id, best = t_id, s
            correct += best_id == ident
            total += 1
    return correct / total, total


def dpn_counts(image, bank: FilterBank) -> np.ndarray:
    """Pixel counts with DPN = 0, 1, 2, >=3."""
    stack = convolve_responses(image, bank)
    _, count = lmdp.analyze_map(stack.responses)
    return np.bincount(np.minimum(count, 3).ravel(), minlength=4)[:4]


def dpn_distribution(images: Iterable, bank: FilterBank) -> DpnStats:
    totals = np.zeros(4, dtype=np.int64)
    for image in images:
        totals += dpn_counts(image, bank)
    n = int(totals.sum())
    if n == 0:
        raise InputError("no images supplied")
    pct = 100.0 * totals / n
    return DpnStats(pct_dpn1=float(pct[1]), pct_dpn2=float(pct[2]),
                    pct_dpn3plus=float(pct[3]), pct_dpn0=float(pct[0]), n_pixels=n)


def roc_to_csv(roc: RocCurve) -> str:
    out = io.StringIO()
    out.write("threshold,far,frr\n")
    for p in roc:
        out.write(f"{p.threshold!r},{p.far!r},{p.frr!r}\n")
    return out.getvalue()


def format_report(report: EvalReport, config: dict | None = None) -> str:
    """Line-oriented ``key=value`` text, configuration first."""
    lines = [f"config.{k}={v}" for k, v in sorted((config or {}).items())]
    if report.eer is not None:
        lines += [f"eer={report.eer!r}", f"genuine_trials={report.n_genuine}",
                  f"impostor_trials={report.n_impostor}"]
    for k in sorted(report.rank1):
        lines.append(f"rank1.k{k}={report.rank1[k]!r}")
        lines.append(f"queries.k{k}={report.n_queries.get(k, 0)}")
    return "\n".join(lines) + "\n"


def dpn_to_csv(rows: Sequence[tuple]) -> str:
    """``rows`` are ``(name, DpnStats)``; a name of ``ALL`` marks the pooled row."""
    out = io.StringIO()
    out.write("image,pct_dpn1,pct_dpn2,pct_dpn3plus,pct_dpn0,pixels\n")
    for name, s in rows:
        out.write(f"{name},{s.pct_dpn1:.4f},{s.pct_dpn2:.4f},{s.pct_dpn3plus:.4f},"
                  f"{s.pct_dpn0:.4f},{s.n_pixels}\n")
    return out.getvalue()
