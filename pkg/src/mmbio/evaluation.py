"""FAR/FRR sweeps, EER, and the dataset evaluation protocol.

Protocol (fixed for determinism): for every subject, the first fingerprint
impression and the first ``enroll_iris`` iris images enroll the template;
the remaining impressions are zipped into probe pairs.  Genuine trials
score each probe pair against its own template, impostor trials against
every other subject's template.  FAR(t) is the fraction of impostor scores
accepted at threshold t, FRR(t) the fraction of genuine scores rejected;
the EER interpolates the crossing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

import time

from .config import RunConfig
from .errors import DataError
from .features import fingerprint_features, iris_code_features, score_probe_pair
from .imgio import DatasetIndex, TemplateRecord, load_gray
from .iris_code import majority_template, truncate_rows


@dataclass
class EvalResult:
    thresholds: np.ndarray
    far: np.ndarray
    frr: np.ndarray
    eer: float
    eer_threshold: float
    genuine_scores: list[float] = field(default_factory=list)
    impostor_scores: list[float] = field(default_factory=list)


@dataclass
class TrialRecord:
    probe_subject: str
    template_subject: str
    genuine: bool
    fingerprint: float  # similarity
    iris: float         # similarity
    fused: float


def sweep(genuine, impostor, points: int = 201) -> EvalResult:
    """FAR/FRR over an even threshold grid on [0, 1] plus interpolated EER."""
    gen = np.asarray(sorted(genuine), dtype=np.float64)
    imp = np.asarray(sorted(impostor), dtype=np.float64)
    if gen.size == 0 or imp.size == 0:
        raise DataError("need at least one genuine and one impostor score")
    thresholds = np.linspace(0.0, 1.0, points)
    # accept rule: score >= threshold
    far = np.array([(imp >= t).mean() for t in thresholds])
    frr = np.array([(gen < t).mean() for t in thresholds])
    eer, eer_t = _interpolated_eer(thresholds, far, frr)
    return EvalResult(
        thresholds=thresholds,
        far=far,
        frr=frr,
        eer=eer,
        eer_threshold=eer_t,
        genuine_scores=gen.tolist(),
        impostor_scores=imp.tolist(),
    )


def _interpolated_eer(t: np.ndarray, far: np.ndarray, frr: np.ndarray) -> tuple[float, float]:
    d = far - frr  # nonincreasing in t
    idx = int(np.argmax(d <= 0)) if (d <= 0).any() else len(t) - 1
    if idx == 0 or d[idx] == 0.0:
        return float((far[idx] + frr[idx]) / 2.0), float(t[idx])
    # linear interpolation of both curves on [t[idx-1], t[idx]]
    t0, t1 = t[idx - 1], t[idx]
    f0, f1 = far[idx - 1], far[idx]
    r0, r1 = frr[idx - 1], frr[idx]
    denom = (f1 - f0) - (r1 - r0)
    alpha = 0.5 if abs(denom) < 1e-15 else (r0 - f0) / denom
    alpha = min(max(alpha, 0.0), 1.0)
    eer = f0 + alpha * (f1 - f0)
    return float(eer), float(t0 + alpha * (t1 - t0))


def enroll_subject(index: DatasetIndex, subject_id: str, cfg: RunConfig) -> TemplateRecord:
    """Build one subject's template: first fingerprint impression plus a
    majority-vote iris code over the designated enrollment images.

    Iris codes of different limbic depth are cut to their common row count
    before voting.
    """
    subject = index.subject(subject_id)
    if len(subject.fingerprints) < cfg.eval.enroll_fp or cfg.eval.enroll_fp < 1:
        raise DataError(f"{subject_id}: needs >= {max(cfg.eval.enroll_fp, 1)} fingerprint images")
    if len(subject.irises) < cfg.eval.enroll_iris:
        raise DataError(f"{subject_id}: needs >= {cfg.eval.enroll_iris} iris images")

    fp_image = load_gray(subject.fingerprints[0])
    minutiae = fingerprint_features(fp_image, cfg).minutiae

    codes = [
        iris_code_features(load_gray(path), cfg)
        for path in subject.irises[: cfg.eval.enroll_iris]
    ]
    rows = min(c.rows for c in codes)
    codes = [truncate_rows(c, rows) for c in codes]
    iris_template = majority_template(codes)
    return TemplateRecord(
        subject_id=subject_id,
        fingerprint=minutiae,
        iris=iris_template,
        created_at=time.time(),
    )


def probe_pairs(index: DatasetIndex, cfg: RunConfig) -> dict[str, list[tuple]]:
    """Held-out (fingerprint path, iris path) pairs per subject."""
    pairs = {}
    for subject in index.subjects:
        fps = subject.fingerprints[cfg.eval.enroll_fp :]
        irises = subject.irises[cfg.eval.enroll_iris :]
        pairs[subject.subject_id] = list(zip(fps, irises))
    return pairs


def evaluate_dataset(
    index: DatasetIndex,
    cfg: RunConfig,
    templates: dict[str, TemplateRecord],
) -> tuple[dict[str, EvalResult], list[TrialRecord]]:
    """Run the full verification protocol; returns per-trait results.

    Keys: "fused", "fingerprint", "iris".  Deterministic: subjects and
    probes are visited in sorted index order.
    """
    if len(index.subjects) < 2:
        raise DataError("evaluation needs at least two subjects")
    pairs = probe_pairs(index, cfg)

    trials: list[TrialRecord] = []
    for subject in index.subjects:
        sid = subject.subject_id
        for fp_path, iris_path in pairs[sid]:
            probe_fp = load_gray(fp_path)
            probe_iris = load_gray(iris_path)
            for template_sid in sorted(templates):
                scores = score_probe_pair(
                    probe_fp, probe_iris, templates[template_sid], cfg
                )
                trials.append(
                    TrialRecord(
                        probe_subject=sid,
                        template_subject=template_sid,
                        genuine=sid == template_sid,
                        fingerprint=scores.decision.component_scores[0],
                        iris=scores.decision.component_scores[1],
                        fused=scores.decision.fused_score,
                    )
                )

    results = {}
    for key, attr in (("fused", "fused"), ("fingerprint", "fingerprint"), ("iris", "iris")):
        gen = [getattr(tr, attr) for tr in trials if tr.genuine]
        imp = [getattr(tr, attr) for tr in trials if not tr.genuine]
        results[key] = sweep(gen, imp, cfg.eval.sweep_points)
    return results, trials
