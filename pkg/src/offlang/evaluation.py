"""Macro-F1 evaluation, majority-vote ensembling, and threshold search."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ClassScores:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class TaskReport:
    macro_f1: float
    per_class: dict[str, ClassScores]
    confusion: np.ndarray  # rows gold, cols predicted
    classes: tuple[str, ...]


@dataclass(frozen=True)
class EvalReport:
    tasks: dict[str, TaskReport]

    def to_lines(self) -> list[str]:
        lines = []
        for task, report in self.tasks.items():
            lines.append(f"task_{task}\tmacro_f1\t{report.macro_f1:.6f}")
            for cls in report.classes:
                s = report.per_class[cls]
                lines.append(
                    f"task_{task}\t{cls}\tP={s.precision:.6f}\t"
                    f"R={s.recall:.6f}\tF1={s.f1:.6f}"
                )
        return lines


def confusion_matrix(golds, preds, classes) -> np.ndarray:
    index = {c: i for i, c in enumerate(classes)}
    matrix = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for g, p in zip(golds, preds):
        matrix[index[g], index[p]] += 1
    return matrix


def task_report(golds, preds, classes) -> TaskReport:
    """Per-class precision/recall/F1 and their unweighted mean.

    A zero denominator (no predictions, no golds, or P+R == 0) defines the
    corresponding score as 0 rather than excluding the class.
    """
    if len(golds) != len(preds):
        raise ValueError("golds and preds must have the same length")
    if len(golds) == 0:
        raise ValueError("cannot evaluate an empty corpus")
    class_set = set(classes)
    for label in list(golds) + list(preds):
        if label not in class_set:
            raise ValueError(f"label {label!r} not in class set {classes}")

    matrix = confusion_matrix(golds, preds, classes)
    per_class = {}
    f1s = []
    for i, cls in enumerate(classes):
        tp = matrix[i, i]
        fp = matrix[:, i].sum() - tp
        fn = matrix[i, :].sum() - tp
        precision = tp / (tp + fp) if tp + fp > 0 else 0.0
        recall = tp / (tp + fn) if tp + fn > 0 else 0.0
        f1 = 2 * precision * recall / (precision + recall) \
            if precision + recall > 0 else 0.0
        per_class[cls] = ClassScores(precision, recall, f1)
        f1s.append(f1)
    return TaskReport(
        macro_f1=float(np.mean(f1s)),
        per_class=per_class,
        confusion=matrix,
        classes=tuple(classes),
    )


def macro_f1(golds, preds, classes) -> float:
    return task_report(golds, preds, classes).macro_f1


def evaluate(model, vocab, examples) -> EvalReport:
    """Batched prediction then per-task macro-F1 over a labeled corpus."""
    from .mtl import TASK_CLASSES
    from .tokenizer import encode_batch

    if not examples:
        raise ValueError("cannot evaluate an empty corpus")
    ids, mask = encode_batch(
        [ex.tweet.text for ex in examples], vocab, model.encoder_config.max_len
    )
    preds = model.forward_mtl(ids, mask)
    tasks = {}
    for task in ("a", "b", "c"):
        golds = [getattr(ex.labels, task).value for ex in examples]
        tasks[task] = task_report(
            golds, [p.label(task) for p in preds], TASK_CLASSES[task]
        )
    return EvalReport(tasks=tasks)


def majority_vote(member_predictions, task: str) -> list[str]:
    """Per-example plurality vote over ensemble members for one task.

    Ties are broken by the largest sum of member probabilities over the tied
    labels, then by class-list order.
    """
    from .mtl import TASK_CLASSES

    classes = TASK_CLASSES[task]
    lengths = {len(m) for m in member_predictions}
    if len(lengths) != 1:
        raise ValueError("ensemble members predicted different example counts")
    if not member_predictions:
        raise ValueError("need at least one ensemble member")

    n = lengths.pop()
    results = []
    for i in range(n):
        votes = np.zeros(len(classes))
        prob_sums = np.zeros(len(classes))
        for member in member_predictions:
            pred = member[i]
            votes[classes.index(pred.label(task))] += 1
            prob_sums += pred.probs(task)
        top = votes.max()
        tied = [j for j in range(len(classes)) if votes[j] == top]
        winner = max(tied, key=lambda j: (prob_sums[j], -j))
        results.append(classes[winner])
    return results


def vote_triples(member_predictions) -> list[tuple[str, str, str]]:
    """Majority vote independently per task; one label triple per example."""
    per_task = {t: majority_vote(member_predictions, t) for t in ("a", "b", "c")}
    return list(zip(per_task["a"], per_task["b"], per_task["c"]))


def threshold_search(scored, golds, grid) -> tuple[float, bool]:
    """Grid value maximizing macro-F1 of thresholded scores against gold
    task-A labels; ties go to the smallest threshold. The flag reports a
    degenerate search (constant F1 across the grid)."""
    from .corpus import binarize

    if not scored or not golds:
        raise ValueError("threshold search needs non-empty data")
    if len(scored) != len(golds):
        raise ValueError("scored examples and golds must align")
    grid = sorted(grid)
    if not grid or grid[0] <= 0.0 or grid[-1] >= 1.0:
        raise ValueError("grid must be non-empty and inside (0, 1)")

    scores = []
    for threshold in grid:
        preds = [ex.labels.a.value for ex in binarize(scored, threshold)]
        scores.append(macro_f1(golds, preds, ["OFF", "NOT"]))
    best_index = int(np.argmax(scores))  # argmax takes the first (smallest) tie
    degenerate = max(scores) - min(scores) < 1e-12
    return grid[best_index], degenerate
