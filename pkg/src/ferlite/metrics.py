"""Confusion-matrix accounting and per-class recall/precision.

Rows index the actual class, columns the predicted class.  Classes that
never occur (empty row or column) have no defined recall or precision;
those return None rather than a made-up number.
"""

import numpy as np

from ferlite.errors import InputError
from ferlite.labels import EMOTIONS, NUM_CLASSES


def class_names(n_classes):
    if n_classes == NUM_CLASSES:
        return EMOTIONS
    return tuple(f"class{i}" for i in range(n_classes))


class ConfusionMatrix:
    """Square count matrix with counts[actual][predicted]."""

    def __init__(self, counts):
        counts = np.asarray(counts)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise InputError(f"confusion matrix must be square, got {counts.shape}")
        if counts.size == 0:
            raise InputError("confusion matrix must have at least one class")
        if not np.issubdtype(counts.dtype, np.integer):
            raise InputError("confusion matrix entries must be integers")
        if (counts < 0).any():
            raise InputError("confusion matrix entries must be non-negative")
        self.counts = counts.astype(np.int64)

    @property
    def n_classes(self):
        return self.counts.shape[0]

    @property
    def total(self):
        return int(self.counts.sum())

    def recall(self, i):
        """Fraction of actual class i predicted as i; None if i never occurs."""
        row = int(self.counts[i].sum())
        if row == 0:
            return None
        return int(self.counts[i, i]) / row

    def precision(self, i):
        """Fraction of predictions for class i that are correct; None if never predicted."""
        col = int(self.counts[:, i].sum())
        if col == 0:
            return None
        return int(self.counts[i, i]) / col

    def accuracy(self):
        """Overall fraction correct; None for an empty matrix."""
        total = self.total
        if total == 0:
            return None
        return int(np.trace(self.counts)) / total

    def per_class(self):
        """List of (name, recall, precision) over all classes."""
        names = class_names(self.n_classes)
        return [(names[i], self.recall(i), self.precision(i))
                for i in range(self.n_classes)]

    def normalized(self):
        """Row-normalized float matrix; all-zero rows stay zero."""
        counts = self.counts.astype(np.float64)
        sums = counts.sum(axis=1, keepdims=True)
        return np.divide(counts, sums, out=np.zeros_like(counts), where=sums > 0)

    def format_per_class(self):
        """Text table of per-class recall and precision, three decimals."""
        names = class_names(self.n_classes)
        width = max(len(n) for n in names + ("Emotion",))
        lines = [f"{'Emotion':<{width}}  {'Recall':>9}  {'Precision':>9}"]
        for name, rec, prec in self.per_class():
            lines.append(f"{name:<{width}}  {_cell(rec):>9}  {_cell(prec):>9}")
        acc = self.accuracy()
        lines.append(f"{'Accuracy':<{width}}  {_cell(acc):>9}")
        return "\n".join(lines) + "\n"

    def format_matrix(self, normalized=False):
        """Text rendering of the matrix, actual in rows, predicted in columns."""
        names = class_names(self.n_classes)
        label_w = max(len(n) for n in names)
        if normalized:
            body = self.normalized()
            cells = [[f"{v:.3f}" for v in row] for row in body]
        else:
            cells = [[str(int(v)) for v in row] for row in self.counts]
        col_w = max(len(n) for n in names)
        col_w = max(col_w, max(len(c) for row in cells for c in row))
        header = " " * label_w + "  " + "  ".join(f"{n:>{col_w}}" for n in names)
        lines = [header]
        for name, row in zip(names, cells):
            lines.append(f"{name:<{label_w}}  " + "  ".join(f"{c:>{col_w}}" for c in row))
        return "\n".join(lines) + "\n"

    def write_csv(self, fh):
        """Counts as CSV: header row of predicted labels, one row per actual label."""
        names = class_names(self.n_classes)
        fh.write("actual," + ",".join(names) + "\n")
        for name, row in zip(names, self.counts):
            fh.write(name + "," + ",".join(str(int(v)) for v in row) + "\n")


def _cell(value):
    return "-" if value is None else f"{value:.3f}"


def confusion_matrix(predictions, labels, n_classes=NUM_CLASSES):
    """Count (actual, predicted) pairs into a ConfusionMatrix."""
    predictions = np.asarray(predictions)
    labels = np.asarray(labels)
    if predictions.shape != labels.shape or predictions.ndim != 1:
        raise InputError(
            f"predictions and labels must be equal-length vectors, "
            f"got {predictions.shape} and {labels.shape}"
        )
    if n_classes < 1:
        raise InputError(f"n_classes must be positive, got {n_classes}")
    counts = np.zeros((n_classes, n_classes), dtype=np.int64)
    for actual, pred in zip(labels.tolist(), predictions.tolist()):
        if not 0 <= actual < n_classes:
            raise InputError(f"label {actual} outside 0..{n_classes - 1}")
        if not 0 <= pred < n_classes:
            raise InputError(f"prediction {pred} outside 0..{n_classes - 1}")
        counts[actual, pred] += 1
    return ConfusionMatrix(counts)
