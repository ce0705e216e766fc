"""Min-max scaling state and the 1-5 score binarizer."""

from dataclasses import dataclass

import numpy as np

from .errors import DataError


@dataclass(frozen=True)
class MinMaxState:
    """Fitted value range of one numeric feature."""

    min: float
    max: float

    def __post_init__(self):
        if self.min > self.max:
            raise DataError("min-max state requires min <= max")


def fit_minmax(values, mask=None):
    """Observed min and max over non-null values; errors when all null."""
    values = np.asarray(values, dtype=np.float64)
    if mask is not None:
        values = values[~np.asarray(mask, dtype=bool)]
    if values.shape[0] == 0:
        raise DataError("cannot fit min-max on an all-null column")
    return MinMaxState(float(values.min()), float(values.max()))


def transform_minmax(state, x):
    """Affine map onto [0,1] over the fitted range, no clamping.

    A constant fitted column maps every value to 0.5; out-of-range inputs
    extrapolate linearly.
    """
    x = np.asarray(x, dtype=np.float64)
    if state.max == state.min:
        return np.full_like(x, 0.5) if x.ndim else 0.5
    out = (x - state.min) / (state.max - state.min)
    return out if x.ndim else float(out)


def binarize_label(score):
    """Map a 1-5 rating to a binary label: 1-3 -> 0, 4-5 -> 1."""
    score = int(score)
    if score < 1 or score > 5:
        raise DataError(f"rating {score} outside 1-5")
    return 0 if score <= 3 else 1
