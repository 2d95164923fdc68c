"""Synthetic tabular data shaped like census extracts, for desk-scale sweeps."""
from __future__ import annotations

import numpy as np
import pandas as pd

FEATURES = ("age", "education_num", "hours_per_week", "log_income")


def adult_style_frame(n: int = 1000, seed: int = 0, n_blobs: int = 6,
                      minority_share: float = 0.33) -> pd.DataFrame:
    """Gaussian blobs over four numeric columns plus a binary ``sex`` column.

    The minority share varies by blob (between roughly half and one and a
    half times ``minority_share``), so color-blind clusters are unbalanced
    while the overall split stays near ``minority_share``.
    """
    rng = np.random.default_rng(seed)
    centers = np.column_stack([
        rng.uniform(25, 60, n_blobs), rng.uniform(8, 15, n_blobs),
        rng.uniform(30, 50, n_blobs), rng.uniform(9, 12, n_blobs)])
    scales = np.array([6.0, 1.5, 5.0, 0.6])
    weights = rng.dirichlet(np.full(n_blobs, 8.0))
    blob = rng.choice(n_blobs, size=n, p=weights)
    X = centers[blob] + rng.normal(size=(n, 4)) * scales
    tilt = np.linspace(0.5, 1.5, n_blobs)
    rng.shuffle(tilt)
    p_min = np.clip(minority_share * tilt[blob], 0.02, 0.98)
    sex = np.where(rng.random(n) < p_min, "Female", "Male")
    df = pd.DataFrame(X.round(3), columns=list(FEATURES))
    df.insert(0, "sex", sex)
    return df
