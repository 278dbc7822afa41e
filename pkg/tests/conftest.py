"""Shared fixtures: the calibrated scale table and the hole-volume law.

Building these takes minutes of Monte Carlo, so they are computed once
per seed and cached on disk (FROZEN_CACHE_DIR, or ~/.cache/frozenperc).
Everything downstream is a deterministic function of the master seed, so
the cache never goes stale except through a schema bump.
"""

import os
from pathlib import Path

import pytest

from frozenperc.harness import (
    calibrate,
    load_calibration,
    sample_hole_law,
    save_calibration,
)

ACCEPTANCE_SEED = 20260808
LAW_GRID = (0.60, 0.63, 0.66)
LAW_SAMPLES = 2000


def _cache_root() -> Path:
    env = os.environ.get("FROZEN_CACHE_DIR")
    return Path(env) if env else Path.home() / ".cache" / "frozenperc"


@pytest.fixture(scope="session")
def calibration():
    """(ScaleTable, EmpiricalHoleLaw) for the acceptance suite."""
    path = _cache_root() / f"acceptance-cal-{ACCEPTANCE_SEED}.json"
    if path.exists():
        try:
            table, law = load_calibration(path)
            if law is not None:
                return table, law
        except Exception:
            pass
    table = calibrate(seed=ACCEPTANCE_SEED)
    law = sample_hole_law(ACCEPTANCE_SEED, table, p_grid=LAW_GRID,
                          samples_per_p=LAW_SAMPLES, threads=3)
    save_calibration(table, law, path)
    return table, law


@pytest.fixture(scope="session")
def scale_table(calibration):
    return calibration[0]


@pytest.fixture(scope="session")
def hole_law(calibration):
    return calibration[1]
