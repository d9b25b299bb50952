"""Shared fixtures: a small scenario database and quickly trained twins."""

import numpy as np
import pytest

from plantloop.neural import TrainConfig
from plantloop.diagnosis import train_dtd
from plantloop.prognosis import train_dtp
from plantloop.plant import Simulator
from plantloop.scenario import (IssueSpaceSpec, ParamRule, generate_database,
                                split_database, ramp_fn)
from plantloop.strategy import build_reference_table

TAU0 = 636.57


@pytest.fixture(scope="session")
def small_spec():
    return IssueSpaceSpec(
        malfunction_magnitude=ParamRule.grid(0, 98, 4),
        mitigation_magnitude=ParamRule.grid(100, 150, 4),
        mitigation_start=ParamRule.grid(50, 100, 2),
        mitigation_end_offset=50.0)


@pytest.fixture(scope="session")
def small_db(small_spec):
    return generate_database(small_spec, seed=1)


@pytest.fixture(scope="session")
def small_splits(small_db):
    return split_database(small_db, seed=0)


@pytest.fixture(scope="session")
def small_dtd(small_db, small_splits):
    cfg = TrainConfig(sequence_length=5, batch_size=100, learning_rate=0.02,
                      epochs_max=15, validation_patience=6,
                      early_stop_patience=10, seed=0)
    return train_dtd(small_db, cfg, variant="rnn", hidden_size=16,
                     window_stride=6, splits=small_splits)


@pytest.fixture(scope="session")
def small_dtd_fnn(small_db, small_splits):
    cfg = TrainConfig(batch_size=200, learning_rate=0.02, epochs_max=15,
                      validation_patience=6, early_stop_patience=10, seed=0)
    return train_dtd(small_db, cfg, variant="fnn", hidden_size=16,
                     splits=small_splits)


@pytest.fixture(scope="session")
def small_dtp(small_db, small_splits):
    cfg = TrainConfig(sequence_length=14, batch_size=256, learning_rate=0.003,
                      epochs_max=60, validation_patience=12,
                      early_stop_patience=20, seed=0)
    return train_dtp(small_db, cfg, hidden_size=24, window_stride=6,
                     splits=small_splits)


@pytest.fixture(scope="session")
def small_ref_table():
    sim = Simulator()
    return build_reference_table(
        sim, np.linspace(TAU0, 1.6 * TAU0, 5), np.linspace(25, 115, 4),
        reference_malfunction=ramp_fn(10, 60, TAU0, 0.5 * TAU0))
