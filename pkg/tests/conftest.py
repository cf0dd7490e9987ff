from __future__ import annotations

import pytest

from strokeminer.strokedata import SkillClass, StrokeRecording, normalize_origin
from strokeminer.synthgen import CohortSpec, SkillProfile, generate_cohort
from strokeminer.utils.config_util import config
from tests.helpers import linear_coords, make_recording


@pytest.fixture
def smooth_recording() -> StrokeRecording:
    return make_recording(linear_coords(80))


@pytest.fixture(scope="session")
def default_config() -> dict:
    return config


@pytest.fixture(scope="session")
def expert_profile() -> SkillProfile:
    return SkillProfile.from_config(config, SkillClass.EXPERT)


@pytest.fixture(scope="session")
def novice_profile() -> SkillProfile:
    return SkillProfile.from_config(config, SkillClass.NOVICE)


@pytest.fixture(scope="session")
def reference_cohort():
    """The 7 / 3 / 5 synthetic cohort at seed 42, normalized."""
    return [normalize_origin(r) for r in generate_cohort(CohortSpec.reference(config), 42)]
