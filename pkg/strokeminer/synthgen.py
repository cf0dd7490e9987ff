"""
Seeded synthetic forehand strokes for expert, intermediate and novice players.

Every marker hangs off a rigid arm-to-racket chain that rotates about the
shoulder through a smooth take-back-to-follow-through swing. ``marker_coupling``
mixes that common motion with independent per-marker wobble; Gaussian pixel
noise and a shoulder random walk are added on top. A recording depends only on
its (profile, seed) pair.
"""
import dataclasses
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from strokeminer.strokedata import DEFAULT_FPS, N_MARKERS, SkillClass, StrokeRecording
from strokeminer.utils.config_util import config_section
from strokeminer.utils.error_util import InvalidParameter
from strokeminer.utils.seed_util import derive_seed, make_rng

log = logging.getLogger(__name__)

# distance of markers 1..9 from the shoulder along the arm chain, pixels
ARM_RADII = np.array([0.0, 18.0, 120.0, 135.0, 230.0, 240.0, 280.0, 290.0, 340.0])
# sideways offset from the chain axis: the two forearm bones and the two racket edges
ARM_OFFSETS = np.array([0.0, 0.0, 8.0, -8.0, 8.0, -8.0, 15.0, -15.0, 0.0])
SHOULDER_ORIGIN = np.array([256.0, 200.0])

PRESET_FIELDS = ("swing_amplitude", "start_angle", "shoulder_travel", "noise_sigma", "marker_coupling",
                 "shoulder_drift_sigma", "phase_jitter", "frame_count_range")


@dataclass(frozen=True)
class SkillProfile:
    """
    Generator settings for one skill class.

    :param swing_amplitude: arc length travelled by the racket top, pixels.
    :param start_angle: arm angle at take-back, radians.
    :param shoulder_travel: forward shoulder shift over the swing, pixels.
    :param noise_sigma: per-coordinate pixel noise.
    :param marker_coupling: 1 moves every marker with the arm, 0 lets each wander on its own.
    :param shoulder_drift_sigma: step size of the shoulder random walk, pixels.
    :param phase_jitter: largest timing warp of the swing.
    :param frame_count_range: inclusive bounds of the recording length.
    """
    skill: SkillClass
    swing_amplitude: float
    start_angle: float
    shoulder_travel: float
    noise_sigma: float
    marker_coupling: float
    shoulder_drift_sigma: float
    phase_jitter: float
    frame_count_range: Tuple[int, int]

    def __post_init__(self):
        object.__setattr__(self, "skill", SkillClass.parse(self.skill))
        object.__setattr__(self, "frame_count_range", tuple(int(v) for v in self.frame_count_range))
        low, high = self.frame_count_range
        if not 2 <= low <= high:
            raise InvalidParameter(f"{self.skill.value}: bad frame_count_range {self.frame_count_range}")
        if self.noise_sigma < 0 or self.shoulder_drift_sigma < 0:
            raise InvalidParameter(f"{self.skill.value}: noise and drift sigmas must be >= 0")
        if not 0 <= self.marker_coupling <= 1:
            raise InvalidParameter(f"{self.skill.value}: marker_coupling must be in [0, 1]")
        if not 0 <= self.phase_jitter < 1:
            raise InvalidParameter(f"{self.skill.value}: phase_jitter must be in [0, 1)")

    @classmethod
    def from_config(cls, config: dict, skill) -> "SkillProfile":
        """
        The configured preset for a class. Without an explicit intermediate preset,
        intermediate is the midpoint of expert and novice.
        """
        skill = SkillClass.parse(skill)
        presets = config_section(config, "synth").get("presets", {})
        if skill.value in presets:
            return cls(skill, **presets[skill.value])
        if skill == SkillClass.INTERMEDIATE:
            expert = cls.from_config(config, SkillClass.EXPERT)
            novice = cls.from_config(config, SkillClass.NOVICE)
            return expert.interpolate(novice, 0.5, SkillClass.INTERMEDIATE)
        raise InvalidParameter(f"no synthesis preset for {skill.value}")

    def interpolate(self, other: "SkillProfile", t: float, skill) -> "SkillProfile":
        values = {}
        for name in PRESET_FIELDS:
            a, b = getattr(self, name), getattr(other, name)
            if name == "frame_count_range":
                values[name] = tuple(int(round((1 - t) * x + t * y)) for x, y in zip(a, b))
            else:
                values[name] = (1 - t) * a + t * b
        return SkillProfile(skill, **values)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class CohortSpec:
    entries: Tuple[Tuple[SkillProfile, int], ...]

    @classmethod
    def reference(cls, config: dict) -> "CohortSpec":
        """7 expert, 3 intermediate and 5 novice players unless the config says otherwise."""
        counts = config_section(config, "synth").get("reference_cohort", {"expert": 7, "intermediate": 3, "novice": 5})
        return cls(tuple((SkillProfile.from_config(config, skill), int(counts.get(skill.value, 0)))
                         for skill in SkillClass))

    @classmethod
    def single(cls, profile: SkillProfile, count: int) -> "CohortSpec":
        return cls(((profile, count),))

    @property
    def size(self) -> int:
        return sum(count for _, count in self.entries)


def _swing_progress(u: np.ndarray, phase: float) -> np.ndarray:
    """Eased 0 -> 1 swing progress with a timing warp; fastest near mid-swing."""
    warped = u + (phase / np.pi) * np.sin(np.pi * u)
    return 0.5 * (1 - np.cos(np.pi * warped))


def _wobble(rng: np.random.Generator, u: np.ndarray, amplitude: np.ndarray) -> np.ndarray:
    """Independent slow oscillation per marker and axis, shape (frames, 9, 2)."""
    cycles = rng.uniform(2.0, 6.0, size=(N_MARKERS, 2))
    phases = rng.uniform(0.0, 2 * np.pi, size=(N_MARKERS, 2))
    wave = np.sin(2 * np.pi * cycles[None] * u[:, None, None] + phases[None])
    return amplitude[None, :, None] * wave


def generate_recording(profile: SkillProfile, seed: int, subject_id: Optional[str] = None,
                       fps: float = DEFAULT_FPS) -> StrokeRecording:
    """
    One raw (not normalized) recording, fully determined by (profile, seed).
    """
    rng = make_rng(seed)
    low, high = profile.frame_count_range
    n_frames = int(rng.integers(low, high + 1))
    u = np.linspace(0.0, 1.0, n_frames)
    phase = rng.uniform(-profile.phase_jitter, profile.phase_jitter) if profile.phase_jitter else 0.0
    progress = _swing_progress(u, phase)

    theta = profile.start_angle - (profile.swing_amplitude / ARM_RADII[-1]) * progress
    along = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    across = np.stack([-np.sin(theta), np.cos(theta)], axis=1)

    steps = rng.normal(0.0, profile.shoulder_drift_sigma, size=(n_frames, 2))
    steps[0] = 0.0
    shoulder = SHOULDER_ORIGIN + np.outer(progress, (profile.shoulder_travel, 0.0)) + np.cumsum(steps, axis=0)

    chain = ARM_RADII[None, :, None] * along[:, None, :] + ARM_OFFSETS[None, :, None] * across[:, None, :]
    wobble = _wobble(rng, u, 0.5 * profile.swing_amplitude * ARM_RADII / ARM_RADII[-1])
    noise = rng.normal(0.0, profile.noise_sigma, size=(n_frames, N_MARKERS, 2))

    c = profile.marker_coupling
    coords = shoulder[:, None, :] + c * chain + (1 - c) * wobble + noise
    subject_id = subject_id or f"{profile.skill.value}_{seed}"
    return StrokeRecording(subject_id, profile.skill, coords, fps)


def generate_cohort(spec: CohortSpec, seed: int) -> List[StrokeRecording]:
    """
    Recordings for every (profile, count) entry in order. Recording i overall gets
    seed ``derive_seed(seed, i)``; subject ids are ``{class}_{index}`` with a
    1-based index per class.
    """
    recs = []
    per_class: Dict[SkillClass, int] = {}
    for profile, count in spec.entries:
        for _ in range(count):
            per_class[profile.skill] = per_class.get(profile.skill, 0) + 1
            subject_id = f"{profile.skill.value}_{per_class[profile.skill]}"
            recs.append(generate_recording(profile, derive_seed(seed, len(recs)), subject_id))
    log.info(f"synthesized {len(recs)} recordings: "
             + ", ".join(f"{n} {skill.value}" for skill, n in per_class.items()))
    return recs
