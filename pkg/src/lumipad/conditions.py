"""Experimental condition: feedback type x descent speed class x drone count.

This triple is the grouping key for every statistic downstream, so it lives
in its own module; the harness re-exports it.
"""

from __future__ import annotations

from dataclasses import dataclass

FEEDBACK_TYPES = ("V", "T", "VT")
SPEED_CLASSES = ("slow", "fast")
SPEED_MPS = {"slow": 0.1, "fast": 0.15}
DRONE_COUNTS = (1, 2)


@dataclass(frozen=True)
class ConditionSpec:
    feedback: str = "VT"
    speed_class: str = "slow"
    drone_count: int = 1

    def __post_init__(self):
        if self.feedback not in FEEDBACK_TYPES:
            raise ValueError(f"feedback must be one of {FEEDBACK_TYPES}")
        if self.speed_class not in SPEED_CLASSES:
            raise ValueError(f"speed_class must be one of {SPEED_CLASSES}")
        if self.drone_count not in DRONE_COUNTS:
            raise ValueError(f"drone_count must be one of {DRONE_COUNTS}")

    @property
    def descent_speed(self) -> float:
        return SPEED_MPS[self.speed_class]

    def key(self) -> str:
        return f"{self.feedback}-{self.speed_class}-{self.drone_count}"

    def to_dict(self) -> dict:
        return {
            "feedback": self.feedback,
            "speed_class": self.speed_class,
            "drone_count": self.drone_count,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ConditionSpec":
        return cls(d["feedback"], d["speed_class"], int(d["drone_count"]))
