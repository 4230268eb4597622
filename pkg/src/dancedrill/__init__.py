"""dancedrill: a hardware-free dance training engine.

Ingests 20-joint skeleton streams, scores pose and rhythm against
reference clips, drives the session and audience state machines, and
emits spatialized sound cue events. A seeded replay simulator stands in
for a depth camera; a thin wire protocol serves machines and UIs alike.
"""

__version__ = "0.1.0"

from .skeleton import JointId, SkeletonFrame, NormalizedPose, normalize, validate_frame

__all__ = [
    "JointId",
    "SkeletonFrame",
    "NormalizedPose",
    "normalize",
    "validate_frame",
    "__version__",
]
