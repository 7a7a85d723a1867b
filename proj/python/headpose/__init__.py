"""Head pose estimation from four labeled facial landmarks."""

from ._headpose import (
    HeadposeError,
    __version__,
    compose_rotation,
    default_model,
    estimate_pose,
    euler_from_rotation,
    fit_sphere,
    generate_scene,
)

__all__ = [
    "HeadposeError",
    "__version__",
    "compose_rotation",
    "default_model",
    "estimate_pose",
    "euler_from_rotation",
    "fit_sphere",
    "generate_scene",
]
