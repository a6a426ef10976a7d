"""Python bindings for the oblique-switch library."""

from ._core import (  # noqa: F401
    ConfigError,
    GeometryError,
    StabilityError,
    CapabilityError,
    OswitchError,
    Model,
    builtin_model,
    model_from_arrays,
    nonemptiness_report,
    membership,
    oblique_project,
    slice_vertices,
    slice_polygon,
    build_h,
    verify_h,
    solve_config,
    run_command,
)

__all__ = [name for name in dir() if not name.startswith("_")]
