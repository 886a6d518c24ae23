"""Per-pixel exposure trajectories: blur synthesis, recovery and frame extraction.

Images are float64 arrays of shape (H, W, C) with values in [0, 1]; flows are
(H, W, 2) arrays of (x, y) displacements in pixels.
"""

from ._etraj import (
    ArgumentError,
    DimensionError,
    Error,
    FormatError,
    IoError,
    NonFiniteLoss,
    TrajectoryField,
    create_blur,
    endpoint_error,
    extract_frames,
    flow_to_color,
    generate_flow,
    load_image,
    motion_mse,
    num_threads,
    psnr,
    read_trajectory,
    reblur,
    recover,
    render_blur,
    save_image,
    set_num_threads,
    ssim,
    write_trajectory,
)

__all__ = [name for name in dir() if not name.startswith("_")]
