"""Python access to the uadrive simulator, supervisor and uncertainty helpers."""

from ._uadrive import (
    Authority,
    SupervisorConfig,
    SupervisorState,
    Track,
    UadriveError,
    builtin_track_names,
    compile_builtin,
    config_canonical_text,
    config_digest,
    kl_to_prior,
    lidar_scan,
    normal,
    run_pid_episode,
    signed_cov,
    softplus,
    summarize,
    supervisor_update,
)

__all__ = [
    "Authority",
    "SupervisorConfig",
    "SupervisorState",
    "Track",
    "UadriveError",
    "builtin_track_names",
    "compile_builtin",
    "config_canonical_text",
    "config_digest",
    "kl_to_prior",
    "lidar_scan",
    "normal",
    "run_pid_episode",
    "signed_cov",
    "softplus",
    "summarize",
    "supervisor_update",
]
