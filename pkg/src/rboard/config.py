"""Runtime configuration, overridable through ``RBOARD_*`` environment keys."""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace

GIB = 2**30
MIB = 2**20


@dataclass(frozen=True)
class PlatformConfig:
    wall_timeout_seconds: float = 3600.0
    memory_bytes: int = 8 * GIB
    max_output_bytes: int = 1 * GIB
    workers: int = field(default_factory=lambda: max(1, (os.cpu_count() or 2) // 2))
    command_template: str = "python3 {entry}"
    archive_size_cap_bytes: int = 256 * MIB
    log_bound_bytes: int = 64 * 1024
    timeout_grace_seconds: float = 1.0
    listen: str = "127.0.0.1:8000"

    def __post_init__(self):
        if self.wall_timeout_seconds <= 0:
            raise ValueError("wall_timeout_seconds must be positive")
        if self.memory_bytes <= 0 or self.max_output_bytes <= 0:
            raise ValueError("resource limits must be positive")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


def config_from_env(env: dict[str, str] | None = None, **overrides) -> PlatformConfig:
    """Build a config from ``RBOARD_*`` keys; explicit overrides win."""
    env = os.environ if env is None else env
    kwargs = {}
    if "RBOARD_TIMEOUT_SECS" in env:
        kwargs["wall_timeout_seconds"] = float(env["RBOARD_TIMEOUT_SECS"])
    if "RBOARD_MEM_BYTES" in env:
        kwargs["memory_bytes"] = int(env["RBOARD_MEM_BYTES"])
    if "RBOARD_WORKERS" in env:
        kwargs["workers"] = int(env["RBOARD_WORKERS"])
    if "RBOARD_CMD_TEMPLATE" in env:
        kwargs["command_template"] = env["RBOARD_CMD_TEMPLATE"]
    if "RBOARD_LISTEN" in env:
        kwargs["listen"] = env["RBOARD_LISTEN"]
    kwargs.update(overrides)
    return PlatformConfig(**kwargs)


def with_overrides(config: PlatformConfig, **overrides) -> PlatformConfig:
    return replace(config, **overrides)
