"""Python bindings for the puppetai control stack."""

import os
from pathlib import Path

from ._core import (
    PuppetError,
    cable_displacement,
    decode_frame,
    encode_set_target,
    format_sequence,
    forward_kinematics,
    parse_sequence,
    play,
    respond,
    run_script,
    transcribe,
)
from ._core import __version__, _build_data_dir


def data_dir() -> Path:
    """Bundled data: PUPPETAI_DATA_DIR, then the installed copy, then the source tree."""
    env = os.environ.get("PUPPETAI_DATA_DIR")
    if env:
        return Path(env)
    packaged = Path(__file__).with_name("data")
    if packaged.is_dir():
        return packaged
    return Path(_build_data_dir)


def demo_config() -> Path:
    return data_dir() / "demo_config.json"


def script(name: str) -> Path:
    return data_dir() / "scripts" / f"{name}.json"


__all__ = [
    "PuppetError",
    "cable_displacement",
    "data_dir",
    "decode_frame",
    "demo_config",
    "encode_set_target",
    "format_sequence",
    "forward_kinematics",
    "parse_sequence",
    "play",
    "respond",
    "run_script",
    "script",
    "transcribe",
]
