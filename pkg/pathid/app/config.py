"""
Configuration management for the simulator
"""
from pathlib import Path
from typing import Optional

import yaml
from dotenv import load_dotenv
from loguru import logger
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

# Load environment variables
load_dotenv()

# Project root directory
PROJECT_ROOT = Path(__file__).parent.parent.parent


class Settings(BaseSettings):
    """Process-wide settings"""

    model_config = SettingsConfigDict(
        env_prefix="PATHID_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    # Logging
    LOG_LEVEL: str = Field(default="WARNING", description="Console log level")
    LOG_FILE: Optional[str] = Field(default=None, description="Optional log file with rotation")

    # Scans
    SCAN_GRID_POINTS: int = Field(default=73, ge=2, description="Default points per 2*pi axis (5 degree steps)")
    FIT_MAX_ITERATIONS: int = Field(default=2000, ge=10, description="Function evaluation budget for fringe fits")

    # Output
    OUTPUT_DIGITS: int = Field(default=12, ge=1, le=17, description="Significant digits of floats in output files")

    # Partition
    PHASE_TOLERANCE: float = Field(default=1e-9, gt=0, description="Tolerance (rad) for detecting a dark block")

    # Tilt calibration anchor and beam geometry
    TILT_ANCHOR_ANGLE_DEG: float = Field(default=0.1, gt=0, description="Tilt angle of the calibration anchor")
    TILT_ANCHOR_OVERLAP: float = Field(default=0.97, gt=0, lt=1, description="Overlap at the anchor angle")
    BEAM_WAIST: float = Field(default=50e-6, gt=0, description="Beam waist (m)")
    BEAM_WAVELENGTH: float = Field(default=810e-9, gt=0, description="Down-converted wavelength (m)")
    PROPAGATION_DISTANCE: float = Field(default=0.4, gt=0, description="Propagation distance between crystals (m)")


# Global settings instance
settings = Settings()


def load_config_file(config_path: Path) -> dict:
    """Load configuration from YAML file"""
    if config_path.exists():
        with open(config_path, "r", encoding="utf-8") as f:
            return yaml.safe_load(f) or {}
    return {}


def update_settings(config_dict: dict, target: Settings = settings):
    """Update settings from a (possibly nested) dictionary; scan.grid_points -> SCAN_GRID_POINTS"""
    for key, value in config_dict.items():
        if isinstance(value, dict):
            update_settings({f"{key}_{sub_key}": sub_value for sub_key, sub_value in value.items()}, target)
            continue
        upper_key = key.upper()
        if upper_key in Settings.model_fields:
            setattr(target, upper_key, value)
        else:
            logger.warning(f"Ignoring unknown setting '{key}'")


# Load configuration from file if exists
config_file = PROJECT_ROOT / "config" / "settings.yaml"
if config_file.exists():
    update_settings(load_config_file(config_file))


# Export settings
__all__ = ["settings", "Settings", "update_settings", "load_config_file"]
