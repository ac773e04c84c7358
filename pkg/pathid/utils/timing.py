"""
Timing helpers
"""
import time
from typing import Optional

from loguru import logger


class timer:
    """Context manager for timing operations"""

    def __init__(self, label: str):
        self.label = label
        self.start_time: Optional[float] = None
        self.duration: Optional[float] = None

    def __enter__(self):
        self.start_time = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        if self.start_time is not None:
            self.duration = time.perf_counter() - self.start_time
            status = "failed after" if exc_type else "took"
            logger.debug(f"{self.label} {status} {self.duration * 1000:.1f} ms")
