"""
Base handler class for all subcommands
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

from loguru import logger

from pathid.app.run_config import RunConfig
from pathid.core.scan import ScanResult
from pathid.utils.timing import timer


@dataclass
class CommandResult:
    """Structured output of one subcommand"""
    command: str
    record: Dict[str, Any] = field(default_factory=dict)
    table: Optional[ScanResult] = None


class BaseHandler(ABC):
    """Abstract base class for all subcommand handlers"""

    name: str = ""
    required_blocks: Tuple[str, ...] = ()

    def __init__(self, config: RunConfig):
        self.config = config
        self._initialized = False

    def initialize(self):
        """Check the config carries what this command needs, then resolve domain objects"""
        if not self._initialized:
            for block in self.required_blocks:
                self.config.require(block, self.name)
            self._setup()
            self._initialized = True
            logger.debug(f"{self.__class__.__name__} initialized")

    @abstractmethod
    def _setup(self):
        """Build domain objects from the config - to be implemented by subclasses"""
        pass

    @abstractmethod
    def process(self) -> CommandResult:
        """Run the command - to be implemented by subclasses"""
        pass

    def run(self) -> CommandResult:
        self.initialize()
        logger.info(f"Running '{self.name}'")
        with timer(f"command '{self.name}'"):
            result = self.process()
        logger.info(f"'{self.name}' finished")
        return result
