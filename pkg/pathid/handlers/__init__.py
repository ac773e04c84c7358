# Subcommand handlers

from .base import BaseHandler, CommandResult
from .rate_handler import RateHandler
from .scan_handler import ScanHandler
from .partition_handlers import BlockHandler, DualityHandler, GedankenHandler
from .imperfection_handlers import EstimateV13Handler, ImperfectHandler, OPLDHandler

HANDLERS = {
    handler.name: handler
    for handler in (
        RateHandler,
        ScanHandler,
        DualityHandler,
        BlockHandler,
        GedankenHandler,
        ImperfectHandler,
        EstimateV13Handler,
        OPLDHandler,
    )
}

__all__ = ['BaseHandler', 'CommandResult', 'HANDLERS']
