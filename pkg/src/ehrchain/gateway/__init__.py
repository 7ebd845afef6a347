"""Front-door service and HTTP API."""

from .config import GatewayConfig
from .http import create_app
from .service import FetchResult, FinalizeResult, Gateway, RequestResult, SessionIdentity
from .vitals import PARAMETER_LABELS, PARAMETERS, SensorReading, format_reading

__all__ = [
    "FetchResult",
    "FinalizeResult",
    "Gateway",
    "GatewayConfig",
    "PARAMETERS",
    "PARAMETER_LABELS",
    "RequestResult",
    "SensorReading",
    "SessionIdentity",
    "create_app",
    "format_reading",
]
