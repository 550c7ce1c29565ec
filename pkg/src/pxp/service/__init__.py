"""Local HTTP service exposing the warning engine to on-device clients."""

from pxp.service.app import (
    DEFAULT_BUDGET_MS,
    DEFAULT_MAX_QUEUE,
    AuthFailed,
    BudgetExceeded,
    ExplainRequestModel,
    ServiceConfig,
    create_app,
)
from pxp.service.gates import FifoGate, GateTimeout, QueueFull, ServiceStats

__all__ = [
    "DEFAULT_BUDGET_MS",
    "DEFAULT_MAX_QUEUE",
    "AuthFailed",
    "BudgetExceeded",
    "ExplainRequestModel",
    "ServiceConfig",
    "create_app",
    "FifoGate",
    "GateTimeout",
    "QueueFull",
    "ServiceStats",
]
