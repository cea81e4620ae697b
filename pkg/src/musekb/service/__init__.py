from .api import ServiceConfig, ServiceHandle, create_app, serve
from .simulate import SimulationBehavior, SimulationResult, simulate_annotators

__all__ = [
    "ServiceConfig",
    "ServiceHandle",
    "create_app",
    "serve",
    "SimulationBehavior",
    "SimulationResult",
    "simulate_annotators",
]
