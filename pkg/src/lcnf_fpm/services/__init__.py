from .evaluation_service import EvaluationService
from .gradcheck_service import run_gradcheck
from .reconstruction_service import ReconstructionService
from .simulation_service import SimulationService
from .training_service import TrainingService

__all__ = [
    "EvaluationService",
    "ReconstructionService",
    "SimulationService",
    "TrainingService",
    "run_gradcheck",
]
