from .requests import (
    CommandRequest,
    DpcRequest,
    FpmRequest,
    GradcheckRequest,
    InferRequest,
    MakeDatasetRequest,
    MetricsRequest,
    SimulateRequest,
    StitchRequest,
    TrainRequest,
)
