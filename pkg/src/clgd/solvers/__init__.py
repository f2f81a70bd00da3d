from .adam import AdamState, OptimizerConfig, adam_step
from .flow import FLOW_DEFAULTS, FlowField, estimate_flow, smoothness, smoothness_gradient
from .lie import se3_exp, se3_left_jacobian, se3_log, so3_exp, so3_log
from .registration import REGISTRATION_DEFAULTS, RigidTransform, SolveTrace, register_rigid

__all__ = [
    "AdamState", "OptimizerConfig", "adam_step",
    "FLOW_DEFAULTS", "FlowField", "estimate_flow", "smoothness", "smoothness_gradient",
    "se3_exp", "se3_left_jacobian", "se3_log", "so3_exp", "so3_log",
    "REGISTRATION_DEFAULTS", "RigidTransform", "SolveTrace", "register_rigid",
]
