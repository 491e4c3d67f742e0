"""Quasi-static simulator for a two-finger soft/rigid hybrid gripper."""

from hybridgrip.geometry import FingerPose, FingertipGeometry
from hybridgrip.joint import JointCalibrationGrid, JointStiffnessModel
from hybridgrip.sheet import SheetSpec

__all__ = [
    "FingerPose",
    "FingertipGeometry",
    "JointCalibrationGrid",
    "JointStiffnessModel",
    "SheetSpec",
]

__version__ = "0.1.0"
