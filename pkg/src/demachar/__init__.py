"""Graded characters of stable and generalized Demazure modules for current algebras."""

from .rootsys import RankedType, RootSystem, RootVec, Weight, build_root_system

__version__ = "0.1.0"
ENGINE_VERSION = "1"

__all__ = ["RankedType", "RootSystem", "RootVec", "Weight", "build_root_system", "__version__", "ENGINE_VERSION"]
