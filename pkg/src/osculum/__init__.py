"""Order of tangency between embedded manifolds, by jets, curves and Grassmann lifts."""

__version__ = "0.1.0"
