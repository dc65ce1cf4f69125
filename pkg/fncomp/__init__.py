"""This package computes rate regions for distributed function computation"""
from . import info, conf, model, graphs, sets, entropy, regions, laws, util


__version__ = info.VERSION


__all__ = [
    "conf",
    "model",
    "graphs",
    "sets",
    "entropy",
    "regions",
    "laws",
    "util",
]
