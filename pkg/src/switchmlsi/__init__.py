"""MLSI and flow-comparison toolkit for finite reversible chains and the bipartite switch chain."""

__version__ = "0.1.0"
