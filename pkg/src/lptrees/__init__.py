"""Derivation-tree semantics for logic programs.

Builds and-or trees, coinductive trees, saturated trees, and goal trees
for finite logic programs at bounded depth, together with the structural
operations connecting them and a classical SLD resolution oracle.
"""

__version__ = "0.1.0"
