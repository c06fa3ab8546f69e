"""Generalized derivatives of set-valued maps with polyhedral and smooth graph models.

Subpackages are plain modules:

subspace     linear subspaces, metric, adjoints
polyhedral   convex cones, unions of cones, polyhedra
maps         set-valued map variants and graphical Lipschitz charts
cones        tangent, paratingent and normal cone bundles
derivatives  graphical, strict and coderivatives, SC families
diagnostics  strict proto-differentiability and semismooth* batteries
regularity   metric regularity criteria
prox         prox-regular functions and trapezoid checks
corpus, cli  fixture corpora and the batch runner
"""

__version__ = "0.1.0"
