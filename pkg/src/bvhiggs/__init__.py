"""Finite-dimensional homological models of gauge theories with broken
symmetry: cochain complexes with shifted symplectic pairings, deformation
retracts onto reduced field content, bracket hierarchies with homotopy
transfer, and one-parameter gauge-fixing operator families.  Every structural
identity the package relies on is checked by machine, exactly where the
scalar field allows it.
"""

__version__ = "0.1.0"
