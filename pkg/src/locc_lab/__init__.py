"""Local discrimination of maximally entangled states.

Constructions of orthogonal maximally entangled state families, PPT
discrimination measurements, one-way LOCC impossibility certificates, and
exact / Monte Carlo execution of adaptive LOCC protocols.
"""

__version__ = "0.1.0"
