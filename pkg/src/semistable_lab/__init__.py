"""Desk-scale verification suite for semistable reduction data.

Exact finite-precision l-adic lattice calculus, ramification filtrations,
binary quadratic form class numbers, cyclotomic unit images, prime-conductor
elliptic curve families, and the explicit two-generator Galois module
calculus, with a deterministic JSON command line on top.

All arithmetic is exact (Python integers and fractions.Fraction); nothing
here samples, rounds, or depends on wall-clock state.
"""

__version__ = "0.1.0"
