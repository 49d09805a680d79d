"""Numerical laboratory for weak-type (Marcinkiewicz) characterizations of
Sobolev, Lebesgue and Campanato norms.

Submodules
----------
measure     weighted samples, distribution functions, weak/strong L^p
corpus      analytic test functions with derivative oracles, k(p,N), kappa_N
functionals Gagliardo / BSY / Bourgain-Nguyen / Gu-Yung / BBM functionals
maximal     grid maximal operators and the operator-family engine
extension   Poisson-type extensions, spectral fractional Laplacian, heat
metric      finite metric-measure spaces: Garsia, Vitali-Carleson, embeddings
cli         experiment runner
"""

__version__ = "0.1.0"
