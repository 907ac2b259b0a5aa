"""Bayesian study-level surrogate endpoint evaluation.

Thin Python layer over the C++ core: dataset IO, the three samplers
(standard / F-EX / P-EX), surrogacy criteria, leave-one-study-out
prediction and the simulation-study generator.
"""

from _surrex import *  # noqa: F401,F403
from _surrex import __version__  # noqa: F401
