"""
staleboost - stochastic gradient boosting trained through an asynchronous
parameter server with bounded staleness, plus a convergence-theory calculator.

Packages under ``src/`` are imported as top-level packages
(``core``, ``dataset``, ``boosting``, ``training``, ``theory``, ``cli``).
"""

__version__ = "0.1.0"
