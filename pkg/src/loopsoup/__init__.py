"""Exact correlation functions of the Brownian loop soup.

Submodules: ``specfun`` (special functions), ``series`` (Puiseux series),
``weights`` (loop-measure coverage weights), ``correlators`` (closed-form
correlators), ``blocks`` (Virasoro block expansion), ``montecarlo``
(direct simulation) and ``cli``.
"""

__version__ = "0.1.0"
