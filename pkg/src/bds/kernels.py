"""Backend selection for the hot kernels.

The compiled extension ``bds._ckernels`` is used when it imports; otherwise
the numpy implementation in :mod:`bds._kernels_py` takes over. Setting
``BDS_PURE_PYTHON=1`` forces the fallback.
"""

import os

from . import _kernels_py as _py

Z_TEMPLATE = _py.Z_TEMPLATE
GL_NODES = _py.GL_NODES
GL_WEIGHTS = _py.GL_WEIGHTS

_c = None
if os.environ.get("BDS_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _c
    except ImportError:  # extension not built
        _c = None

BACKEND = "cython" if _c is not None else "python"


def _compiled_beta_rule(ks, c, gamma, level):
    return _c.beta_rule(ks, float(c), float(gamma), int(level), _py.Z_TEMPLATE,
                        _py.GRADING, _py.GRADED_LEVELS, _py.GL_NODES, _py.GL_WEIGHTS)


def get_backend(name=None):
    """Return a namespace of kernel functions for ``name`` (default: active)."""
    name = name or BACKEND
    if name == "python":
        return _Backend("python", _py.log_nb_terms, _py.beta_rule, _py.log_dbinom_raw)
    if name == "cython":
        if _c is None:
            raise ImportError("compiled kernels are not available")
        return _Backend("cython", _c.log_nb_terms, _compiled_beta_rule, _c.log_dbinom_raw)
    raise ValueError(f"unknown backend {name!r}")


class _Backend:
    __slots__ = ("name", "log_nb_terms", "beta_rule", "log_dbinom_raw")

    def __init__(self, name, log_nb_terms, beta_rule, log_dbinom_raw):
        self.name = name
        self.log_nb_terms = log_nb_terms
        self.beta_rule = beta_rule
        self.log_dbinom_raw = log_dbinom_raw


_active = get_backend()
log_nb_terms = _active.log_nb_terms
beta_rule = _active.beta_rule
log_dbinom_raw = _active.log_dbinom_raw
