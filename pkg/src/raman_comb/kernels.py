"""Backend selection for the numerical kernels.

The compiled Cython extension is used when it imports; otherwise the numpy
fallback in ``_pykernels`` is used. Set ``RAMAN_COMB_PURE_PYTHON=1`` to force
the fallback.
"""
import os

from . import _pykernels

BACKENDS = {"python": _pykernels}

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None
else:
    BACKENDS["cython"] = _ckernels

if _ckernels is not None and not os.environ.get("RAMAN_COMB_PURE_PYTHON"):
    BACKEND = "cython"
else:
    BACKEND = "python"

_impl = BACKENDS[BACKEND]

bessel_table = _impl.bessel_table
cavity_triple_sum = _impl.cavity_triple_sum
parity_triple_sum = _impl.parity_triple_sum


def get_backend(name):
    """Return the kernel module registered under `name`."""
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} not available; have {sorted(BACKENDS)}") from None
