"""Backend selection for the pair-similarity accumulation kernel.

The compiled extension is preferred when it was built; otherwise the
pure-Python reference implementation is used. Both produce bitwise
identical output, so the choice only affects speed.
"""

from coordnet import _pairsim_py

try:
    from coordnet import _pairsim

    _DEFAULT = _pairsim
except ImportError:  # extension not built
    _pairsim = None
    _DEFAULT = _pairsim_py

BACKEND = _DEFAULT.BACKEND

accumulate_pair_products = _DEFAULT.accumulate_pair_products


def available_backends():
    """Names of usable kernel backends ("compiled" first when built)."""
    names = []
    if _pairsim is not None:
        names.append("compiled")
    names.append("python")
    return names


def get_backend(name):
    """Return the accumulate_pair_products implementation for `name`."""
    if name == "python":
        return _pairsim_py.accumulate_pair_products
    if name == "compiled":
        if _pairsim is None:
            raise RuntimeError("compiled kernel is not built")
        return _pairsim.accumulate_pair_products
    raise ValueError(f"unknown kernel backend: {name!r}")
