"""Numerical potential theory on planar and spatial domains.

Thin wrappers over the C++ core. Report-producing calls return dicts decoded
from the same JSON the ``potkit`` command-line tool writes.
"""

import json as _json

from . import _core
from ._core import ball_volume, k_q, riesz_constant, sphere_area

__all__ = [
    "affine_margin",
    "ball_volume",
    "crit3",
    "duality_roundtrip",
    "glue",
    "green",
    "jensen_verify",
    "k_q",
    "poincare_lelong",
    "potential",
    "riesz_constant",
    "sphere_area",
    "zeros_check",
]


def _decoded(fn):
    def wrapper(*args, **kwargs):
        return _json.loads(fn(*args, **kwargs))

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


green = _decoded(_core.green)
potential = _decoded(_core.potential)
jensen_verify = _decoded(_core.jensen_verify)
duality_roundtrip = _decoded(_core.duality_roundtrip)
glue = _decoded(_core.glue)
affine_margin = _decoded(_core.affine_margin)
poincare_lelong = _decoded(_core.poincare_lelong)
zeros_check = _decoded(_core.zeros_check)
crit3 = _decoded(_core.crit3)
