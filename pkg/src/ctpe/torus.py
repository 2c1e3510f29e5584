"""Arithmetic on the flat torus with canonical interval [-0.5, 0.5).

All positions are identified modulo 1 componentwise.  Points handed to the
rest of the library are assumed canonical; use :func:`wrap` to canonicalise
and :func:`displacement` for the minimal-magnitude representative of a
difference (the ordinary ``y - x`` is wrong whenever a step crosses the seam).
"""

import numpy as np

__all__ = ["wrap", "displacement"]


def wrap(x):
    """Map coordinates to their canonical representative in [-0.5, 0.5).

    Adding any integer vector leaves the result unchanged and wrap is
    idempotent.  Raises ``ValueError`` on non-finite input.
    """
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("wrap: non-finite coordinates")
    return (x + 0.5) % 1.0 - 0.5


def displacement(x, y):
    """Minimal-magnitude representative of ``y - x`` on the torus.

    Each component lies in [-0.5, 0.5).  For increments of magnitude below
    0.5 this recovers the pre-wrap difference exactly; larger increments are
    genuinely ambiguous on the torus and fold back.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("displacement: non-finite coordinates")
    return (y - x + 0.5) % 1.0 - 0.5
