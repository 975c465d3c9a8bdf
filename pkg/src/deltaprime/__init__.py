"""One-dimensional Schrodinger operators with delta'-type interactions.

Subpackages by theme: `interactions` (one-point boundary-condition
algebra), `transfer` (delta combs, piecewise potentials, approximation
families), `line` (bound states of point systems on the full line),
`certify` (variational trial functions and certified counts),
`measures` (atomic measures, the Green kernel and its Nystrom spectra),
`deficiency` (deficiency-subspace elements and Gram ranks), `cli`
(the command-line front end).
"""

__version__ = "0.1.0"

from . import certify, deficiency, errors, interactions, line, measures, transfer  # noqa: F401
