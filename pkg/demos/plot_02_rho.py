"""
The constants rho(p, q)
=======================

``rho(p, q)`` is a double integral over the unit square whose integrand
blows up along the edges.  Substituting ``x = u^k`` tames the blow-up and an
adaptive Gauss-Kronrod rule does the rest.
"""

import math

from hardylab import rho, rho_closed, rho_finiteness

for p, q in [(0, 1), (0, -1), (0, 0), (0.5, 0), (0.5, 0.5), (-1, 0.5)]:
    r = rho(p, q, 1e-8)
    closed = rho_closed(p, q)
    note = "" if closed is None else f"  closed form {closed:.10f}"
    print(f"rho({p:>4}, {q:>4}) = {r.value:.10f} +- {r.abs_error_estimate:.1e}  cells={r.cells}{note}")

###############################################################################
# The two constants of the geometric mixes multiply to ``e^2``.

print("product:", rho(0, 1).value * rho(0, -1).value, "e^2 =", math.e**2)

###############################################################################
# Outside the finite region there is nothing to integrate.

for p, q in [(0.9, 1), (1, 1), (1.9, -1), (2, -1)]:
    print(f"({p}, {q}):", rho_finiteness(p, q).value)
