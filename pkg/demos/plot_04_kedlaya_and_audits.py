"""
Kedlaya matrices and property audits
====================================

A Kedlaya matrix rearranges prefixes of a sequence so that a concave mean
of the rows can be compared with the mean of column averages.  The same
comparison fails for the convex quadratic mean.
"""

import numpy as np

from hardylab import Circ, Power, Square, build, check_mixing_inequality, verify
from hardylab.properties import audit_midpoint_concavity, audit_repetition

K = build(3)
print(K.entries)
print("violations:", verify(K))

rng = np.random.default_rng(1)
x = rng.uniform(0.1, 10, 4)
for e in (Power(0), Square(Power(0), Power(-1)), Power(2)):
    c = check_mixing_inequality(e, x)
    print(f"{str(e):>15}: lhs={c.lhs:.5f} rhs={c.rhs:.5f} holds={c.holds}")

###############################################################################
# Audits draw random inputs; a failure comes with the input that caused it.

print(audit_midpoint_concavity(Power(2), 200, seed=0).witness)
print(audit_repetition(Circ(Power(1), Power(0)), "superinvariant", 2000, seed=0).verdict)
