"""
Power means and the two ways of mixing them
===========================================

A mixed mean feeds every pair of entries through an inner mean and averages
the results with an outer mean.  ``sq`` uses all ordered pairs, ``circ``
only pairs of distinct positions, which makes repetition visible.
"""

import numpy as np

from hardylab import Circ, Power, Square, WeightedSample, eval_mean, eval_repeated, parse_expr

x = [1.0, 4.0]
print("geometric mean of 1, 4:", eval_mean(Power(0), x))
print("sq(P[0],P[1]) on 1, 4:", eval_mean(parse_expr("sq(P[0],P[1])"), x), "(sqrt 5 =", np.sqrt(5), ")")

###############################################################################
# Repeating every entry leaves ``sq`` alone but moves ``circ``: doubling
# (1, 4) adds the pairs (1, 1) and (4, 4), whose arithmetic means lift the
# average from 2 to 13/6.

c = Circ(Power(1), Power(0))
for m in (1, 2, 4, 8, 64):
    print(f"m={m:3d}  circ={eval_repeated(c, x, m):.6f}  sq={eval_repeated(Square(Power(1), Power(0)), x, m):.6f}")

###############################################################################
# Weights can be real numbers for power means and ``sq``; ``circ`` needs
# integer multiplicities because it counts pairs of copies.

s = WeightedSample.of([8.0, 1.0], [1.0, 2.0])
print("P[0] on 8 once and 1 twice:", eval_mean(Power(0), s))
