"""
Bracketing a Hardy constant
===========================

From below: the harmonic sequence ``n M(1, 1/2, ..., 1/n)`` and the best
ratio found by the optimizer for short sequences.  From above: the bound
for concave, symmetric, repetition superinvariant means.
"""

from hardylab import OptimizerConfig, Power, Square, hardy_bracket

cfg = OptimizerConfig(restarts=8)
for expr in (Power(0), Square(Power(0), Power(-1))):
    br = hardy_bracket(expr, n_max=5, cfg=cfg, n_harmonic=20000)
    doc = br.to_json()
    print(doc["expr"])
    print("  harmonic estimate", doc["C_estimate"]["estimate"], "raw", doc["C_estimate"]["raw"])
    print("  reference", doc["gamma_reference"] or doc["rho_reference"])
    for h, u in zip(doc["Hn"], doc["upper"]):
        print(f"  n={h['n']}  {h['lower']:.6f} <= H_n <= {u['bound']:.6f}")
    print("  flags:", doc["flags"] or "none")
