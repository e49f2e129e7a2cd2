"""
When shadowing fails
====================

A backward shift whose only periodic point is zero, together with a
delta-cycle that climbs above norm 1 before coming back.
"""

from shadowlab.shadowing import counterexample_cycle, counterexample_operator

for delta in (0.1, 0.01, 0.001):
    chain, cert = counterexample_cycle(delta)
    chain.validate(counterexample_operator())
    print(f"delta {delta}: n = {cert.n}, cycle length {chain.length}, peak {cert.peak_norm:.3f},",
          "shadowing fails" if cert.shadowing_fails else "shadowing not excluded")

chain, cert = counterexample_cycle(0.01)
print("defect norms:", chain.defect_norms().tolist())
print(cert.periodic_points.reason)
