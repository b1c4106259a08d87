"""Long-run yield and component association across risk-aversion levels.

Re-estimates the continuation value, the plug-in SDF, and the spectral
decomposition for a grid of risk-aversion values on one sample, tracing
out how the long-run yield and the covariance between the log permanent
and transitory increments respond. With nonlinear dynamics the
association can switch sign as risk aversion grows.
"""

import numpy as np

import sdfspectral as s
from sdfspectral.pipeline import decompose_panel

BETA = 0.994

design = s.Ar1Design(mu=0.005, kappa=0.6, sigma=0.01)
panel = s.simulate_ar1(design, n=2000, seed=31)
basis = s.BasisSpec(family="hermite", k=8).build(panel.states)

print(f"{'gamma':>6} {'lambda':>9} {'rho':>9} {'yield':>9} "
      f"{'cov(logP,logT)':>15} {'kendall':>8}")
for gamma in (2.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0):
    try:
        res = decompose_panel(panel, basis, s.RecursiveUtility(beta=BETA, gamma=gamma))
    except (ValueError, RuntimeError) as exc:
        # very high risk aversion can push the estimated continuation value
        # through zero at extreme sample points; report and move on
        print(f"{gamma:>6.0f}   [no decomposition: {exc}]")
        continue
    stats = s.pt_association(res.series)
    lam = res.fixed_point.lam
    print(f"{gamma:>6.0f} {lam:>9.4f} {res.series.rho:>9.4f} "
          f"{res.series.yield_y:>+9.4f} {stats['cov_log']:>+15.2e} "
          f"{stats['kendall_tau']:>+8.3f}")

print("\neach row re-solves the nonlinear eigenproblem at that gamma and")
print("re-estimates the pricing-operator eigenpair with the implied SDF.")
