# Round-trip the logical-error-rate fitting formula
# p_L = p^(d/2) * exp(c0 + c1 p + c2 p^2).
# Points generated exactly from known constants come back with the
# same constants; the residual tells you when data stops being a curve.
import math

from modqec import fit_curve

# full-scale constants for the [[144,12,12]] code on the sparse layout
c0, c1, c2 = 28.049, 375.30, -42586.0
d = 12

grid = [2e-3, 3e-3, 4e-3, 5e-3, 6e-3]
points = [
    (p, p ** (d / 2) * math.exp(c0 + c1 * p + c2 * p * p)) for p in grid
]
fit = fit_curve(points, distance=d)
print(f"recovered c0={fit.c0:.4f} c1={fit.c1:.2f} c2={fit.c2:.1f}")
print(f"residual norm {fit.residual_norm:.2e}")

# the fitted curve extrapolates to the headline operating point
p = 1e-3
print(f"extrapolated p_L_round at p={p:g}: {fit.evaluate(p):.2e}")
