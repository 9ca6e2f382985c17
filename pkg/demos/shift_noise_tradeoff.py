# Is shuttling worth it?  Compare keeping the shift noise (tau_s=30)
# against a monolithic machine running at double the physical rate
# with free shifts.  The paired arms share every other setting.
from modqec import ExperimentSpec, modularity_comparison

spec = ExperimentSpec(
    code="bb72",
    layout="sparse",
    basis="Z",
    p_values=(4e-3,),
    rounds=2,
    shots=1500,
    seed=7,
)
report = modularity_comparison(spec)

for pair in report.pairs:
    s, u = pair.shifted, pair.unshifted
    print(f"p={pair.p:g}")
    print(f"  shifts noisy, rate p   : {s.p_L_round:.2e} [{s.ci_low:.2e}, {s.ci_high:.2e}]")
    print(f"  shifts free,  rate 2p  : {u.p_L_round:.2e} [{u.ci_low:.2e}, {u.ci_high:.2e}]")
    print(f"  verdict: {pair.verdict}")
