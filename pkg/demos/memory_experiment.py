# A small end-to-end memory experiment: compile, add noise, sample,
# decode, and convert to a per-round logical error rate.
# Shot counts here are sized for a coffee break, not a production sweep.
from modqec import ExperimentSpec, export_results, run_memory_experiment

spec = ExperimentSpec(
    code="bb72",
    layout="sparse",
    basis="Z",
    p_values=(3e-3, 5e-3),
    rounds=2,
    shots=500,
    seed=42,
)
estimates = run_memory_experiment(spec)

for est in estimates:
    print(
        f"p={est.p:g}: {est.failures}/{est.shots} shots failed over "
        f"T={est.rounds} rounds -> p_L_round={est.p_L_round:.2e} "
        f"[{est.ci_low:.2e}, {est.ci_high:.2e}]"
    )

# rows append atomically and re-running the same spec reproduces them
# bit for bit (except the timestamp column)
export_results(estimates, "memory_demo.csv")
print("wrote memory_demo.csv")
