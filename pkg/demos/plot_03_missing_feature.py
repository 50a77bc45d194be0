"""
What happens when the library lacks a term
==========================================

The hidden model here contains ``log(I2b/3)``. Removing that feature from
the library forces the regression to find a surrogate built from the
remaining terms, and the admissibility gate raises the penalty until the
surrogate behaves physically.
"""

# %%
from hyperdiscovery import (
    GenerationConfig,
    SolverConfig,
    benchmark_model,
    compare_models,
    discover_from_data,
    format_model,
    generate,
)

mesh, partition, clean, _ = generate("GT", GenerationConfig())
truth = benchmark_model("GT")
print("hidden model: W =", format_model(truth))

# %%
report = discover_from_data(mesh, partition, clean, SolverConfig(), exclude_log=True)
print("surrogate:    W =", format_model(report.model))

# %%
# Each penalty level that was tried, with the verdict of the gate.
for entry in report.trail:
    print(f"lambda_p={entry['lambda_p']:<6g} {entry['stage']:<14} passed={entry['passed']}  {entry.get('reason', '')}")

# %%
# Agreement along uniaxial tension and simple shear.
errors = compare_models(report.model, truth, ["UT", "SS"])
for path, metrics in errors.items():
    print(path, {k: f"{v:.2%}" for k, v in metrics.items()})
