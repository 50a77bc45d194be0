"""
Energy and stress along canonical deformation paths
===================================================

Curve tables make it easy to compare models by eye. This script writes one
CSV per path for a benchmark model and plots uniaxial tension if
matplotlib is available.
"""

# %%
import tempfile
from pathlib import Path

from hyperdiscovery import benchmark_model, evaluate_curves
from hyperdiscovery.kinematics import PATHS
from hyperdiscovery.modelio import default_gamma, write_curves

model = benchmark_model("HW")
out = Path(tempfile.mkdtemp())
for path in PATHS:
    write_curves(out / f"HW_{path}.csv", evaluate_curves(model, path))
print("wrote", sorted(p.name for p in out.glob("*.csv")))

# %%
table = evaluate_curves(model, "UT", default_gamma())
try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots()
    ax.plot(table[:, 0], table[:, 1], label="W")
    ax.plot(table[:, 0], table[:, 2], label="P11")
    ax.set_xlabel("gamma")
    ax.legend()
    fig.savefig(out / "HW_UT.png")
    print("plot saved to", out / "HW_UT.png")
except ImportError:
    print(table[::20])
