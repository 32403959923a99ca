# ---
# jupyter:
#   jupytext:
#     text_representation:
#       extension: .py
#       format_name: percent
#       format_version: '1.3'
# ---

# %% [markdown]
# # Where does the system look linear?
#
# Log-spaced sweep over the prey growth rate r and the predator death rate m,
# with a = 1000 and b = 100 held fixed, from H0 = P0 = 1, RK4 at h = 0.003.

# %%
from collections import Counter

from lvreg.sweep import Axis, SweepSpec, run_sweep

spec = SweepSpec(
    axes={"r": Axis(0.1, 1000, 5, log=True), "m": Axis(1e-5, 1.0, 5, log=True)},
    fixed=dict(a=1000.0, b=100.0, h=0.003, H0=1.0, P0=1.0),
    t_end=15.0,
)
result = run_sweep(spec, workers=2)
print(Counter(result.labels()))

# %%
rs = sorted({c.coords["r"] for c in result.cells})
ms = sorted({c.coords["m"] for c in result.cells})
grid = {(c.coords["r"], c.coords["m"]): c.label.value for c in result.cells}
print(f"{'r / m':>10}" + "".join(f"{m:>22.0e}" for m in ms))
for r in rs:
    print(f"{r:>10.3g}" + "".join(f"{grid[(r, m)]:>22}" for m in ms))

# %%
from lvreg.io import write_sweep_csv

write_sweep_csv(result, "regime_map.csv")

# %% [markdown]
# The DIVERGED band is the integrator, not the model: once P settles near 1,
# prey decays at rate a*P - r, and for r well below a that exceeds the RK4
# real-axis stability limit (about 2.785 / h = 928 at h = 0.003).
