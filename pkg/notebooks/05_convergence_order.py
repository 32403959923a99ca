# ---
# jupyter:
#   jupytext:
#     text_representation:
#       extension: .py
#       format_name: percent
#       format_version: '1.3'
# ---

# %% [markdown]
# # Measured order of the three schemes
#
# Endpoint error at t = 10 against a step-halved RK4 reference, fitted on a
# log-log scale.

# %%
import numpy as np

from lvreg import EULER, HEUN, RK4, estimate_order
from lvreg.analyze import endpoint_errors
from lvreg.scenario import PRESETS

s = PRESETS["paper-fig2"]
hs = [0.1, 0.05, 0.025, 0.0125]
for method in (EULER, HEUN, RK4):
    errs = endpoint_errors(method, s.ic, s.params, 10.0, hs)
    order = estimate_order(method, s.ic, s.params, 10.0, hs)
    print(f"{method.value:>5}: order {order:.3f}   errors {np.array2string(errs, precision=3)}")
