# # Where the reference points sit
#
# For a fixed observation x the reference point depends on which level of the
# neuron we ask for. This script sweeps the level and shows the projected
# point and its distance to x.

# %%
import numpy as np

from deepexplain import InputDomain, LinkFunction, RootTarget, attainable_extremum, solve_root
from deepexplain.rootfind import attainable_range

tanh = LinkFunction("tanh")
beta = np.array([1.0, 2.0])
bias = -0.5
domain = InputDomain(np.array([-1.0, -1.0]), np.array([1.0, 1.0]))
x = np.array([0.6, 0.3])

lo, hi = attainable_range(beta, bias, tanh, domain)
print(f"attainable outputs on the box: [{lo:.4f}, {hi:.4f}]")
print("corner reaching the minimum:", attainable_extremum(beta, bias, tanh, domain))

# %%
for level in np.linspace(lo, hi, 7)[1:-1]:
    r = solve_root(x, beta, bias, tanh, domain, RootTarget.explicit(level))
    print(f"level {level:+.3f}  theta {np.round(r.theta, 4)}  distance {r.distance:.4f}")

# %%
# Levels outside the attainable range are refused instead of silently clipped.
try:
    solve_root(x, beta, bias, tanh, domain, RootTarget.explicit(0.99))
except Exception as err:
    print(type(err).__name__, err)
