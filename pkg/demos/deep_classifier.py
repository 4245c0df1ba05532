# # A small classifier against a decision threshold
#
# An 8 -> 6 (linear) -> 4 (relu) -> 1 (sigmoid) network on standardized
# inputs. In threshold mode the contributions explain the distance between
# the predicted probability and the cut-off, so their sign agrees with the
# decision.

# %%
from pathlib import Path

import numpy as np

np.set_printoptions(suppress=True)

from deepexplain import ThresholdSpec, deep_explain, domains_from_data, load_model
from deepexplain.data import load_dataset, standardize

data = Path(__file__).resolve().parent.parent / "tests" / "data"
model = load_model(data / "classifier.json")
X, names = load_dataset(data / "diabetes.csv", columns=list(model.feature_names))
Z, stats = standardize(X, names=names)
domains = domains_from_data(model, Z)

# %%
for i in range(3):
    r = deep_explain(model, Z[i], domains, mode=ThresholdSpec(0.5))
    print(f"row {i}: p = {r.predicted:.4f}")
    order = np.argsort(-np.abs(r.feature_contributions))
    for k in order[:3]:
        print(f"   {names[k]:>12} {r.feature_contributions[k]:+.5f}")
    total = r.feature_contributions.sum() + r.bias_total
    print(f"   sum {total:+.5f} vs p - 0.5 = {r.predicted - 0.5:+.5f}")

# %%
# The per-layer share matrices show how each hidden unit splits its output
# among its inputs. Rows for dead relu units are all zero.
r = deep_explain(model, Z[0], domains, mode=0.5)
for m in r.matrices:
    if m.kind == "share":
        print(f"layer {m.layer_index} shares:\n{np.round(m.entries, 3)}")
