# # Regression output, grouped features
#
# A tanh regressor explained against zero. Features are summed into groups
# before reporting; the groups add up to the same total as the individual
# columns.

# %%
from pathlib import Path

from deepexplain import deep_explain, domains_from_data, emit_decomposition, load_model
from deepexplain.data import load_dataset, load_grouping, standardize

data = Path(__file__).resolve().parent.parent / "tests" / "data"
model = load_model(data / "regressor.json")
X, names = load_dataset(data / "diabetes.csv", columns=list(model.feature_names))
Z, _ = standardize(X, names=names)
domains = domains_from_data(model, Z)
grouping = load_grouping(data / "groups.csv")

# %%
results = [deep_explain(model, z, domains) for z in Z[:5]]
print(emit_decomposition(results, names))
print(emit_decomposition(results, names, grouping))

# %%
# Shared chaining reuses one upstream map per layer; exact chaining builds one
# per downstream reference point. Both conserve the prediction.
shared = deep_explain(model, Z[0], domains, chaining="shared")
exact = results[0]
print("exact :", exact.feature_contributions.round(4), exact.reconstruction_error)
print("shared:", shared.feature_contributions.round(4), shared.reconstruction_error)
