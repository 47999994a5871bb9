"""
Style and sector loadings
=========================

Build the loadings matrix for one date and check the rank-to-normal mapping
applied to the volatility and volume columns.
"""

import numpy as np

from overnight_factors import assemble_loadings, generate_synthetic_panel, normalize_gaussian

panel, truth = generate_synthetic_panel(300, 60, seed=2)

lm = assemble_loadings(panel, s=0, spec="int,prc,mom,hlv,vol")
print(lm.columns, lm.values.shape)

# hlv and vol come out normally shaped, with the raw column's dispersion
for name in ("hlv", "vol"):
    col = lm.values[:, lm.columns.index(name)]
    print("%s: mean %+.4f  sd %.4f" % (name, col.mean(), col.std(ddof=1)))

#############################################################################
# Swapping the intercept for sectors gives one binary column per populated sector.
ls = assemble_loadings(panel, 0, "S,prc,mom,hlv,vol", sector_map=truth.sector_map)
print(ls.columns)
print("every row has exactly one sector:", np.all(ls.values[:, :10].sum(axis=1) == 1))

#############################################################################
# normalize_gaussian keeps order and ties, and only the target mean changes.
x = np.array([3.0, -1.0, 3.0, 0.5, 10.0])
z = normalize_gaussian(x, target_mean=1.0)
print(np.round(z, 4), "mean", z.mean().round(12), "sd ratio", z.std(ddof=1) / x.std(ddof=1))
