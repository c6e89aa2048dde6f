"""Height-segmented path loss with a learned near-ground branch.

Trains the small regression network on a synthetic near-ground corpus, then
stitches near-UAV, free-space and near-ground losses along a descent.
"""
# %%
import numpy as np

from u2gchan.fse import hexacopter_scatter_set
from u2gchan.largescale import (SegmentedPathLoss, ShadowFadingParams, default_ngs_model, fit_shadow_fading,
                                fsl_path_loss, sample_shadow_fading, sample_shadow_fading_db)

model = default_ngs_model(fc_ghz=2.4, seed=0)
print(f"near-ground network: {model.hidden} hidden units, validation RMSE {model.validation_rmse:.2f} dB")

# %% profile along a 45 deg descent from 150 m
pl = SegmentedPathLoss(2.4, tx_height=150.0, xi_nus=50.0, xi_ngs=15.0,
                       scatterers=hexacopter_scatter_set(0.5, 0.05), model=model)
az, el = 0.4, np.pi / 4
bp = pl.breakpoints(az, el)
print(f"d1 = {bp.d1:.1f} m, free-space link ends at {bp.fsl_end:.1f} m, C1 = {bp.c1:.2f} dB, C2 = {bp.c2:.2f} dB")
d, h, loss = pl.profile(az, el, n=12)
for di, hi, li in zip(d, h, loss):
    print(f"d = {di:6.1f} m  h = {hi:6.1f} m  PL = {li:6.2f} dB  (free space {fsl_path_loss(di, 2.4):6.2f})")

# %% shadowing: log-domain draws read in dB
rng = np.random.default_rng(7)
params = ShadowFadingParams(mu=19.5, sigma=8.1)
print("SF draws [dB]:", sample_shadow_fading_db(rng, params, 5).round(2))
fit = fit_shadow_fading(sample_shadow_fading(rng, params, 20000))
print(f"refit: mu = {fit.mu:.2f}, sigma = {fit.sigma:.2f}")
