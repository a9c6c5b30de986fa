"""Rolling-correlation screening against white-noise bands.

A regressor that co-moves with the dependent series has a rolling
correlation that barely varies, so its SDrolCor falls below the 5% band.
"""
import numpy as np

from ardl_lab.rollcorr import CSV_HEADER, screen_pairs

rng = np.random.default_rng(1)
n = 17
y = np.cumsum(rng.normal(size=n))
regressors = {
    "tracks_y": 0.8 * y + 0.1 * rng.normal(size=n),
    "unrelated": rng.normal(size=n),
}
rows = screen_pairs(y, regressors, "y", widths=(2, 3, 4), B=2000, seed=7)
print(",".join(CSV_HEADER) + ",inside_band")
for r in rows:
    print(f"{r.label},{r.width},{r.sd_rolcor:.4f},{r.band_95:.4f},{r.band_05:.4f},{r.inside_band}")
