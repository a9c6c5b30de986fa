"""Distributed-lag model, ARDL lag search and the error-correction form.

A cointegrated pair is fitted as a DLM (no lagged dependent) and as an
ARDL-ECM; the long-run coefficient recovers the true slope of 0.5.
"""
from ardl_lab.ardl import ArdlSpec, fit_ardl_ecm, select_lags
from ardl_lab.dgp import gen_cointegrated_pair
from ardl_lab.dlm import DlmSpec, fit_dlm, reduce_model
from ardl_lab.frame import AlignedSeriesSet

x, y = gen_cointegrated_pair(200, slope=0.5, noise=0.1, seed=3)
data = AlignedSeriesSet.from_arrays(y, x=x)

dlm = fit_dlm(data, DlmSpec(q=2))
reduced = reduce_model(dlm, 0.05)
print("DLM terms:", dlm.terms, "-> reduced:", reduced.terms)

grid = select_lags(data, ArdlSpec(contemporaneous=True), p_max=3, q_max=1, criterion="aic")
print("AIC-selected (p, q):", grid.selected)
for row in grid.grid:
    print(f"  p={row['p']} q={row['q']} aic={row['aic']:.2f} mase={row['mase']:.3f}")

p, q = grid.selected
fit = fit_ardl_ecm(data, ArdlSpec(p=p, q=q, contemporaneous=True))
print(f"adjustment speed {fit.adjustment_speed:.3f}, long-run slope {fit.long_run['x']:.3f}")
