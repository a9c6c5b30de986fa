"""The six-test diagnostics battery and influence measures on an ARDL-ECM."""
from ardl_lab.ardl import ArdlSpec
from ardl_lab.bounds import BootstrapParams
from ardl_lab.dgp import gen_cointegrated_pair
from ardl_lab.diagnostics import run_battery
from ardl_lab.frame import AlignedSeriesSet

x, y = gen_cointegrated_pair(150, 0.5, 0.3, seed=8)
report = run_battery(AlignedSeriesSet.from_arrays(y, x=x), ArdlSpec(p=2, q=1),
                     BootstrapParams(B=499, seed=1))
for i, t in enumerate(report.tests, 1):
    print(f"test{i} {t.name:16s} statistic {t.statistic:9.4f}  p {t.p_value:.4f}")
infl = report.influence
print(f"{len(infl.flagged)} observations flagged (Cook's D > {infl.cook_threshold:.3f} "
      f"or leverage > {infl.leverage_threshold:.3f})")
