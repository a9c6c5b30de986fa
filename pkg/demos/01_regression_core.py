"""OLS with QR, information criteria and the distribution layer.

Fits a small regression, reads off coefficients and p-values, and checks a
reduced model against the full one with a Wald F test.
"""
import numpy as np

from ardl_lab.distributions import chi_square, sf_eval
from ardl_lab.estat import DesignMatrix, backward_eliminate, ols_fit, wald_f

rng = np.random.default_rng(0)
n = 80
cols = {"signal": rng.normal(size=n), "noise": rng.normal(size=n)}
y = 1.0 + 2.0 * cols["signal"] + rng.normal(size=n)

full = ols_fit(DesignMatrix.from_columns(cols), y)
print("coefficients:", {k: round(float(v), 3) for k, v in zip(full.names, full.coef)})
print("p-values:    ", {k: round(float(v), 4) for k, v in zip(full.names, full.p_values)})
print(f"R2 {full.r2:.3f}  adj R2 {full.adj_r2:.3f}  AIC {full.aic:.2f}  BIC {full.bic:.2f}")

small = ols_fit(DesignMatrix.from_columns({"signal": cols["signal"]}), y)
f, p = wald_f(full, small, 1)
print(f"dropping 'noise': F = {f:.3f}, p = {p:.3f}")

fit, design, dropped = backward_eliminate(DesignMatrix.from_columns(cols), y, 0.05)
print("backward elimination dropped:", dropped)

print("upper tail of chi-square(2) at 100:", sf_eval(chi_square(2), 100.0))
