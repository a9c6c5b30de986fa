"""ardl-lab: bootstrap ARDL-ECM toolkit for short annual panels.

Modules:

* ``frame``        panel ingestion, alignment, lags and summaries
* ``imputation``   random-forest filling of missing cells
* ``estat``        OLS, F tests, information criteria, backward elimination
* ``distributions`` normal / t / chi-square / F tails
* ``dlm``          finite distributed-lag regressions
* ``ardl``         ARDL in error-correction form, lag search, forecast metrics
* ``bounds``       bounds F test with bootstrap critical values
* ``diagnostics``  residual test battery and influence measures
* ``rollcorr``     rolling correlation screening against white-noise bands
* ``dgp``          synthetic data generators and seeding
* ``cli``          batch pipeline and report emission
"""

__version__ = "0.1.0"
