"""Numerical laboratory for almost-sure limit theorems on Wiener chaos.

Simulates and stress-tests log-averaged empirical measures of Hermite
variations of fractional Gaussian noise, evaluates the sufficient-condition
series (contraction norms, covariance sums, characteristic-function
deviations, the weighted criterion sum), and provides exact closed-form
oracles wherever the underlying identities admit them.
"""

__version__ = "0.1.0"
