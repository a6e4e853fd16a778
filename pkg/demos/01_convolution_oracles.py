"""Convolution tails by quadrature, checked against closed forms."""
import math

from convtails import families as fam
from convtails.convolution import conv_tail

P = fam.pareto(alpha=1)
E = fam.exponential(lam=1)

# Pareto(1) * Pareto(1) has an elementary tail
for x in (10.0, 100.0, 1e4, 1e6):
    exact = 1 / (x - 1) + 2 / x**2 * math.log(x - 1) + (x - 2) / (x * (x - 1))
    v, err = conv_tail(P, P, x, with_error=True)
    print(f"pareto  x={x:<9g} quad={v:.12g} exact={exact:.12g} est_err={err:.1e}")

# the sum of two Exp(1) is Gamma(2, 1)
for x in (1.0, 5.0, 10.0, 30.0):
    print(f"exp     x={x:<9g} quad={conv_tail(E, E, x):.12g} exact={(1 + x) * math.exp(-x):.12g}")

# ratio to the single tail: about 2 for the heavy tail, 1 + x for the light one
print("pareto ratio at 100:", conv_tail(P, P, 100.0) / float(P.sf(100.0)))
print("exp ratio at 30:   ", conv_tail(E, E, 30.0) / float(E.sf(30.0)))
