"""Class membership verdicts for the standard families."""
from convtails import families as fam
from convtails.testers import test_long_tailed, test_subexponential

specs = ["pareto(alpha=1)", "pareto(alpha=1.5)", "lognormal(mu=0, sigma=1)",
         "weibull(k=0.5)", "exponential(lambda=1)", "weibull(k=1.5)"]

for spec in specs:
    F = fam.parse_family(spec)
    lt = test_long_tailed(F)
    sub = test_subexponential(F)
    conv = sub.probe("self-conv")
    print(f"{spec:<26} long-tailed: {lt.verdict:<12} subexponential: {sub.verdict:<12}"
          f" self-conv limit ~ {conv.trend.limit:.4g}")

# a single report, probe by probe
print()
print(test_subexponential(fam.weibull(k=0.5)).summary())
