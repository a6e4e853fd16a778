"""A law with a heavy tail that is not long-tailed, and a mixture that is."""
from convtails import families as fam
from convtails.laws import Mixture
from convtails.testers import test_long_tailed

G = fam.counterexample(alpha=1)

# breakpoints grow doubly exponentially; the tail halves at every y_n
for n in range(1, 6):
    x_n, y_n = G.breakpoints_at(n)
    print(f"n={n} x_n={x_n:.6g} y_n={y_n:.6g} tail(y_n)={float(G.sf(y_n)):.3e}")

ys, ms = G.atoms(hi=G.breakpoints_at(6)[1])
print("tail(y)/tail(y-) at the jumps:", [float(t / (t + m)) for t, m in zip(G.sf(ys), ms)])

print("G long-tailed?      ", test_long_tailed(G).verdict)
M = Mixture([0.5, 0.5], [fam.pareto(alpha=1), G])
print("mixture long-tailed?", test_long_tailed(M).verdict)
