"""Splitting a convolution tail at a level h(x), and choosing h."""
from convtails import families as fam
from convtails.convolution import decomposition_report
from convtails.hfunc import construct_h, parse_h
from convtails.testers import check_h_insensitive

P = fam.pareto(alpha=1)

r = decomposition_report(P, P, 50.0, 100.0)
print(f"full={r.full:.10f} le_h={r.le_h:.10f} gt_h={r.gt_h:.10f} gt_gt={r.gt_gt:.3e}")
print(f"split residual={r.residual_split:.1e} three-term residual={r.residual_three:.1e}")

# a slowly growing h keeps the tail unchanged; h = x/2 does not
h = construct_h(P)
print(h.name, "levels:", len(h.breakpoints))
print("constructed h:", check_h_insensitive(P, h).verdict)
rep = check_h_insensitive(P, parse_h("half"))
print("h = x/2:      ", rep.verdict,
      "limits", round(rep.probe("minus").trend.limit, 4), round(rep.probe("plus").trend.limit, 4))
