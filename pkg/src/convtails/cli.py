"""``convtails`` command line.

Exit status: 0 when the verdict holds (or a plain computation succeeded),
1 when it fails, 2 when it is inconclusive or a hypothesis could not be
confirmed, 64 on a usage error.  Output files go to ``--out`` (default
``$CONVTAILS_OUT`` or the current directory) and are written atomically.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from contextlib import nullcontext

from . import __version__
from .families import RangeError
from .probes import DEFAULT_THRESHOLDS, Thresholds, Verdict, grid_top
from .quadrature import QuadratureError

EXIT_OK, EXIT_FAILS, EXIT_UNDECIDED, EXIT_USAGE = 0, 1, 2, 64
OUT_ENV = "CONVTAILS_OUT"

# built-in values for options that default to None on the command line
DEFAULTS = {
    "seed": 12345,
    "grid_top": None,
    "svg": False,
    "tol": DEFAULT_THRESHOLDS.tol,
    "band": DEFAULT_THRESHOLDS.band,
    "n": None,
    "workers": 1,
    "horizon": 1e8,
    "cap": False,
    "with_error": False,
    "alpha": 1.0,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def exit_code(verdict) -> int:
    v = Verdict(verdict)
    if v == Verdict.HOLDS:
        return EXIT_OK
    if v == Verdict.FAILS:
        return EXIT_FAILS
    return EXIT_UNDECIDED


# ---------------------------------------------------------------------------
# config handling


def read_config(path: str) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment; keys use flag names
    with or without the leading dashes."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key = value")
            k, v = line.split("=", 1)
            out[k.strip().lstrip("-").replace("-", "_")] = v.strip()
    return out


def effective_config(args: argparse.Namespace) -> dict:
    """Merge command line over config file over built-in defaults and
    convert config strings with the matching option's type."""
    parser = args._parser
    file_cfg = read_config(args.config) if args.config else {}
    actions = {a.dest: a for a in parser._actions}
    unknown = sorted(set(file_cfg) - set(actions))
    if unknown:
        raise UsageError(f"unknown config key(s): {', '.join(unknown)}")
    cfg = {}
    for dest, action in actions.items():
        if dest in ("help", "config", "_parser", "handler") or dest.startswith("_"):
            continue
        val = getattr(args, dest, None)
        if val is None and dest in file_cfg:
            val = _convert(action, file_cfg[dest])
        if val is None:
            val = DEFAULTS.get(dest)
        cfg[dest] = val
    # values fixed by the subcommand itself
    for dest, val in vars(args).items():
        if dest not in cfg and not dest.startswith("_") and dest not in ("handler", "config"):
            cfg[dest] = val
    return cfg


def _convert(action, text: str):
    if action.nargs == 0:
        return text.lower() in ("1", "true", "yes", "on")
    conv = action.type or str
    try:
        val = conv(text)
    except (TypeError, ValueError, argparse.ArgumentTypeError) as exc:
        raise UsageError(f"config value for {action.dest!r}: {exc}") from None
    if action.choices is not None and val not in action.choices:
        raise UsageError(f"config value for {action.dest!r} must be one of {', '.join(map(str, action.choices))}")
    return val


def header(cfg: dict, command: str) -> dict:
    """Effective config echoed at the top of every output file."""
    out = {"command": command, "version": __version__}
    out.update({k: _plain(v) for k, v in sorted(cfg.items()) if k != "out"})
    return out


def _plain(v):
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    if isinstance(v, (list, tuple)):
        return [_plain(u) for u in v]
    return v


def thresholds(cfg: dict) -> Thresholds:
    return Thresholds(tol=float(cfg["tol"]), band=float(cfg["band"]))


# ---------------------------------------------------------------------------
# output


def out_dir(cfg: dict) -> str:
    path = cfg.get("out") or os.environ.get(OUT_ENV) or "."
    os.makedirs(path, exist_ok=True)
    return path


def write_atomic(path: str, text: str) -> str:
    """Write via a temporary file in the same directory and ``os.replace``."""
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def emit(cfg: dict, stem: str, files: dict) -> list:
    """Write ``{suffix: text}`` as ``<out>/<stem><suffix>``."""
    d = out_dir(cfg)
    return [write_atomic(os.path.join(d, stem + suffix), text) for suffix, text in files.items()]


def emit_report(cfg: dict, stem: str, rep, command: str) -> int:
    from .svg import report_plot

    hdr = header(cfg, command)
    files = {".json": rep.to_json(hdr), ".csv": rep.to_csv(hdr)}
    if cfg.get("svg"):
        files[".svg"] = report_plot(rep)
    emit(cfg, stem, files)
    print(rep.summary())
    return exit_code(rep.verdict)


def csv_lines(hdr: dict, columns, rows) -> str:
    from .montecarlo import csv_table

    return csv_table(rows, columns, hdr)


def json_text(hdr: dict, body: dict) -> str:
    return json.dumps({"config": hdr, **body}, indent=2) + "\n"


def float_list(text: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def spec_list(text: str) -> list:
    """Family specs separated by ``;``."""
    return [s.strip() for s in text.split(";") if s.strip()]


def _run(args) -> int:
    cfg = effective_config(args)
    ctx = grid_top(cfg["grid_top"]) if cfg.get("grid_top") is not None else nullcontext()
    with ctx:
        return args.handler(cfg)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "handler", None):
            raise UsageError(parser.format_usage().strip())
        return _run(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (KeyError, ValueError) as exc:
        # bad family spec, unknown id in a config value, bad h spec, ...
        msg = exc.args[0] if exc.args else exc
        print(f"usage error: {msg}", file=sys.stderr)
        return EXIT_USAGE
    except (QuadratureError, RangeError, FloatingPointError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_UNDECIDED


# ---------------------------------------------------------------------------
# command handlers


def _need(cfg: dict, *keys):
    missing = [k for k in keys if cfg.get(k) in (None, "", [])]
    if missing:
        flags = ", ".join("--" + k.replace("_", "-") for k in missing)
        raise UsageError(f"missing required option(s): {flags}")
    return [cfg[k] for k in keys]


def _law(text):
    from .families import parse_family

    return parse_family(text)


def cmd_families_list(cfg):
    from .families import FAMILIES

    rows = []
    for name, (_, params) in sorted(FAMILIES.items()):
        desc = ", ".join(k if v is None else f"{k}={v:g}" for k, v in params.items())
        rows.append({"name": name, "parameters": desc})
        print(f"{name}({desc})")
    emit(cfg, "families", {".json": json_text(header(cfg, "families list"), {"families": rows})})
    return EXIT_OK


def cmd_families_dump(cfg):
    from .families import counterexample, dump_breakpoints

    n = int(cfg["n"] if cfg["n"] is not None else 8)
    if n < 1:
        raise UsageError("dump-breakpoints needs n >= 1")
    body = dump_breakpoints(counterexample(alpha=float(cfg["alpha"])), n)
    hdr = "".join(f"# {k}={v}\n" for k, v in header(cfg, "families dump-breakpoints").items())
    emit(cfg, "counterexample_breakpoints", {".csv": hdr + body})
    sys.stdout.write(body)
    return EXIT_OK


def cmd_conv_tail(cfg):
    from .convolution import conv_tail

    F, G = map(_law, _need(cfg, "F", "G"))
    xs = cfg["x"] or [100.0]
    vals, errs = conv_tail(F, G, xs, with_error=True)
    rows = [[float(x), float(v), float(e)] for x, v, e in zip(xs, vals, errs)]
    emit(cfg, "conv_tail", {".csv": csv_lines(header(cfg, "conv-tail"), ["x", "tail", "abs_error"], rows)})
    for x, v, e in rows:
        print(f"x={x:g} tail={v:.12g}" + (f" err={e:.2g}" if cfg["with_error"] else ""))
    return EXIT_OK


def cmd_decompose(cfg):
    from .convolution import decomposition_report
    from .hfunc import h_name
    from .lemmas import h_of

    F, G = map(_law, _need(cfg, "F", "G"))
    h = h_of(cfg["h"] or "sqrt", [F, G])
    reports = [decomposition_report(F, G, h, x) for x in (cfg["x"] or [100.0])]
    cols = list(reports[0].as_dict())
    rows = [[("" if v is None else (int(v) if isinstance(v, bool) else v)) for v in r.as_dict().values()]
            for r in reports]
    hdr = dict(header(cfg, "decompose"), h_name=h_name(h))
    ok = all(r.identities_hold() for r in reports)
    emit(cfg, "decompose", {
        ".csv": csv_lines(hdr, cols, rows),
        ".json": json_text(hdr, {"identities_hold": ok, "rows": [r.as_dict() for r in reports]}),
    })
    for r in reports:
        three = "n/a" if r.residual_three is None else f"{r.residual_three:.2e}"
        print(f"x={r.x:g} h={r.h:g} full={r.full:.10g} split={r.residual_split:.2e} "
              f"slack={r.slack_upper:.3g} three={three}")
    return EXIT_OK if ok else EXIT_FAILS


def cmd_test(cfg):
    from . import testers
    from .lemmas import h_of

    kind, th = cfg["kind"], thresholds(cfg)
    if kind in ("longtail", "subexp"):
        (F,) = map(_law, _need(cfg, "law"))
        fn = testers.test_long_tailed if kind == "longtail" else testers.test_subexponential
        rep = fn(F, th=th)
    elif kind in ("tail-equiv", "weak-equiv"):
        F1, F2 = map(_law, _need(cfg, "F1", "F2"))
        fn = testers.test_tail_equivalence if kind == "tail-equiv" else testers.test_weak_tail_equivalence
        rep = fn(F1, F2, th=th)
    else:
        (F,) = map(_law, _need(cfg, "law"))
        rep = testers.check_h_insensitive(F, h_of(cfg["h"] or "auto", [F]), th=th)
    return emit_report(cfg, f"test_{kind.replace('-', '_')}", rep, f"test {kind}")


def cmd_construct_h(cfg):
    from .hfunc import construct_h

    laws = [_law(s) for s in _need(cfg, "law")[0]]
    h = construct_h(*laws, horizon=float(cfg["horizon"]))
    if cfg["cap"]:
        h = h.capped()
    hdr = header(cfg, "construct-h")
    rows = [[k + 1, float(b)] for k, b in enumerate(h.breakpoints)]
    emit(cfg, "construct_h", {
        ".json": json_text(hdr, {"h": h.describe()}),
        ".csv": csv_lines(hdr, ["level", "x_level"], rows),
    })
    d = h.describe()
    print(f"{d['name']}: {d['levels']} levels up to {d['horizon']:g}"
          + (" (truncated)" if d["truncated"] else ""))
    for x in (1e2, 1e4, 1e6, 1e8):
        if x <= h.horizon:
            print(f"  h({x:g}) = {h(x):g}")
    return EXIT_OK


_ROLES = ("F", "G", "F1", "F2", "G1", "G2")


def cmd_lemma(cfg):
    from .lemmas import lemma_probe

    inputs = {k: cfg[k] for k in _ROLES if cfg.get(k)}
    rep = lemma_probe(cfg["id"], inputs, h=cfg.get("h"), th=thresholds(cfg))
    return emit_report(cfg, f"lemma_{cfg['id']}", rep, f"lemma {cfg['id']}")


def cmd_theorem(cfg):
    from .theorems import THEOREMS, verify_theorem

    tid = cfg["id"]
    defaults = THEOREMS[tid].defaults
    over = {}
    for k in _ROLES + ("n", "p", "h", "laws", "c"):
        v = cfg.get(k)
        if v is None:
            continue
        if k in ("F", "G") and isinstance(defaults.get(k), list):
            v = spec_list(v)
        over[k] = v
    rep = verify_theorem(tid, over, th=thresholds(cfg))
    return emit_report(cfg, f"theorem_{tid}", rep, f"theorem {tid}")


def cmd_mc(cfg):
    from . import montecarlo as mc

    n, seed = int(cfg["n"] or 10**6), int(cfg["seed"])
    hdr = dict(header(cfg, f"mc {cfg['kind']}"), n=n)
    if cfg["kind"] == "conv-tail":
        F, G = map(_law, _need(cfg, "F", "G"))
        xs = cfg["x"] or [100.0]
        ests = [mc.mc_conv_tail(F, G, x, n, seed, index=i) for i, x in enumerate(xs)]
        emit(cfg, "mc_conv_tail", {".csv": mc.estimates_csv(xs, ests, hdr)})
        for x, e in zip(xs, ests):
            print(f"x={x:g} estimate={e.value:.6g} se={e.std_error:.2g} hits={e.hits}")
        return EXIT_OK
    (F,) = map(_law, _need(cfg, "law"))
    grid = cfg["x"] or mc.big_jump_grid(F, n)
    if len(grid) == 0:
        raise UsageError("big-jump grid is empty for this law and sample size; pass --x")
    probe, points = mc.big_jump_probe(F, grid, n, seed, workers=int(cfg["workers"]))
    files = {".csv": mc.big_jump_csv(points, hdr), ".json": json_text(hdr, {"probe": probe.as_dict()})}
    if cfg.get("svg"):
        from .svg import ratio_plot

        files[".svg"] = ratio_plot([("big-jump", probe.grid, probe.ratios)], 1.0, "P(sum>x)/P(max>x)")
    emit(cfg, "mc_big_jump", files)
    for p in points:
        flag = " low-confidence" if p.low_confidence else ""
        print(f"x={p.x:g} ratio={p.ratio:.5g} se={p.ratio_se:.2g}{flag}")
    if len(grid) < 5:
        return EXIT_OK
    print(f"verdict: {probe.verdict}")
    return exit_code(probe.verdict)


def cmd_suite(cfg):
    from .suite import run_suite

    hdr = header(cfg, "suite all")
    res = run_suite(seed=int(cfg["seed"]), top=cfg["grid_top"], mc_n=int(cfg["mc_n"] or 10**7),
                    header=hdr)
    files = {".json": json_text(hdr, res.as_dict()), ".txt": res.table()}
    emit(cfg, "suite", files)
    emit(cfg, "", {name: text for name, text in res.artifacts.items()})
    sys.stdout.write(res.table())
    return res.exit_code


# ---------------------------------------------------------------------------
# parser


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("common options")
    g.add_argument("--out", default=None, help=f"output directory (default ${OUT_ENV} or .)")
    g.add_argument("--config", default=None, help="flat key = value file mirroring the flags")
    g.add_argument("--seed", type=int, default=None, help="master seed (default 12345)")
    g.add_argument("--grid-top", type=float, default=None, help="largest probe abscissa")
    g.add_argument("--svg", action="store_true", default=None, help="also write an SVG ratio plot")
    g.add_argument("--tol", type=float, default=None, help="verdict tolerance on the limit")
    g.add_argument("--band", type=float, default=None, help="verdict tolerance on the fit band")
    return p


def _leaf(sub, name, handler, command, common, **kw):
    sp = sub.add_parser(name, parents=[common], **kw)
    sp.set_defaults(handler=handler, _parser=sp, _command=command)
    return sp


def build_parser() -> argparse.ArgumentParser:
    from .lemmas import LEMMA_IDS
    from .theorems import THEOREM_IDS

    common = _common()
    parser = _Parser(prog="convtails", description="Tails of convolutions of heavy-tailed laws.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    top = parser.add_subparsers(dest="_top", metavar="command", parser_class=_Parser)

    fam = top.add_parser("families", help="list families or dump counterexample breakpoints")
    fsub = fam.add_subparsers(dest="_sub", metavar="action", parser_class=_Parser)
    _leaf(fsub, "list", cmd_families_list, "families list", common, help="known family names")
    sp = _leaf(fsub, "dump-breakpoints", cmd_families_dump, "families dump-breakpoints", common,
               help="CSV n,x_n,y_n,G_tail_at_y_n of the counterexample law")
    sp.add_argument("n", type=int, nargs="?", default=None, help="number of cycles (default 8)")
    sp.add_argument("--alpha", type=float, default=None)

    sp = _leaf(top, "conv-tail", cmd_conv_tail, "conv-tail", common, help="tail of F*G by quadrature")
    sp.add_argument("--F", default=None)
    sp.add_argument("--G", default=None)
    sp.add_argument("--x", type=float_list, default=None, help="comma-separated abscissae (default 100)")
    sp.add_argument("--with-error", action="store_true", default=None)

    sp = _leaf(top, "decompose", cmd_decompose, "decompose", common,
               help="restriction terms and the residuals of their identities")
    sp.add_argument("--F", default=None)
    sp.add_argument("--G", default=None)
    sp.add_argument("--h", default=None, help="h spec: sqrt, cbrt, log, half, quarter, pow:<e>, auto or a number")
    sp.add_argument("--x", type=float_list, default=None)

    tst = top.add_parser("test", help="class-membership tests")
    tsub = tst.add_subparsers(dest="_sub", metavar="kind", parser_class=_Parser)
    for kind, hlp in (("longtail", "long-tailedness of --law"),
                      ("subexp", "subexponentiality of --law"),
                      ("tail-equiv", "tail equivalence of --F1 and --F2"),
                      ("weak-equiv", "weak tail equivalence of --F1 and --F2"),
                      ("h-insensitive", "h-insensitivity of --law for --h")):
        sp = _leaf(tsub, kind, cmd_test, f"test {kind}", common, help=hlp)
        sp.set_defaults(kind=kind)
        if kind in ("tail-equiv", "weak-equiv"):
            sp.add_argument("--F1", default=None)
            sp.add_argument("--F2", default=None)
        else:
            sp.add_argument("--law", default=None)
        if kind == "h-insensitive":
            sp.add_argument("--h", default=None, help="h spec (default auto: constructed from the law)")

    sp = _leaf(top, "construct-h", cmd_construct_h, "construct-h", common,
               help="an h for which the given laws are h-insensitive")
    sp.add_argument("--law", type=spec_list, default=None, help="one or more family specs separated by ';'")
    sp.add_argument("--horizon", type=float, default=None)
    sp.add_argument("--cap", action="store_true", default=None, help="cap h at x/2")

    sp = _leaf(top, "lemma", cmd_lemma, "lemma", common, help="probe a lemma's conclusion")
    sp.add_argument("id", choices=LEMMA_IDS, metavar="id", help="one of " + ", ".join(LEMMA_IDS))
    for role in _ROLES:
        sp.add_argument(f"--{role}", default=None)
    sp.add_argument("--h", default=None)

    sp = _leaf(top, "theorem", cmd_theorem, "theorem", common, help="probe a theorem on an instance")
    sp.add_argument("id", choices=THEOREM_IDS, metavar="id", help="one of " + ", ".join(THEOREM_IDS))
    for role in _ROLES:
        sp.add_argument(f"--{role}", default=None)
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--p", type=float, default=None)
    sp.add_argument("--h", default=None)
    sp.add_argument("--laws", type=spec_list, default=None, help="family specs separated by ';'")
    sp.add_argument("--c", type=float_list, default=None, help="comma-separated limits")

    mcp = top.add_parser("mc", help="Monte Carlo estimates")
    msub = mcp.add_subparsers(dest="_sub", metavar="kind", parser_class=_Parser)
    sp = _leaf(msub, "conv-tail", cmd_mc, "mc conv-tail", common, help="P(xi+eta>x)")
    sp.set_defaults(kind="conv-tail")
    sp.add_argument("--F", default=None)
    sp.add_argument("--G", default=None)
    sp.add_argument("--x", type=float_list, default=None)
    sp.add_argument("--n", type=int, default=None, help="samples per point (default 10**6)")
    sp = _leaf(msub, "big-jump", cmd_mc, "mc big-jump", common, help="P(xi1+xi2>x)/P(max>x)")
    sp.set_defaults(kind="big-jump")
    sp.add_argument("--law", default=None)
    sp.add_argument("--x", type=float_list, default=None, help="grid (default: geometric, capped by n)")
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--workers", type=int, default=None)

    ste = top.add_parser("suite", help="the full verification battery")
    ssub = ste.add_subparsers(dest="_sub", metavar="all", parser_class=_Parser)
    sp = _leaf(ssub, "all", cmd_suite, "suite all", common, help="run every item")
    sp.add_argument("--mc-n", type=int, default=None, help="Monte Carlo sample size (default 10**7)")
    return parser


if __name__ == "__main__":
    sys.exit(main())
