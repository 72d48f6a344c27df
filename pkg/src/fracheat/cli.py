"""Command-line interface: generate, propagate, selftrain, refine, bench, stats.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import chebyshev, spectral
from .graph import GraphError, LaplacianKind, laplacian, read_edgelist, spectral_upper_bound, write_edgelist
from .operators import NumericalError, build_operator
from .solver import StepperKind, build_source, integrate, one_hot, predict, scheme_solution

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _order(text):
    try:
        return spectral.check_order(float(text))
    except (ValueError, spectral.SpectralError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _nonneg(text):
    v = float(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {text}")
    return v


def _positive(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return v


def _kind(text):
    try:
        return LaplacianKind.parse(text)
    except GraphError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _triple(text):
    try:
        vals = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected three comma-separated numbers, got {text!r}") from None
    if len(vals) != 3:
        raise argparse.ArgumentTypeError(f"expected three comma-separated numbers, got {text!r}")
    return vals


# ---------------------------------------------------------------- file helpers

def read_label_csv(path) -> dict:
    """``node,label`` rows; a non-numeric first line is taken as a header."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = [p.strip() for p in line.split(",")]
            try:
                node, lab = int(parts[0]), int(parts[1])
            except (ValueError, IndexError):
                if lineno == 1:
                    continue
                raise GraphError(f"{path}:{lineno}: expected 'node,label'") from None
            if node < 0 or lab < 0:
                raise GraphError(f"{path}:{lineno}: node and label must be non-negative")
            out[node] = lab
    return out


def write_predictions(fh, pred, U):
    fh.write("node,label,score\n")
    scores = U[np.arange(U.shape[0]), pred]
    for i, (p, sc) in enumerate(zip(pred, scores)):
        fh.write(f"{i},{int(p)},{float(sc)!r}\n")


def _open_out(path):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", encoding="utf-8"), True


def _emit_predictions(path, pred, U):
    fh, close = _open_out(path)
    try:
        write_predictions(fh, pred, U)
    finally:
        if close:
            fh.close()


def resolve_labels(args, n):
    """Returns ``(labels vector, labeled indices, truth or None, class count)``."""
    truth = None
    if args.truth:
        tmap = read_label_csv(args.truth)
        missing = sorted(set(range(n)) - set(tmap))
        if missing:
            raise GraphError(f"{args.truth}: no label for {len(missing)} node(s), first {missing[:5]}")
        truth = np.array([tmap[i] for i in range(n)], dtype=int)
    if args.labels:
        lmap = read_label_csv(args.labels)
        bad = [i for i in lmap if i >= n]
        if bad:
            raise GraphError(f"{args.labels}: node ids out of range for n={n}: {bad[:5]}")
        labeled = np.array(sorted(lmap), dtype=int)
        y = np.zeros(n, dtype=int) if truth is None else truth.copy()
        y[labeled] = [lmap[i] for i in labeled]
    elif truth is not None:
        from .harness.splits import sample_split, sample_split_total
        if args.labels_total is not None:
            labeled, _, _ = sample_split_total(truth, args.labels_total, args.seed)
        else:
            labeled, _, _ = sample_split(truth, args.labels_per_class, args.seed)
        y = truth
    else:
        raise UsageError("give --labels, or --truth with --labels-per-class/--labels-total")
    if labeled.size == 0:
        raise GraphError("no labeled nodes")
    c = args.classes or int(max(y.max(), truth.max() if truth is not None else 0)) + 1
    if c < 2:
        raise GraphError("need at least two classes")
    return y, labeled, truth, c


def make_operator(args, g, kind, s, t):
    m = getattr(args, "cheb_degree", None)
    strategy = args.strategy
    if strategy == "chebyshev" and getattr(args, "cheb_auto_degree", None) is not None:
        lmax = spectral_upper_bound(laplacian(g, kind))
        m = max(chebyshev.auto_degree(tgt, lmax, s, t, args.cheb_auto_degree) for tgt in ("heat", "phi"))
        print(f"chebyshev degree {m}", file=sys.stderr)
    if strategy == "truncated":
        m = getattr(args, "modes", None)
    return build_operator(g, kind, s, strategy=strategy, m=m)


def _dump_eigenvalues(path, g, kind):
    spec = spectral.eigendecompose(laplacian(g, kind))
    np.savetxt(path, spec.eigenvalues, fmt="%.17g")


def _report_accuracy(truth, pred, labeled):
    if truth is None:
        return
    mask = np.ones(truth.shape[0], bool)
    mask[labeled] = False
    if mask.any():
        acc = float(np.mean(pred[mask] == truth[mask]))
        print(json.dumps({"accuracy_unlabeled": acc, "n_labeled": int(len(labeled))}), file=sys.stderr)


# ---------------------------------------------------------------- subcommands

def cmd_generate(args):
    from .harness.datasets import TwoMoonConfig, two_moon
    cfg = TwoMoonConfig(args.n, args.noise, args.seed, args.k, args.bandwidth, args.scale)
    X, y, g = two_moon(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    np.savetxt(out / "points.csv", X, delimiter=",", fmt="%.17g")
    with open(out / "labels.csv", "w", encoding="utf-8") as fh:
        fh.write("node,label\n")
        for i, lab in enumerate(y):
            fh.write(f"{i},{lab}\n")
    write_edgelist(g, out / "graph.txt")
    with open(out / "config.json", "w", encoding="utf-8") as fh:
        json.dump(cfg.to_dict(), fh, indent=2)
    print(json.dumps({"n": g.n, "edges": g.n_edges, "out": str(out)}))
    return EXIT_OK


def _graph(args):
    return read_edgelist(args.graph, args.nodes)


def cmd_propagate(args):
    g = _graph(args)
    y, labeled, truth, c = resolve_labels(args, g.n)
    kind = args.laplacian
    if args.dump_eigenvalues:
        _dump_eigenvalues(args.dump_eigenvalues, g, kind)
    op = make_operator(args, g, kind, args.s, args.t)
    U0 = one_hot(y, labeled, c)
    F = build_source(U0, labeled, args.source, g.degrees)
    if args.stepper == "closed":
        U = scheme_solution(op, args.scheme, U0, F, args.t)
    else:
        if args.dt is None:
            raise UsageError("--dt is required with a time-stepper")
        start, src = {1: (U0, 0.0 * U0), 2: (F, 0.0 * F), 3: (U0, F)}[args.scheme]
        U = integrate(start, src, args.stepper, args.dt, args.t, op, allow_unstable=args.allow_unstable)
    pred = predict(U)
    _emit_predictions(args.output, pred, U)
    _report_accuracy(truth, pred, labeled)
    return EXIT_OK


def cmd_selftrain(args):
    from .selftrain import self_train
    g = _graph(args)
    y, labeled, truth, c = resolve_labels(args, g.n)
    kind = args.laplacian
    if args.dump_eigenvalues:
        _dump_eigenvalues(args.dump_eigenvalues, g, kind)
    op = make_operator(args, g, kind, args.s, args.dt)
    U0 = one_hot(y, labeled, c)
    F0 = build_source(U0, labeled, args.source, g.degrees)
    fh, close = _open_out(args.log)

    def log(rec):
        fh.write(json.dumps({k: rec[k] for k in ("k", "n_labeled", "n_selected", "frobenius_delta")}) + "\n")

    try:
        res = self_train(op, U0, F0, labeled, args.dt, args.theta, args.tmax, schedule=args.schedule,
                         conf_kind=args.confidence, callback=log)
    finally:
        if close:
            fh.close()
    pred = predict(res.U)
    _emit_predictions(args.output, pred, res.U)
    _report_accuracy(truth, pred, labeled)
    if not res.converged:
        print(f"self-training stopped at T_max={args.tmax} without convergence", file=sys.stderr)
    return EXIT_OK


def cmd_refine(args):
    from .refine import anomaly_scores, read_attention, read_embeddings, refine_and_diffuse
    g = _graph(args)
    y, labeled, truth, c = resolve_labels(args, g.n)
    Z = read_embeddings(args.embeddings)
    if Z.shape[0] != g.n:
        raise GraphError(f"{args.embeddings}: {Z.shape[0]} rows for a graph of {g.n} nodes")
    att = read_attention(args.attention, g.n) if args.attention else None
    sigma = args.sigma if args.sigma in ("auto", "nn") else float(args.sigma)
    pred, U, info = refine_and_diffuse(
        g, Z, y, labeled, attention=att, weights=args.alpha, tau=args.tau, s=args.s, t=args.t,
        kind=args.laplacian, combine=args.combine, selftrain_iters=args.selftrain_iters,
        theta=args.theta, dt=args.dt, sigma=sigma, seed=args.seed,
    )
    _emit_predictions(args.output, pred, U)
    if args.anomaly:
        scores = anomaly_scores(g, Z, args.anomaly_k)
        with open(args.anomaly, "w", encoding="utf-8") as fh:
            fh.write("node,score\n")
            for i, sc in enumerate(scores):
                fh.write(f"{i},{int(sc)}\n")
    print(json.dumps({k: info[k] for k in ("n_edges", "connected", "n_labeled_final")}), file=sys.stderr)
    _report_accuracy(truth, pred, labeled)
    return EXIT_OK


def cmd_bench(args):
    from .bench import bench_cheb
    print(json.dumps(bench_cheb(args.n, args.degree, args.cols, args.repeat, args.seed), indent=2))
    return EXIT_OK


def cmd_stats(args):
    from .harness import report
    from .harness.stats import anova_oneway, pairwise_bonferroni
    from .harness.trials import load_preset, preset_names, run_trials, scheme_tests
    if args.list_presets:
        print("\n".join(preset_names()))
        return EXIT_OK
    if args.groups:
        groups = {}
        for p in args.groups:
            groups[p] = np.loadtxt(p, ndmin=1).tolist()
        F, p = anova_oneway(list(groups.values()))
        print(json.dumps({"anova": {"F": F, "p": p}, "pairwise": pairwise_bonferroni(groups)}, indent=2))
        return EXIT_OK
    if args.from_results:
        sys.stdout.write(report.text_table(report.read(args.from_results)))
        return EXIT_OK
    name = args.config or args.preset
    if name is None:
        raise UsageError("give --preset, --config, --from or --groups")
    overrides = {"trials": args.trials, "seed": args.seed, "workers": args.workers, "strategy": args.strategy}
    if args.labels_total:
        overrides["labels_total"] = True
    if args.cora_dir:
        overrides["cora_edges"] = str(Path(args.cora_dir) / "cora.cites")
        overrides["cora_labels"] = str(Path(args.cora_dir) / "cora.labels")
    cfg = load_preset(name, **overrides)
    results = run_trials(cfg)
    meta = {"labels_interpretation": "total" if cfg.labels_total else "per class",
            "post_hoc": "Bonferroni-corrected pairwise t-tests in place of Tukey HSD",
            "two_moon_graph": {"k": cfg.k, "bandwidth": cfg.bandwidth, "scale": cfg.scale,
                               "symmetrization": "max"}}
    doc = report.build_document(cfg, results, scheme_tests(cfg, results), meta)
    if args.output:
        report.write(doc, args.output)
    sys.stdout.write(report.text_table(doc))
    return EXIT_OK


# ---------------------------------------------------------------- parser

def _add_graph_args(p):
    p.add_argument("--graph", required=True, help="edge list 'i j [w]', 0-based ids")
    p.add_argument("--nodes", type=int, default=None, help="node count (default: max id + 1)")
    p.add_argument("--laplacian", type=_kind, required=True,
                   help="combinatorial | sym | sym-selfloops | random-walk")
    p.add_argument("--labels", help="CSV 'node,label' of the known labels")
    p.add_argument("--truth", help="CSV 'node,label' for every node; used to sample labels and score")
    p.add_argument("--labels-per-class", type=int, default=3)
    p.add_argument("--labels-total", type=int, default=None,
                   help="sample this many labels in total instead of per class")
    p.add_argument("--classes", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--s", type=_order, default=1.0, help="fractional order in (0, 1]")
    p.add_argument("--source", choices=["plain", "degree_scaled"], default="degree_scaled")
    p.add_argument("--output", default=None, help="predictions CSV (default stdout)")
    p.add_argument("--dump-eigenvalues", default=None, metavar="PATH")


def _add_operator_args(p):
    p.add_argument("--strategy", choices=["spectral", "truncated", "chebyshev", "subordination"],
                   default="spectral")
    p.add_argument("--cheb-degree", type=int, default=None, help="default 30 for s=1, 80 otherwise")
    p.add_argument("--cheb-auto-degree", type=_positive, default=None, metavar="TOL",
                   help="smallest degree whose coefficient tail is below TOL")
    p.add_argument("--modes", type=int, default=None, help="mode count for --strategy truncated")


def build_parser() -> Parser:
    ap = Parser(prog="fracheat", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", parser_class=Parser)
    sub.required = True

    p = sub.add_parser("generate", help="write a Two-Moon point set, labels and kNN graph")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--noise", type=_nonneg, default=0.15)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--bandwidth", choices=["mean", "offset", "local"], default="mean")
    p.add_argument("--scale", type=_positive, default=1.0)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("propagate", help="diffuse labels with a source term")
    _add_graph_args(p)
    _add_operator_args(p)
    p.add_argument("--t", type=_nonneg, required=True)
    p.add_argument("--scheme", type=int, choices=[1, 2, 3], default=3)
    p.add_argument("--stepper", default="closed",
                   choices=["closed"] + [k.value for k in StepperKind])
    p.add_argument("--dt", type=_positive, default=None)
    p.add_argument("--allow-unstable", action="store_true", help="skip the forward Euler step-size check")
    p.set_defaults(func=cmd_propagate)

    p = sub.add_parser("selftrain", help="confidence-driven self-training")
    _add_graph_args(p)
    _add_operator_args(p)
    p.set_defaults(source="plain")
    p.add_argument("--theta", type=float, default=0.4)
    p.add_argument("--tmax", type=int, default=20)
    p.add_argument("--dt", type=_positive, default=1.0)
    p.add_argument("--confidence", choices=["base", "entropy"], default="base")
    p.add_argument("--schedule", choices=["constant", "linear"], default="constant")
    p.add_argument("--log", default="-", help="JSON-lines iteration log (default stdout)")
    p.set_defaults(func=cmd_selftrain)

    p = sub.add_parser("refine", help="refine the graph from embeddings, then diffuse")
    _add_graph_args(p)
    p.add_argument("--embeddings", required=True, help="CSV, one row per node")
    p.add_argument("--attention", default=None, help="edge list 'i j weight' with weights in [0, 1]")
    p.add_argument("--alpha", type=_triple, default=(0.4, 0.3, 0.3))
    p.add_argument("--tau", type=float, default=0.5)
    p.add_argument("--t", type=_nonneg, default=1.0)
    p.add_argument("--combine", choices=["gat", "similarity"], default="gat")
    p.add_argument("--sigma", default="auto",
                   help="Gaussian bandwidth: a number, 'auto' (median pair distance) or 'nn' (mean nearest-neighbour distance)")
    p.add_argument("--selftrain-iters", type=int, default=5)
    p.add_argument("--theta", type=float, default=0.4)
    p.add_argument("--dt", type=_positive, default=1.0)
    p.add_argument("--anomaly", default=None, metavar="PATH", help="also write anomaly scores")
    p.add_argument("--anomaly-k", type=int, default=5)
    p.set_defaults(func=cmd_refine, strategy="spectral")

    p = sub.add_parser("bench", help="time the Chebyshev kernel on each backend")
    p.add_argument("--n", type=int, default=5000)
    p.add_argument("--degree", type=int, default=30)
    p.add_argument("--cols", type=int, default=2)
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("stats", help="run a trial grid and report accuracies with significance tests")
    p.add_argument("--preset", default=None, help="bundled preset name, e.g. table1, cora_baseline")
    p.add_argument("--config", default=None, help="JSON config file")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--strategy", choices=["spectral", "chebyshev"], default=None)
    p.add_argument("--labels-total", action="store_true", help="read label counts as totals")
    p.add_argument("--cora-dir", default=os.environ.get("FRACHEAT_CORA_DIR"),
                   help="directory with cora.cites and cora.labels")
    p.add_argument("--output", default=None, help="results JSON")
    p.add_argument("--from", dest="from_results", default=None, help="re-render a results JSON")
    p.add_argument("--groups", nargs="+", default=None, help="files of numbers: ANOVA and pairwise t-tests")
    p.add_argument("--list-presets", action="store_true")
    p.set_defaults(func=cmd_stats)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"fracheat: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalError, spectral.SpectralError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"fracheat: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (GraphError, ValueError, OSError, KeyError) as exc:
        print(f"fracheat: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
