"""``signet`` command line.

Each subcommand takes its parameters from flags, from a TOML key/value file
given with ``--config``, or both (flags win). Keys in the file use the flag
names with dashes or underscores; a ``[<subcommand>]`` table may hold
settings specific to one subcommand.

Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path


from . import __version__
from .embeddings import DIMS_POLICIES, Method, MethodSpec, dims_for, embed
from .errors import InvalidParams, NumericalError, SignetError, ValidationError
from .experiments import Axis, ExperimentGrid, cluster_file, read_labels, run_sweep, write_labels, write_sweep
from .graph import read_edge_list, write_edge_list
from .metrics import adjusted_rand_index
from .ssbm import Sizes, SsbmParams, generate
from .theory import CHECKS, report
from .timeseries import correlation_network, excess_returns, log_returns, read_price_csv

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

log = logging.getLogger("signet")

METHODS = [m.value for m in Method]

DEFAULTS = {
    "gen": {"n": None, "k": 2, "p": None, "eta": 0.0, "seed": 0, "sizes": "equal",
            "out": "graph.tsv", "labels": None},
    "embed": {"input": None, "method": "SpongeSym", "k": None, "tau_plus": 1.0,
              "tau_minus": 1.0, "dims": "k-1", "zero_degree": "regularize", "out": "coords.csv"},
    "cluster": {"input": None, "method": "SpongeSym", "k": None, "tau_plus": 1.0,
                "tau_minus": 1.0, "dims": "k-1", "zero_degree": "regularize", "seed": 0,
                "restarts": 10, "out_prefix": "clusters", "truth": None},
    "sweep": {"axis": "eta", "n": None, "k": 2, "p": 0.1, "eta": 0.0, "values": None,
              "methods": "SpongeSym", "tau_plus": 1.0, "tau_minus": 1.0, "dims": "k-1",
              "trials": 20, "sizes": "equal", "restarts": 10, "seed_offset": 0,
              "out": "sweep.csv", "timing": False},
    "theory": {"check": None, "n": None, "p": 0.1, "eta": 0.1, "tau_plus": 1.0,
               "tau_minus": 1.0, "eps_tau": 0.5, "eps_conc": 0.5, "eps_acc": 0.5},
    "corrnet": {"input": None, "benchmark": None, "threshold": None, "out": "corrnet.tsv"},
}


def _load_config(path: str | None, command: str) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ValidationError(f"bad config {path}: {exc}") from None
    flat = {k: v for k, v in raw.items() if not isinstance(v, dict)}
    flat.update(raw.get(command, {}))
    out = {}
    for key, val in flat.items():
        name = key.replace("-", "_")
        if name not in DEFAULTS[command]:
            if any(name in d for d in DEFAULTS.values()):
                continue  # belongs to another subcommand
            raise ValidationError(f"unknown config key {key!r}")
        out[name] = val
    return out


def _settings(args: argparse.Namespace) -> dict:
    cmd = args.command
    merged = dict(DEFAULTS[cmd])
    merged.update(_load_config(args.config, cmd))
    for name in DEFAULTS[cmd]:
        val = getattr(args, name, None)
        if val is not None:
            merged[name] = val
    missing = [k for k, v in merged.items() if v is None and DEFAULTS[cmd][k] is None
               and k not in ("labels", "truth", "benchmark", "threshold")]
    if missing:
        raise ValidationError("missing required setting(s): " + ", ".join(
            "--" + m.replace("_", "-") for m in missing))
    return merged


def _method_spec(s: dict) -> MethodSpec:
    k = int(s["k"])
    if k < 1:
        raise InvalidParams("k must be at least 1")
    return MethodSpec(method=Method(s["method"]), dims=dims_for(k, str(s["dims"])),
                      tau_plus=float(s["tau_plus"]), tau_minus=float(s["tau_minus"]),
                      zero_degree=s["zero_degree"])


def _parse_list(raw) -> list:
    if isinstance(raw, (list, tuple)):
        return list(raw)
    return [x.strip() for x in str(raw).split(",") if x.strip()]


# subcommands -----------------------------------------------------------------

def cmd_gen(s: dict) -> int:
    params = SsbmParams(n=int(s["n"]), k=int(s["k"]), p=float(s["p"]), eta=float(s["eta"]),
                        seed=int(s["seed"]), sizes=Sizes(s["sizes"]))
    inst = generate(params)
    out = Path(s["out"])
    write_edge_list(inst.graph, out)
    labels = Path(s["labels"]) if s["labels"] else out.with_name("labels.txt")
    write_labels(inst.labels, labels)
    print(f"wrote {out} ({inst.graph.num_edges} edges) and {labels}")
    return 0


def cmd_embed(s: dict) -> int:
    g = read_edge_list(s["input"])
    emb = embed(g, _method_spec(s))
    d = emb.coords.shape[1]
    with open(s["out"], "w", encoding="utf-8", newline="\n") as fh:
        fh.write("vertex," + ",".join(f"x{j}" for j in range(d)) + "\n")
        for i, row in enumerate(emb.coords.tolist()):
            fh.write(f"{i}," + ",".join(repr(x) for x in row) + "\n")
    if not emb.converged:
        log.warning("eigensolver did not converge; coordinates are the best Ritz vectors")
    print(f"wrote {s['out']} (n={g.n}, d={d}); eigenvalues "
          + " ".join(f"{x:.6g}" for x in emb.eigenvalues))
    return 0


def cmd_cluster(s: dict) -> int:
    spec = _method_spec(s)
    res = cluster_file(s["input"], spec, int(s["k"]), s["out_prefix"], seed=int(s["seed"]),
                       restarts=int(s["restarts"]))
    for row in res["summary"]:
        print(f"cluster {row['cluster']}: size {row['size']}, internal +{row['pos_internal']} "
              f"-{row['neg_internal']}")
    if s["truth"]:
        truth = read_labels(s["truth"])
        print(f"ARI vs {s['truth']}: {adjusted_rand_index(truth, res['labels']):.6f}")
    return 0


def _grid_values(axis: Axis, raw) -> list:
    items = _parse_list(raw)
    if axis is Axis.TAU:
        cells = []
        for it in items:
            if isinstance(it, (list, tuple)):
                pair = it
            else:
                pair = str(it).replace(":", " ").replace("/", " ").split()
            if len(pair) != 2:
                raise ValidationError(f"tau cell {it!r} must be 'tau_plus:tau_minus'")
            cells.append((float(pair[0]), float(pair[1])))
        return cells
    return [float(x) for x in items]


def cmd_sweep(s: dict) -> int:
    axis = Axis(s["axis"])
    if s["values"] is None:
        raise ValidationError("missing required setting: --values")
    k = int(s["k"])
    methods = [MethodSpec(method=Method(m), dims=dims_for(k, str(s["dims"])),
                          tau_plus=float(s["tau_plus"]), tau_minus=float(s["tau_minus"]))
               for m in _parse_list(s["methods"])]
    grid = ExperimentGrid(axis=axis, n=int(s["n"]), k=k, values=tuple(_grid_values(axis, s["values"])),
                          methods=tuple(methods), p=float(s["p"]), eta=float(s["eta"]),
                          trials=int(s["trials"]), sizes=Sizes(s["sizes"]),
                          restarts=int(s["restarts"]), seed_offset=int(s["seed_offset"]))
    result = run_sweep(grid)
    paths = write_sweep(result, s["out"], timing=bool(s["timing"]))
    for row in result.aggregates:
        cell = ", ".join(f"{c}={row[c]:g}" for c in ("eta", "p", "tau_plus", "tau_minus") if c in row)
        print(f"{cell} {row['method']}: mean ARI {row['mean_ari']:.4f} +- {row['stderr_ari']:.4f}")
    print("wrote " + ", ".join(str(p) for p in paths))
    return 0


def cmd_theory(s: dict) -> int:
    rec = report(s["check"], n=int(s["n"]), p=float(s["p"]), eta=float(s["eta"]),
                 tau_plus=float(s["tau_plus"]), tau_minus=float(s["tau_minus"]),
                 eps_tau=float(s["eps_tau"]), eps_conc=float(s["eps_conc"]),
                 eps_acc=float(s["eps_acc"]))
    print(json.dumps(rec, indent=2, sort_keys=True))
    return 0


def cmd_corrnet(s: dict) -> int:
    panel = read_price_csv(s["input"], benchmark=s["benchmark"])
    rets = log_returns(panel)
    if s["benchmark"]:
        rets = excess_returns(rets, s["benchmark"])
    thr = None if s["threshold"] is None else float(s["threshold"])
    g = correlation_network(rets, threshold=thr)
    out = Path(s["out"])
    write_edge_list(g, out)
    # instrument ids as trailing comments so the file stays a plain edge list
    with open(out, "a", encoding="utf-8", newline="\n") as fh:
        for i, name in enumerate(rets.ids):
            fh.write(f"# id {i} {name}\n")
    print(f"wrote {out} ({g.n} instruments, {g.num_edges} edges)")
    return 0


COMMANDS = {"gen": cmd_gen, "embed": cmd_embed, "cluster": cmd_cluster, "sweep": cmd_sweep,
            "theory": cmd_theory, "corrnet": cmd_corrnet}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="signet", description=__doc__.split("\n\n")[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="TOML file of key = value settings")
        return p

    p = add("gen", "sample a signed stochastic block model")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--eta", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--sizes", choices=[x.value for x in Sizes])
    p.add_argument("--out", help="edge-list path")
    p.add_argument("--labels", help="ground-truth labels path (default: labels.txt next to --out)")

    for name, help_ in (("embed", "write spectral coordinates"), ("cluster", "embed and round to k clusters")):
        p = add(name, help_)
        p.add_argument("--input", help="edge-list path")
        p.add_argument("--method", choices=METHODS)
        p.add_argument("--k", type=int)
        p.add_argument("--tau-plus", dest="tau_plus", type=float)
        p.add_argument("--tau-minus", dest="tau_minus", type=float)
        p.add_argument("--dims", choices=DIMS_POLICIES)
        p.add_argument("--zero-degree", dest="zero_degree", choices=["regularize", "reject"])
        if name == "embed":
            p.add_argument("--out", help="coordinates CSV")
        else:
            p.add_argument("--seed", type=int)
            p.add_argument("--restarts", type=int)
            p.add_argument("--out-prefix", dest="out_prefix")
            p.add_argument("--truth", help="ground-truth labels file; prints the ARI")

    p = add("sweep", "Monte Carlo sweep over eta, p or (tau+, tau-)")
    p.add_argument("--axis", choices=[a.value for a in Axis])
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--eta", type=float)
    p.add_argument("--values", help="comma-separated cells; tau cells as tp:tm")
    p.add_argument("--methods", help="comma-separated method names")
    p.add_argument("--tau-plus", dest="tau_plus", type=float)
    p.add_argument("--tau-minus", dest="tau_minus", type=float)
    p.add_argument("--dims", choices=DIMS_POLICIES)
    p.add_argument("--trials", type=int)
    p.add_argument("--sizes", choices=[x.value for x in Sizes])
    p.add_argument("--restarts", type=int)
    p.add_argument("--seed-offset", dest="seed_offset", type=int)
    p.add_argument("--out", help="trial CSV path")
    p.add_argument("--timing", action="store_true", default=None,
                   help="fill the secs column (makes output run-dependent)")

    p = add("theory", "closed-form checks for the two-cluster model")
    p.add_argument("--check", choices=CHECKS)
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--eta", type=float)
    p.add_argument("--tau-plus", dest="tau_plus", type=float)
    p.add_argument("--tau-minus", dest="tau_minus", type=float)
    p.add_argument("--eps-tau", dest="eps_tau", type=float)
    p.add_argument("--eps-conc", dest="eps_conc", type=float)
    p.add_argument("--eps-acc", dest="eps_acc", type=float)

    p = add("corrnet", "correlation network from a price CSV")
    p.add_argument("--input")
    p.add_argument("--benchmark")
    p.add_argument("--threshold", type=float)
    p.add_argument("--out")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](_settings(args))
    except SignetError as exc:
        print(f"signet: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"signet: {exc}", file=sys.stderr)
        return ValidationError.exit_code
    except FloatingPointError as exc:
        print(f"signet: {exc}", file=sys.stderr)
        return NumericalError.exit_code


if __name__ == "__main__":
    sys.exit(main())
