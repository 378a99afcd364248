"""Command-line interface: ``cqbc {info, region, simulate, verify, replay}``.

Every subcommand that writes files also writes ``<output>.manifest.json``
recording the flags, seeds, package version and SHA-256 digests of inputs
and outputs.  ``cqbc replay --manifest M`` re-runs it and compares digests.

Exit codes: 0 success, 2 input error, 3 resource guardrail, 4 verification
failure.
"""

import argparse
import hashlib
import json
import os
import pathlib
import sys

from . import __version__
from .channel import EXAMPLE_CHANNELS, example_path, marginal_channel, parse_channel
from .codec import (CSV_HEADER, cloud_distribution, correlated_distribution, default_delta,
                    marton_split, run_marton, run_superposition, superposition_corner)
from .exceptions import CQBroadcastError, OversizeError
from .info import entropies
from .lemmas import SUITES, run_suite
from .regions import (SearchConfig, marton_region, region_provenance_json, region_to_csv,
                      single_user_holevo, superposition_region)

EXIT_OK, EXIT_INPUT, EXIT_GUARDRAIL, EXIT_VERIFY = 0, 2, 3, 4
MONTE_CARLO_TRIALS = 10000


class InputError(Exception):
    """Bad user input that is not a library error (missing file and the like)."""


def _sha256(data):
    return hashlib.sha256(data).hexdigest()


def _read_channel(arg):
    """Load a channel from a path, or a bundled example by name (``noiseless`` or ``noiseless.json``)."""
    path = pathlib.Path(arg)
    if path.is_file():
        data = path.read_bytes()
        source = str(path)
    else:
        stem = path.name[:-5] if path.name.endswith(".json") else path.name
        if path.parent != pathlib.Path(".") or stem not in EXAMPLE_CHANNELS:
            raise InputError(f"channel file not found: {arg}")
        data = example_path(stem).read_bytes()
        source = f"bundled:{stem}"
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError:
        raise InputError(f"{arg}: channel file is not UTF-8 text") from None
    return parse_channel(text), {"argument": arg, "source": source, "sha256": _sha256(data)}


def _write(path, text, mode="w"):
    path = pathlib.Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, mode, encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _manifest(args, inputs, outputs, seeds, digests=None):
    """Write the run manifest next to the first output.

    ``digests`` overrides the digest of outputs whose file content is not
    owned by this run alone (appended CSV files record the bytes the run
    would write into a fresh file).
    """
    flags = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "manifest_path")}
    digests = dict(digests or {})
    doc = {
        "subcommand": args.command,
        "flags": flags,
        "seeds": seeds,
        "version": __version__,
        "inputs": inputs,
        "outputs": {str(p): digests.get(str(p)) or _sha256(pathlib.Path(p).read_bytes())
                    for p in outputs},
    }
    target = args.manifest_path or f"{outputs[0]}.manifest.json"
    _write(target, json.dumps(doc, indent=1, sort_keys=True) + "\n")
    return target


# ---------------------------------------------------------------------------
# Subcommands


def cmd_info(args):
    ch, _ = _read_channel(args.channel)
    print(f"input alphabet: {ch.input_alphabet_size}")
    print(f"dim B1: {ch.dim_b1}  dim B2: {ch.dim_b2}")
    h1 = entropies(marginal_channel(ch, 1))
    h2 = entropies(marginal_channel(ch, 2))
    hj = entropies(ch.outputs)
    print("letter  H(B1)  H(B2)  H(B1B2)")
    for x in range(ch.input_alphabet_size):
        print(f"{x}  {h1[x]:.6f}  {h2[x]:.6f}  {hj[x]:.6f}")
    cfg = SearchConfig(grid_resolution=args.grid)
    i1, _ = single_user_holevo(ch, 1, cfg)
    i2, _ = single_user_holevo(ch, 2, cfg)
    print(f"max I(X;B1) = {i1:.6f}")
    print(f"max I(X;B2) = {i2:.6f}")
    return EXIT_OK


def cmd_region(args):
    ch, src = _read_channel(args.channel)
    if args.scheme == "superposition":
        aux = (args.w_size,)
    else:
        aux = (args.u1_size, args.u2_size)
    cfg = SearchConfig(grid_resolution=args.grid, random_restarts=args.restarts,
                       aux_alphabet_sizes=aux, seed=args.seed,
                       convex_hull=args.convex_hull)
    build = superposition_region if args.scheme == "superposition" else marton_region
    region = build(ch, cfg)
    side = f"{args.out}.provenance.json"
    _write(args.out, region_to_csv(region))
    _write(side, region_provenance_json(region) + "\n")
    m = _manifest(args, {"channel": src}, [args.out, side], {"seed": args.seed})
    print(f"wrote {args.out} ({len(region.frontier)} frontier points), {side}, {m}")
    return EXIT_OK


def _simulate_run(args, ch):
    n = args.n
    delta = default_delta(n) if args.delta is None else args.delta
    trials = args.trials
    if trials is None:
        trials = 0 if n <= 6 else MONTE_CARLO_TRIALS
    k = ch.input_alphabet_size
    if args.scheme == "superposition":
        p_w, cond = cloud_distribution(args.w_size, k, args.mix)
        c1, c2 = superposition_corner(p_w, cond, ch)
        r1 = args.scale * c1 if args.r1 is None else args.r1
        r2 = args.scale * c2 if args.r2 is None else args.r2
        report, cb, _ = run_superposition(ch, p_w, cond, n, r1, r2, args.seed, delta, trials,
                                          args.mode, args.credit == "nonunique")
        dist = {"p_w": p_w.tolist(), "p_x_given_w": cond.tolist()}
    else:
        p, f = correlated_distribution(args.u1_size, args.u2_size, k, args.mix)
        s1, s2 = marton_split(p, f, ch, 0.0)
        r1 = args.scale * s1 if args.r1 is None else args.r1
        r2 = args.scale * s2 if args.r2 is None else args.r2
        report, cb, _ = run_marton(ch, p, f, n, r1, r2, args.seed, delta, trials, args.mode)
        dist = {"p_u1u2": p.tolist(), "f": f.tolist()}
    return report, dist


def cmd_simulate(args):
    ch, src = _read_channel(args.channel)
    report, dist = _simulate_run(args, ch)
    doc = json.loads(report.to_json())
    doc["distribution"] = json.loads(json.dumps(dist))
    text = json.dumps(doc, indent=1, sort_keys=True) + "\n"
    outputs, digests = [], {}
    if args.out:
        _write(args.out, text)
        outputs.append(args.out)
    else:
        sys.stdout.write(text)
    if args.csv:
        row = report.csv_row() + "\n"
        fresh = not os.path.exists(args.csv) or os.path.getsize(args.csv) == 0
        _write(args.csv, (CSV_HEADER + "\n" if fresh else "") + row, "a")
        outputs.append(args.csv)
        digests[args.csv] = _sha256((CSV_HEADER + "\n" + row).encode("utf-8"))
    if outputs:
        _manifest(args, {"channel": src}, outputs, {"seed": args.seed}, digests)
    print(f"average error {report.average_error:.12g} "
          f"(n={report.n}, M1={report.m1_count}, M2={report.m2_count}, mode={report.mode})",
          file=sys.stderr)
    return EXIT_OK


def cmd_verify(args):
    ch, src = (None, None)
    if args.channel:
        ch, src = _read_channel(args.channel)
    results = run_suite(args.suite, args.instances, args.seed, channel=ch, n=args.n,
                        delta=args.delta, threads=args.threads)
    lines = [r.to_json() for r in results]
    text = "\n".join(lines) + "\n"
    if args.out:
        _write(args.out, text)
        _manifest(args, {"channel": src} if src else {}, [args.out], {"seed": args.seed})
    else:
        sys.stdout.write(text)
    failed = [r for r in results if not r.passed]
    for r in results:
        print(f"{r.lemma}: worst slack {r.worst_slack:.3e} {'PASS' if r.passed else 'FAIL'}",
              file=sys.stderr)
    for r in failed:
        print(f"worst instance for {r.lemma}: {json.dumps(r.to_dict(True)['worst_instance'])}",
              file=sys.stderr)
    return EXIT_VERIFY if failed else EXIT_OK


def cmd_replay(args):
    try:
        doc = json.loads(pathlib.Path(args.manifest).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read manifest {args.manifest}: {exc}") from None
    for name, rec in doc.get("inputs", {}).items():
        if _read_channel(rec["argument"])[1]["sha256"] != rec["sha256"]:
            raise InputError(f"input {name} ({rec['argument']}) changed since the manifest was written")
    flags = dict(doc["flags"])
    outputs = doc["outputs"]
    # Outputs always go to a fresh directory so originals are never touched.
    outdir = pathlib.Path(args.outdir or f"{args.manifest}.replay")
    remap = {p: str(outdir / pathlib.Path(p).name) for p in outputs}
    for key in ("out", "csv"):
        if flags.get(key):
            flags[key] = remap[flags[key]]
    expected = {remap[p]: h for p, h in outputs.items()}
    for p in expected:
        if os.path.exists(p):
            os.remove(p)
    flags["manifest_path"] = str(outdir / "replay.manifest.json")
    ns = argparse.Namespace(**flags)
    ns.func = COMMANDS[doc["subcommand"]]
    code = ns.func(ns)
    if code != EXIT_OK:
        return code
    bad = 0
    for p, h in expected.items():
        got = _sha256(pathlib.Path(p).read_bytes()) if os.path.exists(p) else None
        ok = got == h
        bad += not ok
        print(f"{'identical' if ok else 'DIFFERS'}  {p}", file=sys.stderr)
    return EXIT_VERIFY if bad else EXIT_OK


COMMANDS = {"info": cmd_info, "region": cmd_region, "simulate": cmd_simulate,
            "verify": cmd_verify, "replay": cmd_replay}


# ---------------------------------------------------------------------------
# Parser


def _probability(text):
    v = float(text)
    if not 0 <= v <= 1:
        raise argparse.ArgumentTypeError(f"{text} is not in [0, 1]")
    return v


def _positive(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"{text} is not a positive integer")
    return v


def _nonnegative_float(text):
    v = float(text)
    if not v >= 0:
        raise argparse.ArgumentTypeError(f"{text} is not a nonnegative number")
    return v


def build_parser():
    p = argparse.ArgumentParser(prog="cqbc", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--threads", type=_positive, default=os.cpu_count() or 1,
                        help="worker cap (default: available cores)")
        sp.add_argument("--manifest-path", dest="manifest_path", default=None,
                        help=argparse.SUPPRESS)

    s = sub.add_parser("info", help="channel dimensions, entropies and Holevo ceilings")
    s.add_argument("--channel", required=True)
    s.add_argument("--grid", type=_positive, default=17)
    common(s)
    s.set_defaults(func=cmd_info)

    s = sub.add_parser("region", help="inner-bound rate region as CSV")
    s.add_argument("--channel", required=True)
    s.add_argument("--scheme", choices=("superposition", "marton"), required=True)
    s.add_argument("--w-size", dest="w_size", type=_positive, default=2)
    s.add_argument("--u1-size", dest="u1_size", type=_positive, default=2)
    s.add_argument("--u2-size", dest="u2_size", type=_positive, default=2)
    s.add_argument("--grid", type=_positive, default=17)
    s.add_argument("--restarts", type=int, default=0)
    s.add_argument("--convex-hull", dest="convex_hull", action="store_true")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    common(s)
    s.set_defaults(func=cmd_region)

    s = sub.add_parser("simulate", help="random code + square-root decoders at blocklength n")
    s.add_argument("--channel", required=True)
    s.add_argument("--scheme", choices=("superposition", "marton"), required=True)
    s.add_argument("--n", type=_positive, required=True)
    s.add_argument("--r1", type=_nonnegative_float, default=None)
    s.add_argument("--r2", type=_nonnegative_float, default=None)
    s.add_argument("--scale", type=_nonnegative_float, default=0.5,
                   help="fraction of the reference corner used when --r1/--r2 are omitted")
    s.add_argument("--delta", type=_nonnegative_float, default=None)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--trials", type=int, default=None,
                   help="0 = exact; default exact for n <= 6, else Monte-Carlo")
    s.add_argument("--mode", choices=("auto", "joint", "marginal"), default="auto")
    s.add_argument("--credit", choices=("nonunique", "unique"), default="nonunique")
    s.add_argument("--mix", type=_probability, default=None,
                   help="blend of the default distribution with uniform")
    s.add_argument("--w-size", dest="w_size", type=_positive, default=2)
    s.add_argument("--u1-size", dest="u1_size", type=_positive, default=2)
    s.add_argument("--u2-size", dest="u2_size", type=_positive, default=2)
    s.add_argument("--out", default=None)
    s.add_argument("--csv", default=None)
    common(s)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("verify", help="randomised lemma checks")
    s.add_argument("--suite", choices=SUITES + ("all",), required=True)
    s.add_argument("--instances", type=_positive, default=500)
    s.add_argument("--seed", type=int, default=7)
    s.add_argument("--channel", default=None, help="default: bundled bsc_like")
    s.add_argument("--n", type=_positive, default=6)
    s.add_argument("--delta", type=_nonnegative_float, default=0.3)
    s.add_argument("--out", default=None)
    common(s)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("replay", help="re-run a manifest and compare output digests")
    s.add_argument("--manifest", required=True)
    s.add_argument("--outdir", default=None, help="default: <manifest>.replay/")
    s.set_defaults(func=cmd_replay, manifest_path=None)
    return p


def _fill_defaults(args):
    if getattr(args, "command", None) == "simulate" and args.mix is None:
        args.mix = 0.0 if args.scheme == "superposition" else 0.2
    if getattr(args, "trials", None) is not None and args.trials < 0:
        raise InputError("--trials must be nonnegative")
    return args


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(_fill_defaults(args))
    except OversizeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GUARDRAIL
    except (InputError, CQBroadcastError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
