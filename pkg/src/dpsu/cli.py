"""``dpsu`` command line: run, calibrate, stats, synth, audit, grid, kanon."""

from __future__ import annotations

import argparse
import json
import sys

from dpsu.calibration import calibrate
from dpsu.core import Mechanism, MechanismConfig, PrivacyParams
from dpsu.experiments import ExperimentSpec, emit_report, run_grid
from dpsu.ingestion import (LognormalSetSize, corpus_stats, k_anonymity_baseline,
                            load_corpus, synth_zipf_corpus, write_tsv)
from dpsu.policies import PolicyKind
from dpsu.release import run_dpsu
from dpsu.sensitivity import audit_policy

_MECHANISMS = [m.value for m in Mechanism]


def _dump(obj, path=None):
    text = json.dumps(obj, indent=2, ensure_ascii=False) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _int_list(text):
    return [int(x) for x in text.split(",") if x.strip()]


def cmd_run(args):
    db = load_corpus(args.input, args.format, args.ngram)
    config = MechanismConfig(args.mechanism, delta0=args.delta0, alpha=args.alpha,
                             seed=args.seed, passes=args.passes,
                             experimental=args.experimental)
    report = run_dpsu(db, config, PrivacyParams(args.epsilon, args.delta))
    _dump(report.to_dict(), args.output)
    if args.items_out:
        with open(args.items_out, "w", encoding="utf-8", newline="\n") as fh:
            fh.writelines(f"{u}\n" for u in sorted(report.released))


def cmd_calibrate(args):
    cal = calibrate(args.mechanism, PrivacyParams(args.epsilon, args.delta),
                    args.delta0, args.alpha, tightened=not args.generic)
    _dump(cal.to_dict(), args.output)


def cmd_stats(args):
    db = load_corpus(args.input, args.format, args.ngram)
    thresholds = sorted(set([1, 10, 50, 100, 300] + _int_list(args.thresholds or "")))
    _dump(corpus_stats(db, thresholds).to_dict(), args.out)


def cmd_synth(args):
    db = synth_zipf_corpus(args.users, args.vocab, args.exponent,
                           LognormalSetSize(args.mu, args.sigma), args.seed)
    write_tsv(db, args.out)


def cmd_audit(args):
    verdict = audit_policy(args.policy, args.trials, base_seed=args.seed,
                           gamma=args.gamma, delta0=args.delta0)
    _dump(verdict, args.output)
    return 0 if verdict["verdict"] == "pass" else 1


def cmd_grid(args):
    spec = ExperimentSpec.from_json(args.spec)
    result = run_grid(spec, workers=args.workers)
    emit_report(result, args.out, args.format)


def cmd_kanon(args):
    db = load_corpus(args.input, args.format, args.ngram)
    with open(args.released, encoding="utf-8") as fh:
        released = {line.rstrip("\n") for line in fh if line.strip()}
    rows = []
    for k in _int_list(args.k):
        size, coverage = k_anonymity_baseline(db, k, released)
        rows.append({"k": k, "size_Sk": size, "coverage": coverage})
    _dump({"released_size": len(released), "rows": rows}, args.output)


def _add_corpus_args(p):
    p.add_argument("--input", required=True, help="JSONL or TSV corpus")
    p.add_argument("--format", choices=["jsonl", "tsv"], help="default: from extension")
    p.add_argument("--ngram", type=int, default=1, help="n-gram order for raw text")


def build_parser():
    parser = argparse.ArgumentParser(prog="dpsu", description="Differentially private set union")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="release a private item set from a corpus")
    _add_corpus_args(p)
    p.add_argument("--mechanism", choices=_MECHANISMS, default="policy-gaussian")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--delta0", type=int, default=100)
    p.add_argument("--alpha", type=float, default=5.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--passes", type=int, default=1)
    p.add_argument("--experimental", action="store_true", help="allow passes > 1")
    p.add_argument("--output", default="-")
    p.add_argument("--items-out", help="also write released items, one per line")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("calibrate", help="print noise scale, threshold and cutoff")
    p.add_argument("--mechanism", choices=_MECHANISMS, default="policy-gaussian")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--delta0", type=int, default=100)
    p.add_argument("--alpha", type=float, default=5.0)
    p.add_argument("--generic", action="store_true",
                   help="use the generic sensitivity-1 thresholds (leading term 1)")
    p.add_argument("--output", default="-")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("stats", help="corpus statistics")
    _add_corpus_args(p)
    p.add_argument("--thresholds", help="extra comma-separated set-size thresholds")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("synth", help="write a synthetic Zipf corpus as TSV")
    p.add_argument("--users", type=int, default=20000)
    p.add_argument("--vocab", type=int, default=50000)
    p.add_argument("--exponent", type=float, default=1.0)
    p.add_argument("--mu", type=float, default=3.0, help="lognormal set-size mu")
    p.add_argument("--sigma", type=float, default=1.0, help="lognormal set-size sigma")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("audit", help="contraction trials for an update policy")
    p.add_argument("--policy", choices=["l1-descent", "l2-descent", "greedy"],
                   default=PolicyKind.L1_DESCENT.value)
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--gamma", type=float, default=10.0)
    p.add_argument("--delta0", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", default="-")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("grid", help="run an experiment grid from a JSON spec")
    p.add_argument("--spec", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=["json", "md", "csv"])
    p.add_argument("--workers", type=int, help="default: $DPSU_WORKERS or 1")
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("kanon", help="compare a released set with k-anonymity counts")
    _add_corpus_args(p)
    p.add_argument("--released", required=True, help="released items, one per line")
    p.add_argument("--k", default="5,10,15,20,25")
    p.add_argument("--output", default="-")
    p.set_defaults(func=cmd_kanon)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args) or 0
    except (ValueError, OSError) as exc:
        print(f"dpsu: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
