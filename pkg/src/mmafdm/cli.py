"""Command-line entry point: ``mmafdm {simulate,bound,modes,codebook}``."""
import argparse
import sys

from mmafdm.codec import count_patterns, unrank_cap, unrank_map
from mmafdm.experiments import emit_bound_csv, emit_csv, load_config, run_ber_sweep, run_bound
from mmafdm.modes import build_modes, min_distances, predicted_distances


def _cap_label(arrangement):
    seen = {}
    out = []
    for slot in arrangement:
        seen[slot] = seen.get(slot, 0) + 1
        out.append(f"S{slot}^({seen[slot]})")
    return "[" + ", ".join(out) + "]"


def codebook_table(M, n, k):
    """Side-by-side listing of the MAP and CAP rows for ``(M, n, k)``."""
    n_map, n_cap, b1 = count_patterns(M, n, k)
    lines = [f"# M={M} n={n} k={k}: N_MAP={n_map} N_CAP={n_cap} b1={b1} addressable={1 << b1}",
             "I_MAP\tMAP\tI_CAP\tCAP"]
    for r in range(max(n_map, n_cap)):
        left = ["", ""]
        right = ["", ""]
        if r < n_map:
            left = [str(r), "[" + ", ".join(f"M{m}" for m in unrank_map(r, M, k)) + "]"]
        if r < n_cap:
            right = [str(r), _cap_label(unrank_cap(r, n, k))]
        lines.append("\t".join(left + right))
    return "\n".join(lines) + "\n"


def modes_table(kind, M, U):
    ms = build_modes(kind, M, U)
    lines = ["mode\tpoint\treal\timag"]
    for m in range(ms.M):
        for p in range(ms.U):
            z = ms.points[m, p]
            lines.append(f"{m + 1}\t{p}\t{z.real:.12f}\t{z.imag:.12f}")
    miad, mird = min_distances(ms)
    p_miad, p_mird = predicted_distances(kind, M, U)
    lines.append(f"# miad achieved={miad:.12g} predicted={p_miad:.12g}")
    lines.append(f"# mird achieved={mird:.12g} predicted={p_mird:.12g}")
    return "\n".join(lines) + "\n"


def build_parser():
    parser = argparse.ArgumentParser(prog="mmafdm", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="Monte Carlo BER sweep to CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--out", required=True)

    p = sub.add_parser("bound", help="geometry-averaged union bound to CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("modes", help="print a constellation mode set")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--u", type=int, required=True)
    p.add_argument("--parent", choices=["qam", "psk"], default="qam")

    p = sub.add_parser("codebook", help="print MAP/CAP tables")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            cfg = load_config(args.config, seed=args.seed, workers=args.workers)
            emit_csv(run_ber_sweep(cfg), args.out)
        elif args.command == "bound":
            emit_bound_csv(run_bound(load_config(args.config)), args.out)
        elif args.command == "modes":
            sys.stdout.write(modes_table(args.parent, args.m, args.u))
        elif args.command == "codebook":
            sys.stdout.write(codebook_table(args.m, args.n, args.k))
    except (OSError, ValueError) as exc:
        print(f"mmafdm {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
