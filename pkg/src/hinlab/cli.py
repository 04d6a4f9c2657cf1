"""Command-line front end.

Every command writes a ``<output>.manifest.json`` next to its main output;
``hinlab replay <manifest>`` re-runs it with the same resolved settings.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__, snapshot
from .diversity import DegenerateError, diversity_mosaic
from .evaluation import (
    AVERAGING, SplitSpec, evaluate_grid, run_randomization_study, split_likes,
    write_results_csv, write_study_csv,
)
from .hin import HinError
from .ingest import derive_likes, parse_movielens_100k, parse_relation_tables, read_manifest, \
    read_manifest_options
from .randomizer import write_replicate_manifest
from .recommender import ipp_recommend, two_path_recommend, ubcf_recommend

log = logging.getLogger("hinlab")

EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text):
    return [float(x) for x in str(text).split(",") if x.strip()]


def _ints(text):
    return [int(x) for x in str(text).split(",") if x.strip()]


def _default_jobs():
    try:
        return max(1, int(os.environ.get("HINLAB_JOBS", "1")))
    except ValueError:
        return 1


def _sha256_files(paths):
    h = hashlib.sha256()
    for p in paths:
        h.update(Path(p).name.encode())
        h.update(Path(p).read_bytes())
    return h.hexdigest()


def _write_manifest(out, args, fingerprint, seed=None):
    config = {k: v for k, v in vars(args).items() if k not in ("func", "command")}
    manifest = {
        "command": args.command,
        "config": config,
        "seed": seed,
        "dataset_fingerprint": fingerprint,
        "tool_version": __version__,
    }
    path = Path(f"{out}.manifest.json")
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _hin_input(args):
    return snapshot.load(args.hin), snapshot.fingerprint(args.hin)


# --- commands -------------------------------------------------------------

def cmd_ingest(args):
    if bool(args.movielens) == bool(args.tables):
        raise UsageError("give exactly one of --movielens or --tables")
    if args.movielens:
        hin = parse_movielens_100k(args.movielens)
        files = [Path(args.movielens) / n for n in ("u.data", "u.item", "u.user")]
        likes_from = "rates"
    else:
        specs = read_manifest(args.tables)
        hin = parse_relation_tables(specs)
        files = [args.tables] + [s.path for s in specs]
        likes_from = read_manifest_options(args.tables).get("likes_from")
    if likes_from and "likes" not in hin.link_groups:
        hin = derive_likes(hin, likes_from, args.likes_threshold)
    snapshot.save(hin, args.out)
    _write_manifest(args.out, args, _sha256_files(files))
    for name, lg in hin.link_groups.items():
        print(f"{name}\t{lg.source}\t{len(hin.group(lg.source))}\t{lg.target}\t"
              f"{len(hin.group(lg.target))}\t{len(lg)}")


def _user_content_relations(hin, user_group, item_group):
    return [n for n, lg in hin.link_groups.items()
            if lg.source == user_group and lg.target not in (user_group, item_group)]


def _item_content_relations(hin, item_group):
    return [n for n, lg in hin.link_groups.items() if lg.source == item_group]


def cmd_mosaic(args):
    hin, fp = _hin_input(args)
    likes = hin.link(args.likes)
    sources = [s for s in args.sources.split(",") if s] if args.sources else \
        _user_content_relations(hin, likes.source, likes.target)
    targets = [t for t in args.targets.split(",") if t] if args.targets else \
        _item_content_relations(hin, likes.target)
    if args.identity:
        sources = [None] + sources
    extra, middles = [], [args.likes]
    for method in [m for m in args.baselines.split(",") if m]:
        if method == "ubcf":
            recs = ubcf_recommend(hin, args.list_size, k=args.k, likes=args.likes)
        elif method == "ipp":
            recs = ipp_recommend(hin, args.list_size, likes=args.likes)
        else:
            raise UsageError(f"unknown baseline {method!r}")
        name = f"rec_{method.upper()}"
        extra.append(recs.to_link_group(name))
        middles.append(name)
    hin = hin.with_link_groups(extra)
    mosaic = diversity_mosaic(hin, sources, targets, middles, jobs=args.jobs)
    mosaic.to_csv(args.out)
    _write_manifest(args.out, args, fp)
    for s, x, t, reason in mosaic.skipped:
        print(f"skipped ({s}, {x}, {t}): {reason}", file=sys.stderr)


def cmd_recommend(args):
    hin, fp = _hin_input(args)
    if args.method == "two-path":
        if not (args.x and args.y):
            raise UsageError("two-path needs --x and --y")
        recs = two_path_recommend(hin, args.x, args.y, args.alpha, args.n, likes=args.likes,
                                  exclude=args.exclude, jobs=args.jobs)
    elif args.method == "ubcf":
        recs = ubcf_recommend(hin, args.n, k=args.k, likes=args.likes)
    else:
        recs = ipp_recommend(hin, args.n, likes=args.likes)
    recs.to_csv(args.out, hin)
    _write_manifest(args.out, args, fp)


def cmd_grid(args):
    hin, fp = _hin_input(args)
    split = SplitSpec(args.holdout, args.seed, args.likes)
    train, test = split_likes(hin, split)
    results = evaluate_grid(train, test, args.x, args.y, _floats(args.alphas), _ints(args.sizes),
                            dataset=args.dataset, likes=args.likes, exclude=args.exclude,
                            diversity_relation=args.diversity_relation)
    write_results_csv(args.out, results)
    _write_manifest(args.out, args, fp, seed=args.seed)


def cmd_shuffle_study(args):
    hin, fp = _hin_input(args)
    quantiles = tuple(_floats(args.quantiles))
    if len(quantiles) != 2:
        raise UsageError("--quantiles takes two values")
    outcome = run_randomization_study(
        hin, args.x, args.y, args.shuffle or args.x, replicates=args.replicates,
        alphas=_floats(args.alphas), sizes=_ints(args.sizes), quantiles=quantiles,
        split=SplitSpec(args.holdout, args.seed, args.likes), master_seed=args.seed,
        swap_factor=args.swap_factor, jobs=args.jobs, dataset=args.dataset,
        exclude=args.exclude, diversity_relation=args.diversity_relation)
    out = Path(args.out)
    write_study_csv(out, outcome.rows, quantiles)
    stem = out.with_suffix("")
    write_replicate_manifest(f"{stem}_replicates.csv", outcome.manifest)
    write_results_csv(f"{stem}_results.csv", outcome.original + outcome.replicates)
    _write_manifest(args.out, args, fp, seed=args.seed)


def cmd_plot(args):
    from . import plotting

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    jobs = [(kind, getattr(args, kind), outdir / f"{Path(getattr(args, kind)).stem}.png")
            for kind in ("grid", "study", "mosaic") if getattr(args, kind)]
    if not jobs:
        raise UsageError("nothing to plot: give --grid, --study or --mosaic")
    script = outdir / "plot_figures.py"
    script.write_text(plotting.plot_script(jobs), encoding="utf-8")
    if args.render:
        for kind, csv_path, png in jobs:
            plotting.FIGURES[kind](csv_path, png)
            print(png)
    _write_manifest(script, args, _sha256_files([j[1] for j in jobs]))


def cmd_replay(args):
    manifest = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
    argv = argv_from_config(manifest["command"], manifest["config"])
    return main(argv)


# --- parser ---------------------------------------------------------------

def _common(p, hin=True):
    if hin:
        p.add_argument("--hin", required=True, help="network snapshot written by `ingest`")
    p.add_argument("--likes", default="likes", help="user->item choice relation")
    p.add_argument("--jobs", type=int, default=_default_jobs(),
                   help="worker count (default: $HINLAB_JOBS or 1); results do not depend on it")


def build_parser():
    parser = _Parser(prog="hinlab", description="Meta-path diversity and recommendation experiments.")
    parser.add_argument("--version", action="version", version=f"hinlab {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("ingest", help="parse a dataset into a network snapshot")
    p.add_argument("--movielens", help="directory with u.data, u.item, u.user")
    p.add_argument("--tables", help="relation-table manifest (key = value blocks)")
    p.add_argument("--likes-threshold", type=int, default=3)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("mosaic", help="mean individual diversity of S^-1 X T meta-paths")
    _common(p)
    p.add_argument("--sources", help="user-content relations (default: all)")
    p.add_argument("--targets", help="item-content relations (default: all)")
    p.add_argument("--identity", action=argparse.BooleanOptionalAction, default=True,
                   help="include the user group itself as a source row")
    p.add_argument("--baselines", default="ubcf,ipp")
    p.add_argument("--list-size", type=int, default=5)
    p.add_argument("--k", type=int, default=50, help="UBCF neighbourhood size")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_mosaic)

    p = sub.add_parser("recommend", help="one recommendation set")
    _common(p)
    p.add_argument("--method", choices=("two-path", "ubcf", "ipp"), default="two-path")
    p.add_argument("--x", help="user-content relation")
    p.add_argument("--y", help="item-content relation")
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--exclude", help="relation whose items are excluded (default: --likes)")
    p.add_argument("--k", type=int, default=50)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_recommend)

    for name, func, alphas, help_ in (
            ("grid", cmd_grid, "1,0.8,0.6,0.4,0.2,0", "F1 and diversity over alpha and list size"),
            ("shuffle-study", cmd_shuffle_study, "0.8,0.6,0.4,0.2,0",
             "original network against shuffled replicates")):
        p = sub.add_parser(name, help=help_)
        _common(p)
        p.add_argument("--x", required=True)
        p.add_argument("--y", required=True)
        p.add_argument("--alphas", default=alphas)
        p.add_argument("--sizes", default="5,10,15,20")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--holdout", type=float, default=0.1)
        p.add_argument("--exclude")
        p.add_argument("--dataset", default="")
        p.add_argument("--diversity-relation", default="Ty")
        p.add_argument("--out", required=True)
        p.set_defaults(func=func)
    p.add_argument("--shuffle", help="relation to shuffle (default: --x)")
    p.add_argument("--replicates", type=int, default=10)
    p.add_argument("--quantiles", default="0.1,0.9")
    p.add_argument("--swap-factor", type=float, default=10.0)

    p = sub.add_parser("plot", help="render figures from CSV outputs")
    p.add_argument("--grid")
    p.add_argument("--study")
    p.add_argument("--mosaic")
    p.add_argument("--outdir", required=True)
    p.add_argument("--render", action=argparse.BooleanOptionalAction, default=True,
                   help="render PNGs now (the script is written either way)")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("replay", help="re-run a command from its manifest")
    p.add_argument("manifest")
    p.set_defaults(func=cmd_replay)
    return parser


def argv_from_config(command, config) -> list:
    parser = build_parser()
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    subparser = sub.choices[command]
    argv = [command]
    for action in subparser._actions:
        if action.dest not in config or action.dest == "help":
            continue
        value = config[action.dest]
        if not action.option_strings:
            argv.append(str(value))
        elif isinstance(action, argparse.BooleanOptionalAction):
            argv.append(action.option_strings[0] if value else action.option_strings[1])
        elif value is not None:
            argv.extend([action.option_strings[0], str(value)])
    return argv


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    if not argv:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if not getattr(args, "func", None):
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        result = args.func(args)
    except UsageError as exc:
        print(f"hinlab {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (HinError, DegenerateError, OSError) as exc:
        print(f"hinlab {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA
    return int(result or 0)


if __name__ == "__main__":
    sys.exit(main())
