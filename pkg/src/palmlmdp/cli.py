"""``palmlmdp`` command line: bank, extract, match, eval-verify,
eval-identify, dpn-stats, synth.

Results go to stdout, logs and progress to stderr. Exit status is 0 on
success, 1 on a data/parameter error and 2 on bad usage.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import dataset_io as dio
from . import evaluation as ev
from .baselines import DEFAULT_LDP_K
from .descriptor import DEFAULT_BLOCK_SIZE, METHODS, chi_square
from .errors import InputError, LmdpError
from .filter_bank import GaborParams, build_bank
from .pipeline import extract

log = logging.getLogger("palmlmdp")


def _add_gabor(p):
    g = p.add_argument_group("Gabor filter bank")
    g.add_argument("--size", type=int, default=35, help="kernel side length (odd)")
    g.add_argument("--mu", type=float, default=0.11, help="radial frequency")
    g.add_argument("--sigma", type=float, default=5.6179, help="Gaussian std-dev in pixels")
    g.add_argument("--orientations", type=int, default=12, help="number of orientations")
    g.add_argument("--no-normalize", action="store_true",
                   help="keep the kernel DC component (no mean removal)")


def _params(args) -> GaborParams:
    return GaborParams(mu=args.mu, sigma=args.sigma, kernel_size=args.size,
                       n_orientations=args.orientations, normalize=not args.no_normalize)


def _write_text(path, text: str):
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        dio.atomic_write(path, text.encode("utf-8"))


# ---------------------------------------------------------------- commands

def cmd_bank(args) -> int:
    bank = build_bank(_params(args))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for f in bank.filters:
        path = out / f"kernel_{f.index:02d}.csv"
        lines = [",".join(repr(float(v)) for v in row) for row in f.kernel]
        dio.atomic_write(path, ("\n".join(lines) + "\n").encode())
        print(f"{path}\tindex={f.index}\ttheta={f.theta!r}\tsum={float(f.kernel.sum()):.3e}")
    return 0


_worker_bank = None


def _init_worker(params):
    global _worker_bank
    _worker_bank = build_bank(params)


def _extract_one(task):
    path, name, method, block_size, ldp_k = task
    image = dio.load_pgm(path)
    return extract(image, method, _worker_bank, block_size, identity=name, ldp_k=ldp_k)


def _progress(i, n, name):
    print(f"[{i}/{n}] {name}", file=sys.stderr)


def cmd_extract(args) -> int:
    found, skipped = dio.scan_dataset(args.dataset)
    for name in skipped:
        log.warning("skipping %s: no <palm_id>_<sample_id> name", name)
    if not found:
        raise InputError(f"no <palm_id>_<sample_id>.pgm samples in {args.dataset}")
    params = _params(args)
    tasks = [(p, f"{palm}_{sample}", args.method, args.block_size, args.ldp_k)
             for palm, sample, p in found]
    descriptors = []
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs, initializer=_init_worker, initargs=(params,)) as pool:
            for i, d in enumerate(pool.map(_extract_one, tasks, chunksize=4), 1):
                descriptors.append(d)
                _progress(i, len(tasks), d.identity)
    else:
        _init_worker(params)
        for i, task in enumerate(tasks, 1):
            try:
                descriptors.append(_extract_one(task))
            except LmdpError as exc:
                raise type(exc)(f"{task[0]}: {exc}") from exc
            _progress(i, len(tasks), task[1])
    dio.write_descriptors(args.out, descriptors)
    d = descriptors[0]
    print(f"wrote {len(descriptors)} {d.method} descriptors "
          f"({d.n_blocks} blocks x {d.bins_per_block} bins) to {args.out}")
    return 0


def _pick(records, ident, path):
    if ident is None:
        if not records:
            raise InputError(f"{path} holds no records")
        return records[0]
    for r in records:
        if r.identity == ident:
            return r
    raise InputError(f"no record {ident!r} in {path}")


def cmd_match(args) -> int:
    a = _pick(dio.read_descriptors(args.file_a), args.id_a, args.file_a)
    b = _pick(dio.read_descriptors(args.file_b), args.id_b, args.file_b)
    print(repr(chi_square(a, b)))
    return 0


def _samples(path):
    records = dio.read_descriptors(path)
    if not records:
        raise InputError(f"{path} holds no descriptor records")
    samples = [(dio.split_name(r.identity)[0], r) for r in records]
    # "first k" means sample order within each identity
    order = sorted(range(len(records)), key=lambda i: dio.split_name(records[i].identity))
    return [samples[i] for i in order], records[0]


def cmd_eval_verify(args) -> int:
    samples, first = _samples(args.descriptors)
    trials = ev.all_pairs_verification(samples, jobs=args.jobs)
    eer, roc = ev.compute_eer(trials)
    n_gen = sum(t.genuine for t in trials)
    report = ev.EvalReport(eer=eer, n_genuine=n_gen, n_impostor=len(trials) - n_gen)
    config = {"descriptors": args.descriptors, "method": first.method,
              "block_size": first.block_size, "samples": len(samples),
              "accept_rule": "score<=threshold"}
    _write_text(args.report, ev.format_report(report, config))
    if args.roc:
        _write_text(args.roc, ev.roc_to_csv(roc))
    return 0


def cmd_eval_identify(args) -> int:
    samples, first = _samples(args.descriptors)
    report = ev.EvalReport()
    for k in args.train_k:
        acc, n = ev.identification(samples, k)
        report.rank1[k] = acc
        report.n_queries[k] = n
    config = {"descriptors": args.descriptors, "method": first.method,
              "block_size": first.block_size, "samples": len(samples),
              "train_k": ",".join(map(str, args.train_k))}
    _write_text(args.report, ev.format_report(report, config))
    return 0


def cmd_dpn_stats(args) -> int:
    dataset = dio.load_dataset(args.dataset)
    if not len(dataset):
        raise InputError(f"no samples in {args.dataset}")
    bank = build_bank(_params(args))
    rows, totals = [], np.zeros(4, dtype=np.int64)
    for e in dataset:
        counts = ev.dpn_counts(e.image, bank)
        totals += counts
        rows.append((e.name, _stats(counts)))
    rows.append(("ALL", _stats(totals)))
    _write_text(args.out, ev.dpn_to_csv(rows))
    s = rows[-1][1]
    log.info("DPN=1 %.2f%%  DPN=2 %.2f%%  DPN>=3 %.2f%%  DPN=0 %.2f%%",
             s.pct_dpn1, s.pct_dpn2, s.pct_dpn3plus, s.pct_dpn0)
    return 0


def _stats(counts) -> ev.DpnStats:
    n = int(counts.sum())
    pct = 100.0 * counts / n
    return ev.DpnStats(float(pct[1]), float(pct[2]), float(pct[3]), float(pct[0]), n)


def _angles(text: str) -> tuple:
    if not text:
        return ()
    return tuple(math.radians(float(a)) % math.pi for a in text.split(","))


def cmd_synth(args) -> int:
    if args.dataset:
        items = dio.synthetic_dataset(args.identities, args.samples, seed=args.seed,
                                      size=args.image_size, noise=args.noise,
                                      max_shift=args.max_shift,
                                      angle_jitter=math.radians(args.jitter),
                                      width=args.width)
        out = Path(args.dataset)
        truth = []
        for entry, angles in items:
            dio.write_pgm(out / f"{entry.name}.pgm", entry.image)
            degrees = ",".join(f"{math.degrees(a):.4f}" for a in angles)
            truth.append(f"{entry.name}\t{degrees}")
        dio.atomic_write(out / "ground_truth.tsv", ("\n".join(truth) + "\n").encode())
        print(f"wrote {len(items)} images to {out}")
        return 0
    if not args.out:
        raise InputError("synth needs --out FILE.pgm or --dataset DIR")
    spec = dio.SynthSpec(size=args.image_size, angles=_angles(args.angles), width=args.width,
                         depth=args.depth, background=args.background, noise=args.noise)
    image, _ = dio.render_synthetic(spec, seed=args.seed)
    out = Path(args.out)
    dio.write_pgm(out, image)
    sidecar = out.with_suffix(".txt")
    dio.atomic_write(sidecar, dio.format_ground_truth(spec, args.seed).encode())
    print(f"wrote {out} and {sidecar}")
    return 0


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="palmlmdp", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bank", help="dump the Gabor filter bank as CSV kernels")
    _add_gabor(p)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_bank)

    p = sub.add_parser("extract", help="compute descriptors for a dataset directory")
    p.add_argument("dataset", help="directory of <palm_id>_<sample_id>.pgm files")
    p.add_argument("--out", required=True, help="descriptor file to write")
    p.add_argument("--method", choices=METHODS, default="lmdp")
    p.add_argument("--block-size", type=int, default=DEFAULT_BLOCK_SIZE)
    p.add_argument("--ldp-k", type=int, default=DEFAULT_LDP_K)
    p.add_argument("--jobs", type=int, default=1)
    _add_gabor(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("match", help="Chi-square distance between two records")
    p.add_argument("file_a")
    p.add_argument("file_b")
    p.add_argument("--id-a", help="record identity in FILE_A (default: first record)")
    p.add_argument("--id-b", help="record identity in FILE_B (default: first record)")
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("eval-verify", help="all-pairs verification, EER and ROC")
    p.add_argument("descriptors")
    p.add_argument("--roc", help="write ROC CSV (threshold,far,frr) here")
    p.add_argument("--report", help="write key=value report here (default stdout)")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_eval_verify)

    p = sub.add_parser("eval-identify", help="rank-1 nearest-neighbour identification")
    p.add_argument("descriptors")
    p.add_argument("--train-k", type=int, nargs="+", default=[1, 2, 3])
    p.add_argument("--report", help="write key=value report here (default stdout)")
    p.set_defaults(func=cmd_eval_identify)

    p = sub.add_parser("dpn-stats", help="percentages of pixels per DPN class")
    p.add_argument("dataset")
    p.add_argument("--out", help="CSV path (default stdout)")
    _add_gabor(p)
    p.set_defaults(func=cmd_dpn_stats)

    p = sub.add_parser("synth", help="render synthetic line images")
    p.add_argument("--out", help="PGM path for a single image (sidecar .txt alongside)")
    p.add_argument("--angles", default="", help="comma-separated line angles in degrees")
    p.add_argument("--image-size", type=int, default=128)
    p.add_argument("--width", type=float, default=3.0, help="line FWHM in pixels")
    p.add_argument("--depth", type=float, default=60.0)
    p.add_argument("--background", type=float, default=180.0)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dataset", help="write a whole synthetic dataset to this directory")
    p.add_argument("--identities", type=int, default=8)
    p.add_argument("--samples", type=int, default=6)
    p.add_argument("--max-shift", type=float, default=2.0)
    p.add_argument("--jitter", type=float, default=2.0, help="angle jitter in degrees")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    if getattr(args, "jobs", 1) < 1:
        parser.error("--jobs must be >= 1")
    try:
        return args.func(args)
    except (LmdpError, OSError) as exc:
        print(f"palmlmdp {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
