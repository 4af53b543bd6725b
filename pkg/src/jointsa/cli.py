"""Command-line interface.

Exit codes: 0 success, 2 usage error, 3 I/O error, 4 invalid argument or
malformed input, 5 numerical failure (GGD fit, degenerate sample).
"""
import argparse
import logging
import os
import sys

import numpy as np

from . import io, kernels
from .cfar import DEFAULT_GUARD_PFA, DEFAULT_PFA, cfar_detect, score
from .decomposition import yamaguchi4_field
from .detectors import DEFAULT_WINDOW, DETECTORS, Features
from .errors import DegenerateSampleError, FitError, JointSAError
from .pipeline import HIST_BINS, HIST_HEADER, PipelineConfig, fit_summary, run_pipeline, scr_table
from .polarimetry import covariance_field, pauli_rgb
from .simulator import SceneSpec, reference_regions, reference_scene, simulate_scene

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3, 4, 5

log = logging.getLogger("jointsa")


def _float(text):
    # float() never consults the locale, so only '.' is accepted as decimal point
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _guard(text):
    return None if text.lower() == "none" else _float(text)


def _load_spec(path, seed):
    spec = reference_scene() if path in (None, "reference") else \
        SceneSpec.from_json(open(path, encoding="utf-8").read())
    if seed is not None:
        spec = SceneSpec(spec.width, spec.height, spec.sea, spec.ships, seed)
    return spec


def _write_all(files):
    """Write ``{path: bytes}`` once everything has been computed."""
    for path, data in files.items():
        io._atomic_write(path, data)


def cmd_simulate(a):
    spec = _load_spec(a.spec, a.seed)
    img, truth = simulate_scene(spec, workers=a.workers)
    files = {a.out: io.encode_qpi(img)}
    if a.truth:
        files[a.truth] = io.encode_pnm(io.mask_to_pixels(truth))
    if a.regions:
        files[a.regions] = io.format_regions(reference_regions(spec)).encode("utf-8")
    _write_all(files)


def _raster_files(path, bands, meta):
    payload, side = io.encode_raster(bands, meta)
    return {path: payload, io.sidecar_path(path): side.encode("utf-8")}


def cmd_covariance(a):
    c = covariance_field(io.read_qpi(a.inp), a.window).data
    bands = {"C11": c[..., 0, 0].real, "C22": c[..., 1, 1].real, "C33": c[..., 2, 2].real}
    for i, j in ((0, 1), (0, 2), (1, 2)):
        bands[f"C{i + 1}{j + 1}_re"] = c[..., i, j].real
        bands[f"C{i + 1}{j + 1}_im"] = c[..., i, j].imag
    _write_all(_raster_files(a.out, bands, {"window": a.window}))


def cmd_decompose(a):
    p = yamaguchi4_field(covariance_field(io.read_qpi(a.inp), a.window))
    bands = {name: p[..., i] for i, name in enumerate(("Ps", "Pd", "Pv", "Ph"))}
    _write_all(_raster_files(a.out, bands, {"window": a.window}))


def cmd_anisotropy(a):
    m = Features(io.read_qpi(a.inp), a.window).detector("delta-s")
    _write_all(_raster_files(a.out, {"delta-s": m.values}, {"window": a.window}))


def cmd_detector(a):
    m = Features(io.read_qpi(a.inp), a.window).detector(a.detector)
    _write_all(_raster_files(a.out, {a.detector: m.values},
                             {"detector": a.detector, "window": a.window}))


def _map_border(side, border):
    if border is not None:
        return border
    return int(side.get("meta", {}).get("window", 1)) // 2


def cmd_fit(a):
    values, _, side = io.read_single_band(a.inp)
    summary, rows = fit_summary(values, a.guard_pfa, a.guard_pct, a.bins,
                                _map_border(side, a.border))
    files = {a.out: io.encode_json(summary)}
    if a.hist:
        files[a.hist] = io.encode_csv(HIST_HEADER, rows)
    _write_all(files)
    print(f"nu={summary['nu']:.6g} kappa={summary['kappa']:.6g} "
          f"sigma={summary['sigma']:.6g} kl={summary['kl']:.6g}")


def cmd_cfar(a):
    values, name, side = io.read_single_band(a.inp)
    truth = io.read_mask(a.truth) if a.truth else None
    det = cfar_detect(values, a.pfa, a.guard_pfa, a.guard_pct,
                      border=_map_border(side, a.border))
    report = {"map": name, **det.to_dict()}
    if truth is not None:
        report["score"] = score(det, truth).to_dict()
    files = {a.out: io.encode_pnm(io.mask_to_pixels(det.mask))}
    if a.report:
        files[a.report] = io.encode_json(report)
    _write_all(files)
    print(f"threshold={det.threshold:.6g} flagged={int(det.mask.sum())}")


def cmd_eval(a):
    rep = score(io.read_mask(a.inp), io.read_mask(a.truth), a.min_overlap).to_dict()
    if a.report:
        _write_all({a.report: io.encode_json(rep)})
    print(f"detected={rep['detected']} missed={rep['missed']} "
          f"false_alarms={rep['false_alarms']}")


def cmd_scr(a):
    maps = {}
    for path in a.inp:
        values, name, _ = io.read_single_band(path)
        key = name
        n = 2
        while key in maps:
            key = f"{name}_{n}"
            n += 1
        maps[key] = values
    if a.regions:
        regions = io.read_regions(a.regions)
    elif a.target and a.clutter:
        regions = [("target", io._parse_box(a.target, 0), io._parse_box(a.clutter, 0))]
    else:
        raise argparse.ArgumentTypeError("give --regions, or both --target and --clutter")
    header, rows = scr_table(maps, regions)
    data = io.encode_csv(header, rows)
    if a.out:
        _write_all({a.out: data})
    sys.stdout.write(data.decode("utf-8"))


def cmd_render(a):
    with open(a.inp, "rb") as f:
        head = f.read(64)
    if head.startswith(b"{") and b"QPI1" in head:
        pix = pauli_rgb(io.read_qpi(a.inp))
    elif head[:2] in (b"P5", b"P6"):
        pix = io.read_pnm(a.inp)
        if pix.ndim == 2:
            pix = io.mask_to_pixels(pix > 0)
    else:
        bands, _ = io.read_raster(a.inp)
        band = a.band or next(iter(bands))
        if band not in bands:
            raise io.InvalidArgumentError(f"no band {band!r}; have {list(bands)}")
        pix = io.map_to_pixels(bands[band])
    _write_all({a.out: io.encode_pnm(pix)})


def cmd_run(a):
    cfg = PipelineConfig(a.detector, a.window, a.pfa, a.guard_pfa, a.guard_pct, a.bins)
    img = io.read_qpi(a.inp)
    truth = io.read_mask(a.truth) if a.truth else None
    report, art = run_pipeline(img, cfg, truth)
    os.makedirs(a.out_dir, exist_ok=True)
    base = os.path.join(a.out_dir, cfg.detector)
    _write_all({base + ".bin": art["map"], base + ".bin.json": art["map_sidecar"],
                base + "_mask.pgm": art["mask"], base + "_report.json": art["report"],
                base + "_histogram.csv": art["histogram"]})
    if "score" in report:
        s = report["score"]
        print(f"detected={s['detected']} missed={s['missed']} false_alarms={s['false_alarms']}")
    print(f"threshold={report['threshold']:.6g} flagged={report['n_flagged']}")


def build_parser():
    p = argparse.ArgumentParser(prog="jointsa", description="Quad-pol SAR ship detection.")
    p.add_argument("--workers", type=int, default=None,
                   help="worker threads for parallel kernels")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text, inp=True, out=True):
        sp = sub.add_parser(name, help=help_text)
        if inp:
            sp.add_argument("--in", dest="inp", required=True)
        if out:
            sp.add_argument("--out", required=True)
        sp.set_defaults(fn=fn)
        return sp

    def window(sp):
        sp.add_argument("--window", type=int, default=DEFAULT_WINDOW)

    def guards(sp):
        sp.add_argument("--guard-pfa", type=_guard, default=DEFAULT_GUARD_PFA,
                        help="outlier guard level for the fit, or 'none'")
        sp.add_argument("--guard-pct", type=_guard, default=None,
                        help="optional percentile cut before fitting")
        sp.add_argument("--border", type=int, default=None)

    sp = add("simulate", cmd_simulate, "render a synthetic scene", inp=False)
    sp.add_argument("--spec", default=None, help="scene JSON, or 'reference'")
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--truth")
    sp.add_argument("--regions", help="also write SCR regions beside each ship")

    for name, fn, text in (("covariance", cmd_covariance, "windowed covariance raster"),
                           ("decompose", cmd_decompose, "four-component power rasters"),
                           ("anisotropy", cmd_anisotropy, "wave-polarization anisotropy raster")):
        window(add(name, fn, text))

    sp = add("detector", cmd_detector, "detector map raster")
    window(sp)
    sp.add_argument("--detector", choices=DETECTORS, default="joint-sa")

    sp = add("fit", cmd_fit, "GGD fit of a map")
    guards(sp)
    sp.add_argument("--bins", type=int, default=HIST_BINS)
    sp.add_argument("--hist", help="histogram CSV output")

    sp = add("cfar", cmd_cfar, "CFAR detection mask")
    guards(sp)
    sp.add_argument("--pfa", type=_float, default=DEFAULT_PFA)
    sp.add_argument("--report")
    sp.add_argument("--truth")

    sp = add("eval", cmd_eval, "score a mask against truth", out=False)
    sp.add_argument("--truth", required=True)
    sp.add_argument("--report")
    sp.add_argument("--min-overlap", type=int, default=1)

    sp = sub.add_parser("scr", help="per-target SCR table")
    sp.add_argument("--in", dest="inp", action="append", required=True)
    sp.add_argument("--out")
    sp.add_argument("--regions")
    sp.add_argument("--target")
    sp.add_argument("--clutter")
    sp.set_defaults(fn=cmd_scr)

    sp = add("render", cmd_render, "PGM/PPM rendering of a map, mask or image")
    sp.add_argument("--band")

    sp = sub.add_parser("run", help="full detection pipeline")
    sp.add_argument("--in", dest="inp", required=True)
    sp.add_argument("--out-dir", required=True)
    sp.add_argument("--detector", choices=DETECTORS, default="joint-sa")
    window(sp)
    sp.add_argument("--pfa", type=_float, default=DEFAULT_PFA)
    sp.add_argument("--guard-pfa", type=_guard, default=DEFAULT_GUARD_PFA)
    sp.add_argument("--guard-pct", type=_guard, default=None)
    sp.add_argument("--bins", type=int, default=HIST_BINS)
    sp.add_argument("--truth")
    sp.set_defaults(fn=cmd_run)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.workers:
        kernels.set_workers(args.workers)
    args.workers = args.workers or 1
    try:
        args.fn(args)
    except argparse.ArgumentTypeError as e:
        print(f"jointsa: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (FitError, DegenerateSampleError) as e:
        print(f"jointsa: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as e:
        print(f"jointsa: I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except (JointSAError, ValueError) as e:
        print(f"jointsa: invalid input: {e}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
