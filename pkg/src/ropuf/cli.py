"""Command-line front end.

Exit status: 0 success, 2 validation error, 3 decoding failure.
"""

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import analysis, commit, hwmodel, quantize, source, transforms
from .codes import CODE_NAMES, get_code

EXAMPLES = {
    "gen": "ropuf gen --rows 16 --cols 16 --devices 100 --measurements 5 --seed 7 --out data.csv",
    "stats": "ropuf stats --data data.csv --transform dct --out stats.json",
    "allocate": "ropuf allocate --stats stats.json --c-max 19 --force-k 1 --out alloc.json",
    "extract": "ropuf extract --data data.csv --stats stats.json --alloc alloc.json --out bits.csv",
    "enroll": "ropuf enroll --code bch255_131 --bits-file bits.csv --device 0 --seed 1 --out helper.fcs",
    "reconstruct": "ropuf reconstruct --helper helper.fcs --bits-file bits.csv --device 0 --measurement 1",
    "analyze": "ropuf analyze rates --p 0.0097",
    "hw": "ropuf hw timing --width 16 --freq 500e6 --window 100e-6",
    "pb": "ropuf analyze pb --code bch255_131 --profile stats.json --alloc alloc.json",
    "rates": "ropuf analyze rates --p 0.0097 --points 51",
    "smax": "ropuf analyze smax --stats stats.json --pb 0.01 0.06 0.1",
    "uniqueness": "ropuf analyze uniqueness --bits-file bits.csv",
    "eta": "ropuf analyze eta --rows 16 --cols 16 --rho 0.97",
    "rm-mc": "ropuf analyze rm-mc --p 0.06 --trials 1000000 --seed 3",
    "dwht": "ropuf hw dwht --random 1000 --seed 5",
    "rom": "ropuf hw rom --stats stats.json --alloc alloc.json --out rom.bin",
    "timing": "ropuf hw timing --width 16 --freq 500e6 --window 100e-6",
}


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------- file helpers


def _write_text(args, text):
    if args.out and args.out != "-":
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write_table(args, schema_fields, rows):
    """Rows of a fixed schema as CSV (default) or a JSON list of objects."""
    if args.format == "json":
        _write_text(args, json.dumps([dict(zip(schema_fields, r)) for r in rows], indent=1) + "\n")
        return
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(schema_fields)
    w.writerows(rows)
    _write_text(args, buf.getvalue())


def _need_seed(args):
    if args.seed is None:
        raise UsageError(f"{args.command} is stochastic and needs --seed")
    return args.seed


def save_stats(stats, transform):
    doc = {
        "transform": transform.kind,
        "basis": None if transform.basis is None else transform.basis.tolist(),
        "coefficients": stats.to_records(),
    }
    return json.dumps(doc)


def load_stats(path):
    """(CoefficientStats, Transform) from a stats file; a bare record list means DCT-free stats."""
    with open(path) as fh:
        doc = json.load(fh)
    if isinstance(doc, list):
        return source.CoefficientStats.from_json(json.dumps(doc)), None
    stats = source.CoefficientStats.from_json(json.dumps(doc["coefficients"]))
    kind = doc.get("transform")
    if kind == "klt":
        tr = transforms.Transform("klt", np.asarray(doc["basis"], dtype=float))
    else:
        tr = transforms.get_transform(kind) if kind else None
    return stats, tr


def load_alloc(path):
    with open(path) as fh:
        return quantize.BitAllocation.from_json(fh.read())


def read_bits_table(path):
    """Parse an extract CSV into {(device, measurement): bits}."""
    out = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["device", "measurement", "bits"]:
            raise UsageError(f"{path}: expected header device,measurement,bits")
        for row in reader:
            bits = row["bits"].strip()
            if bits and set(bits) - {"0", "1"}:
                raise UsageError(f"{path}: bits must be 0/1 characters")
            out[(row["device"], int(row["measurement"]))] = np.frombuffer(bits.encode(), dtype=np.uint8) - 48
    return out


def parse_bitstring(text, what):
    text = text.strip()
    if not text or set(text) - {"0", "1"}:
        raise UsageError(f"{what} must be a non-empty string of 0 and 1")
    return (np.frombuffer(text.encode(), dtype=np.uint8) - 48).astype(np.uint8)


def bitstring(bits):
    return "".join("1" if b else "0" for b in np.asarray(bits).ravel())


def _select_bits(args):
    if args.bits:
        return parse_bitstring(args.bits, "--bits")
    if not args.bits_file:
        raise UsageError("give --bits or --bits-file")
    table = read_bits_table(args.bits_file)
    device = args.device if args.device is not None else sorted({d for d, _ in table})[0]
    key = (device, args.measurement)
    if key not in table:
        raise UsageError(f"no bits for device {device!r} measurement {args.measurement}")
    return table[key]


def _fit_length(bits, n):
    """Use the first n identifier bits; fewer than n is an error."""
    if bits.size < n:
        raise UsageError(f"code needs {n} identifier bits, got {bits.size}")
    return bits[:n]


# ---------------------------------------------------------------- commands


def cmd_gen(args):
    seed = _need_seed(args)
    model = source.SourceModel.exponential(
        args.rows, args.cols, sigma2=args.sigma**2, rho=args.rho, mean=args.mean, noise_var=args.noise_var
    )
    data = source.synth_dataset(model, args.devices, args.measurements, seed)
    _write_text(args, source.dataset_to_csv(data))


def cmd_stats(args):
    data = source.read_csv(args.data)
    if args.transform == "klt":
        cov = source.estimate_autocovariance(data.device_means().reshape(data.n_devices, -1))
        tr = transforms.klt_fit(cov)
    else:
        tr = transforms.get_transform(args.transform)
    stats = source.estimate_stats(data, tr)
    _write_text(args, save_stats(stats, tr) + "\n")


def cmd_allocate(args):
    stats, _ = load_stats(args.stats)
    if args.p_b is not None:
        alloc = quantize.allocate_fixed_bsc(stats, args.p_b)
    else:
        alloc = quantize.allocate_fixed_errors(stats, args.c_max, force_K=args.force_k, n_coeffs=args.n_coeffs)
    _write_text(args, alloc.to_json() + "\n")


def cmd_extract(args):
    data = source.read_csv(args.data)
    stats, tr = load_stats(args.stats)
    if tr is None:
        tr = transforms.get_transform(args.transform)
    alloc = load_alloc(args.alloc)
    rows = []
    for dev, stack in zip(data.device_ids, data.measurements):
        bits = quantize.extract_bits(stack, tr, stats, alloc)
        rows.extend((dev, k, bitstring(b)) for k, b in enumerate(bits))
    _write_table(args, ("device", "measurement", "bits"), rows)


def cmd_enroll(args):
    code = get_code(args.code)
    if args.key:
        key = parse_bitstring(args.key, "--key")
    else:
        rng = source.make_rng(_need_seed(args))
        key = rng.integers(0, 2, size=min(commit.DEFAULT_KEY_BITS, code.k), dtype=np.uint8)
    digest = load_alloc(args.alloc).digest() if args.alloc else ""
    x = _fit_length(_select_bits(args), code.n)
    helper = commit.enroll(key, x, code, digest)
    if not args.out or args.out == "-":
        raise UsageError("enroll writes binary helper data; give --out FILE")
    helper.save(args.out)
    print(bitstring(key))


def cmd_reconstruct(args):
    helper = commit.HelperData.load(args.helper)
    code = get_code(args.code or helper.code)
    digest = load_alloc(args.alloc).digest() if args.alloc else None
    y = _fit_length(_select_bits(args), code.n)
    key = commit.reconstruct(helper, y, code, digest, key_bits=args.key_bits)
    _write_text(args, bitstring(key) + "\n")


def _profile_q(stats, alloc):
    used = np.flatnonzero(alloc.K > 0) if alloc is not None else np.flatnonzero(stats.usable)
    K = alloc.K if alloc is not None else np.ones(len(stats), dtype=int)
    return np.array([1.0 - quantize.correctness(int(K[i]), stats.sigma_n[i]) for i in used])


def cmd_analyze_pb(args):
    code = get_code(args.code)
    rows = []
    if args.profile:
        stats, _ = load_stats(args.profile)
        alloc = load_alloc(args.alloc) if args.alloc else None
        q = _profile_q(stats, alloc)
        t = args.t if args.t is not None else code.t
        fn = analysis.poisson_binomial_tail_dp if args.method == "dp" else analysis.poisson_binomial_tail_dftcf
        rows.append((args.method, q.size, t, f"profile={args.profile}", fn(q, t)))
    elif code.name == "rm32_6+rs28_22":
        if args.p_err is None or args.p_era is None:
            raise UsageError("the RM+RS code needs --p-err and --p-era (see analyze rm-mc)")
        outer = code.outer
        pb = analysis.ee_tail(outer.n_symbols, outer.d, args.p_err, args.p_era)
        rows.append(("ee_tail", outer.n_symbols, outer.d, f"p_err={args.p_err};p_era={args.p_era}", pb))
    else:
        if args.p is None:
            raise UsageError("give --p (BSC crossover) or --profile")
        p, target = args.p, code
        params = f"p={args.p}"
        if code.name == "rep3+ebch256_132":
            p = analysis.repetition_crossover(args.p, code.inner.n)
            target = code.outer
            params += f";p_outer={p:.6g}"
        rows.append(("binomial", target.n, target.t, params, analysis.binomial_tail(target.n, p, target.t)))
    _write_table(args, analysis.REPORT_SCHEMAS["pb_report"], rows)


def cmd_analyze_rates(args):
    grid = np.linspace(0, 0.5, args.points)
    rows = []
    for p in args.p:
        for a, pt in zip(grid, analysis.cs_region_mgl(p, grid)):
            rows.append((f"cs_mgl(p={p})", float(a), pt.R_s, pt.R_l))
        opt = analysis.fc_region(p).optimal
        rows.append((f"fc_optimal(p={p})", "", opt.R_s, opt.R_l))
    ref = analysis.FINITE_LENGTH_REFERENCE
    rows.append(("finite_length_reference", "", ref.R_s, ref.R_l))
    for name in args.codes:
        code = get_code(name)
        k = min(commit.DEFAULT_KEY_BITS, code.k) if args.key_rate else code.k
        pt = analysis.code_rates(k, code.n)
        rows.append((f"code({name})", "", pt.R_s, pt.R_l))
    _write_table(args, analysis.REPORT_SCHEMAS["rate_region"], rows)


def cmd_analyze_smax(args):
    stats, _ = load_stats(args.stats)
    rows = []
    for pb in args.pb:
        n = quantize.allocate_fixed_bsc(stats, pb).N
        rows.append((pb, n, quantize.smax(pb, n)))
    _write_table(args, analysis.REPORT_SCHEMAS["smax"], rows)


def cmd_analyze_uniqueness(args):
    table = read_bits_table(args.bits_file)
    seqs = [b for (d, m), b in sorted(table.items()) if m == args.measurement]
    lengths = {len(s) for s in seqs}
    if len(lengths) != 1:
        raise UsageError("bit sequences differ in length")
    u = analysis.uniqueness(np.array(seqs))
    _write_table(args, analysis.REPORT_SCHEMAS["uniqueness"], [(u["pair_count"], u["mean"], u["variance"])])


def cmd_analyze_eta(args):
    if args.data:
        data = source.read_csv(args.data)
        rows_, cols = data.rows, data.cols
        cov = source.estimate_autocovariance(data.device_means().reshape(data.n_devices, -1))
    else:
        model = source.SourceModel.exponential(args.rows, args.cols, sigma2=args.sigma**2, rho=args.rho)
        rows_, cols, cov = args.rows, args.cols, model.cov
    out = []
    for kind in ("dct", "dwht", "dht", "klt"):
        tr = transforms.klt_fit(cov) if kind == "klt" else transforms.get_transform(kind)
        c = transforms.transform_covariance(tr, cov, rows_, cols)
        out.append((kind, transforms.decorrelation_efficiency(c, cov)))
    _write_table(args, ("transform", "eta_c"), out)


def cmd_analyze_rm_mc(args):
    r = analysis.rm_channel_mc(args.p, args.trials, _need_seed(args))
    _write_table(
        args, ("p", "trials", "p_era", "se_era", "p_err", "se_err"), [(args.p, r.trials, r.p_era, r.se_era, r.p_err, r.se_err)]
    )


def cmd_hw_dwht(args):
    if args.schedule:
        sched = hwmodel.dwht_schedule(16)
        rows = [(s, *quad) for s, p in enumerate(sched) for quad in p]
        _write_table(args, ("pass", "a0", "a1", "a2", "a3"), rows)
        return
    if args.data:
        data = source.read_csv(args.data)
        arrays = np.concatenate(data.measurements).astype(np.int64)
        label = args.data
    else:
        rng = source.make_rng(_need_seed(args))
        arrays = np.concatenate(
            [hwmodel.corner_arrays(), rng.integers(-(1 << 15), 1 << 15, size=(args.random, 16, 16))]
        )
        label = f"corners+random({args.random})"
    fixed, tr = hwmodel.dwht2d_fixed(arrays, trace=True)
    err = np.abs(fixed - transforms.forward(transforms.DWHT, arrays.astype(float))).max()
    rows = [(label, len(arrays), max(tr.sum_bits), max(tr.stored_bits), float(err), hwmodel.truncation_bound())]
    _write_table(args, ("input", "arrays", "max_sum_bits", "max_stored_bits", "max_abs_error", "error_bound"), rows)


def cmd_hw_rom(args):
    stats, _ = load_stats(args.stats)
    rom = hwmodel.quantizer_rom(load_alloc(args.alloc), stats, scale=args.scale)
    if args.out and args.out != "-":
        with open(args.out, "wb") as fh:
            fh.write(rom.to_bytes())
    print(json.dumps({"words": rom.n_words, "word_bits": rom.word_bits, "total_bytes": rom.total_bytes}))


def cmd_hw_timing(args):
    t_min = hwmodel.counter_overload_time(args.width, args.freq)
    row = [args.width, args.freq, t_min]
    fields = ["width_bits", "f_max_hz", "t_min_s"]
    if args.window is not None:
        row += [args.window, hwmodel.no_overload(args.window, args.width, args.freq)]
        fields += ["window_s", "no_overload"]
    _write_table(args, tuple(fields), [tuple(row)])


# ---------------------------------------------------------------- parser


def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, help="RNG seed (required by stochastic commands)")
    p.add_argument("--format", choices=("csv", "json"), default="csv", help="report format")
    p.add_argument("--out", help="output file (default: stdout)")
    return p


def _sub(subparsers, name, func, help_text, example_key=None):
    p = subparsers.add_parser(
        name,
        parents=[_common()],
        help=help_text,
        description=f"{help_text}\n\nexample: {EXAMPLES[example_key or name]}",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.set_defaults(func=func, command=name)
    return p


def _bits_source(p):
    p.add_argument("--bits", help="identifier bits as a 0/1 string")
    p.add_argument("--bits-file", help="extract CSV (device,measurement,bits)")
    p.add_argument("--device", help="device id in --bits-file (default: first)")
    p.add_argument("--measurement", type=int, default=0, help="measurement index in --bits-file")


def build_parser():
    lines = "\n".join(f"  {v}" for k, v in EXAMPLES.items() if k in ("gen", "stats", "allocate", "extract", "enroll", "reconstruct", "analyze", "hw"))
    parser = argparse.ArgumentParser(
        prog="ropuf",
        description=f"Transform-coding key binding for RO PUFs.\n\nexamples:\n{lines}",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = _sub(sub, "gen", cmd_gen, "synthesize an RO dataset CSV")
    p.add_argument("--rows", type=int, default=16)
    p.add_argument("--cols", type=int, default=16)
    p.add_argument("--devices", type=int, required=True)
    p.add_argument("--measurements", type=int, default=2)
    p.add_argument("--sigma", type=float, default=1500.0, help="per-RO standard deviation")
    p.add_argument("--rho", type=float, default=0.97, help="neighbour correlation in [0, 1)")
    p.add_argument("--mean", type=float, default=20000.0)
    p.add_argument("--noise-var", type=float, default=0.5)

    p = _sub(sub, "stats", cmd_stats, "estimate coefficient statistics from a dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--transform", choices=transforms.KINDS, default="dct")

    p = _sub(sub, "allocate", cmd_allocate, "bit allocation under either reliability metric")
    p.add_argument("--stats", required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--p-b", type=float, help="fixed BSC crossover (metric A)")
    g.add_argument("--c-max", type=int, help="correctable coefficient errors (metric B)")
    p.add_argument("--force-k", type=int, help="cap every K_i (metric B)")
    p.add_argument("--n-coeffs", type=int, help="binomial size in the threshold (default L - 1)")

    p = _sub(sub, "extract", cmd_extract, "extract bit sequences for every device and measurement")
    p.add_argument("--data", required=True)
    p.add_argument("--stats", required=True)
    p.add_argument("--alloc", required=True)
    p.add_argument("--transform", choices=("dct", "dwht", "dht"), default="dct", help="if the stats file names none")

    p = _sub(sub, "enroll", cmd_enroll, "bind a key to identifier bits, writing helper data")
    p.add_argument("--code", choices=CODE_NAMES, default="bch255_131")
    p.add_argument("--key", help="key as a 0/1 string (random from --seed otherwise)")
    p.add_argument("--alloc", help="allocation file whose digest goes into the header")
    _bits_source(p)

    p = _sub(sub, "reconstruct", cmd_reconstruct, "recover the key from helper data and noisy bits")
    p.add_argument("--helper", required=True)
    p.add_argument("--code", choices=CODE_NAMES, help="must match the helper header")
    p.add_argument("--alloc", help="allocation file; its digest must match the header")
    p.add_argument("--key-bits", type=int, help="key length (default min(128, k))")
    _bits_source(p)

    ana = sub.add_parser("analyze", help="reports: pb, rates, smax, uniqueness, eta, rm-mc")
    asub = ana.add_subparsers(dest="what", required=True)
    p = _sub(asub, "pb", cmd_analyze_pb, "block-error probability of a code")
    p.add_argument("--code", choices=CODE_NAMES, required=True)
    p.add_argument("--p", type=float, help="BSC crossover")
    p.add_argument("--p-err", type=float)
    p.add_argument("--p-era", type=float)
    p.add_argument("--profile", help="stats file: Poisson-binomial tail over the used coefficients")
    p.add_argument("--alloc", help="allocation for --profile (default K_i = 1 on usable coefficients)")
    p.add_argument("--t", type=int, help="correctable errors (default: code radius)")
    p.add_argument("--method", choices=("dftcf", "dp"), default="dftcf")

    p = _sub(asub, "rates", cmd_analyze_rates, "rate-region boundary data")
    p.add_argument("--p", type=float, nargs="+", required=True)
    p.add_argument("--points", type=int, default=51)
    p.add_argument("--codes", nargs="*", default=[], choices=CODE_NAMES)
    p.add_argument("--key-rate", action="store_true", help="use the 128-bit key instead of k for code points")

    p = _sub(asub, "smax", cmd_analyze_smax, "S_max sweep over p_b")
    p.add_argument("--stats", required=True)
    p.add_argument("--pb", type=float, nargs="+", required=True)

    p = _sub(asub, "uniqueness", cmd_analyze_uniqueness, "pairwise fractional Hamming distance")
    p.add_argument("--bits-file", required=True)
    p.add_argument("--measurement", type=int, default=0)

    p = _sub(asub, "eta", cmd_analyze_eta, "decorrelation efficiency of every transform")
    p.add_argument("--data", help="dataset CSV (default: exponential model)")
    p.add_argument("--rows", type=int, default=16)
    p.add_argument("--cols", type=int, default=16)
    p.add_argument("--sigma", type=float, default=1500.0)
    p.add_argument("--rho", type=float, default=0.97)

    p = _sub(asub, "rm-mc", cmd_analyze_rm_mc, "Monte Carlo of RM(1,5) decoding over a BSC")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--trials", type=int, default=10**6)

    hw = sub.add_parser("hw", help="fixed-point datapath: dwht, rom, timing")
    hsub = hw.add_subparsers(dest="what", required=True)
    p = _sub(hsub, "dwht", cmd_hw_dwht, "fixed-point DWHT width and error sweep")
    p.add_argument("--data", help="dataset CSV of 16-bit counts")
    p.add_argument("--random", type=int, default=1000, help="random 16-bit arrays besides the corners")
    p.add_argument("--schedule", action="store_true", help="emit the butterfly address schedule")
    p = _sub(hsub, "rom", cmd_hw_rom, "quantizer boundary ROM image")
    p.add_argument("--stats", required=True)
    p.add_argument("--alloc", required=True)
    p.add_argument("--scale", type=float, default=1.0, help="datapath units per coefficient unit")
    p = _sub(hsub, "timing", cmd_hw_timing, "counter overload time")
    p.add_argument("--width", type=int, default=16)
    p.add_argument("--freq", type=float, default=500e6)
    p.add_argument("--window", type=float)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except commit.DecodingFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
