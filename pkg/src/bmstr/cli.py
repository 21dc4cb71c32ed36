"""Command-line entry point: ``bmstr <command> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import bounds, oracle, wef
from .channel import ChannelParams, awgn_transmit, bpsk_modulate, llr, snr_db_from_ebn0
from .code_model import CodeSpec, SpecError, terminated_rate
from .decoder import DecoderConfig, decode_frame
from .encoder import BmstCode, encode_frame
from .simulator import SweepConfig, emit_csv, run_sweep


def parse_grid(text: str) -> list[float]:
    """``a:b:step`` (inclusive of b) or a single value or a comma list."""
    if ":" in text:
        a, b, step = (float(x) for x in text.split(":"))
        if step <= 0 or b < a:
            raise argparse.ArgumentTypeError(f"bad grid {text!r}")
        n = int(np.floor((b - a) / step + 1e-9)) + 1
        return [round(a + i * step, 10) for i in range(n)]
    return [float(x) for x in text.split(",")]


def _load_spec(path: str) -> CodeSpec:
    return CodeSpec.from_json(Path(path).read_text())


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _bits(a) -> str:
    return "".join(str(int(b)) for b in np.ravel(a))


def cmd_plan(args) -> None:
    res = bounds.plan_code(Fraction(args.rate), args.ber, args.K, args.L, seed=args.seed)
    _write(json.dumps(res.to_dict(), indent=2) + "\n", args.out)


def cmd_encode(args) -> None:
    spec = _load_spec(args.spec)
    code = BmstCode(spec)
    if args.message:
        u = np.array([int(c) for c in Path(args.message).read_text().split()[0]], dtype=np.uint8)
        u = u.reshape(spec.L, spec.K)
    else:
        u = np.random.default_rng(args.seed).integers(0, 2, size=(spec.L, spec.K), dtype=np.uint8)
    bits, layout = encode_frame(code, u)
    _write(json.dumps({"message": _bits(u), "codeword": _bits(bits), "n": layout.n, "k": layout.k}) + "\n", args.out)


def cmd_decode(args) -> None:
    spec = _load_spec(args.spec)
    code = BmstCode(spec)
    cfg = DecoderConfig(delay=args.delay if args.delay is not None else 2 * spec.m, max_iterations=args.max_iter)
    out = {}
    if args.llr:
        lam = np.loadtxt(args.llr, dtype=np.float64).ravel()
    else:
        rng = np.random.default_rng(args.seed)
        u = rng.integers(0, 2, size=(spec.L, spec.K), dtype=np.uint8)
        params = ChannelParams.from_snr_db(args.snr_db)
        lam = llr(awgn_transmit(bpsk_modulate(encode_frame(code, u)[0]), params, rng=rng), params)
        out["message"] = _bits(u)
    u_hat = decode_frame(lam, code, cfg)
    out["decoded"] = _bits(u_hat)
    if "message" in out:
        out["bit_errors"] = sum(a != b for a, b in zip(out["message"], out["decoded"]))
    _write(json.dumps(out) + "\n", args.out)


def cmd_simulate(args) -> None:
    spec = _load_spec(args.spec)
    if args.ebn0_db is not None:
        rate = float(terminated_rate(spec))
        grid = [snr_db_from_ebn0(rate, e) for e in parse_grid(args.ebn0_db)]
    else:
        grid = parse_grid(args.snr_db)
    dec = None
    if args.mode == "window":
        dec = DecoderConfig(delay=args.delay if args.delay is not None else 2 * spec.m,
                            max_iterations=args.max_iter)
    cfg = SweepConfig(
        spec=spec, snr_db=grid, decoder=dec, mode=args.mode,
        min_bit_errors=args.min_errors, max_frames=args.max_frames, master_seed=args.seed,
        coherence_len=args.coherence if args.fading else None,
    )
    _write(emit_csv(run_sweep(cfg)), args.out)


def _table(spec: CodeSpec, args) -> wef.IRWEFTable:
    return wef.compute_irwef(spec, args.T, max_weight=args.max_weight)


def cmd_wef(args) -> None:
    spec = _load_spec(args.spec)
    _write(_table(spec, args).to_csv(), args.out)


def cmd_spectrum(args) -> None:
    spec = _load_spec(args.spec)
    table = wef.compute_irwef(spec, args.T, max_weight=args.T)
    D = wef.spectrum(table)
    lines = ["s,D_s"] + [f"{s},{D[s]:.12g}" for s in range(1, len(D)) if D[s] > 0]
    _write("\n".join(lines) + "\n", args.out)


def cmd_bounds(args) -> None:
    spec = _load_spec(args.spec)
    table = _table(spec, args)
    rows = bounds.bound_curves(spec, table, parse_grid(args.snr_db))
    lines = ["snr_db,lower,upper,r_star"]
    lines += [f"{r['snr_db']:.6g},{r['lower']:.6g},{r['upper']:.6g},{r['r_star']}" for r in rows]
    _write("\n".join(lines) + "\n", args.out)


def cmd_oracle(args) -> None:
    spec = _load_spec(args.spec)
    code = BmstCode(spec)
    if spec.k <= oracle.MAX_K:
        d = oracle.dmin_per_bit(oracle.enumerate_codebook(code))
    else:
        d = oracle.BlockTrellis(code).dmin_per_bit()
    rw = oracle.row_weights(code)
    out = {"dmin_per_bit": d.tolist(), "dmin": int(d.min()), "row_weights": rw.tolist()}
    _write(json.dumps(out) + "\n", args.out)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bmstr", description="Systematic BMST-R codes: encode, decode, simulate, bound.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, spec=True):
        if spec:
            sp.add_argument("--spec", required=True, help="code spec JSON file")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", help="output file (default stdout)")
        return sp

    sp = common(sub.add_parser("plan", help="choose N, K_p and m for a rate and target BER"), spec=False)
    sp.add_argument("--rate", required=True, help="target rate, e.g. 1/2 or 0.4")
    sp.add_argument("--ber", type=float, required=True)
    sp.add_argument("--K", type=int, default=500)
    sp.add_argument("--L", type=int, default=500)
    sp.set_defaults(func=cmd_plan)

    sp = common(sub.add_parser("encode", help="encode one frame"))
    sp.add_argument("--message", help="file holding K*L message bits as a 0/1 string")
    sp.set_defaults(func=cmd_encode)

    sp = common(sub.add_parser("decode", help="window-decode one frame"))
    sp.add_argument("--llr", help="file of channel LLRs; if absent a random frame is sent")
    sp.add_argument("--snr-db", type=float, default=3.0)
    sp.add_argument("--delay", type=int)
    sp.add_argument("--max-iter", type=int, default=18)
    sp.set_defaults(func=cmd_decode)

    sp = common(sub.add_parser("simulate", help="Monte Carlo BER/FER/WER sweep"))
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--snr-db", help="a:b:step grid in SNR = 10 log10(1/sigma^2)")
    g.add_argument("--ebn0-db", help="a:b:step grid in Eb/N0")
    sp.add_argument("--delay", type=int)
    sp.add_argument("--max-iter", type=int, default=18)
    sp.add_argument("--mode", choices=["window", "hard"], default="window")
    sp.add_argument("--fading", action="store_true", help="block Rayleigh fading")
    sp.add_argument("--coherence", type=int, default=100, help="fading block length B_f")
    sp.add_argument("--min-errors", type=int, default=100)
    sp.add_argument("--max-frames", type=int, default=10_000)
    sp.set_defaults(func=cmd_simulate)

    for name, fn, hlp in (("wef", cmd_wef, "ensemble IRWEF table (i, j, A_ij)"),
                          ("bounds", cmd_bounds, "lower and upper BER bounds over an SNR grid")):
        sp = common(sub.add_parser(name, help=hlp))
        sp.add_argument("--T", type=int, default=20, help="input-weight truncation")
        sp.add_argument("--max-weight", type=int, help="drop terms of total weight above this")
        if name == "bounds":
            sp.add_argument("--snr-db", required=True)
        sp.set_defaults(func=fn)

    sp = common(sub.add_parser("spectrum", help="spectrum D_s up to total weight T"))
    sp.add_argument("--T", type=int, default=20)
    sp.set_defaults(func=cmd_spectrum)

    sp = common(sub.add_parser("oracle", help=argparse.SUPPRESS))
    sp.set_defaults(func=cmd_oracle)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        args.func(args)
    except (SpecError, wef.ResourceLimitError, oracle.OracleSizeError, OSError) as exc:
        parser.exit(2, f"bmstr: error: {exc}\n")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
