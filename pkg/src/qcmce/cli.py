"""Command-line interface: ``qcmce <command> [options]``.

Exit codes: 0 ok, 2 usage, 3 validation, 4 generation exhausted,
5 decoding failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import keyfile
from .analysis.design import ROUNDING_MODES, design_parameters
from .analysis.threshold import bf_threshold_opt
from .analysis.workfactor import dca_wf, isda_wf
from .crypto import decrypt_batch, encrypt, keygen
from .errors import DecodingFailure, QcmceError, ValidationError
from .simulate import ExperimentSpec, rows_to_csv, run_experiment

EXIT_USAGE = 2


def _int_list(text: str) -> tuple[int, ...]:
    """'1,2,5' or 'a:b' / 'a:b:step' (inclusive) into a tuple of ints."""
    out: list[int] = []
    for part in filter(None, (s.strip() for s in text.split(","))):
        if ":" in part:
            bits = [int(x) for x in part.split(":")]
            if len(bits) not in (2, 3):
                raise ValidationError(f"bad range {part!r}")
            step = bits[2] if len(bits) == 3 else 1
            if step <= 0:
                raise ValidationError(f"bad range step in {part!r}")
            out.extend(range(bits[0], bits[1] + 1, step))
        else:
            out.append(int(part))
    return tuple(out)


def _profiles(text: str) -> tuple[tuple[int, ...], ...]:
    return tuple(_int_list(p) for p in text.split(";") if p.strip())


def _emit(text: str | bytes, out: str | None) -> None:
    if out is None or out == "-":
        if isinstance(text, bytes):
            sys.stdout.buffer.write(text)
        else:
            sys.stdout.write(text)
        return
    mode = "wb" if isinstance(text, bytes) else "w"
    with open(out, mode) as fh:
        fh.write(text)


def _read_kv_file(path: str | None) -> dict[str, str]:
    if path is None:
        return {}
    return keyfile.parse_kv(Path(path).read_text(encoding="utf-8"))


def cmd_keygen(args) -> int:
    if args.params is None:
        raise ValidationError("keygen needs --params")
    params = keyfile.load_params(args.params)
    pk, sk = keygen(params, np.random.default_rng(args.seed))
    prefix = args.out or "qcmce"
    Path(prefix + ".pub").write_bytes(keyfile.serialize_public(pk))
    Path(prefix + ".priv").write_bytes(keyfile.serialize_private(sk))
    print(f"public key {prefix}.pub: {pk.key_size_bits} bits of key material")
    print(f"private key {prefix}.priv")
    return 0


def cmd_encrypt(args) -> int:
    pk = keyfile.parse_public(Path(args.key).read_bytes())
    message = Path(args.input).read_bytes()
    rng = np.random.default_rng(args.seed)
    blocks = keyfile.message_blocks(message, pk.params.k)
    codewords = [encrypt(pk, u, rng) for u in blocks]
    _emit(keyfile.serialize_ciphertext(pk.params, 8 * len(message), codewords), args.out)
    return 0


def cmd_decrypt(args) -> int:
    sk = keyfile.parse_private(Path(args.key).read_bytes())
    nbits, codewords = keyfile.parse_ciphertext(Path(args.input).read_bytes(), sk.params)
    if codewords:
        plain, ok = decrypt_batch(sk, np.stack(codewords))
        if not ok.all():
            bad = np.flatnonzero(~ok).tolist()
            raise DecodingFailure(f"decoding failed for block(s) {bad}")
        blocks = list(plain)
    else:
        blocks = []
    _emit(keyfile.join_message(blocks, nbits), args.out)
    return 0


def cmd_threshold(args) -> int:
    kv = _read_kv_file(args.params)
    lengths = _int_list(args.lengths if args.lengths is not None else kv.get("lengths", ""))
    profiles = _profiles(args.profiles if args.profiles is not None else kv.get("profiles", ""))
    rows = []
    for prof in profiles:
        for n in lengths:
            if n % len(prof):
                raise ValidationError(f"length {n} not a multiple of n0={len(prof)}")
            r = bf_threshold_opt(n, prof)
            rows.append((n, " ".join(map(str, prof)), " ".join(map(str, r.best_b)), r.t_th))
    _emit(rows_to_csv(rows, ("n", "profile", "best_b", "t_th")), args.out)
    return 0


def cmd_design(args) -> int:
    if args.security is None or args.profile is None:
        raise ValidationError("design needs --security and --profile")
    res = design_parameters(args.security, _int_list(args.profile), args.rounding_mode, args.threshold_step)
    _emit("".join(f"{k}: {v}\n" for k, v in res.as_records()), args.out)
    return 0


def cmd_simulate(args) -> int:
    kv = _read_kv_file(args.params)
    try:
        spec = ExperimentSpec(
            p=int(kv.get("p", 512)),
            profiles=_profiles(kv.get("profiles", "9,9,9,9")),
            weights=_int_list(kv.get("weights", "")),
            decoders=tuple(d.strip() for d in kv.get("decoders", "bf,spa").split(",") if d.strip()),
            trials=args.trials if args.trials is not None else int(kv.get("trials", 1000)),
            seed=args.seed if args.seed is not None else int(kv.get("seed", 0)),
        )
    except ValueError as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(str(exc)) from None
    _emit(rows_to_csv(run_experiment(spec)), args.out)
    return 0


def cmd_wf(args) -> int:
    attacks = {"dca": dca_wf, "isda": isda_wf}
    chosen = list(attacks) if args.attack == "both" else [args.attack]
    rows = []
    for name in chosen:
        for w in _int_list(args.weights):
            r = attacks[name](args.n0, args.p, w)
            rows.append((r.attack, args.n0, args.p, w, f"{r.log2_wf:.3f}", r.isd_params["stern_p"], r.isd_params["window"]))
    _emit(rows_to_csv(rows, ("attack", "n0", "p", "weight", "log2_wf", "stern_p", "window")), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qcmce", description="Irregular QC-LDPC McEliece workbench")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, seed=True):
        p.add_argument("--out", help="output path (default stdout) or key prefix")
        if seed:
            p.add_argument("--seed", type=int, default=None)
        return p

    p = common(sub.add_parser("keygen", help="generate a key pair"))
    p.add_argument("--params", help="key=value parameter file")
    p.set_defaults(func=cmd_keygen)

    for name, func, kind in (("encrypt", cmd_encrypt, "public"), ("decrypt", cmd_decrypt, "private")):
        p = common(sub.add_parser(name, help=f"{name} a file"))
        p.add_argument("--key", required=True, help=f"{kind} key file")
        p.add_argument("--in", dest="input", required=True)
        p.set_defaults(func=func)

    p = common(sub.add_parser("threshold", help="BF threshold table (CSV)"), seed=False)
    p.add_argument("--params", help="key=value file with lengths= and profiles=")
    p.add_argument("--lengths", help="code lengths, e.g. 16384,24576 or 16384:57344:8192")
    p.add_argument("--profiles", help="';'-separated column-weight profiles")
    p.set_defaults(func=cmd_threshold)

    p = common(sub.add_parser("design", help="run the parameter-design procedure"), seed=False)
    p.add_argument("--security", type=float)
    p.add_argument("--profile", help="column weights, e.g. 8,11,15,18")
    p.add_argument("--rounding-mode", choices=sorted(ROUNDING_MODES), default="paper")
    p.add_argument("--threshold-step", type=int, default=None)
    p.set_defaults(func=cmd_design)

    p = common(sub.add_parser("simulate", help="Monte-Carlo frame-error table (CSV)"))
    p.add_argument("--params", help="key=value file: p, profiles, weights, decoders, trials, seed")
    p.add_argument("--trials", type=int)
    p.set_defaults(func=cmd_simulate)

    p = common(sub.add_parser("wf", help="attack work-factor table (CSV)"), seed=False)
    p.add_argument("--attack", choices=("dca", "isda", "both"), default="both")
    p.add_argument("--n0", type=int, default=4)
    p.add_argument("--p", type=int, default=4096)
    p.add_argument("--weights", required=True)
    p.set_defaults(func=cmd_wf)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "seed", None) is None and args.command in ("keygen", "encrypt"):
        args.seed = 0
    try:
        return args.func(args)
    except QcmceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ValidationError.exit_code


if __name__ == "__main__":
    sys.exit(main())
