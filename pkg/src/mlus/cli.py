"""mlus command line.

Exit codes: 0 success, 1 verification or protocol rejection, 2 usage error,
3 I/O or format error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import codec
from .bench import bench_run, size_comparison
from .gaussian import make_rng
from .params import SET_NAMES, ParamError, load_paramset, theoretical_sizes
from .protocol import (HonestProver, ProtocolError, SignerEndpoint, StreamChannel, TransportError,
                       Verdict, VerifierEndpoint, serve_stream, serve_tcp)
from .scheme import PublicKey, SecretKey, Signature, ml_keygen, ml_sign, verify_static

EXIT_OK, EXIT_REJECT, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _rng(args):
    seed = args.seed if getattr(args, "seed", None) is not None else os.environ.get("MLUS_SEED")
    try:
        return make_rng(seed)
    except ValueError:
        raise UsageError("seed must be hex") from None


def _read(path: str) -> bytes:
    if path == "-":
        return sys.stdin.buffer.read()
    with open(path, "rb") as fh:
        return fh.read()


def _write(path: str | None, data: bytes):
    if path is None or path == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
    else:
        with open(path, "wb") as fh:
            fh.write(data)


def _message(args) -> bytes:
    if args.message is not None:
        return args.message.encode()
    if args.msg is not None:
        return _read(args.msg)
    raise UsageError("give --msg FILE or --message TEXT")


def _emit(args, payload: dict, human: str, stream=None):
    stream = stream or sys.stdout
    print(json.dumps(payload, sort_keys=True) if args.json else human, file=stream)
    stream.flush()


def _addr(text: str) -> tuple[str, int]:
    host, _, port = text.rpartition(":")
    if not port.isdigit():
        raise UsageError(f"bad address {text!r}, expected host:port")
    return host or "127.0.0.1", int(port)


# -- subcommands ---------------------------------------------------------------

def cmd_params(args) -> int:
    names = [args.set] if args.set else list(SET_NAMES)
    rows = {n: load_paramset(n).to_dict() for n in names}
    human = "\n".join(f"{n}: " + ", ".join(f"{k}={v}" for k, v in d.items() if k != "name")
                      for n, d in rows.items())
    _emit(args, rows if not args.set else rows[args.set], human)
    return EXIT_OK


def cmd_keygen(args) -> int:
    p = load_paramset(args.set)
    pk, sk = ml_keygen(p, _rng(args))
    pk_path = args.out + codec.FILE_EXT[codec.FrameType.PUBLIC_KEY]
    sk_path = args.out + codec.FILE_EXT[codec.FrameType.SECRET_KEY]
    _write(pk_path, pk.to_bytes())
    _write(sk_path, sk.to_bytes())
    _emit(args, {"set": p.name, "pk": pk_path, "sk": sk_path}, f"wrote {pk_path} and {sk_path}",
          sys.stderr if not args.json else sys.stdout)
    return EXIT_OK


def cmd_sign(args) -> int:
    pk = PublicKey.from_bytes(_read(args.pk))
    sk = SecretKey.from_bytes(_read(args.sk))
    if pk.params != sk.params:
        raise UsageError("public and secret key use different parameter sets")
    sig = ml_sign(_message(args), sk, pk, pk.params, _rng(args))
    _write(args.out, sig.to_bytes())
    return EXIT_OK


def cmd_verify_static(args) -> int:
    pk = PublicKey.from_bytes(_read(args.pk))
    sig = Signature.from_bytes(_read(args.sig))
    if sig.params != pk.params:
        _emit(args, {"result": "param_mismatch"}, "reject: parameter set mismatch")
        return EXIT_REJECT
    res = verify_static(_message(args), sig, pk, pk.params)
    _emit(args, {"result": res.value}, "ok" if res else f"reject: {res.value}")
    return EXIT_OK if res else EXIT_REJECT


def _run_signer(args, pk: PublicKey, sk: SecretKey) -> int:
    endpoint = SignerEndpoint(HonestProver(sk), pk, pk.params, _rng(args))
    out = sys.stderr
    if args.pipe:
        seen = serve_stream(endpoint, sys.stdin.buffer, sys.stdout.buffer)
    elif args.listen:
        host, port = _addr(args.listen)
        ready = (lambda prt: print(f"listening on {host}:{prt}", file=sys.stderr, flush=True))
        seen = serve_tcp(endpoint, host, port, ready=ready, timeout=args.timeout)
    elif args.connect:
        host, port = _addr(args.connect)
        ch = StreamChannel.connect(host, port, args.timeout)
        try:
            seen = serve_stream(endpoint, ch.rfile, ch.wfile)
        finally:
            ch.close()
    else:
        raise UsageError("signer needs --pipe, --listen or --connect")
    _emit(args, {"role": "signer", "verifier_verdict": seen}, f"session closed, verifier said {seen}", out)
    return EXIT_OK


def _run_verifier(args, pk: PublicKey, want: Verdict) -> int:
    sig = Signature.from_bytes(_read(args.sig))
    msg = _message(args)
    if sig.params != pk.params:
        raise UsageError("signature and key use different parameter sets")
    ver = VerifierEndpoint(pk, pk.params, _rng(args), zero_nonces=args.zero_nonces)
    out = sys.stdout
    if args.pipe:
        ch = StreamChannel(sys.stdin.buffer, sys.stdout.buffer)
        out = sys.stderr
    elif args.connect:
        ch = StreamChannel.connect(*_addr(args.connect), args.timeout)
    elif args.listen:
        import socket
        host, port = _addr(args.listen)
        srv = socket.create_server((host, port))
        print(f"listening on {host}:{srv.getsockname()[1]}", file=sys.stderr, flush=True)
        srv.settimeout(args.timeout)
        conn, _ = srv.accept()
        srv.close()
        rf, wf = conn.makefile("rb"), conn.makefile("wb")
        ch = StreamChannel(rf, wf, lambda: (rf.close(), wf.close(), conn.close()))
    else:
        raise UsageError("verifier needs --pipe, --listen or --connect")
    try:
        verdict = ver.run(ch, msg, sig, args.rounds)
    finally:
        ch.close()
    d = verdict.to_dict()
    d["expected"] = want.value
    human = f"{verdict.name}" + (f" (round {verdict.round}: {verdict.reason})" if verdict.reason else "")
    _emit(args, d, human, out)
    return EXIT_OK if verdict.kind is want else EXIT_REJECT


def cmd_interactive(args, want: Verdict) -> int:
    pk = PublicKey.from_bytes(_read(args.pk))
    if args.rounds is not None and args.rounds < 1:
        raise UsageError("--rounds must be positive")
    if args.role == "signer":
        if not args.sk:
            raise UsageError("signer role needs --sk")
        sk = SecretKey.from_bytes(_read(args.sk))
        return _run_signer(args, pk, sk)
    if not args.sig:
        raise UsageError("verifier role needs --sig")
    return _run_verifier(args, pk, want)


def cmd_bench(args) -> int:
    p = load_paramset(args.set)
    rep = bench_run(p, args.iters, _rng(args))
    if args.json:
        print(json.dumps(rep.to_dict(), sort_keys=True))
        return EXIT_OK
    print(f"set {rep.set}, {rep.iterations} iterations, cycles from {rep.cycles_source} @ {rep.cpu_hz / 1e9:.2f} GHz")
    for op, t in rep.timings.items():
        ref = f"  (reference {rep.reference_ms[op]:.2f} ms)" if rep.reference_ms else ""
        print(f"  {op:14s} median {t.median_ms:9.2f} ms  iqr {t.iqr_ms:7.2f}  ~{t.cycles_est:>12d} cycles{ref}")
    _print_sizes(rep.sizes)
    return EXIT_OK


def _print_sizes(sizes: dict):
    for name, e in sizes.items():
        ref = ""
        if "reference_kib" in e:
            ref = f"  reference {e['reference_kib']:>6} KB  dev {e['rel_dev']:+.1%}" + ("  (excluded)" if e["excluded"] else "")
        print(f"  {name:6s} encoded {e['encoded_kib']:9.2f} KiB  formula {e['formula_kib']:9.2f} KiB{ref}")


def cmd_sizes(args) -> int:
    names = [args.set] if args.set else [n for n in SET_NAMES]
    out = {}
    for n in names:
        p = load_paramset(n)
        out[n] = {"bits": theoretical_sizes(p).__dict__, "compare": size_comparison(p)}
    if args.json:
        print(json.dumps(out if not args.set else out[args.set], sort_keys=True))
        return EXIT_OK
    for n, d in out.items():
        print(f"set {n}")
        _print_sizes(d["compare"])
    return EXIT_OK


# -- argument parsing ----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mlus", description="module-lattice undeniable signatures")
    sub = ap.add_subparsers(dest="cmd", required=True)

    def common(sp, needs_set=False, set_optional=False):
        if needs_set:
            sp.add_argument("--set", choices=SET_NAMES, required=not set_optional, default=None)
        sp.add_argument("--seed", help="hex seed (default: MLUS_SEED or OS entropy)")
        sp.add_argument("--json", action="store_true", help="machine-readable output")
        return sp

    sp = common(sub.add_parser("params", help="show parameter sets"), True, True)
    sp.add_argument("action", nargs="?", choices=["show"], default="show")
    sp.set_defaults(fn=cmd_params)

    sp = common(sub.add_parser("keygen", help="generate a key pair"), True)
    sp.add_argument("--out", required=True, help="output prefix; writes PREFIX.mlpk and PREFIX.mlsk")
    sp.set_defaults(fn=cmd_keygen)

    def msg_args(sp):
        g = sp.add_mutually_exclusive_group()
        g.add_argument("--msg", help="message file ('-' for stdin)")
        g.add_argument("--message", help="message given inline")

    sp = common(sub.add_parser("sign", help="sign a message"))
    sp.add_argument("--pk", required=True)
    sp.add_argument("--sk", required=True)
    sp.add_argument("--out", help="signature file (default stdout)")
    msg_args(sp)
    sp.set_defaults(fn=cmd_sign)

    sp = common(sub.add_parser("verify-static", help="non-interactive signature checks"))
    sp.add_argument("--pk", required=True)
    sp.add_argument("--sig", required=True, help="signature file ('-' for stdin)")
    msg_args(sp)
    sp.set_defaults(fn=cmd_verify_static)

    for name, want in (("confirm", Verdict.CONFIRMED), ("disavow", Verdict.DISAVOWED)):
        sp = common(sub.add_parser(name, help=f"interactive protocol, expecting {want.value}"))
        sp.add_argument("--role", choices=["signer", "verifier"], required=True)
        sp.add_argument("--pk", required=True)
        sp.add_argument("--sk")
        sp.add_argument("--sig")
        g = sp.add_mutually_exclusive_group(required=True)
        g.add_argument("--listen", metavar="HOST:PORT")
        g.add_argument("--connect", metavar="HOST:PORT")
        g.add_argument("--pipe", action="store_true", help="frames on stdin/stdout, report on stderr")
        sp.add_argument("--rounds", type=int, default=None)
        sp.add_argument("--timeout", type=float, default=60.0)
        sp.add_argument("--zero-nonces", action="store_true", help="zero commitment nonces")
        msg_args(sp)
        sp.set_defaults(fn=lambda a, w=want: cmd_interactive(a, w))

    sp = common(sub.add_parser("bench", help="time keygen/sign/verify"), True)
    sp.add_argument("--iters", type=int, default=10)
    sp.set_defaults(fn=cmd_bench)

    sp = common(sub.add_parser("sizes", help="encoded vs formula vs reference sizes"), True, True)
    sp.set_defaults(fn=cmd_sizes)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.fn(args)
    except (UsageError, ParamError) as exc:
        print(f"mlus: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, codec.CodecError, TransportError) as exc:
        print(f"mlus: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_IO
    except ProtocolError as exc:
        print(f"mlus: protocol rejected: {exc}", file=sys.stderr)
        return EXIT_REJECT


if __name__ == "__main__":
    sys.exit(main())
