"""Command line: parse, mc, prove, check, unfold.

The first line on stdout is always a verdict token.  Exit codes:
0 ok/proved/accepted (and mc, whether true or false), 1 refuted/rejected,
2 bad input, 3 I/O error, 4 budget exhausted.
"""
import argparse
import sys

from .proof import ProofFormatError, check_proof, deserialize, serialize, show_unfolded, unfold_proof
from .prover import Budget, Proved, Refuted, prove
from .semantics import ModelError, dump_certificate, dump_model, model_check, parse_model
from .syntax import ParseError, parse, show

OK, NO, BAD_INPUT, IO_ERROR, EXHAUSTED = 0, 1, 2, 3, 4


class _Fail(Exception):
    def __init__(self, code, msg):
        self.code = code
        self.msg = msg


def _read(path):
    try:
        if path == "-":
            return sys.stdin.read()
        with open(path) as fh:
            return fh.read()
    except OSError as e:
        raise _Fail(IO_ERROR, f"{path}: {e.strerror}")


def _write(path, text):
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w") as fh:
            fh.write(text)
    except OSError as e:
        raise _Fail(IO_ERROR, f"{path}: {e.strerror}")


def _formula(text, where):
    try:
        return parse(text)
    except ParseError as e:
        pos = "" if e.pos is None else f":{e.pos}"
        raise _Fail(BAD_INPUT, f"{where}{pos}: {e.msg}")


def _proof(path):
    try:
        return deserialize(_read(path))
    except (ProofFormatError, ParseError) as e:
        raise _Fail(BAD_INPUT, f"{path}: {e}")


def cmd_parse(args):
    f = _formula(_read(args.file), args.file)
    print("ok")
    print(show(f))
    return OK


def cmd_mc(args):
    try:
        M = parse_model(_read(args.model))
    except ModelError as e:
        raise _Fail(BAD_INPUT, f"{args.model}: {e}")
    f = _formula(args.formula, "formula")
    try:
        ok, game, cert = model_check(M, args.world, f, with_certificate=True)
    except ModelError as e:
        raise _Fail(BAD_INPUT, str(e))
    print("true" if ok else "false")
    if args.certificate:
        _write(args.out, dump_certificate(game, cert))
    return OK


def cmd_prove(args):
    f = _formula(_read(args.file), args.file)
    budget = Budget(max_depth=args.budget_depth, max_steps=args.budget_steps,
                    memo_cap=args.memo_cap, threads=args.threads)
    try:
        res = prove(f, budget)
    except ValueError as e:
        raise _Fail(BAD_INPUT, str(e))
    if isinstance(res, Proved):
        print("proved")
        _write(args.out, serialize(res.proof))
        return OK
    if isinstance(res, Refuted):
        print("refuted")
        print(f"world {res.world}")
        _write(args.out, dump_model(res.model))
        return NO
    print("exhausted")
    print(res.report)
    return EXHAUSTED


def cmd_check(args):
    verdict = check_proof(_proof(args.file))
    if verdict.accepted:
        print("accepted")
        return OK
    print("rejected")
    print(f"node {verdict.node}: {verdict.reason}")
    return NO


def cmd_unfold(args):
    if args.depth < 0:
        raise _Fail(BAD_INPUT, "depth must be non-negative")
    tree = unfold_proof(_proof(args.file), args.depth)
    print("ok")
    print(show_unfolded(tree))
    return OK


def build_parser():
    ap = argparse.ArgumentParser(prog="hybridmu", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="check a formula file and print it canonically")
    p.add_argument("file")
    p.set_defaults(run=cmd_parse)

    p = sub.add_parser("mc", help="model check a formula at a world")
    p.add_argument("model")
    p.add_argument("formula", help="formula text")
    p.add_argument("world")
    p.add_argument("--certificate", action="store_true", help="dump winning regions and strategies")
    p.add_argument("--out", help="write the certificate here instead of stdout")
    p.set_defaults(run=cmd_mc)

    p = sub.add_parser("prove", help="search for a proof or a countermodel")
    p.add_argument("file")
    p.add_argument("--budget-depth", type=int, default=Budget.max_depth)
    p.add_argument("--budget-steps", type=int, default=Budget.max_steps)
    p.add_argument("--memo-cap", type=int, default=Budget.memo_cap)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", help="write the proof or model here instead of stdout")
    p.set_defaults(run=cmd_prove)

    p = sub.add_parser("check", help="check a proof file")
    p.add_argument("file")
    p.set_defaults(run=cmd_check)

    p = sub.add_parser("unfold", help="print the unfolding of a proof to a depth")
    p.add_argument("file")
    p.add_argument("depth", type=int)
    p.set_defaults(run=cmd_unfold)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.run(args)
    except _Fail as e:
        print("error")
        print(e.msg, file=sys.stderr)
        return e.code


if __name__ == "__main__":
    sys.exit(main())
