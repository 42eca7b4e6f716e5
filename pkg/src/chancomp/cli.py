"""Command-line interface: compile, verify, info, random, bounds, fit.

Exit codes: 0 success, 1 validation/usage error, 2 verification failure.
Compilation self-verifies through the simulator unless --no-verify is
given, so a run that exits 0 has passed the channel oracle.
"""

from __future__ import annotations

import argparse
import json
import pathlib
import sys

import numpy as np

from . import bounds as bounds_mod
from .channel import (
    KrausSet,
    channel_from_json,
    channel_to_json,
    choi_from_kraus,
    is_extreme,
    kraus_rank,
    random_channel,
    stinespring_isometry,
)
from .circuit import MEASURE, Circuit, CircuitParseError, cnot_count, parse, serialize
from .compiler import (
    ConvexMixture,
    compile_measured,
    compile_qcm,
    compile_random_qcm,
    mixture_choi,
    verify_circuit,
)
from .rewrite import standard_passes
from .simulator import circuit_to_kraus
from .templates import TEMPLATES, fit, instantiate

SIZE_CAP = 8
VERIFY_TOL = 1e-8
TEMPLATE_KEYS = {"1to1": "T11", "1to2": "T12", "2to1": "T21", "2to2": "T22"}
FIT_TOL = {"T11": 1e-6, "T12": 1e-4, "T21": 1e-4, "T22": 1e-4}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{message}\n{self.format_usage()}")


def _build_parser() -> _Parser:
    p = _Parser(prog="chancomp", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compile", help="compile a channel into a circuit")
    c.add_argument("--model", choices=("measured", "qcm", "random"), required=True)
    c.add_argument("--in", dest="infile", required=True)
    c.add_argument("--out", dest="outfile", required=True)
    c.add_argument("--k", type=int, default=None, help="force environment size")
    c.add_argument("--no-verify", action="store_true")
    c.add_argument("--no-rewrite", action="store_true")
    c.add_argument("--report", action="store_true")

    v = sub.add_parser("verify", help="check a circuit against a channel")
    v.add_argument("--circuit", required=True)
    v.add_argument("--channel", required=True)
    v.add_argument("--tol", type=float, default=VERIFY_TOL)

    i = sub.add_parser("info", help="print channel facts")
    i.add_argument("--in", dest="infile", required=True)

    r = sub.add_parser("random", help="generate a seeded random channel")
    r.add_argument("--m", type=int, required=True)
    r.add_argument("--n", type=int, required=True)
    r.add_argument("--kraus-rank", type=int, required=True)
    r.add_argument("--seed", type=int, required=True)
    r.add_argument("--out", dest="outfile", required=True)

    b = sub.add_parser("bounds", help="CNOT-count bounds and parameter counts")
    b.add_argument("--m", type=int)
    b.add_argument("--n", type=int)
    b.add_argument("--grid", nargs=2, type=int, metavar=("MMAX", "NMAX"))
    b.add_argument("--csv", action="store_true")

    f = sub.add_parser("fit", help="fit a small-case template to a channel")
    f.add_argument("--template", choices=sorted(TEMPLATE_KEYS), required=True)
    f.add_argument("--in", dest="infile", required=True)
    f.add_argument("--starts", type=int, default=20)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--max-iters", type=int, default=6000)
    f.add_argument("--out", dest="outfile", default=None)
    return p


def _load_channel(path: str) -> KrausSet:
    return channel_from_json(pathlib.Path(path).read_text())


def _measure_count(circ: Circuit) -> int:
    return sum(1 for g in circ.gates if g.kind == MEASURE)


def _report_line(circ: Circuit, dist: float | None) -> str:
    worst, _ = cnot_count(circ)
    line = f"qubits={circ.num_qubits} cnots={worst} measurements={_measure_count(circ)}"
    if dist is not None:
        line += f" choi_dist={dist:.3e}"
    return line


def _cmd_compile(args) -> int:
    text = pathlib.Path(args.infile).read_text()
    if args.model == "random":
        return _compile_random(args, text)
    ks = channel_from_json(text)
    k = stinespring_isometry(ks, force_k=args.k).k
    if ks.m + ks.n + k > SIZE_CAP:
        print(f"error: m+n+k = {ks.m + ks.n + k} exceeds the supported cap of {SIZE_CAP}",
              file=sys.stderr)
        return 1
    compiler = compile_measured if args.model == "measured" else compile_qcm
    circ = compiler(ks, force_k=args.k)
    if not args.no_rewrite:
        circ = standard_passes(circ)
    dist = None
    if not args.no_verify:
        dist = verify_circuit(circ, ks)
    pathlib.Path(args.outfile).write_text(serialize(circ))
    if args.report:
        print(_report_line(circ, dist))
    if dist is not None and dist >= VERIFY_TOL:
        print(f"error: verification failed, choi_dist={dist:.3e}", file=sys.stderr)
        return 2
    return 0


def _parse_mixture(text: str) -> ConvexMixture:
    doc = json.loads(text)
    if "components" in doc:
        comps = [
            (float(c["probability"]), channel_from_json(json.dumps(c["channel"])))
            for c in doc["components"]
        ]
        return ConvexMixture(comps)
    return ConvexMixture([(1.0, channel_from_json(text))])


def _compile_random(args, text: str) -> int:
    mix = _parse_mixture(text)
    for _, ks in mix.components:
        k = stinespring_isometry(ks).k
        if ks.m + ks.n + k > SIZE_CAP:
            print(f"error: component exceeds the m+n+k <= {SIZE_CAP} cap", file=sys.stderr)
            return 1
    compiled = compile_random_qcm(mix)
    if not args.no_rewrite:
        compiled = [(p, standard_passes(c)) for p, c in compiled]
    out = pathlib.Path(args.outfile)
    many = len(compiled) > 1
    for idx, (prob, circ) in enumerate(compiled):
        path = out.with_name(f"{out.stem}.{idx}{out.suffix}") if many else out
        path.write_text(f"# probability {prob!r}\n" + serialize(circ))
        if args.report:
            print(f"component={idx} p={prob!r} " + _report_line(circ, None))
    dist = None
    if not args.no_verify:
        j = sum(p * choi_from_kraus(circuit_to_kraus(c)).j for p, c in compiled)
        dist = float(np.linalg.norm(j - mixture_choi(mix).j))
        if args.report:
            print(f"mixture choi_dist={dist:.3e}")
        if dist >= VERIFY_TOL:
            print(f"error: verification failed, choi_dist={dist:.3e}", file=sys.stderr)
            return 2
    return 0


def _cmd_verify(args) -> int:
    circ = parse(pathlib.Path(args.circuit).read_text())
    ks = _load_channel(args.channel)
    dist = verify_circuit(circ, ks)
    print(f"choi_dist={dist:.3e}")
    return 0 if dist < args.tol else 2


def _cmd_info(args) -> int:
    ks = _load_channel(args.infile)
    tp = sum(a.conj().T @ a for a in ks.ops) - np.eye(2**ks.m)
    print(
        f"m={ks.m} n={ks.n} kraus_rank={kraus_rank(ks)} "
        f"extreme={'yes' if is_extreme(ks) else 'no'} "
        f"tp_residual={np.linalg.norm(tp):.3e}"
    )
    return 0


def _cmd_random(args) -> int:
    ks = random_channel(args.m, args.n, args.kraus_rank, args.seed)
    pathlib.Path(args.outfile).write_text(channel_to_json(ks))
    return 0


_BOUND_FIELDS = (
    "lb_qcm", "lb_random", "lb_measured", "param_count_extreme",
    "ub_asymptotic_qcm", "ub_asymptotic_random", "ub_asymptotic_measured",
    "qubits_qcm", "qubits_random", "qubits_measured",
)


def _cmd_bounds(args) -> int:
    if args.grid:
        mmax, nmax = args.grid
        rows = [bounds_mod.table1(m, n) for m in range(mmax + 1) for n in range(nmax + 1)]
        if args.csv:
            print("m,n," + ",".join(_BOUND_FIELDS))
            for rep in rows:
                print(f"{rep.m},{rep.n}," + ",".join(str(getattr(rep, f)) for f in _BOUND_FIELDS))
        else:
            for rep in rows:
                vals = " ".join(f"{f}={getattr(rep, f)}" for f in _BOUND_FIELDS)
                print(f"m={rep.m} n={rep.n} {vals}")
        return 0
    if args.m is None or args.n is None:
        raise UsageError("bounds needs --m and --n (or --grid)")
    rep = bounds_mod.table1(args.m, args.n)
    for f in _BOUND_FIELDS:
        print(f"{f}={getattr(rep, f)}")
    return 0


def _cmd_fit(args) -> int:
    t = TEMPLATES[TEMPLATE_KEYS[args.template]]
    ks = _load_channel(args.infile)
    tol = FIT_TOL[t.id]
    params, dist = fit(t, ks, starts=args.starts, max_iters=args.max_iters,
                       tol=tol, seed=args.seed)
    print(f"template={args.template} distance={dist:.3e} params={len(params)}")
    if args.outfile:
        pathlib.Path(args.outfile).write_text(serialize(instantiate(t, params)))
    return 0 if dist < tol else 2


_COMMANDS = {
    "compile": _cmd_compile,
    "verify": _cmd_verify,
    "info": _cmd_info,
    "random": _cmd_random,
    "bounds": _cmd_bounds,
    "fit": _cmd_fit,
}


def run(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, CircuitParseError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
