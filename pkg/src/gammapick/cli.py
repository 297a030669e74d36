"""Batch command-line front end.

Exit-code contract: 0 = yes/ok, 3 = no (mathematical negative), 4 = undecided,
2 = usage or I/O fault.  Every run writes a manifest recording the command,
the config snapshot, the seed, input digests, output digests and per-phase
timings; certificate files themselves contain no volatile data, so identical
manifest inputs reproduce them byte for byte.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import jsonio
from .certificates import (
    DecompositionCertificate,
    DualCertificate,
    PickProblem,
    load_certificate,
    verify_decomposition,
    verify_dual,
)
from .errors import GammaPickError, UndecidedError
from .extension import ExtensionResult, extend, von_neumann_audit
from .geometry import gpoint, is_member, sup_phi
from .hardy import combined_check, kernel_identity_check, szego_admissibility_check
from .realization import RealizedFunction, evaluate_many, norm_audit, realize
from .solver import SolverConfig, extremal_norm, solve_feasibility

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NO = 3
EXIT_UNDECIDED = 4


def _parse_complex(text: str) -> complex:
    try:
        re_s, im_s = text.split(",")
        return complex(float(re_s), float(im_s))
    except Exception as exc:
        raise argparse.ArgumentTypeError(
            f"expected 're,im' (e.g. '0.5,0'), got {text!r}"
        ) from exc


def _threads(args) -> int:
    if getattr(args, "threads", 0):
        return args.threads
    env = os.environ.get("GAMMA_PICK_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _config_from_args(args) -> SolverConfig:
    cfg = SolverConfig()
    if getattr(args, "config", None):
        cfg = SolverConfig.from_json(jsonio.read_json(args.config))
    updates = {}
    if getattr(args, "alpha_grid", None):
        updates["alpha_grid"] = args.alpha_grid
    if getattr(args, "tol", None):
        updates["primal_tol"] = args.tol
    if getattr(args, "seed", None) is not None:
        updates["seed"] = args.seed
    updates["threads"] = _threads(args)
    from dataclasses import replace

    return replace(cfg, **updates)


class _Manifest:
    def __init__(self, command: str, config: SolverConfig, seed: int, out_dir: Path):
        self.command = command
        self.config = config
        self.seed = seed
        self.out_dir = out_dir
        self.inputs: list[dict] = []
        self.outputs: list[dict] = []
        self.timings: dict[str, float] = {}

    def add_input(self, path: str | Path) -> None:
        self.inputs.append({"path": str(path), "digest": jsonio.sha256_file(path)})

    def write_output(self, name: str, obj) -> Path:
        path = self.out_dir / name
        jsonio.write_json_atomic(path, obj)
        self.outputs.append({"path": str(path), "digest": jsonio.sha256_file(path)})
        return path

    def time(self, phase: str, seconds: float) -> None:
        self.timings[phase] = self.timings.get(phase, 0.0) + seconds

    def finish(self) -> None:
        payload = {
            "command": self.command,
            "config": self.config.to_json(),
            "seed": self.seed,
            "inputs": self.inputs,
            "input_digest": (
                self.inputs[0]["digest"] if self.inputs else None
            ),
            "outputs": self.outputs,
            "timings": self.timings,
        }
        jsonio.write_json_atomic(self.out_dir / "manifest.json", payload)


def _out_dir(args) -> Path:
    out = Path(getattr(args, "out", None) or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_member(args) -> int:
    s = args.s
    p = args.p
    member, margin = is_member(s, p)
    sup = None
    witness = None
    if abs(s) < 2.0:
        sup_val, alpha = sup_phi(s, p)
        sup = sup_val
        witness = jsonio.complex_to_pair(alpha)
    payload = {
        "member": member,
        "margin": margin if np.isfinite(margin) else None,
        "sup_phi": sup,
        "witness_alpha": witness,
    }
    sys.stdout.write(jsonio.dumps_canonical(payload) + "\n")
    return EXIT_OK if member else EXIT_NO


def cmd_pick_solve(args) -> int:
    cfg = _config_from_args(args)
    out = _out_dir(args)
    manifest = _Manifest("pick solve", cfg, cfg.seed, out)
    manifest.add_input(args.problem)
    problem = PickProblem.from_json(jsonio.read_json(args.problem))
    t0 = time.perf_counter()
    try:
        verdict = solve_feasibility(problem, args.scale, cfg)
    except UndecidedError as exc:
        manifest.time("solve", time.perf_counter() - t0)
        manifest.write_output(
            "verdict.json",
            {
                "feasible": None,
                "undecided": True,
                "primal_residual": exc.primal_residual
                if np.isfinite(exc.primal_residual)
                else None,
                "dual_violation": exc.dual_violation,
            },
        )
        manifest.finish()
        print(f"undecided: {exc}", file=sys.stderr)
        return EXIT_UNDECIDED
    manifest.time("solve", time.perf_counter() - t0)
    manifest.write_output("verdict.json", verdict.to_json())
    if verdict.primal is not None:
        manifest.write_output("primal.json", verdict.primal.to_json())
    if verdict.dual is not None:
        manifest.write_output("dual.json", verdict.dual.to_json())
    manifest.finish()
    return EXIT_OK if verdict.feasible else EXIT_NO


def cmd_pick_norm(args) -> int:
    cfg = _config_from_args(args)
    out = _out_dir(args)
    manifest = _Manifest("pick norm", cfg, cfg.seed, out)
    manifest.add_input(args.problem)
    problem = PickProblem.from_json(jsonio.read_json(args.problem))
    t0 = time.perf_counter()
    try:
        result = extremal_norm(problem, cfg)
    except UndecidedError as exc:
        manifest.time("solve", time.perf_counter() - t0)
        manifest.finish()
        print(f"undecided: {exc}", file=sys.stderr)
        return EXIT_UNDECIDED
    manifest.time("solve", time.perf_counter() - t0)
    manifest.write_output(
        "rho.json",
        {
            "rho": result.rho,
            "warnings": list(result.warnings),
            "iterations": result.iterations,
        },
    )
    manifest.write_output("primal.json", result.certificate_at_rho_plus.to_json())
    if result.extremal_kernel is not None:
        manifest.write_output("dual.json", result.extremal_kernel.to_json())
    manifest.finish()
    sys.stdout.write(jsonio.dumps_canonical({"rho": result.rho}) + "\n")
    return EXIT_OK


def cmd_realize(args) -> int:
    cert_obj = jsonio.read_json(args.certificate)
    problem = PickProblem.from_json(jsonio.read_json(args.problem))
    cert = load_certificate(cert_obj)
    if not isinstance(cert, DecompositionCertificate):
        print("realize needs a decomposition certificate", file=sys.stderr)
        return EXIT_USAGE
    fn = realize(problem, cert)
    if args.eval is not None:
        s_re, s_im, p_re, p_im = (float(x) for x in args.eval.split(","))
        x = gpoint(complex(s_re, s_im), complex(p_re, p_im))
        val = fn.scale * evaluate_many(fn, [x])[0]
        sys.stdout.write(
            jsonio.dumps_canonical(
                {"value": jsonio.complex_to_pair(val), "abs": abs(val)}
            )
            + "\n"
        )
        return EXIT_OK
    if args.grid is not None:
        from .geometry import sample_g

        pts = sample_g(args.grid * args.grid, args.seed or 0)
        vals = evaluate_many(fn, pts)
        path = Path(args.csv or "grid.csv")
        lines = ["s_re,s_im,p_re,p_im,f_re,f_im,abs_f"]
        for pt, v in zip(pts, vals):
            lines.append(
                ",".join(
                    format(x, ".17g")
                    for x in (
                        pt.s.real,
                        pt.s.imag,
                        pt.p.real,
                        pt.p.imag,
                        v.real,
                        v.imag,
                        abs(v),
                    )
                )
            )
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        observed = float(np.abs(vals).max())
        sys.stdout.write(jsonio.dumps_canonical({"observed_sup": observed}) + "\n")
        return EXIT_OK
    print("realize needs --eval or --grid", file=sys.stderr)
    return EXIT_USAGE


def cmd_extend(args) -> int:
    cfg = _config_from_args(args)
    out = _out_dir(args)
    manifest = _Manifest("extend", cfg, cfg.seed, out)
    manifest.add_input(args.problem)
    problem = PickProblem.from_json(jsonio.read_json(args.problem))
    t0 = time.perf_counter()
    try:
        result = extend(problem.nodes, problem.targets, cfg)
    except UndecidedError as exc:
        manifest.finish()
        print(f"undecided: {exc}", file=sys.stderr)
        return EXIT_UNDECIDED
    manifest.time("extend", time.perf_counter() - t0)
    manifest.write_output("extension.json", result.to_json())
    manifest.finish()
    sys.stdout.write(jsonio.dumps_canonical({"rho": result.rho}) + "\n")
    return EXIT_OK


def cmd_audit(args) -> int:
    if args.kind != "vonneumann":
        print(f"unknown audit kind {args.kind!r}", file=sys.stderr)
        return EXIT_USAGE
    result = ExtensionResult.from_json(jsonio.read_json(args.result))
    max_ratio, worst = von_neumann_audit(result, args.trials, args.seed)
    payload = {
        "trials": args.trials,
        "max_ratio": max_ratio,
        "worst_kernel": worst.to_json() if worst is not None else None,
    }
    sys.stdout.write(jsonio.dumps_canonical(payload) + "\n")
    return EXIT_OK if max_ratio <= 1.0 + 1e-6 else EXIT_NO


def cmd_hardy(args) -> int:
    report = combined_check(args.samples, args.node_sets, args.max_n, args.seed)
    sys.stdout.write(jsonio.dumps_canonical(report.to_json()) + "\n")
    return EXIT_OK if report.ok else EXIT_NO


def cmd_verify(args) -> int:
    problem = PickProblem.from_json(jsonio.read_json(args.problem))
    cert = load_certificate(jsonio.read_json(args.certificate))
    if isinstance(cert, DecompositionCertificate):
        check = verify_decomposition(problem, cert)
        payload = {
            "type": "decomposition",
            "residual": check.residual,
            "min_block_eig": check.min_block_eig,
            "ok": check.ok,
        }
    else:
        check = verify_dual(problem, cert)
        payload = {
            "type": "dual",
            "violation": check.violation,
            "admissibility_slack": check.admissibility_slack,
            "diag_deviation": check.diag_deviation,
            "kernel_min_eig": check.kernel_min_eig,
            "ok": check.ok,
        }
    sys.stdout.write(jsonio.dumps_canonical(payload) + "\n")
    return EXIT_OK if check.ok else EXIT_NO


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gammapick",
        description="Pick interpolation on the symmetrized bidisk with certificates",
    )
    parser.add_argument("--threads", type=int, default=0, help="bound inner parallel maps")
    sub = parser.add_subparsers(dest="command", required=True)

    p_member = sub.add_parser("member", help="membership test with margin")
    p_member.add_argument("--s", type=_parse_complex, required=True, metavar="RE,IM")
    p_member.add_argument("--p", type=_parse_complex, required=True, metavar="RE,IM")
    p_member.set_defaults(func=cmd_member)

    p_pick = sub.add_parser("pick", help="feasibility and extremal norm")
    pick_sub = p_pick.add_subparsers(dest="pick_command", required=True)

    p_solve = pick_sub.add_parser("solve", help="feasibility at a fixed scale")
    p_solve.add_argument("problem")
    p_solve.add_argument("--scale", type=float, default=1.0)
    p_solve.add_argument("--alpha-grid", dest="alpha_grid", type=int)
    p_solve.add_argument("--tol", type=float)
    p_solve.add_argument("--seed", type=int, default=0)
    p_solve.add_argument("--out", default=".")
    p_solve.add_argument("--config", help="SolverConfig JSON sidecar")
    p_solve.set_defaults(func=cmd_pick_solve)

    p_norm = pick_sub.add_parser("norm", help="extremal norm with bracketing certificates")
    p_norm.add_argument("problem")
    p_norm.add_argument("--alpha-grid", dest="alpha_grid", type=int)
    p_norm.add_argument("--tol", type=float)
    p_norm.add_argument("--seed", type=int, default=0)
    p_norm.add_argument("--out", default=".")
    p_norm.add_argument("--config")
    p_norm.set_defaults(func=cmd_pick_norm)

    p_realize = sub.add_parser("realize", help="evaluate a realized interpolant")
    p_realize.add_argument("certificate")
    p_realize.add_argument("--problem", required=True)
    p_realize.add_argument("--eval", metavar="S_RE,S_IM,P_RE,P_IM")
    p_realize.add_argument("--grid", type=int)
    p_realize.add_argument("--csv")
    p_realize.add_argument("--seed", type=int, default=0)
    p_realize.set_defaults(func=cmd_realize)

    p_extend = sub.add_parser("extend", help="norm-preserving extension from finite data")
    p_extend.add_argument("problem")
    p_extend.add_argument("--seed", type=int, default=0)
    p_extend.add_argument("--out", default=".")
    p_extend.add_argument("--config")
    p_extend.set_defaults(func=cmd_extend)

    p_audit = sub.add_parser("audit", help="operator-theoretic audits")
    p_audit.add_argument("kind", choices=["vonneumann"])
    p_audit.add_argument("result")
    p_audit.add_argument("--trials", type=int, default=100)
    p_audit.add_argument("--seed", type=int, default=0)
    p_audit.set_defaults(func=cmd_audit)

    p_hardy = sub.add_parser("hardy", help="Hardy-space cross-checks")
    p_hardy.add_argument("check", choices=["check"])
    p_hardy.add_argument("--samples", type=int, default=10000)
    p_hardy.add_argument("--node-sets", dest="node_sets", type=int, default=25)
    p_hardy.add_argument("--max-n", dest="max_n", type=int, default=5)
    p_hardy.add_argument("--seed", type=int, default=0)
    p_hardy.set_defaults(func=cmd_hardy)

    p_verify = sub.add_parser("verify", help="re-verify an emitted certificate")
    p_verify.add_argument("certificate")
    p_verify.add_argument("--problem", required=True)
    p_verify.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors already
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UndecidedError as exc:
        print(f"undecided: {exc}", file=sys.stderr)
        return EXIT_UNDECIDED
    except GammaPickError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
