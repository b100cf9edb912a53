"""Command-line entry points.

Subcommands:
    run         execute a circuit JSON in exact, sample, or estimate mode
    wigner      tabulate a single-mode normalized Wigner function as CSV
    negativity  sweep negativity over squeezing values as CSV
    decompose   factor an integer symplectic matrix into generator gates
    verify      run the desk-scale oracle-agreement suite

Exit codes: 0 success, 1 verification failure, 2 schema/usage error,
3 numeric failure (series truncation, non-convergence, sampling abort),
4 infeasible estimation plan. Output files are written atomically.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

import numpy as np

from .circuit_io import (
    SchemaError,
    negativity_sweep,
    parse_circuit,
    run as run_circuit,
    sweep_csv,
)
from .estimator import InfeasiblePlan
from .quadrature import QuadratureNotConverged, integrate_cell_2d
from .symplectic import (
    DecompositionFailed,
    IntSymplectic,
    NotInteger,
    NotSymplectic,
    decompose,
    word_symplectic,
)
from .theta import CodeState, NotPositiveDefinite, TruncationOverflow
from .wigner import RealisticFactor


def write_atomic(path: str, text: str) -> None:
    """Write via a sibling temp file and rename, so readers never see partials."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(args, text: str) -> None:
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)


def _cmd_run(args) -> int:
    with open(args.circuit) as handle:
        spec = parse_circuit(handle.read())
    result = run_circuit(
        spec,
        args.mode,
        seed=args.seed,
        n_samples=args.samples,
        threads=args.threads,
    )
    _emit(args, json.dumps(result, indent=2) + "\n")
    return 0


def _make_state(args) -> CodeState:
    if args.kind == "logical":
        return CodeState.logical(args.d, args.j, args.delta)
    return CodeState.phase_state(args.d, args.delta)


def _cmd_wigner(args) -> int:
    factor = RealisticFactor.make(_make_state(args))
    period = args.d * factor.state.ell
    xs = (np.arange(args.grid) + 0.5) * period / args.grid
    vals = factor.wigner_grid(xs, xs)
    lines = ["eta_x,eta_z,wigner"]
    for i, x in enumerate(xs):
        for j, z in enumerate(xs):
            lines.append(f"{x:.12g},{z:.12g},{vals[i, j]:.12g}")
    _emit(args, "\n".join(lines) + "\n")
    return 0


def _cmd_negativity(args) -> int:
    deltas = [float(tok) for tok in args.deltas.split(",") if tok.strip()]
    rows = negativity_sweep(args.kind, deltas, args.d, tol=args.tol)
    _emit(args, sweep_csv(rows))
    return 0


def _cmd_decompose(args) -> int:
    with open(args.matrix) as handle:
        doc = json.load(handle)
    if not isinstance(doc, dict) or "matrix" not in doc:
        raise SchemaError(["at $: expected an object with a 'matrix' key"])
    try:
        s = IntSymplectic(np.array(doc["matrix"], dtype=object))
    except (NotSymplectic, NotInteger, ValueError) as exc:
        raise SchemaError([f"at $.matrix: {exc}"])
    word = decompose(s)
    out = {
        "format": "zakgross-word/1",
        "n": s.n,
        "length": len(word),
        "gates": [{"gate": g.name, "modes": list(g.modes)} for g in word],
    }
    _emit(args, json.dumps(out, indent=2) + "\n")
    return 0


def _cmd_verify(args) -> int:
    from .measure import MeasurementSpec, exact_probabilities_ideal
    from .qudit import CodeParams, Gate, clifford_oracle_probabilities
    from .theta import wigner_oracle, wigner_theta
    from .wigner import ideal_input

    rng = np.random.default_rng(args.seed if args.seed is not None else 0)
    checks = []

    def check(name, fn):
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashed check is a failed check
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        checks.append(ok)
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")

    def gk_agreement():
        params = CodeParams(3, 2)
        tags = ["F", "P", "SUM", "CZ", "X", "Z"]
        worst = 0.0
        for _ in range(20):
            kets = [int(rng.integers(3)) for _ in range(2)]
            word = []
            for _ in range(int(rng.integers(1, 9))):
                t = tags[int(rng.integers(len(tags)))]
                i = int(rng.integers(2))
                word.append(Gate(t, (i,) if t not in ("SUM", "CZ") else (i, 1 - i)))
            st = ideal_input(params, kets).apply_word(word)
            p = exact_probabilities_ideal(
                st, MeasurementSpec.from_params(params, (0, 1), 3)
            )
            po = clifford_oracle_probabilities(params, kets, word, (0, 1))
            worst = max(worst, float(np.max(np.abs(p - po))))
        return worst < 1e-9, f"max deviation {worst:.2e} over 20 circuits"

    def theta_oracle():
        worst = 0.0
        for state in (CodeState.logical(3, 0, 0.3), CodeState.phase_state(3, 0.3)):
            period = 3 * state.ell
            grid = (np.arange(5) + 0.5) * period / 5
            eta = np.stack(np.meshgrid(grid, grid, indexing="ij"), axis=-1)
            a = wigner_theta(state, eta)
            b = wigner_oracle(state, eta)
            scale = np.max(np.abs(b))
            worst = max(worst, float(np.max(np.abs(a - b)) / scale))
        return worst < 1e-6, f"max relative deviation {worst:.2e}"

    def normalization():
        factor = RealisticFactor.make(CodeState.logical(3, 0, 0.3))
        period = 3 * factor.state.ell
        edges = np.linspace(0.0, period, 7)
        val, _err = integrate_cell_2d(
            factor.wigner_grid, edges, edges, abs_tol=1e-8
        )
        return abs(val - 1.0) < 1e-5, f"cell integral {val:.8f}"

    def decompose_roundtrip():
        from .qudit import GATE_NAMES

        params = CodeParams(3, 3)
        tags = sorted(GATE_NAMES - {"X", "Z"})
        for _ in range(20):
            word = []
            for _ in range(int(rng.integers(1, 13))):
                t = tags[int(rng.integers(len(tags)))]
                i = int(rng.integers(3))
                if t.startswith(("SUM", "CZ")):
                    j = int((i + 1 + rng.integers(2)) % 3)
                    word.append(Gate(t, (i, j)))
                else:
                    word.append(Gate(t, (i,)))
            s = word_symplectic(word, params)
            again = word_symplectic(decompose(s), params)
            if not np.array_equal(s.mat, again.mat):
                return False, "recomposition mismatch"
        return True, "20 random words recomposed exactly"

    def estimator_determinism():
        from . import estimator as est_mod
        from .measure import MeasurementSpec

        params = CodeParams(3, 2)
        st = ideal_input(params, [0, 0]).apply_word(
            [Gate.fourier(0), Gate.sum_(0, 1)]
        )
        spec = MeasurementSpec.from_params(params, (0, 1), 3)
        pl = est_mod.plan(0.1, 0.2, st.negativity())
        r1 = est_mod.estimate(st, spec, pl, seed=1)
        r2 = est_mod.estimate(st, spec, pl, seed=1)
        same = np.array_equal(r1.probabilities, r2.probabilities)
        return same, f"N={pl.n_samples}, reports identical: {same}"

    check("gottesman-knill agreement", gk_agreement)
    check("theta vs direct-definition oracle", theta_oracle)
    check("normalization (cell integral = 1)", normalization)
    check("symplectic decompose round-trip", decompose_roundtrip)
    check("estimator seed determinism", estimator_determinism)
    if all(checks):
        print(f"all {len(checks)} checks passed")
        return 0
    print(f"{sum(not c for c in checks)} of {len(checks)} checks FAILED")
    return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zakgross",
        description="Phase-space simulator for encoded qudit Clifford circuits.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="override RNG seed")
    common.add_argument(
        "--threads", type=int, default=1, help="worker threads for sampling"
    )
    common.add_argument(
        "--tol", type=float, default=1e-6, help="numeric tolerance where applicable"
    )
    common.add_argument("--out", default=None, help="output file (default stdout)")

    p_run = sub.add_parser("run", parents=[common], help="execute a circuit JSON")
    p_run.add_argument("circuit", help="path to a zakgross-circuit/1 JSON file")
    p_run.add_argument(
        "--mode", choices=["exact", "sample", "estimate"], default="exact"
    )
    p_run.add_argument(
        "--samples", type=int, default=10_000, help="draw count for sample mode"
    )
    p_run.set_defaults(func=_cmd_run)

    p_wig = sub.add_parser(
        "wigner", parents=[common], help="tabulate a single-mode Wigner function"
    )
    p_wig.add_argument("--d", type=int, default=3)
    p_wig.add_argument("--kind", choices=["logical", "phase_state"], default="logical")
    p_wig.add_argument("--j", type=int, default=0, help="logical index")
    p_wig.add_argument("--delta", type=float, required=True)
    p_wig.add_argument("--grid", type=int, default=81, help="points per axis")
    p_wig.set_defaults(func=_cmd_wigner)

    p_neg = sub.add_parser(
        "negativity", parents=[common], help="negativity sweep over squeezing"
    )
    p_neg.add_argument("--d", type=int, default=3)
    p_neg.add_argument(
        "--kind", choices=["logical_0", "phase_state"], default="logical_0"
    )
    p_neg.add_argument(
        "--deltas", required=True, help="comma-separated squeezing values"
    )
    p_neg.set_defaults(func=_cmd_negativity)

    p_dec = sub.add_parser(
        "decompose", parents=[common], help="factor a symplectic matrix into gates"
    )
    p_dec.add_argument("matrix", help="JSON file with a 'matrix' key")
    p_dec.set_defaults(func=_cmd_decompose)

    p_ver = sub.add_parser(
        "verify", parents=[common], help="run the oracle-agreement suite"
    )
    p_ver.set_defaults(func=_cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SchemaError as exc:
        for line in exc.errors:
            print(f"schema error: {line}", file=sys.stderr)
        return 2
    except InfeasiblePlan as exc:
        print(f"infeasible plan: {exc}", file=sys.stderr)
        return 4
    except (TruncationOverflow, NotPositiveDefinite, QuadratureNotConverged,
            DecompositionFailed, NotInteger) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    except NotSymplectic as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"schema error: invalid JSON ({exc})", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    except RuntimeError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
