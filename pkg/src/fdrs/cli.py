"""Command-line surface: solve, certify, counterexample, pdcompare, spectral.

Problems come from a sparse `label idx:val ...` dataset (turned into a
box-constrained dual kernel program) or from a seeded random generator.
Outputs are a trace CSV, a JSON report echoing the effective configuration,
and optional tab-separated plot-data series. A plain `key = value` config
file composes with flags, flags winning; the FDRS_OUT_DIR environment
variable sets the output directory unless --out-dir is given.

Exit codes: 0 success (and, for certify/counterexample/pdcompare, all checks
passing), 2 check failure, 1 usage or IO error.
"""

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import certificates
from .counterexamples import (
    arbitrarily_slow_instance,
    run_norm_history,
    sublinear_instance,
    truncation_deficit,
)
from .functions import BoxIndicator, Quadratic
from .operators import SplitProblem, apply_fdrs
from .primal_dual import equivalence_check, pd_init_from_fdrs, run_pd
from .solver import ConstantSchedule, SolveConfig, default_gamma, run
from .spectral import estimate_betas
from .subspace import NullSpace

PROBLEM_SEED = 7
SPECTRAL_SEED = 42


@dataclass
class SvmDataset:
    """Sparse samples as (1-based index, value) pairs with +-1 labels."""

    samples: list
    labels: np.ndarray
    dim: int

    def __len__(self):
        return len(self.samples)

    def dense(self):
        X = np.zeros((len(self.samples), self.dim))
        for i, row in enumerate(self.samples):
            for j, v in row:
                X[i, j - 1] = v
        return X


@dataclass
class QpSpec:
    """Box- and equality-constrained quadratic program data."""

    Q: np.ndarray
    c: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    A: np.ndarray
    b: np.ndarray


def load_svm_file(path):
    """Parse a `label idx:val idx:val ...` text file.

    Blank lines and `#` comments are skipped. Labels must be +-1 and indices
    strictly increasing within a line; malformed lines are reported with
    their line number.
    """
    samples, labels = [], []
    dim = 0
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            try:
                label = float(parts[0])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: bad label {parts[0]!r}")
            if label not in (-1.0, 1.0):
                raise ValueError(f"{path}:{lineno}: label must be +-1, got {parts[0]}")
            row = []
            last_idx = 0
            for tok in parts[1:]:
                try:
                    idx_s, val_s = tok.split(":")
                    idx, val = int(idx_s), float(val_s)
                except ValueError:
                    raise ValueError(f"{path}:{lineno}: bad feature token {tok!r}")
                if idx <= last_idx:
                    raise ValueError(
                        f"{path}:{lineno}: indices must be strictly increasing"
                    )
                last_idx = idx
                row.append((idx, val))
                dim = max(dim, idx)
            samples.append(row)
            labels.append(label)
    return SvmDataset(samples=samples, labels=np.array(labels), dim=dim)


def save_svm_file(path, dataset):
    """Write a dataset back in the same sparse text format."""
    with open(path, "w") as fh:
        for row, label in zip(dataset.samples, dataset.labels):
            toks = [f"{int(label):+d}"]
            toks += [f"{idx}:{val!r}" for idx, val in row]
            fh.write(" ".join(toks) + "\n")


def build_dual_svm_qp(dataset, kernel_scale=2.0**-3, box_upper=10.0,
                      linear_coef=-1.0):
    """Dual soft-margin kernel program from a labeled dataset.

    Q_ij = y_i y_j exp(-kernel_scale ||x_i - x_j||^2), the single equality
    row is the label vector with right-hand side 0, and the box is
    [0, box_upper]^n. The linear term defaults to the all -1 vector.
    """
    n = len(dataset)
    if n == 0:
        raise ValueError("dataset is empty")
    X = dataset.dense()
    sq = np.sum(X * X, axis=1)
    dist_sq = np.maximum(sq[:, None] + sq[None, :] - 2.0 * (X @ X.T), 0.0)
    y = dataset.labels
    Q = np.exp(-kernel_scale * dist_sq) * np.outer(y, y)
    Q = 0.5 * (Q + Q.T)
    return QpSpec(
        Q=Q,
        c=np.full(n, float(linear_coef)),
        lower=np.zeros(n),
        upper=np.full(n, float(box_upper)),
        A=y.reshape(1, n),
        b=np.zeros(1),
    )


def random_qp(dim, seed=PROBLEM_SEED, rank=None, box=(0.0, 1.0), ridge=0.5):
    """Seeded random box QP with a rank-`rank` homogeneous equality block."""
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((dim, dim))
    Q = M.T @ M / dim + ridge * np.eye(dim)
    c = rng.standard_normal(dim)
    rank = max(1, dim // 10) if rank is None else rank
    A = rng.standard_normal((rank, dim))
    return QpSpec(
        Q=Q,
        c=c,
        lower=np.full(dim, float(box[0])),
        upper=np.full(dim, float(box[1])),
        A=A,
        b=np.zeros(rank),
    )


def problem_from_qp(spec, spectral_tol=1e-10, seed=SPECTRAL_SEED):
    """Assemble the split problem (box f, quadratic g, null-space V).

    A nonzero right-hand side is not handled here; reduce it first with
    :func:`fdrs.subspace.affine_reduction`. Smoothness constants come from
    the spectral estimator so the composed constant, not the raw one,
    bounds the step size.
    """
    if np.any(spec.b != 0.0):
        raise ValueError("problem_from_qp expects b = 0; apply affine_reduction")
    f = BoxIndicator(spec.lower, spec.upper)
    g = Quadratic(spec.Q, spec.c)
    V = NullSpace(spec.A)
    beta, beta_V = estimate_betas(spec.Q, V, tol=spectral_tol, seed=seed)
    return SplitProblem(f, g, V, beta=beta, beta_V=beta_V)


def random_z0(dim, seed):
    return np.random.default_rng(seed + 1).standard_normal(dim)


# ----------------------------- configuration -------------------------------


class _Parser(argparse.ArgumentParser):
    """argparse exits with code 2 on usage errors; the contract wants 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(f"error: {message}")


def read_config_file(path):
    """Parse `key = value` lines; `#` starts a comment."""
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, _, val = line.partition("=")
            values[key.strip().replace("-", "_")] = val.strip()
    return values


def _merge_config(args, defaults):
    """defaults < config file < explicit flags; returns the effective dict."""
    effective = dict(defaults)
    if getattr(args, "config", None):
        file_values = read_config_file(args.config)
        unknown = set(file_values) - set(defaults)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        for key, val in file_values.items():
            default = defaults[key]
            if isinstance(default, bool):
                effective[key] = val.lower() in ("1", "true", "yes", "on")
            elif isinstance(default, int):
                effective[key] = int(val)
            elif isinstance(default, float):
                effective[key] = float(val)
            elif default is None:
                # untyped option: numbers parse as numbers, paths stay strings
                for cast in (int, float):
                    try:
                        effective[key] = cast(val)
                        break
                    except ValueError:
                        continue
                else:
                    effective[key] = val
            else:
                effective[key] = val
    for key in defaults:
        flag_val = getattr(args, key, None)
        if flag_val is not None:
            effective[key] = flag_val
    return effective


def _out_dir(effective):
    out = effective.get("out_dir") or os.environ.get("FDRS_OUT_DIR") or "."
    os.makedirs(out, exist_ok=True)
    return out


def _write_report(out_dir, name, payload):
    path = os.path.join(out_dir, name)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
    return path


def _write_plot_series(out_dir, name, ks, values):
    path = os.path.join(out_dir, name)
    with open(path, "w") as fh:
        for k, v in zip(ks, values):
            fh.write(f"{k}\t{v!r}\n")
    return path


def _build_problem(effective):
    if effective["svm_file"]:
        dataset = load_svm_file(effective["svm_file"])
        spec = build_dual_svm_qp(
            dataset,
            kernel_scale=effective["kernel_scale"],
            box_upper=effective["box_upper"],
            linear_coef=effective["linear_coef"],
        )
    elif effective["qp"] == "random":
        spec = random_qp(
            effective["dim"], seed=effective["seed"], rank=effective["rank"]
        )
    else:
        raise ValueError("provide --svm-file or --qp random")
    return spec, problem_from_qp(spec, seed=effective["spectral_seed"])


def _resolve_gamma(effective, problem):
    if effective["gamma"] is not None:
        return float(effective["gamma"])
    return default_gamma(problem, effective["gamma_mode"])


def _solve_trace(effective, problem):
    gamma = _resolve_gamma(effective, problem)
    cfg = SolveConfig(
        gamma=gamma,
        z0=random_z0(problem.dim, effective["seed"]),
        max_iter=effective["max_iter"],
        lambda_schedule=ConstantSchedule(effective["lam"]),
        epsilon=effective["epsilon"],
        fpr_tol=effective["fpr_tol"],
        record_every=effective["record_every"],
    )
    return run(problem, cfg), gamma


_PROBLEM_DEFAULTS = {
    "qp": "random",
    "svm_file": None,
    "dim": 20,
    "rank": None,
    "seed": PROBLEM_SEED,
    "spectral_seed": SPECTRAL_SEED,
    "kernel_scale": 2.0**-3,
    "box_upper": 10.0,
    "linear_coef": -1.0,
    "out_dir": None,
}

_SOLVE_DEFAULTS = {
    **_PROBLEM_DEFAULTS,
    "gamma": None,
    "gamma_mode": "conservative",
    "lam": 1.0,
    "epsilon": 0.1,
    "max_iter": 1000,
    "fpr_tol": 1e-10,
    "record_every": 1,
    "emit_plot_data": False,
    "save_vectors": False,
}


def _add_problem_flags(sp):
    sp.add_argument("--config", help="key = value config file; flags win")
    sp.add_argument("--qp", choices=["random"])
    sp.add_argument("--svm-file", dest="svm_file")
    sp.add_argument("--dim", type=int)
    sp.add_argument("--rank", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--spectral-seed", dest="spectral_seed", type=int)
    sp.add_argument("--kernel-scale", dest="kernel_scale", type=float)
    sp.add_argument("--box-upper", dest="box_upper", type=float)
    sp.add_argument("--linear-coef", dest="linear_coef", type=float)
    sp.add_argument("--out-dir", dest="out_dir")


def _add_solve_flags(sp):
    _add_problem_flags(sp)
    sp.add_argument("--gamma", type=float)
    sp.add_argument("--gamma-mode", dest="gamma_mode",
                    choices=["conservative", "aggressive"])
    sp.add_argument("--lambda", dest="lam", type=float)
    sp.add_argument("--epsilon", type=float)
    sp.add_argument("--max-iter", dest="max_iter", type=int)
    sp.add_argument("--fpr-tol", dest="fpr_tol", type=float)
    sp.add_argument("--record-every", dest="record_every", type=int)
    sp.add_argument("--emit-plot-data", dest="emit_plot_data",
                    action="store_const", const=True)
    sp.add_argument("--save-vectors", dest="save_vectors",
                    action="store_const", const=True)


def cmd_solve(args):
    effective = _merge_config(args, _SOLVE_DEFAULTS)
    _, problem = _build_problem(effective)
    trace, gamma = _solve_trace(effective, problem)
    out_dir = _out_dir(effective)
    trace.to_csv(os.path.join(out_dir, "trace.csv"))
    if effective["save_vectors"]:
        trace.save_vectors(os.path.join(out_dir, "trace_vectors.npz"))
    final = trace.final
    payload = {
        "command": "solve",
        "effective_config": {**effective, "gamma": gamma},
        "iterations": final.k,
        "stopped_early": trace.stopped_early,
        "final_fpr_sq": final.fpr_sq,
        "final_objective_split": final.objective_split,
        "beta": problem.beta,
        "beta_V": problem.beta_V,
    }
    _write_report(out_dir, "report.json", payload)
    if effective["emit_plot_data"]:
        ks = trace.ks
        _write_plot_series(out_dir, "plot_fpr.tsv", ks,
                           [r.fpr_sq for r in trace.records])
        _write_plot_series(out_dir, "plot_objective.tsv", ks,
                           [r.objective_split for r in trace.records])
    print(f"solve: {final.k} iterations, final fpr_sq = {final.fpr_sq:.3e}")
    return 0


_CERTIFY_DEFAULTS = {
    **_SOLVE_DEFAULTS,
    "ref_fpr_tol": 1e-13,
    "ref_max_iter": 10**6,
    "lipschitz": None,
    "contraction_c": None,
}


def cmd_certify(args):
    effective = _merge_config(args, _CERTIFY_DEFAULTS)
    _, problem = _build_problem(effective)
    trace, gamma = _solve_trace(effective, problem)
    ref = certificates.ReferenceSolution.compute(
        problem,
        gamma,
        z0=trace.records[0].z,
        fpr_tol=effective["ref_fpr_tol"],
        max_iter=effective["ref_max_iter"],
    )
    report = certificates.run_all(
        trace, ref, L=effective["lipschitz"], c=effective["contraction_c"]
    )
    out_dir = _out_dir(effective)
    trace.to_csv(os.path.join(out_dir, "trace.csv"))
    if effective["save_vectors"]:
        trace.save_vectors(os.path.join(out_dir, "trace_vectors.npz"))
    report.to_json(os.path.join(out_dir, "report.json"))
    if effective["emit_plot_data"]:
        ks = trace.ks
        opt = ref.f_star + ref.g_star
        _write_plot_series(out_dir, "plot_fpr.tsv", ks,
                           [r.fpr_sq for r in trace.records])
        _write_plot_series(out_dir, "plot_objective.tsv", ks,
                           [r.objective_split - opt for r in trace.records])
    for e in report.entries:
        status = "PASS" if e.passed else "FAIL"
        print(f"{status}  {e.anchor}: worst violation {e.worst_violation:.3e} "
              f"at k={e.at_iteration}")
    return 0 if report.all_pass else 2


_COUNTEREXAMPLE_DEFAULTS = {
    "alpha": 0.75,
    "a": 1.0,
    "blocks": 100000,
    "k": 300,
    "decay_power": 0.25,
    "eta": None,
    "out_dir": None,
}


def cmd_counterexample(args):
    effective = _merge_config(args, _COUNTEREXAMPLE_DEFAULTS)
    out_dir = _out_dir(effective)
    k_max = effective["k"]
    if args.family == "sublinear":
        alpha, a, N = effective["alpha"], effective["a"], effective["blocks"]
        instance, z0 = sublinear_instance(alpha, a, N)
        history = run_norm_history(instance, z0, k_max)
        ks = np.arange(1, k_max + 1)
        deficit = truncation_deficit(alpha, N, ks)
        lb_xh = (1.0 - deficit) / (ks + 1.0) ** (2.0 * alpha)
        lb_xf = lb_xh * (a + 0.5) ** 2 / (a + 1.0) ** 2
        ok_xh = bool(np.all(history["norm_xh"][1:] ** 2 >= lb_xh))
        ok_xf = bool(np.all(history["norm_xf"][1:] ** 2 >= lb_xf))
        ok_dec = bool(np.all(np.diff(history["norm_z"]) < 0.0))
        payload = {
            "command": "counterexample sublinear",
            "effective_config": effective,
            "xh_lower_bound_holds": ok_xh,
            "xf_lower_bound_holds": ok_xf,
            "z_norm_strictly_decreasing": ok_dec,
            "max_truncation_deficit": float(deficit[-1]),
            "contraction_ratio_at_k": float(
                history["norm_xh"][k_max] / history["norm_xh"][k_max - 1]
            ),
        }
        ok = ok_xh and ok_xf and ok_dec
    else:
        a, power, eta = effective["a"], effective["decay_power"], effective["eta"]
        F = lambda t: 1.0 / (t + 2.0) ** power  # noqa: E731
        instance, z0 = arbitrarily_slow_instance(F, a, k_max, eta=eta)
        history = run_norm_history(instance, z0, k_max)
        ks = np.arange(1, k_max + 1)
        floor = np.exp(-1.0) * np.array([F(float(t)) for t in ks])
        ok = bool(np.all(history["norm_z"][1:] >= floor))
        payload = {
            "command": "counterexample slow",
            "effective_config": effective,
            "blocks": instance.N,
            "decay_floor_holds": ok,
            "min_margin": float(np.min(history["norm_z"][1:] - floor)),
        }
    _write_report(out_dir, "report.json", payload)
    print(json.dumps(payload, indent=2))
    return 0 if ok else 2


_PDCOMPARE_DEFAULTS = {
    **_PROBLEM_DEFAULTS,
    "dim": 5,
    "gamma": None,
    "gamma_mode": "conservative",
    "iters": 1000,
    "tol": 1e-9,
}


def cmd_pdcompare(args):
    effective = _merge_config(args, _PDCOMPARE_DEFAULTS)
    _, problem = _build_problem(effective)
    gamma = _resolve_gamma(effective, problem)
    z0 = random_z0(problem.dim, effective["seed"])
    cfg = SolveConfig(
        gamma=gamma, z0=z0, max_iter=effective["iters"], fpr_tol=0.0
    )
    trace = run(problem, cfg)
    y0, xf0 = pd_init_from_fdrs(problem, z0, gamma)
    states = run_pd(problem, gamma, effective["iters"], y0, xf0)
    report = equivalence_check(trace, states, gamma)
    out_dir = _out_dir(effective)
    payload = {
        "command": "pdcompare",
        "effective_config": {**effective, "gamma": gamma},
        **report,
    }
    _write_report(out_dir, "report.json", payload)
    print(json.dumps(payload, indent=2))
    scale = 1.0 + max(float(np.linalg.norm(s.x_f)) for s in states)
    ok = (report["max_primal_deviation"] <= effective["tol"] * scale
          and report["max_dual_deviation"] <= effective["tol"] * scale)
    return 0 if ok else 2


_SPECTRAL_DEFAULTS = {**_PROBLEM_DEFAULTS, "tol": 1e-10}


def cmd_spectral(args):
    effective = _merge_config(args, _SPECTRAL_DEFAULTS)
    spec, _ = _build_problem(effective)
    V = NullSpace(spec.A)
    beta, beta_V = estimate_betas(
        spec.Q, V, tol=effective["tol"], seed=effective["spectral_seed"]
    )
    payload = {
        "command": "spectral",
        "effective_config": effective,
        "inv_beta": 1.0 / beta,
        "inv_beta_V": 1.0 / beta_V if not math.isinf(beta_V) else 0.0,
        # None keeps the report strict JSON when the composition has no curvature
        "ratio": beta_V / beta if not math.isinf(beta_V) else None,
    }
    out_dir = _out_dir(effective)
    _write_report(out_dir, "report.json", payload)
    print(f"1/beta   = {payload['inv_beta']!r}")
    print(f"1/beta_V = {payload['inv_beta_V']!r}")
    print(f"ratio beta_V/beta = {payload['ratio']!r}")
    return 0


def build_parser():
    parser = _Parser(prog="fdrs", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="run the splitting iteration")
    _add_solve_flags(sp)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("certify", help="run and verify every rate certificate")
    _add_solve_flags(sp)
    sp.add_argument("--ref-fpr-tol", dest="ref_fpr_tol", type=float)
    sp.add_argument("--ref-max-iter", dest="ref_max_iter", type=int)
    sp.add_argument("--lipschitz", type=float)
    sp.add_argument("--contraction-c", dest="contraction_c", type=float)
    sp.set_defaults(func=cmd_certify)

    sp = sub.add_parser("counterexample", help="build and check a slow instance")
    sp.add_argument("family", choices=["slow", "sublinear"])
    sp.add_argument("--config", help="key = value config file; flags win")
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--a", type=float)
    sp.add_argument("--blocks", type=int)
    sp.add_argument("--k", type=int)
    sp.add_argument("--decay-power", dest="decay_power", type=float)
    sp.add_argument("--eta", type=float)
    sp.add_argument("--out-dir", dest="out_dir")
    sp.set_defaults(func=cmd_counterexample)

    sp = sub.add_parser("pdcompare", help="compare against the primal-dual form")
    _add_problem_flags(sp)
    sp.add_argument("--gamma", type=float)
    sp.add_argument("--gamma-mode", dest="gamma_mode",
                    choices=["conservative", "aggressive"])
    sp.add_argument("--iters", type=int)
    sp.add_argument("--tol", type=float)
    sp.set_defaults(func=cmd_pdcompare)

    sp = sub.add_parser("spectral", help="estimate the smoothness constants")
    _add_problem_flags(sp)
    sp.add_argument("--tol", type=float)
    sp.set_defaults(func=cmd_spectral)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:
        if isinstance(exc.code, str):
            print(exc.code, file=sys.stderr)
            return 1
        return 0 if exc.code in (None, 0) else 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
