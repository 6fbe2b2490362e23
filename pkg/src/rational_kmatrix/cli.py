"""Command-line driver.

Exit codes: 0 all checks pass, 1 a check failed, 2 the input could not be
resolved or is not quasi-classical (nothing is written in that case).
"""

import argparse
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path


from .catalog import parse_algebra, resolve_k, resolve_r
from .classify import Check, classify_kmatrix, verification_checks
from .errors import (
    AddressError,
    InvalidSeedError,
    KMatrixError,
    NotFoundError,
    NotQuasiClassicalError,
    StageError,
)
from .formats import dump_json, load_json, read_matrix, render_text, report_document
from .kmatrix import classical_perturbative_solve, perturbative_solve
from .rmatrix import find_crossing

EXIT_OK, EXIT_FAIL, EXIT_UNRESOLVED = 0, 1, 2


@dataclass(frozen=True)
class RunConfig:
    algebra: str = ""
    k_family: str = ""
    r_matrix: str = ""
    spectral_samples: int = 50
    seed: int = 0
    tolerance: float = 1e-10
    order: int = 3
    output_dir: str = ""


_CONFIG_TYPES = {f.name: f.type for f in fields(RunConfig)}
_CASTS = {"int": int, "float": float, "str": str, int: int, float: float, str: str}


def parse_config(text):
    """key=value lines; '#' starts a comment."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or key not in _CONFIG_TYPES:
            raise AddressError(f"config line {lineno}: unknown entry {raw.strip()!r}")
        try:
            values[key] = _CASTS[_CONFIG_TYPES[key]](value.strip())
        except ValueError as exc:
            raise AddressError(f"config line {lineno}: {exc}") from exc
    return RunConfig(**values)


def _validate(cfg):
    if cfg.tolerance <= 0:
        raise AddressError("tolerance must be positive")
    if cfg.order < 1:
        raise AddressError("order must be at least 1")
    if cfg.spectral_samples < 1:
        raise AddressError("spectral_samples must be positive")
    return cfg


def build_config(args):
    cfg = parse_config(Path(args.config).read_text()) if args.config else RunConfig()
    overrides = {
        "tolerance": args.tol,
        "seed": args.seed,
        "spectral_samples": args.samples,
        "order": args.order,
        "output_dir": args.out,
        "k_family": getattr(args, "address", None),
    }
    cfg = replace(cfg, **{k: v for k, v in overrides.items() if v is not None})
    return _validate(cfg)


def _emit(doc, cfg, name, stream):
    text = render_text(doc)
    stream.write(text)
    if cfg.output_dir:
        out = Path(cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{name}.txt").write_text(text)
        (out / f"{name}.json").write_text(dump_json(doc))
    return EXIT_OK if all(c["pass"] for c in doc["checks"]) else EXIT_FAIL


def _require_family(cfg):
    if not cfg.k_family:
        raise AddressError("no K-family given (positional address or k_family in the config)")
    K = resolve_k(cfg.k_family)
    if cfg.algebra and parse_algebra(cfg.algebra) != K.d:
        raise AddressError(f"algebra {cfg.algebra} does not match the family {cfg.k_family}")
    if cfg.r_matrix:
        R = resolve_r(cfg.r_matrix)
        if R.dims != (K.d, K.d) or R.twisted != K.twisted:
            raise AddressError(f"R-matrix {cfg.r_matrix} does not fit the family {cfg.k_family}")
    return K


def cmd_verify(cfg, stream):
    K = _require_family(cfg)
    checks = verification_checks(K, cfg.tolerance, cfg.spectral_samples, cfg.seed)
    fields_ = {
        "family": K.family,
        "dimension": K.d,
        "boundary_dimension": K.d_B,
        "twisted": K.twisted,
        "quasi_classical": K.is_quasi_classical(),
        "samples": cfg.spectral_samples,
        "seed": cfg.seed,
    }
    return _emit(report_document("verify", cfg.k_family, fields_, checks), cfg, "verify", stream)


def cmd_classify(cfg, stream):
    K = _require_family(cfg)
    rep = classify_kmatrix(K, cfg.tolerance, cfg.spectral_samples, cfg.seed)
    a = rep.residual_algebra
    fields_ = {
        "family": K.family,
        "quasi_classical": rep.quasi_classical,
        "twist_class": rep.twist_class,
        "h_dim": a.dim,
        "h_tag": a.tag,
        "h_center_dim": a.center_dim,
        "h_derived_dims": list(a.derived_dims),
        "h_solvable_dim": a.solvable_dim,
        "h_reductive_dim": a.reductive_dim,
    }
    if rep.involution is not None:
        fields_["fixed_algebra_dim"] = rep.involution.plus_space.dim
        fields_["symmetric_pair"] = "pass" if rep.symmetric_pair.passed else "fail"
    if rep.structure is not None:
        fields_["structure_dims"] = rep.structure.dims
        fields_["structure_total_dim"] = rep.structure.total_dim
        fields_["centralizer_dim"] = rep.structure.centralizer_dim
    for i, note in enumerate(rep.notes):
        fields_[f"note{i + 1}"] = note
    return _emit(report_document("classify", cfg.k_family, fields_, rep.checks), cfg, "classify", stream)


def _seed_kappa(address):
    """Seed kappa and twist flag from a family address or 'kappa:file=PATH[:twisted]'."""
    if address.startswith("kappa:file="):
        rest = address[len("kappa:file=") :]
        twisted = rest.endswith(":twisted")
        path = Path(rest[: -len(":twisted")] if twisted else rest)
        try:
            return read_matrix(path.read_text()), twisted
        except (OSError, ValueError) as exc:
            raise AddressError(f"cannot read kappa file {path}: {exc}") from exc
    K = resolve_k(address)
    return K.kappa, K.twisted


def cmd_solve(cfg, stream, classical=False):
    if not cfg.k_family:
        raise AddressError("no seed given")
    kappa, twisted = _seed_kappa(cfg.k_family)
    solver = classical_perturbative_solve if classical else perturbative_solve
    sol = solver(kappa, cfg.order, twisted=twisted, seed=cfg.seed)
    checks = [Check(f"order {o.order} nullity vs predicted", abs(o.nullity - o.predicted_nullity), 0) for o in sol.orders]
    checks += [Check(f"order {o.order} consistency", o.consistency, 1e-8) for o in sol.orders]
    fields_ = {
        "system": "classical" if classical else "quantum",
        "twisted": twisted,
        "order": cfg.order,
        "nullspace_table": sol.table,
        "predicted_table": sol.predicted_table,
        "anomalies": sol.anomalies,
    }
    return _emit(report_document("solve", cfg.k_family, fields_, checks), cfg, "solve", stream)


def cmd_crossing(cfg, stream, target):
    n = parse_algebra(target.split(":")[1]) if ":" in target else parse_algebra(target)
    gamma = find_crossing(n)
    fields_ = {"algebra": f"sl({n})", "gamma": complex(gamma)}
    return _emit(report_document("crossing", f"yang-crossed:sl({n})", fields_, []), cfg, "crossing", stream)


def cmd_report(cfg, stream, path):
    try:
        doc = load_json(Path(path).read_text())
    except (OSError, ValueError) as exc:
        raise AddressError(f"cannot read stored report {path}: {exc}") from exc
    return _emit(doc, cfg, f"{doc['command']}-rerendered", stream)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value run configuration")
    common.add_argument("--tol", type=float, help="residual tolerance")
    common.add_argument("--seed", type=int, help="seed for spectral samples")
    common.add_argument("--samples", type=int, help="number of spectral samples")
    common.add_argument("--order", type=int, help="series truncation order")
    common.add_argument("--out", help="directory for report files")
    parser = argparse.ArgumentParser(prog="rational-kmatrix", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in [("verify", "run residual suites on a K-family"), ("classify", "classify a K-family")]:
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("address", nargs="?", help="K-family address")
    p = sub.add_parser("solve", parents=[common], help="order-by-order nullspace table")
    p.add_argument("address", nargs="?", help="K-family address or kappa:file=PATH[:twisted]")
    p.add_argument("--classical", action="store_true", help="solve the classical boundary equation")
    p = sub.add_parser("crossing", parents=[common], help="print the crossing parameter")
    p.add_argument("target", help="sl(n) or yang-crossed:sl(n):auto-gamma")
    p = sub.add_parser("report", parents=[common], help="re-render a stored JSON report")
    p.add_argument("path")
    return parser


def main(argv=None, stream=None):
    stream = stream or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        cfg = build_config(args)
        if args.command == "verify":
            return cmd_verify(cfg, stream)
        if args.command == "classify":
            return cmd_classify(cfg, stream)
        if args.command == "solve":
            return cmd_solve(cfg, stream, args.classical)
        if args.command == "crossing":
            return cmd_crossing(cfg, stream, args.target)
        return cmd_report(cfg, stream, args.path)
    except (AddressError, NotQuasiClassicalError, InvalidSeedError, NotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNRESOLVED
    except StageError as exc:
        if isinstance(exc.cause, NotQuasiClassicalError):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_UNRESOLVED
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except KMatrixError as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
