"""Config-driven experiment runner.

Subcommands:
  federated  -- run the multi-round federated protocol and write trace.csv
                plus summary.json into the output directory
  baseline   -- centralized PCA / KPCA / AKPCA on the unsplit data, writing
                components.csv plus summary.json
  synth      -- emit a synthetic Gaussian dataset as CSV

Flag precedence is flags > config file (--config, JSON with the same field
names in snake_case) > built-in defaults. Standard output carries a single
machine-readable JSON document; diagnostics go to standard error and are
controlled by the VFED_LOG environment variable (error | info | debug).

Every emitted file is byte-reproducible from (spec, seed, input files). For
that reason the elapsed_seconds column in trace.csv is a deterministic
placeholder (always 0); measured per-round wall time is reported on standard
error at info level instead.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .dataio import load_csv, load_pgm, partition_features, standardize_columns, synth_mixture_gaussian, synth_single_gaussian, write_csv
from .federation import FederationConfig, make_clients, run_decentralized, run_server_client
from .kernels import KernelSpec, center_kernel, kernel_eigs, kernel_matrix, kpca_transform, resolve_gamma
from .linalg import gram_matrix, top_k_eigen_oracle
from .metrics import RunTrace
from .topology import complete_graph, ring_graph, star_graph

log = logging.getLogger("vfedpca.cli")

TOPOLOGIES = ("server", "complete", "ring", "star")
SYNTH_KINDS = ("single", "mixture")
BASELINE_KINDS = ("pca", "kpca", "akpca")


class SpecError(ValueError):
    """Invalid experiment spec; carries the offending field name."""

    def __init__(self, field: str, message: str):
        super().__init__(message)
        self.field = field


@dataclass(frozen=True)
class ExperimentSpec:
    data: tuple[str, ...] | None = None
    synth: str | None = None
    n: int | None = None
    m: int | None = None
    standardize: bool = False
    p: int = 2
    topology: str = "server"
    hub: int = 0
    rounds: int = 10
    local_iters: int = 10
    tol: float = 1e-9
    merge: str = "plain"
    warm_start: bool = False
    mode: str = "pca"
    kernel: str = "rbf"
    gamma: float | None = None
    c: float = 0.0
    center_kernel: bool = False
    update_local_data: bool = True
    seed: int = 0
    out: str = "out"
    kind: str = "pca"
    k: int = 1

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["data"] = list(self.data) if self.data is not None else None
        return d


_SPEC_FIELDS = {f.name for f in dataclasses.fields(ExperimentSpec)}


def _resolve_spec(args: argparse.Namespace) -> ExperimentSpec:
    """Merge defaults, config-file values, and explicit flags (in that order)."""
    values: dict = {}
    explicit: set[str] = set()
    if getattr(args, "config", None):
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise SpecError("config", f"cannot read config file: {exc}") from exc
        if not isinstance(file_cfg, dict):
            raise SpecError("config", "config file must hold a JSON object")
        for key, value in file_cfg.items():
            if key not in _SPEC_FIELDS:
                raise SpecError(key, "unknown config field")
            values[key] = value
            explicit.add(key)
    for name in _SPEC_FIELDS:
        if hasattr(args, name) and getattr(args, name) is not None:
            values[name] = getattr(args, name)
            explicit.add(name)
    if "data" in values and values["data"] is not None:
        if isinstance(values["data"], str):
            values["data"] = (values["data"],)
        else:
            values["data"] = tuple(values["data"])
    try:
        spec = ExperimentSpec(**values)
    except (TypeError, ValueError) as exc:
        raise SpecError("spec", str(exc)) from exc
    _validate_spec(spec, explicit)
    return spec


def _validate_spec(spec: ExperimentSpec, explicit: set[str]) -> None:
    sources = [s for s in ("data", "synth") if getattr(spec, s) is not None]
    if len(sources) != 1:
        raise SpecError("data", "exactly one data source required (--data or --synth)")
    if spec.synth is not None:
        if spec.synth not in SYNTH_KINDS:
            raise SpecError("synth", f"must be one of {SYNTH_KINDS}")
        if spec.n is None or spec.n < 1:
            raise SpecError("n", "positive sample count required with --synth")
        if spec.m is None or spec.m < 1:
            raise SpecError("m", "positive feature count required with --synth")
    for field in ("p", "rounds", "local_iters", "k"):
        if getattr(spec, field) < 1:
            raise SpecError(field, "must be >= 1")
    if spec.tol < 0:
        raise SpecError("tol", "must be >= 0")
    if spec.seed < 0:
        raise SpecError("seed", "must be >= 0")
    if spec.topology not in TOPOLOGIES:
        raise SpecError("topology", f"must be one of {TOPOLOGIES}")
    if spec.topology != "star" and "hub" in explicit:
        raise SpecError("hub", "only valid with --topology star")
    if spec.topology == "star":
        if spec.p < 2:
            raise SpecError("topology", "star topology needs p >= 2")
        if not 0 <= spec.hub < spec.p:
            raise SpecError("hub", "must be in [0, p)")
    if spec.merge not in ("plain", "scaled"):
        raise SpecError("merge", "must be plain or scaled")
    if spec.mode not in ("pca", "akpca"):
        raise SpecError("mode", "must be pca or akpca")
    if spec.kernel not in ("linear", "rbf", "sigmoid"):
        raise SpecError("kernel", "must be linear, rbf, or sigmoid")
    if spec.gamma is not None and spec.gamma <= 0:
        raise SpecError("gamma", "must be positive")
    if spec.kind not in BASELINE_KINDS:
        raise SpecError("kind", "must be one of pca, kpca, akpca")


def _load_matrix(spec: ExperimentSpec) -> np.ndarray:
    if spec.synth is not None:
        gen = synth_single_gaussian if spec.synth == "single" else synth_mixture_gaussian
        X = gen(spec.n, spec.m, spec.seed)
        return standardize_columns(X) if spec.standardize else X
    paths = spec.data
    assert paths is not None
    if all(str(p).lower().endswith(".pgm") for p in paths):
        rows = []
        width = None
        for p in paths:
            img = load_pgm(p)
            if width is None:
                width = img.size
            elif img.size != width:
                raise SpecError("data", f"PGM images disagree in pixel count: {p}")
            rows.append(img.ravel())
        X = np.stack(rows)
        return standardize_columns(X) if spec.standardize else X
    if len(paths) != 1:
        raise SpecError("data", "expected a single CSV path or a list of .pgm paths")
    return load_csv(paths[0], has_header=_sniff_header(paths[0]), standardize=spec.standardize)


def _sniff_header(path) -> bool:
    # First line is a header iff any of its cells fails to parse as a float.
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline().rstrip("\n")
    if not first:
        return False
    for cell in first.split(","):
        try:
            float(cell)
        except ValueError:
            return True
    return False


def _kernel_spec(spec: ExperimentSpec, X: np.ndarray) -> KernelSpec:
    return resolve_gamma(KernelSpec(kind=spec.kernel, gamma=spec.gamma, c=spec.c), X)


def _float_str(x: float) -> str:
    return repr(float(x))


def _write_trace_csv(path: Path, trace: RunTrace, p: int) -> None:
    lines = ["round,distance_error,scalars_sent,elapsed_seconds," + ",".join(f"weight_{i}" for i in range(p))]
    for rec in trace.records:
        cells = [str(rec.round), _float_str(rec.distance_error), str(rec.scalars_sent), "0"]
        cells.extend(_float_str(w) for w in rec.weights)
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_json(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _summary_doc(spec_echo: dict, body: dict) -> dict:
    return {"artifact": {"name": "vfedpca", "version": __version__}, "spec": spec_echo, **body}


def run_experiment(spec: ExperimentSpec) -> dict:
    """Execute the federated run described by ``spec``; writes trace.csv and
    summary.json into the output directory and returns the summary document."""
    X = _load_matrix(spec)
    if spec.p > X.shape[1]:
        raise SpecError("p", "more clients than features")
    _, blocks = partition_features(X, spec.p)
    kspec = _kernel_spec(spec, X) if spec.mode == "akpca" else None
    config = FederationConfig(
        rounds=spec.rounds,
        local_iters=spec.local_iters,
        tol=spec.tol,
        merge_mode=spec.merge,
        warm_start=spec.warm_start,
        mode=spec.mode,
        kernel=kspec,
        center_kernel=spec.center_kernel,
        update_local_data=spec.update_local_data,
        seed=spec.seed,
    )
    clients = make_clients(blocks, mode=spec.mode, kernel=kspec, center=spec.center_kernel)
    if spec.topology == "server":
        trace = run_server_client(clients, config)
    else:
        if spec.topology == "complete":
            graph = complete_graph(spec.p)
        elif spec.topology == "ring":
            graph = ring_graph(spec.p)
        else:
            graph = star_graph(spec.p, spec.hub)
        trace = run_decentralized(clients, graph, config)
    for rec in trace.records:
        log.info("round %d: distance_error=%.6e elapsed=%.6fs", rec.round, rec.distance_error, rec.elapsed)
    out_dir = Path(spec.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    spec_echo = spec.to_dict()
    spec_echo["gamma"] = kspec.gamma if kspec is not None else spec.gamma
    for key in ("kind", "k"):
        spec_echo.pop(key, None)  # baseline-only fields
    summary = _summary_doc(
        spec_echo,
        {
            "final": {
                "eigenvalue": trace.final.value,
                "distance_error": trace.records[-1].distance_error,
            },
            "totals": {
                "rounds": len(trace.records),
                "scalars_sent": sum(r.scalars_sent for r in trace.records),
            },
        },
    )
    _write_trace_csv(out_dir / "trace.csv", trace, spec.p)
    _write_json(out_dir / "summary.json", summary)
    return summary


def run_baseline(spec: ExperimentSpec) -> dict:
    """Centralized baseline on the unsplit data; writes components.csv and
    summary.json and returns the summary document."""
    X = _load_matrix(spec)
    n = X.shape[0]
    if spec.k > n:
        raise SpecError("k", "rank exceeded")
    if spec.kind == "pca":
        S = gram_matrix(X, 1.0 / X.shape[1])
        pairs = top_k_eigen_oracle(S, spec.k)
        components = np.stack([p.vector for p in pairs])
        eigenvalues = [p.value for p in pairs]
    elif spec.kind == "akpca":
        kspec = _kernel_spec(spec, X)
        K = kernel_matrix(kspec, X)
        if spec.center_kernel:
            K = center_kernel(K)
        pairs = kernel_eigs(K, spec.k, indefinite=kspec.kind == "sigmoid")
        V = np.stack([p.vector for p in pairs], axis=1)
        components = V.T @ X
        eigenvalues = [p.value for p in pairs]
    else:  # kpca
        kspec = _kernel_spec(spec, X)
        components = kpca_transform(X, kspec, spec.k)
        K = kernel_matrix(kspec, X)
        pairs = kernel_eigs(K, spec.k, indefinite=kspec.kind == "sigmoid")
        eigenvalues = [p.value for p in pairs]
    out_dir = Path(spec.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    spec_echo = spec.to_dict()
    if spec.kind in ("akpca", "kpca"):
        spec_echo["gamma"] = _kernel_spec(spec, X).gamma
    summary = _summary_doc(spec_echo, {"eigenvalues": eigenvalues, "components_shape": list(components.shape)})
    write_csv(out_dir / "components.csv", components)
    _write_json(out_dir / "summary.json", summary)
    return summary


def run_synth(spec: ExperimentSpec) -> dict:
    gen = synth_single_gaussian if spec.synth == "single" else synth_mixture_gaussian
    X = gen(spec.n, spec.m, spec.seed)
    out_dir = Path(spec.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "dataset.csv"
    write_csv(path, X)
    return {"file": str(path), "n": spec.n, "m": spec.m, "seed": spec.seed, "kind": spec.synth}


def _add_common_flags(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", type=str, default=None, help="JSON config file mirroring the spec fields")
    sp.add_argument("--data", type=str, nargs="+", default=None, help="CSV path, or one or more PGM paths")
    sp.add_argument("--synth", choices=SYNTH_KINDS, default=None)
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--m", type=int, default=None)
    sp.add_argument("--standardize", action=argparse.BooleanOptionalAction, default=None)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--out", type=str, default=None, help="output directory")


def _add_kernel_flags(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--kernel", choices=("linear", "rbf", "sigmoid"), default=None)
    sp.add_argument("--gamma", type=float, default=None)
    sp.add_argument("--c", type=float, default=None)
    sp.add_argument("--center-kernel", dest="center_kernel", action=argparse.BooleanOptionalAction, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vfedpca", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    fed = sub.add_parser("federated", help="run a federated experiment")
    _add_common_flags(fed)
    fed.add_argument("--p", type=int, default=None, help="number of clients")
    fed.add_argument("--topology", choices=TOPOLOGIES, default=None)
    fed.add_argument("--hub", type=int, default=None, help="star topology hub client")
    fed.add_argument("--rounds", type=int, default=None)
    fed.add_argument("--local-iters", dest="local_iters", type=int, default=None)
    fed.add_argument("--tol", type=float, default=None)
    fed.add_argument("--merge", choices=("plain", "scaled"), default=None)
    fed.add_argument("--warm-start", dest="warm_start", action=argparse.BooleanOptionalAction, default=None)
    fed.add_argument("--mode", choices=("pca", "akpca"), default=None)
    _add_kernel_flags(fed)
    fed.add_argument("--update-local-data", dest="update_local_data", action=argparse.BooleanOptionalAction, default=None)

    base = sub.add_parser("baseline", help="centralized PCA/KPCA/AKPCA baseline")
    _add_common_flags(base)
    base.add_argument("--kind", choices=BASELINE_KINDS, default=None)
    base.add_argument("--k", type=int, default=None, help="number of components")
    _add_kernel_flags(base)

    syn = sub.add_parser("synth", help="emit a synthetic dataset to CSV")
    _add_common_flags(syn)
    return parser


def _configure_logging() -> None:
    level_name = os.environ.get("VFED_LOG", "error").lower()
    level = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}.get(level_name, logging.ERROR)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    root = logging.getLogger("vfedpca")
    root.handlers[:] = [handler]
    root.setLevel(level)


def main(argv=None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        spec = _resolve_spec(args)
    except SpecError as exc:
        print(f"invalid spec: field '{exc.field}': {exc}", file=sys.stderr)
        return 2
    try:
        if args.command == "federated":
            doc = run_experiment(spec)
        elif args.command == "baseline":
            doc = run_baseline(spec)
        else:
            if spec.synth is None:
                print("invalid spec: field 'synth': synth kind required", file=sys.stderr)
                return 2
            doc = run_synth(spec)
    except SpecError as exc:
        print(f"invalid spec: field '{exc.field}': {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(json.dumps(doc, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
