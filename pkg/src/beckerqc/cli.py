"""Command-line front end: bounds, construct, verify, extend, plot.

Exit codes: 0 pass, 1 check failure, 2 usage/domain error, 3 numerical
stage failure.  With identical configuration the numeric artifacts
(JSON/CSV) are reproduced byte for byte.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import constants, construction, extension
from .analytic import DiskGrid, catalog, truncation_certificate
from .errors import ConfigError, DomainError

EXIT_OK = 0
EXIT_CHECK_FAILURE = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

_CONFIG_FIELDS = {
    "family": str, "c": (int, float, list), "q": (int, float),
    "order": int, "n": int, "n_pre": int, "n_post": int,
    "t_span": (int, float), "fit_tol": (int, float), "subh_n": int,
    "outdir": str, "seed": int, "threads": int,
}


@dataclass(frozen=True)
class RunConfig:
    """One construction run: function family, certified q and numeric knobs."""

    family: str = "quadratic"
    c: complex = 0.2
    q: float = 0.07
    order: int = 64
    n: int = 512
    n_pre: int = 8
    n_post: int = 24
    t_span: float = 5.0
    fit_tol: float = 1e-8
    subh_n: int = 200
    outdir: str = ""
    seed: int = 0
    threads: int = 1

    def validate(self) -> "RunConfig":
        if self.t_span <= 0:
            raise ConfigError(f"t_span must be positive, got {self.t_span}")
        if not (0.0 < self.q < 1.0 / 3.0):
            raise ConfigError(f"q must lie in (0, 1/3), got {self.q}")
        if self.n < 8 or (self.n & (self.n - 1)) != 0:
            raise ConfigError(f"n must be a power of two >= 8, got {self.n}")
        if min(self.order, self.n_pre, self.n_post, self.subh_n) < 1:
            raise ConfigError("order, n_pre, n_post and subh_n must be positive")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        return self

    def to_json_dict(self) -> dict:
        d = asdict(self)
        d["c"] = [self.c.real, self.c.imag] if isinstance(self.c, complex) \
            else [float(self.c), 0.0]
        return d

    @classmethod
    def from_json_dict(cls, data: dict) -> "RunConfig":
        unknown = set(data) - set(_CONFIG_FIELDS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs = dict(data)
        if "c" in kwargs:
            c = kwargs["c"]
            if isinstance(c, list):
                if len(c) != 2:
                    raise ConfigError("c as a list must be [re, im]")
                kwargs["c"] = complex(c[0], c[1])
            else:
                kwargs["c"] = complex(float(c), 0.0)
        cfg = cls(**kwargs)
        return cfg.validate()

    def function(self):
        return catalog(self.family, self.c, self.order)


def _load_config(args) -> RunConfig:
    data: dict = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            data = json.load(fh)
    for key in ("family", "q", "n", "n_post", "t_span", "outdir", "seed", "threads"):
        val = getattr(args, key.replace("-", "_"), None)
        if val is not None:
            data[key] = val
    if getattr(args, "c", None) is not None:
        data["c"] = args.c
    if not data.get("outdir"):
        data["outdir"] = os.environ.get("BECKERQC_OUTDIR", "beckerqc-run")
    return RunConfig.from_json_dict(data)


def _json_dumps(payload) -> str:
    return json.dumps(payload, sort_keys=True, indent=2, default=_json_default)


def _json_default(obj):
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _write(path: Path, text: str, manifest: dict) -> None:
    path.write_text(text)
    manifest[path.name] = hashlib.sha256(text.encode()).hexdigest()


# -- bounds -------------------------------------------------------------------


def cmd_bounds(args) -> int:
    try:
        table = constants.explicit_constants(args.q)
    except DomainError as exc:
        print(f"error: {exc} (domain is the open interval (0, 1/3))", file=sys.stderr)
        return EXIT_USAGE
    data = table.as_dict()
    print(_json_dumps(data))
    if not args.json_only:
        width = max(len(k) for k in data)
        print()
        for key in sorted(data):
            print(f"{key:<{width}}  {data[key]:+.12e}")
    return EXIT_OK


# -- construct ----------------------------------------------------------------


def _kprofile_csv(report) -> str:
    lines = ["regime,t,k_hat,capacity,diameter,residual_abs,re_p_min,re_p_max,"
             "curvature_max,curvature_bound,theta_mod"]
    for t, k in zip(report.pre_times, report.pre_k_hat):
        lines.append(f"aw,{t:.17g},{k:.17g},,,,,,,,")
    for r in report.post_records:
        lines.append(
            f"corrected,{r['t']:.17g},{r['k_hat']:.17g},{r['capacity']:.17g},"
            f"{r['diameter']:.17g},{r['residual_abs']:.17g},{r['re_p_min']:.17g},"
            f"{r['re_p_max']:.17g},{r['curvature_max']:.17g},"
            f"{r['curvature_bound']:.17g},{r['theta_mod']:.17g}")
    return "\n".join(lines) + "\n"


def _dilatation_csv(f, q: float, seed: int) -> str:
    plane = extension.ahlfors_weill_extension(f, q)
    grid = DiskGrid(kind="annulus", r_inner=0.01, r_outer=0.999,
                    n_radial=16, n_angular=256)
    sweep = extension.dilatation_sweep(plane, grid.points)
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(grid.points.size, size=min(2048, grid.points.size),
                             replace=False))
    lines = ["x,y,abs_mu,jacobian"]
    for i in idx:
        z = sweep["points"][i]
        lines.append(f"{z.real:.17g},{z.imag:.17g},"
                     f"{abs(sweep['mu'][i]):.17g},{sweep['jacobian'][i]:.17g}")
    return "\n".join(lines) + "\n"


def _curves_svg(state, report, path: Path) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "beckerqc"
    fig, ax = plt.subplots(figsize=(6, 6))
    times = report.post_times
    cmap = plt.get_cmap("viridis")
    for i, t in enumerate(times):
        pts = construction.curve_at(state, t, 256).points(256)
        pts = np.append(pts, pts[0])
        ax.plot(pts.real, pts.imag, lw=0.8, color=cmap(i / max(1, len(times) - 1)))
    seam = construction.uncorrected_curve(state, state.t1, 256).points(256)
    seam = np.append(seam, seam[0])
    ax.plot(seam.real, seam.imag, "k--", lw=1.0, label="seam curve")
    ax.plot([0], [0], "r+", ms=8)
    ax.set_aspect("equal")
    ax.set_title(f"swept curve family ({state.f.label}, q={state.q})")
    ax.legend(loc="upper right", fontsize=8)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def cmd_construct(args) -> int:
    try:
        cfg = _load_config(args)
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        f = cfg.function()
        truncation_certificate(cfg.family, cfg.c, radius=0.999, order=cfg.order)
        report = construction.run_construction(
            f, cfg.q, n=cfg.n, n_pre=cfg.n_pre, n_post=cfg.n_post,
            t_span=cfg.t_span, fit_tol=cfg.fit_tol, subh_n=cfg.subh_n)
        state = construction.build_state(f, cfg.q)
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:
        stage = getattr(exc, "stage", type(exc).__name__)
        print(f"numerical failure [{stage}]: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    outdir = Path(cfg.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    manifest: dict = {}
    payload = {
        "config": cfg.to_json_dict(),
        "version": _version(),
        "formula_freeze_hash": constants.freeze_hash(),
        "report": report.to_dict(),
    }
    _write(outdir / "report.json", _json_dumps(payload) + "\n", manifest)
    _write(outdir / "kprofile.csv", _kprofile_csv(report), manifest)
    _write(outdir / "dilatation.csv", _dilatation_csv(f, cfg.q, cfg.seed), manifest)
    svg_path = outdir / "curves.svg"
    _curves_svg(state, report, svg_path)
    manifest[svg_path.name] = hashlib.sha256(svg_path.read_bytes()).hexdigest()
    (outdir / "manifest.json").write_text(_json_dumps(manifest) + "\n")

    failures = [k for k, v in report.checks.items() if not v.get("ok")]
    print(f"k0 = {report.k0:.6f} (3 q_hat = {3 * report.q_hat:.6f}, "
          f"k1 = {report.k1_measured:.6f})")
    print(f"artifacts in {outdir}/: report.json kprofile.csv dilatation.csv curves.svg")
    if failures or not report.k0 < 1.0:
        print(f"FAILED checks: {failures}", file=sys.stderr)
        return EXIT_CHECK_FAILURE
    print("all checks passed")
    return EXIT_OK


# -- verify -------------------------------------------------------------------

_GOLDEN_Q = 0.1
# frozen from an independent extended-precision evaluation of the ledger
_GOLDEN_TABLE = {
    "q": 0.1,
    "k": 0.3,
    "k_prime": 0.550458715596330275,
    "K": 1.85714285714285714,
    "K_prime": 3.44897959183673469,
    "t_star": 1.20397280432593599,
    "t0": 0.601986402162967996,
    "M": 2.24525285022179402,
    "M1": 26.5472037743970837,
    "M2": 35.3811907729531146,
    "M5": 6.06646611940411348,
    "M6": 41.2013771204124684,
    "alpha": 0.000630209960840868491,
    "subharmonic_a": 4945.80456802107029,
    "rho1": 0.0419688897049883633,
    "rho2": 0.193774225170145035,
    "kappa_star": 183.304085964284043,
    "eps0": 0.00545541576304439496,
}


def cmd_verify(args) -> int:
    try:
        cfg = _load_config(args)
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    results: list[tuple[str, bool, str]] = []

    table = constants.explicit_constants(_GOLDEN_Q).as_dict()
    if args.corrupt_constant:
        if args.corrupt_constant not in table:
            print(f"unknown constant {args.corrupt_constant!r}", file=sys.stderr)
            return EXIT_USAGE
        table[args.corrupt_constant] *= 1.0 + 1e-6
    worst = max(abs(table[k] - v) / max(abs(v), 1e-300)
                for k, v in _GOLDEN_TABLE.items())
    results.append(("constants golden table @ q=0.1", worst <= 1e-12,
                    f"max rel dev {worst:.2e}"))

    try:
        f = cfg.function()
        grid = DiskGrid(kind="disk", r_outer=0.999, n_radial=16, n_angular=64).points
        rep1 = extension.derivative_bounds_report(f, cfg.q, grid)
        results.append(("first-derivative sandwich", rep1.ok,
                        f"min slack {rep1.min_slack:.3e}"))
        rep2 = extension.second_derivative_bounds_report(f, cfg.q, grid)
        results.append(("second-derivative bounds", rep2.ok,
                        f"min slack {rep2.min_slack:.3e}"))

        report = construction.run_construction(
            f, cfg.q, n=min(cfg.n, 512), n_pre=4, n_post=max(8, cfg.n_post // 3),
            t_span=min(cfg.t_span, 3.0), fit_tol=cfg.fit_tol,
            subh_n=min(cfg.subh_n, 120))
        for name in ("annulus_distance", "kuhnau_derivative", "subharmonicity",
                     "tangent_disks", "henkin_floor", "curvature",
                     "front_distance", "becker_pre", "becker_post"):
            chk = report.checks.get(name)
            if chk is not None:
                results.append((name, bool(chk.get("ok")), ""))
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:
        stage = getattr(exc, "stage", type(exc).__name__)
        print(f"numerical failure [{stage}]: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    ok_all = True
    for name, ok, extra in results:
        print(f"[{'PASS' if ok else 'FAIL'}] {name}" + (f" ({extra})" if extra else ""))
        ok_all = ok_all and ok
    return EXIT_OK if ok_all else EXIT_CHECK_FAILURE


# -- extend -------------------------------------------------------------------


def cmd_extend(args) -> int:
    try:
        cfg = _load_config(args)
        if args.points:
            pts = [complex(tok) for tok in args.points.split(",")]
        elif args.points_file:
            raw = json.loads(Path(args.points_file).read_text())
            pts = [complex(p[0], p[1]) for p in raw]
        else:
            print("need --points or --points-file", file=sys.stderr)
            return EXIT_USAGE
    except (ConfigError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        f = cfg.function()
        state = construction.build_state(f, cfg.q)
        ext = construction.FinalExtension(state, n=cfg.n, fit_tol=cfg.fit_tol)
        values = [ext(z) for z in pts]
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    out = [{"z": [z.real, z.imag], "value": [v.real, v.imag]}
           for z, v in zip(pts, values)]
    print(_json_dumps(out))
    return EXIT_OK


# -- plot ---------------------------------------------------------------------


def cmd_plot(args) -> int:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    report_path = Path(args.artifacts) / "report.json"
    if not report_path.exists():
        print(f"no report.json under {args.artifacts}", file=sys.stderr)
        return EXIT_USAGE
    payload = json.loads(report_path.read_text())
    rep = payload["report"]
    plt.rcParams["svg.hashsalt"] = "beckerqc"
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(rep["pre_times"], rep["pre_k_hat"], "o-", label="uncorrected regime")
    ax.plot([r["t"] for r in rep["post_records"]],
            [r["k_hat"] for r in rep["post_records"]], "s-", label="corrected regime")
    ax.axhline(rep["k0"], color="r", ls="--", lw=0.8, label=f"k0 = {rep['k0']:.4f}")
    ax.set_xlabel("t")
    ax.set_ylabel("k_hat(t)")
    ax.legend()
    out = Path(args.artifacts) / "kprofile.svg"
    fig.savefig(out, format="svg", metadata={"Date": None})
    plt.close(fig)
    print(f"wrote {out}")
    return EXIT_OK


# -- entry point ---------------------------------------------------------------


def _version() -> str:
    try:
        from importlib.metadata import version
        return version("beckerqc")
    except Exception:
        return "0.1.0"


def _add_config_flags(sub) -> None:
    sub.add_argument("--config", help="JSON config file")
    sub.add_argument("--family", help="function family override")
    sub.add_argument("--c", type=float, help="family parameter override")
    sub.add_argument("--q", type=float, help="declared q override")
    sub.add_argument("--n", type=int, help="boundary grid size override")
    sub.add_argument("--n-post", type=int, dest="n_post")
    sub.add_argument("--t-span", type=float, dest="t_span")
    sub.add_argument("--outdir", help="artifact directory")
    sub.add_argument("--seed", type=int)
    sub.add_argument("--threads", type=int,
                     help="worker threads; 1 guarantees bit-identical reruns")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="beckerqc",
        description="Loewner chains, quasiconformal Becker extensions and "
                    "numerical exterior conformal maps")
    subs = parser.add_subparsers(dest="command", required=True)

    p_bounds = subs.add_parser("bounds", help="print the constants table for a given q")
    p_bounds.add_argument("--q", type=float, required=True)
    p_bounds.add_argument("--json-only", action="store_true")

    p_con = subs.add_parser("construct", help="run the construction and emit artifacts")
    _add_config_flags(p_con)

    p_ver = subs.add_parser("verify", help="run the property suite")
    _add_config_flags(p_ver)
    p_ver.add_argument("--corrupt-constant", help="test hook: perturb one ledger "
                       "constant to demonstrate the golden-number check")

    p_ext = subs.add_parser("extend", help="evaluate the final extension on points")
    _add_config_flags(p_ext)
    p_ext.add_argument("--points", help="comma-separated complex points, e.g. '1.5+0.5j,2'")
    p_ext.add_argument("--points-file", help="JSON file with [[re, im], ...]")

    p_plot = subs.add_parser("plot", help="render the k-profile of a finished run")
    p_plot.add_argument("--artifacts", required=True, help="artifact directory")

    args = parser.parse_args(argv)
    handlers = {"bounds": cmd_bounds, "construct": cmd_construct,
                "verify": cmd_verify, "extend": cmd_extend, "plot": cmd_plot}
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
