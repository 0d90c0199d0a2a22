"""Command-line front end.

Subcommands: spectrum, zeta, invariants, verify, scan, gallery.  Weights are
given either as a JSON file path or a gallery label like ``cosine(0.5,2)``.
Exit codes: 0 all checks passed, 1 some check failed, 2 configuration error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .circle_fourier import load_weight, normalize, save_weight, weight_to_dict
from .conformal import GALLERY_DOC, gallery
from .errors import ConfigError, SteklovError
from .harness import ExperimentConfig, run_scan, run_verify
from .steklov_spectral import asymptotic_residuals, steklov_spectrum
from .zeta_engine import psi_curve, zeta_a
from .zeta_invariants import estimate_residuals


def _resolve_weight(spec: str):
    if os.path.exists(spec) and spec.endswith(".json"):
        return load_weight(spec)
    return gallery(spec)


def _write_or_print(text: str, out: str | None):
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
        print(f"wrote {out}")
    else:
        sys.stdout.write(text)


def _cmd_spectrum(args) -> int:
    w = _resolve_weight(args.weight)
    sp = steklov_spectrum(w, args.M_big)
    diag = asymptotic_residuals(sp)
    if args.format == "json":
        payload = {
            "weight": args.weight,
            "M_big": args.M_big,
            "K_trust": sp.K_trust,
            "L": sp.L,
            "values": [float(v) for v in sp.trusted],
            "decay_slope": diag.decay_slope,
        }
        _write_or_print(json.dumps(payload, indent=1) + "\n", args.out)
    else:
        scale = 2.0 * np.pi / sp.L
        lines = ["n,lambda,reference,delta"]
        for n in range(sp.K_trust):
            ref = scale * sp.reference[n]
            lines.append(f"{n},{sp.values[n]:.17g},{ref:.17g},{sp.values[n] - ref:.17g}")
        _write_or_print("\n".join(lines) + "\n", args.out)
    return 0


def _parse_grid(text: str):
    if ":" in text:
        lo, hi, step = (float(x) for x in text.split(":"))
        n = int(round((hi - lo) / step)) + 1
        return [lo + i * step for i in range(n)]
    return [float(x) for x in text.split(",") if x.strip()]


def _cmd_zeta(args) -> int:
    w = _resolve_weight(args.weight)
    if args.x is not None:
        rows = [(x, zeta_a(w, x, args.M_big)) for x in _parse_grid(args.x)]
        if args.format == "json":
            _write_or_print(json.dumps({"zeta": [[x, v] for x, v in rows]}, indent=1) + "\n",
                            args.out)
        else:
            _write_or_print("x,zeta_a\n" + "\n".join(f"{x:.17g},{v:.17g}" for x, v in rows)
                            + "\n", args.out)
        return 0
    grid = _parse_grid(args.s_grid)
    curve = psi_curve(normalize(w), grid, args.M_big)
    if args.format == "json":
        _write_or_print(json.dumps(curve.to_dict(), indent=1) + "\n", args.out)
    else:
        lines = ["s,psi_phi,psi_pair,gap"]
        for s, p, q, g in zip(curve.s_grid, curve.psi, curve.psi_pairing,
                              curve.convergence_gap):
            lines.append(f"{s:.17g},{p:.17g},{q:.17g},{g:.17g}")
        _write_or_print("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_invariants(args) -> int:
    w = _resolve_weight(args.weight)
    reports = [estimate_residuals(w, k, args.budget).to_dict() for k in args.k]
    _write_or_print(json.dumps(reports, indent=1) + "\n", args.out)
    return 0


def _config_from_args(args) -> ExperimentConfig:
    if args.config:
        return ExperimentConfig.from_json(args.config)
    fields = {}
    for name in ("seed", "M", "M_big", "family", "sigma", "rho", "n_weights",
                 "budget", "out_dir"):
        val = getattr(args, name, None)
        if val is not None:
            fields[name] = val
    if getattr(args, "k", None):
        fields["k_list"] = tuple(args.k)
    return ExperimentConfig(**fields)


def _cmd_verify(args) -> int:
    cfg = _config_from_args(args)
    record = run_verify(cfg)
    print(f"verify: {len(record.checks)} checks, {record.n_fail} fail, "
          f"{record.n_warn} warn ({record.wall_clock:.1f}s)")
    for c in record.checks:
        if c.status != "pass":
            print(f"  [{c.status}] {c.weight_label} {c.name}: margin={c.margin:.3e} {c.detail}")
    print(f"reports: {', '.join(record.artifacts)}")
    return 0 if record.ok else 1


def _cmd_scan(args) -> int:
    cfg = _config_from_args(args)
    record = run_scan(cfg)
    print(f"scan: {cfg.n_weights} seeds, {record.n_fail} fail, {record.n_warn} warn "
          f"({record.wall_clock:.1f}s)")
    print(f"min Z_k: {record.extra.get('min_Z')}")
    print(f"min psi: {record.extra.get('min_psi')}")
    print(f"reports: {', '.join(record.artifacts)}")
    return 0 if record.ok else 1


def _cmd_gallery(args) -> int:
    if args.name is None:
        for label, doc in GALLERY_DOC.items():
            print(f"{label:26s} {doc}")
        return 0
    w = gallery(args.name)
    if args.out:
        save_weight(w, args.out)
        print(f"wrote {args.out}")
    else:
        print(json.dumps(weight_to_dict(w), indent=1))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="steklovzeta",
        description="Steklov spectra, zeta traces and zeta invariants of "
                    "weighted boundary operators on the circle.")
    sub = p.add_subparsers(dest="command", required=True)

    def add_common(sp, weight=True):
        if weight:
            sp.add_argument("--weight", required=True,
                            help="weight JSON file or gallery label")
        sp.add_argument("--M-big", dest="M_big", type=int, default=128)
        sp.add_argument("--out", default=None)
        sp.add_argument("--format", choices=("csv", "json"), default="csv")

    sp = sub.add_parser("spectrum", help="trusted eigenvalues and residuals")
    add_common(sp)
    sp.set_defaults(func=_cmd_spectrum)

    sp = sub.add_parser("zeta", help="psi curve, or zeta values with --x")
    add_common(sp)
    sp.add_argument("--s-grid", dest="s_grid", default="0:6:0.25",
                    help="lo:hi:step or comma list")
    sp.add_argument("--x", default=None,
                    help="evaluate zeta_a at these arguments instead of a psi curve")
    sp.set_defaults(func=_cmd_zeta)

    sp = sub.add_parser("invariants", help="zeta invariants with bound ratios")
    add_common(sp)
    sp.add_argument("--k", type=int, nargs="+", default=[1, 2])
    sp.add_argument("--budget", type=float, default=1e8)
    sp.set_defaults(func=_cmd_invariants)

    for name, help_text in (("verify", "run the invariant battery"),
                            ("scan", "scan random weights for negative invariants")):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", default=None, help="JSON config file")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--M", type=int, default=None)
        sp.add_argument("--M-big", dest="M_big", type=int, default=None)
        sp.add_argument("--family", default=None)
        sp.add_argument("--sigma", type=float, default=None)
        sp.add_argument("--rho", type=float, default=None)
        sp.add_argument("--n-weights", dest="n_weights", type=int, default=None)
        sp.add_argument("--k", type=int, nargs="+", default=None)
        sp.add_argument("--budget", type=float, default=None)
        sp.add_argument("--out", dest="out_dir", default=None)
        sp.set_defaults(func=_cmd_verify if name == "verify" else _cmd_scan)

    sp = sub.add_parser("gallery", help="list gallery weights or emit one as JSON")
    sp.add_argument("--name", default=None)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=_cmd_gallery)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SteklovError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
