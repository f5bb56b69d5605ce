"""Command-line front end.

Subcommands: compute (closed form), oracle (numerical reference),
compare (both plus error summary), islands (geometry dump) and fitcheck
(kernel-fit table). Configuration is a single JSON file in engineering
units; everything is converted to SI at parse time.

Exit codes: 0 success, 2 configuration error, 3 numerical degeneracy.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time

import numpy as np

from . import engine, oracle, units
from .coeffs import ConfigurationError
from .islands import DegenerateCentroidError, island_geometry
from .link import FreqProfile, Link, Span, ZERO_PROFILE
from .spectrum import Channel, Spectrum
from .specialfn import (DegenerateKernelError, SingularityError,
                        kernel_fit)

THREADS_ENV = "GNCF_THREADS"


class ConfigError(Exception):
    """Invalid configuration; message carries a JSON-pointer-ish path."""


def _get(d, key, default, defaulted, path):
    if key in d:
        return d[key]
    defaulted.append(f"{path}/{key} = {default!r}")
    return default


def _require(d, key, path):
    if key not in d:
        raise ConfigError(f"{path}/{key}: missing required field")
    return d[key]


def _positive(value, path):
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{path}: not a number")
    if not v > 0.0:
        raise ConfigError(f"{path}: must be positive, got {value}")
    return v


def _profile(raw, path, convert):
    """Scalar or [[THz, value], ...] pairs into a converted FreqProfile."""
    if isinstance(raw, (int, float)):
        return FreqProfile.constant(convert(float(raw)))
    if isinstance(raw, list):
        try:
            pairs = [(units.thz_to_hz(float(fq)), convert(float(v)))
                     for fq, v in raw]
        except (TypeError, ValueError):
            raise ConfigError(f"{path}: expected [[freq_thz, value], ...]")
        return FreqProfile.from_pairs(pairs)
    raise ConfigError(f"{path}: expected number or pair list")


def parse_config(path: str):
    """Load and validate a run configuration.

    Returns (spectrum, link, quadrature, defaulted-field notes,
    warning strings).
    """
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}")

    defaulted: list[str] = []
    warnings: list[str] = []

    spec_raw = _require(raw, "spectrum", "")
    if "channels" in spec_raw:
        chans = []
        for i, ch in enumerate(spec_raw["channels"]):
            p = f"/spectrum/channels/{i}"
            chans.append(Channel(
                center=units.thz_to_hz(_positive(
                    _require(ch, "center_thz", p), f"{p}/center_thz")),
                width=units.ghz_to_hz(_positive(
                    _require(ch, "width_ghz", p), f"{p}/width_ghz")),
                psd=_positive(_require(ch, "psd_w_per_hz", p),
                              f"{p}/psd_w_per_hz")))
        comb = Spectrum(tuple(chans))
    else:
        p = "/spectrum"
        n = int(_require(spec_raw, "n_channels", p))
        if n < 1:
            raise ConfigError(f"{p}/n_channels: must be >= 1")
        center = units.thz_to_hz(_positive(
            _require(spec_raw, "center_thz", p), f"{p}/center_thz"))
        spacing = units.ghz_to_hz(_positive(
            _require(spec_raw, "spacing_ghz", p), f"{p}/spacing_ghz"))
        width = units.ghz_to_hz(_positive(
            _require(spec_raw, "width_ghz", p), f"{p}/width_ghz"))
        psd = _positive(_require(spec_raw, "psd_w_per_hz", p),
                        f"{p}/psd_w_per_hz")
        from .spectrum import uniform_comb
        comb = uniform_comb(n, center, spacing, width, psd)

    link_raw = _require(raw, "link", "")
    spans_raw = _require(link_raw, "spans", "/link")
    if not spans_raw:
        raise ConfigError("/link/spans: at least one span required")
    spans = []
    comb_center = (comb.channels[0].f_start
                   + comb.channels[-1].f_end) / 2.0
    for i, sp in enumerate(spans_raw):
        p = f"/link/spans/{i}"
        length = units.km_to_m(_positive(
            _require(sp, "length_km", p), f"{p}/length_km"))
        gamma = units.per_w_km_to_per_w_m(_positive(
            _require(sp, "gamma_per_w_km", p), f"{p}/gamma_per_w_km"))
        a0_raw = _require(sp, "alpha0_db_km", p)
        alpha0 = _profile(a0_raw, f"{p}/alpha0_db_km",
                          units.db_per_km_to_np_per_m)
        peak = max(v for _, v in alpha0.points)
        if peak > units.db_per_km_to_np_per_m(2.0):
            warnings.append(
                f"{p}/alpha0_db_km: above 2 dB/km, check units")
        alpha1 = _profile(_get(sp, "alpha1_db_km", 0.0, defaulted, p),
                          f"{p}/alpha1_db_km",
                          units.db_per_km_to_np_per_m)
        sigma = _profile(_get(sp, "sigma_per_km", 0.05, defaulted, p),
                         f"{p}/sigma_per_km", units.per_km_to_per_m)
        beta2 = units.ps2_per_km_to_s2_per_m(float(
            _require(sp, "beta2_ps2_km", p)))
        beta3 = units.ps3_per_km_to_s3_per_m(float(
            _get(sp, "beta3_ps3_km", 0.0, defaulted, p)))
        fc_thz = _get(sp, "fc_thz", float(comb_center) / 1e12, defaulted, p)
        beta_dcu = units.ps2_to_s2(float(
            _get(sp, "beta_dcu_ps2", 0.0, defaulted, p)))
        edfa = _get(sp, "edfa", {}, defaulted, p)
        gain_raw = _get(edfa, "gain_db", "transparent", defaulted,
                        f"{p}/edfa")
        if gain_raw == "transparent":
            gain = None
        else:
            gain = _profile(gain_raw, f"{p}/edfa/gain_db",
                            lambda db: 10.0 ** (db / 10.0))
        phase = _profile(_get(edfa, "phase_rad", 0.0, defaulted,
                              f"{p}/edfa"),
                         f"{p}/edfa/phase_rad", float)
        spans.append(Span(length=length, gamma=gamma, alpha0=alpha0,
                          alpha1=alpha1, sigma=sigma, beta2=beta2,
                          beta3=beta3, fc=units.thz_to_hz(float(fc_thz)),
                          beta_dcu=beta_dcu, gain=gain, phase=phase))
    link = Link(tuple(spans))

    q_raw = raw.get("quadrature", {})
    quad = oracle.QuadratureSpec(
        rel_tol=float(_get(q_raw, "rel_tol", 1e-5, defaulted,
                           "/quadrature")),
        max_cells=int(_get(q_raw, "max_cells", 200_000, defaulted,
                           "/quadrature")),
        z_steps=int(_get(q_raw, "z_steps", 96, defaulted, "/quadrature")),
        gl_order=int(_get(q_raw, "gl_order", 12, defaulted,
                          "/quadrature")))
    return comb, link, quad, defaulted, warnings


def _eval_points(comb: Spectrum, grid: int | None):
    if grid is None:
        return [ch.center for ch in comb.channels]
    lo = comb.channels[0].f_start
    hi = comb.channels[-1].f_end
    return list(np.linspace(lo, hi, grid))


def _header_lines(defaulted, warnings, timestamp: bool):
    lines = []
    if timestamp:
        lines.append(f"generated {time.strftime('%Y-%m-%dT%H:%M:%S')}")
    for d in defaulted:
        lines.append(f"default: {d}")
    for w in warnings:
        lines.append(f"warning: {w}")
    return lines


def _to_dbm_per_hz(x: float) -> float:
    if x <= 0.0:
        return float("nan")
    return 10.0 * np.log10(x / 1e-3)


def _write_rows(path, header_lines, fieldnames, rows, fmt: str):
    if fmt == "json":
        doc = {"header": header_lines, "rows": rows}
        text = json.dumps(doc, indent=2) + "\n"
    else:
        buf = io.StringIO()
        for line in header_lines:
            buf.write(f"# {line}\r\n")
        w = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\r\n")
        w.writeheader()
        for row in rows:
            w.writerow(row)
        text = buf.getvalue()
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _cmd_compute(args, comb, link, quad, header):
    rows = []
    trace = engine.Trace() if args.trace else None
    for f in _eval_points(comb, args.grid):
        rep = engine.gnli_at(comb, link, f,
                             incoherent_only=args.incoherent_only,
                             threads=args.threads,
                             grid=args.fallback_grid, trace=trace)
        rows.append({
            "f_thz": f / 1e12,
            "g_nli_w_per_hz": rep.g_nli_total,
            "g_nli_dbm_per_hz": _to_dbm_per_hz(rep.g_nli_total),
            "incoherent_w_per_hz": rep.g_nli_incoherent,
            "coherent_w_per_hz": rep.g_nli_coherent,
            "triplets": rep.triplet_count_nonzero,
            "negative_total": rep.negative_total_flag,
        })
    if trace is not None:
        for line in trace.lines():
            print(f"trace: {line}", file=sys.stderr)
    _write_rows(args.output, header, list(rows[0].keys()), rows,
                args.format)
    return 0


def _cmd_oracle(args, comb, link, quad, header):
    rows = []
    for f in _eval_points(comb, args.grid):
        val, err = oracle.gnli_numeric(comb, link, f, quad)
        rows.append({
            "f_thz": f / 1e12,
            "g_nli_w_per_hz": val,
            "g_nli_dbm_per_hz": _to_dbm_per_hz(val),
            "error_bound_w_per_hz": err,
        })
    _write_rows(args.output, header, list(rows[0].keys()), rows,
                args.format)
    return 0


def _cmd_compare(args, comb, link, quad, header):
    rows = []
    worst = None
    for f in _eval_points(comb, args.grid):
        rep = engine.gnli_at(comb, link, f,
                             incoherent_only=args.incoherent_only,
                             threads=args.threads,
                             grid=args.fallback_grid)
        val, err = oracle.gnli_numeric(comb, link, f, quad)
        db_err = (10.0 * np.log10(rep.g_nli_total / val)
                  if rep.g_nli_total > 0.0 and val > 0.0 else float("nan"))
        rows.append({
            "f_thz": f / 1e12,
            "closed_w_per_hz": rep.g_nli_total,
            "oracle_w_per_hz": val,
            "db_error": db_err,
            "coherent_fraction": rep.g_nli_coherent / rep.g_nli_total
            if rep.g_nli_total else float("nan"),
        })
        if worst is None or abs(db_err) > abs(worst[1]):
            worst = (f, db_err)
    if worst is not None and np.isfinite(worst[1]):
        f_w, db_w = worst
        m, n, k, val = _worst_triplet(comb, link, f_w)
        header = header + [
            f"worst channel: {f_w / 1e12} THz, {db_w:+.4f} dB",
            f"largest closed-form triplet there: m={m} n={n} k={k} "
            f"contribution={val:.6e} W/Hz"]
    _write_rows(args.output, header, list(rows[0].keys()), rows,
                args.format)
    return 0


def _worst_triplet(comb, link, f):
    best = (0, 0, 0, 0.0)
    cache: dict = {}
    for im, ch_m in enumerate(comb.channels):
        for jn, ch_n in enumerate(comb.channels):
            for kk, ch_k in enumerate(comb.channels):
                isl = island_geometry(ch_m, ch_n, ch_k, f)
                if isl.empty:
                    continue
                g3 = ch_m.psd * ch_n.psd * ch_k.psd
                inc, coh = engine._triplet_value(
                    link, cache, isl, f, False,
                    engine.DEFAULT_FALLBACK_GRID, None)
                v = engine.GN_PREFACTOR * g3 * (inc + coh)
                if abs(v) > abs(best[3]):
                    best = (im, jn, kk, v)
    return best


def _cmd_islands(args, comb, link, quad, header):
    rows = []
    for f in _eval_points(comb, args.grid):
        for im, ch_m in enumerate(comb.channels):
            for jn, ch_n in enumerate(comb.channels):
                for kk, ch_k in enumerate(comb.channels):
                    isl = island_geometry(ch_m, ch_n, ch_k, f)
                    if isl.empty:
                        continue
                    rows.append({
                        "f_thz": f / 1e12,
                        "m": im, "n": jn, "k": kk,
                        "area_hz2": isl.area,
                        "f1_star_thz": isl.f1_star / 1e12,
                        "f2_star_thz": isl.f2_star / 1e12,
                        "l1_hz": isl.L1,
                        "l2_hz": isl.L2,
                    })
    if not rows:
        rows = [{"f_thz": float("nan"), "m": -1, "n": -1, "k": -1,
                 "area_hz2": 0.0, "f1_star_thz": float("nan"),
                 "f2_star_thz": float("nan"), "l1_hz": 0.0, "l2_hz": 0.0}]
    _write_rows(args.output, header, list(rows[0].keys()), rows,
                args.format)
    return 0


def _cmd_fitcheck(args, header):
    xs = np.linspace(0.0, 100.0, args.grid or 1001)
    exact = 1.0 / (1.0 + xs ** 2)
    fit = kernel_fit(xs)
    rows = [{"x": float(x), "exact": float(e), "fit": float(fv),
             "error": float(fv - e)}
            for x, e, fv in zip(xs, exact, fit)]
    header = header + [
        f"fit(0) = {kernel_fit(np.array([0.0]))[0]:.6f}",
        f"max abs error on [0, 100] = {np.max(np.abs(fit - exact)):.6f}"]
    _write_rows(args.output, header, ["x", "exact", "fit", "error"], rows,
                args.format)
    return 0


def build_parser():
    ap = argparse.ArgumentParser(
        prog="gncf",
        description="Closed-form nonlinear-interference estimation with a "
                    "brute-force numerical cross-check.")
    ap.add_argument("command",
                    choices=["compute", "oracle", "compare", "islands",
                             "fitcheck"])
    ap.add_argument("config", nargs="?",
                    help="JSON configuration (not needed for fitcheck)")
    ap.add_argument("--output", "-o", default="-",
                    help="output path, '-' for stdout")
    ap.add_argument("--format", choices=["csv", "json"], default="csv")
    ap.add_argument("--grid", type=int, default=None,
                    help="evaluate on an N-point frequency grid instead "
                         "of channel centers (fitcheck: table length)")
    ap.add_argument("--threads", type=int,
                    default=int(os.environ.get(THREADS_ENV, "1")),
                    help=f"worker count (default ${THREADS_ENV} or 1)")
    ap.add_argument("--fallback-grid", type=int,
                    default=engine.DEFAULT_FALLBACK_GRID,
                    help="quadrature order for degenerate kernel cells")
    ap.add_argument("--incoherent-only", action="store_true",
                    help="suppress the cross-span interference terms")
    ap.add_argument("--trace", action="store_true",
                    help="print per-stage call counts and timings")
    ap.add_argument("--no-timestamp", action="store_true",
                    help="omit the timestamp header for byte-stable output")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "fitcheck":
            header = _header_lines([], [], not args.no_timestamp)
            return _cmd_fitcheck(args, header)
        if not args.config:
            print("error: config file required", file=sys.stderr)
            return 2
        comb, link, quad, defaulted, warnings = parse_config(args.config)
        for w in warnings:
            print(f"warning: {w}", file=sys.stderr)
        header = _header_lines(defaulted, warnings, not args.no_timestamp)
        if args.command == "compute":
            return _cmd_compute(args, comb, link, quad, header)
        if args.command == "oracle":
            return _cmd_oracle(args, comb, link, quad, header)
        if args.command == "compare":
            return _cmd_compare(args, comb, link, quad, header)
        return _cmd_islands(args, comb, link, quad, header)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ConfigurationError, DegenerateCentroidError,
            DegenerateKernelError, SingularityError) as exc:
        print(f"numerical degeneracy: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
