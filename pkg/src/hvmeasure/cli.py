"""Batch front end: every pipeline as a reproducible run writing CSV.

Each run writes its CSV to ``--out`` and the fully resolved configuration to
``<out>.cfg``; feeding that file back through ``--config`` reproduces the
CSV byte for byte.  A one-line JSON summary goes to stdout.

Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from .distributions import (
    Family,
    HiddenVarParams,
    make_half_line,
    make_lognormal,
    moment_plus,
    symmetrize,
    variance_plus,
)
from .evolution import InstabilityError, MarginError, WaveGrid, advect, observables, write_snapshot_csv
from .oracle import QuadratureError, integrate
from .stern_gerlach import SGParams, compare_numeric, imprinted_packet, sg_outcome
from .von_neumann import (
    MeasurementConfig,
    SpectralState,
    conditional_density,
    mixture_moments,
    modified_born_density,
    quadrature_moments,
    reliability_bound,
    simulate_events,
)

COMMANDS = ("profile", "moments", "born", "simulate", "sg", "evolve-check", "limit", "bound")

# key -> (type, default); "floats" is a comma-separated list of reals
DEFAULTS = {
    "command": (str, None),
    "hbar": (float, 1.0),
    "sigma": (float, 0.2),
    "family": (str, "lognormal"),
    "l": (float, 3.0),
    "levels": ("floats", "1,2"),
    "weights": ("floats", "0.25,0.75"),
    "amplitudes": ("complexes", ""),
    "g": (float, 1.0),
    "t": (float, 1.0),
    "mu": (float, 1.0),
    "T": (float, 1.0),
    "m_a": (float, 1.0),
    "sigma0": (float, 1.0),
    "lambda": (float, 1.0),
    "n_events": (int, 100_000),
    "seed": (int, 0),
    "workers": (int, 1),
    "grid": (int, 4096),
    "points": (int, 401),
    "dt": (float, 0.01),
    "scheme": (str, "spectral"),
    "ladder": ("floats", "0.3,0.1,0.03,0.01"),
    "delta_l": (float, 1.0),
    "snapshot": (str, ""),
    "out": (str, ""),
}


FAMILY_ALIASES = {
    "lognormal": Family.LOGNORMAL,
    "dirac": Family.DIRAC,
    "diracathbar": Family.DIRAC,
}


class UsageError(ValueError):
    pass


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _canonical(key, raw):
    """Parse ``raw`` per the key's type and return its canonical string form."""
    kind = DEFAULTS[key][0]
    raw = str(raw).strip()
    try:
        if kind is float:
            return repr(float(raw))
        if kind is int:
            return str(int(raw))
        if kind == "floats":
            return ",".join(repr(float(v)) for v in raw.split(",")) if raw else ""
        if kind == "complexes":
            return ",".join(repr(complex(v.replace(" ", ""))) for v in raw.split(",")) if raw else ""
    except ValueError as exc:
        raise UsageError(f"bad value for {key}: {raw!r}") from exc
    if key == "family":
        try:
            return FAMILY_ALIASES[raw.lower()].value
        except KeyError:
            raise UsageError(f"unknown family {raw!r}") from None
    return raw


def read_config(path) -> dict:
    """Flat ``key = value`` text; ``#`` starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            if key not in DEFAULTS:
                raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
            out[key] = value
    return out


def write_config(cfg: dict, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# resolved hvmeasure run configuration\n")
        for key in sorted(cfg):
            fh.write(f"{key} = {cfg[key]}\n")


def resolve(flags: dict, file_values: dict) -> dict:
    """Flags override config-file values, which override defaults."""
    cfg = {}
    for key, (_, default) in DEFAULTS.items():
        if key in flags and flags[key] is not None:
            raw = flags[key]
        elif key in file_values:
            raw = file_values[key]
        else:
            raw = default
        cfg[key] = "" if raw is None else _canonical(key, raw)
    if cfg["command"] not in COMMANDS:
        raise UsageError(f"--command must be one of {', '.join(COMMANDS)}")
    return cfg


class _Params:
    """Typed view of a resolved config."""

    def __init__(self, cfg):
        self._cfg = cfg

    def __getitem__(self, key):
        kind = DEFAULTS[key][0]
        raw = self._cfg[key]
        if kind is float:
            return float(raw)
        if kind is int:
            return int(raw)
        if kind == "floats":
            return [float(v) for v in raw.split(",")] if raw else []
        if kind == "complexes":
            return [complex(v) for v in raw.split(",")] if raw else []
        return raw


def _half_line(p):
    return make_half_line(Family(p["family"]), p["hbar"], p["sigma"])


def _state(p):
    levels = p["levels"]
    amps = p["amplitudes"]
    if amps:
        return SpectralState(tuple(levels), tuple(amps))
    return SpectralState.from_weights(levels, p["weights"])


def _rel(a, b):
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0 else abs(a - b) / scale


def cmd_profile(p):
    plus = _half_line(p)
    l = p["l"]
    if plus.is_degenerate:
        raise UsageError("degenerate: point mass at l′ = l")
    if l == 0:
        raise UsageError("l must be non-zero")
    if p["points"] < 2:
        raise UsageError("points must be >= 2")
    dens = conditional_density(l, plus, p["hbar"])
    lo, hi = (abs(l) / p["hbar"] * plus.ppf([1e-6, 1 - 1e-6])).tolist()
    mag = np.geomspace(lo, hi, p["points"])
    lp = mag if l > 0 else -mag[::-1]
    rho = dens.pdf(lp)
    rows = [("l_prime", "density")] + list(zip(lp, rho))
    mass = float(np.trapezoid(rho, lp))
    return rows, {"trapezoid_mass": mass, "argmax_l_prime": float(lp[np.argmax(rho)])}


def cmd_moments(p):
    plus = _half_line(p)
    state = _state(p)
    stats = mixture_moments(state, plus, p["hbar"])
    m1q, m2q, varq_ = quadrature_moments(modified_born_density(state, plus, p["hbar"]))
    disc = max(_rel(stats.m1, m1q), _rel(stats.m2, m2q), _rel(stats.var, varq_))
    header = ("mq", "varq", "m1", "m2", "var", "m1_quad", "m2_quad", "var_quad", "rel_discrepancy")
    row = (stats.mq, stats.varq, stats.m1, stats.m2, stats.var, m1q, m2q, varq_, disc)
    return [header, row], {"rel_discrepancy": disc}


def cmd_born(p):
    plus = _half_line(p)
    state = _state(p)
    dens = modified_born_density(state, plus, p["hbar"])
    rows = []
    for sign, (lo, hi, _) in dens.log_windows().items():
        z = sign * np.exp(np.linspace(lo, hi, p["points"]))
        rows.extend(zip(z.tolist(), dens.pdf(z).tolist(), [0.0] * z.size))
    for loc, w in dens.atoms:
        rows.append((loc, 0.0, w))
    rows.sort(key=lambda r: (r[0], r[2]))
    total_atoms = float(sum(w for _, w in dens.atoms))
    return [("l_prime", "density", "point_mass")] + rows, {"point_mass_total": total_atoms}


def cmd_simulate(p):
    plus = _half_line(p)
    state = _state(p)
    config = MeasurementConfig(p["g"], p["t"], p["hbar"], p["n_events"], p["seed"], p["workers"])
    events = simulate_events(state, config, symmetrize(plus))
    return events, {"n_events": len(events), "mean_outcome": float(np.mean(events.outcome))}


def cmd_sg(p):
    sg = SGParams(p["mu"], p["T"], p["m_a"])
    lam = p["lambda"]
    packet = imprinted_packet(sg, p["l"], p["sigma0"], lam, p["hbar"])
    res = compare_numeric(packet, p["t"], n=p["grid"], scheme=p["scheme"])
    disp_num = res["center_numeric"] - packet.center
    disp_exact = res["center_analytic"] - packet.center
    out_num = float(sg_outcome(disp_num, sg.g_M, p["t"]))
    out_exact = float(sg_outcome(disp_exact, sg.g_M, p["t"]))
    header = ("l", "lambda", "delta", "center_analytic", "center_numeric", "center_error",
              "var_analytic", "var_numeric", "var_error", "l2_density_error", "norm_drift",
              "outcome_analytic", "outcome_numeric")
    row = (p["l"], lam, sg.mu * p["l"] * sg.T, res["center_analytic"], res["center_numeric"],
           res["center_error"], res["var_analytic"], res["var_numeric"], res["var_error"],
           res["l2_density_error"], res["norm_drift"], out_exact, out_num)
    if p["snapshot"]:
        with open(p["snapshot"], "w", encoding="utf-8", newline="") as fh:
            write_snapshot_csv(res["grid"], fh)
    return [header, row], {"l2_density_error": res["l2_density_error"],
                           "outcome_numeric": out_num}


def cmd_evolve_check(p):
    """Pointer transport at speed ``g l'`` with ``l' = |lambda| l / hbar``."""
    l_prime = abs(p["lambda"]) * p["l"] / p["hbar"]
    speed = p["g"] * l_prime
    t, dt, s0 = p["t"], p["dt"], p["sigma0"]
    if dt <= 0 or t < 0:
        raise UsageError("need dt > 0 and t >= 0")
    steps = max(1, math.ceil(t / dt - 1e-9))
    shift = speed * t
    reach = 14.0 * s0
    lo, hi = min(0.0, shift) - reach, max(0.0, shift) + reach
    grid0 = WaveGrid.gaussian(lo, hi, p["grid"], 0.0, s0)
    grid = advect(grid0, speed, t / steps, steps)
    exact = WaveGrid.gaussian(lo, hi, p["grid"], shift, s0)
    linf = float(np.max(np.abs(grid.values - exact.values)))
    norm, mean, _ = observables(grid)
    if p["snapshot"]:
        with open(p["snapshot"], "w", encoding="utf-8", newline="") as fh:
            write_snapshot_csv(grid, fh)
    header = ("l_prime", "speed", "shift_exact", "center_numeric", "linf_error",
              "norm_drift", "points_per_sigma0")
    row = (l_prime, speed, shift, mean, linf, abs(norm - observables(grid0)[0]), s0 / grid.dz)
    return [header, row], {"linf_error": linf}


def cmd_limit(p):
    hbar = p["hbar"]
    ladder = p["ladder"]
    if not ladder or any(s <= 0 for s in ladder):
        raise UsageError("ladder must hold positive sigmas")
    rows = [("sigma", "m1_plus", "abs_m1_minus_hbar", "var_plus", "m1_quad", "var_quad")]
    for s in ladder:
        plus = make_lognormal(HiddenVarParams(hbar, s))
        m1 = moment_plus(plus, 1)
        window = plus.log_window()
        q1 = integrate(lambda x: x * plus.pdf(x), 0, math.inf, tol=0, rtol=1e-12, log_window=window).value
        qv = integrate(lambda x: (x - q1) ** 2 * plus.pdf(x), 0, math.inf, tol=0, rtol=1e-12,
                       log_window=window).value
        rows.append((s, m1, hbar * math.expm1(0.5 * s * s), variance_plus(plus), q1, qv))
    return rows, {"rows": len(rows) - 1}


def cmd_bound(p):
    l_star = reliability_bound(p["sigma"], p["delta_l"])
    return [("sigma", "delta_l", "l_star"), (p["sigma"], p["delta_l"], l_star)], {"l_star": l_star}


HANDLERS = {
    "profile": cmd_profile,
    "moments": cmd_moments,
    "born": cmd_born,
    "simulate": cmd_simulate,
    "sg": cmd_sg,
    "evolve-check": cmd_evolve_check,
    "limit": cmd_limit,
    "bound": cmd_bound,
}


def run(cfg: dict):
    """Execute a resolved config; returns ``(csv_text, summary)``."""
    p = _Params(cfg)
    result, summary = HANDLERS[cfg["command"]](p)
    buf = io.StringIO()
    if hasattr(result, "write_csv"):
        result.write_csv(buf)
    else:
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(result[0])
        for row in result[1:]:
            w.writerow([_fmt(v) for v in row])
    return buf.getvalue(), summary


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="hvmeasure",
        description="Hidden-variable measurement simulations with CSV output.",
    )
    ap.add_argument("--config", help="flat key = value file; flags override it")
    for key in DEFAULTS:
        kind, default = DEFAULTS[key]
        ap.add_argument(f"--{key.replace('_', '-')}", dest=key, default=None,
                        help=f"default: {default!r}" if default not in (None, "") else None)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    flags = {k: v for k, v in vars(args).items() if k != "config"}
    try:
        file_values = read_config(args.config) if args.config else {}
        cfg = resolve(flags, file_values)
        if not cfg["out"]:
            cfg["out"] = f"hvmeasure-{cfg['command']}.csv"
        text, summary = run(cfg)
    except (QuadratureError, InstabilityError, MarginError) as exc:
        print(f"hvmeasure: numerical failure: {exc}", file=sys.stderr)
        return 3
    except (UsageError, ValueError, OverflowError) as exc:
        print(f"hvmeasure: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"hvmeasure: {exc}", file=sys.stderr)
        return 2
    out = cfg["out"]
    if out == "-":
        sys.stdout.write(text)
        print(json.dumps(summary, sort_keys=True), file=sys.stderr)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        write_config(cfg, out + ".cfg")
        print(json.dumps({"out": out, **summary}, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
