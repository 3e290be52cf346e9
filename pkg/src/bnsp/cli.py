"""Command-line entry point.

Each subcommand resolves its settings from built-in defaults, then an
optional ``--config`` file (JSON or YAML; physical parameters at top level,
subcommand settings under a key named after the subcommand), then explicit
flags.  Outputs go to ``--out``; every run writes ``manifest.json`` with the
resolved settings, package versions and wall time.
"""

from __future__ import annotations

import argparse
import csv
import json
import platform
import re
import shutil
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .params import InvalidParameters, load_config, params_from_config

DEFAULTS = {
    "symbols": {"system": "ns", "kmin": 1e-3, "kmax": 10.0, "rows": 1000},
    "green": {"system": "ns", "entry": "11", "times": [1.0, 5.0], "rmax": None, "nr": 400, "band": "all"},
    "decay": {"system": "ns", "quantity": "n", "tmin": 10.0, "tmax": 100.0, "ntimes": 91, "method": "parseval"},
    "simulate": {"n": 64, "L": 128.0, "t_end": 20.0, "dt": 0.1, "amplitude": 1e-3, "r1": 2.1, "r2": 1.6,
                 "every": 5, "electric_form": "divergence", "linear_only": False},
    "verify-lemmas": {"ids": "I1,I2,I3,shell,A1,N1,N5,N9"},
    "envelope-check": {"system": "ns", "entry": "11", "kind": "psi1", "times": [5.0, 10.0, 20.0, 40.0], "eps": 0.05},
    "acceptance": {"profile": "quick", "ids": None},
}
PHYSICAL_KEYS = ("mu1", "mu2", "gamma", "c", "epsilon1", "K")


class ConfigError(ValueError):
    pass


def _versions() -> dict:
    return {"bnsp": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


def resolve(command: str, file_cfg: dict, flags: dict) -> dict:
    """Merge defaults, config file and flags for one subcommand."""
    stray = set(file_cfg) - set(PHYSICAL_KEYS) - set(DEFAULTS)
    if stray:
        raise ConfigError(f"unknown top-level config key(s) {sorted(stray)}; physical parameters go at the top "
                          f"level ({', '.join(PHYSICAL_KEYS)}), settings under a subcommand name")
    cfg = dict(DEFAULTS[command])
    section = file_cfg.get(command, {})
    if not isinstance(section, dict):
        raise ConfigError(f"config section {command!r} must be a mapping")
    unknown = set(section) - set(cfg)
    if unknown:
        raise ConfigError(f"unknown field(s) in section {command!r}: {sorted(unknown)}")
    cfg.update(section)
    cfg.update({k: v for k, v in flags.items() if v is not None})
    physical = {k: file_cfg[k] for k in PHYSICAL_KEYS if k in file_cfg}
    physical.update({k: flags[k] for k in PHYSICAL_KEYS if flags.get(k) is not None})
    for k in PHYSICAL_KEYS:
        cfg.pop(k, None)
    return {"physical": physical, "settings": cfg}


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _fmt(v):
    return repr(float(v)) if isinstance(v, (float, np.floating)) else v


def _floats(v):
    if isinstance(v, str):
        return [float(s) for s in v.split(",") if s]
    return [float(s) for s in np.atleast_1d(v)]


# ---------------------------------------------------------------- subcommands

def cmd_symbols(s, p, bands, out: Path, seed: int, threads: int) -> dict:
    from .params import eigen

    k = np.geomspace(float(s["kmin"]), float(s["kmax"]), int(s["rows"]))
    ep = eigen(s["system"], k, p)
    lp, lm = ep.lambda_plus.astype(complex), ep.lambda_minus.astype(complex)
    _write_csv(out / "symbols.csv", ["k", "re_lp", "im_lp", "re_lm", "im_lm"],
               zip(k, lp.real, lp.imag, lm.real, lm.imag))
    return {"rows": len(k)}


def cmd_green(s, p, bands, out: Path, seed: int, threads: int) -> dict:
    from .synthesis import synthesize_entry

    res = {}
    for t in _floats(s["times"]):
        rmax = float(s["rmax"]) if s["rmax"] is not None else p.c * t + 8 * np.sqrt(1 + t)
        r = np.linspace(0, rmax, int(s["nr"]))
        prof = synthesize_entry(s["system"], s["entry"], t, r, p, bands, s["band"])
        vals = np.real_if_close(prof.values)
        _write_csv(out / f"green_{s['system']}_{s['entry']}_t{t:g}.csv", ["r", "value"], zip(r, np.real(vals)))
        res[f"{t:g}"] = {"max_abs": float(np.max(np.abs(vals)))}
    return res


def cmd_decay(s, p, bands, out: Path, seed: int, threads: int) -> dict:
    from .envelopes import fit_decay_exponent, linear_decay_series

    times = np.linspace(float(s["tmin"]), float(s["tmax"]), int(s["ntimes"]))
    series = linear_decay_series(s["system"], s["quantity"], times, p, method=s["method"])
    slope, err = fit_decay_exponent(series)
    _write_csv(out / "decay.csv", ["t", "l2_norm"], zip(series.times, series.norms))
    return {"slope": slope, "stderr": err}


def cmd_simulate(s, p, bands, out: Path, seed: int, threads: int) -> dict:
    from .solver import (InitialDataSpec, conservation_observer, envelope_observer, integrate, make_initial_data,
                         norm_observer, save_snapshot)

    spec = InitialDataSpec(amplitude=float(s["amplitude"]), r1=float(s["r1"]), r2=float(s["r2"]), seed=seed)
    st0 = make_initial_data(spec, int(s["n"]), float(s["L"]))
    st, tr = integrate(st0, float(s["t_end"]), float(s["dt"]), p,
                       observers=[conservation_observer, norm_observer, envelope_observer()],
                       every=int(s["every"]), electric_form=s["electric_form"], linear_only=bool(s["linear_only"]),
                       workers=threads)
    keys = list(tr.records[0])
    _write_csv(out / "observables.csv", keys, ([r[k] for k in keys] for r in tr.records))
    save_snapshot(st, out / "final", {"t_end": st.t})
    return {"steps": int(round(float(s["t_end"]) / float(s["dt"]))), "final_t": st.t}


def _lemma_report(lid: str, seed: int):
    from . import lemmas as lm

    xs = [0.0, lambda t: t / 2, lambda t: t, lambda t: 2 * t]
    if lid in ("I1", "I2", "I3"):
        return lm.check_I(int(lid[1]), xs, [1.0, 10.0, 100.0], 2.1)
    if lid in ("shell", "5.0"):
        return lm.check_shell([0.0, 1.0, 10.0, 100.0], [1.0, 10.0], 2.0)
    if lid == "A1":
        return lm.check_A1(10_000, seed=seed)
    if lid in ("delta-Dwave", "delta-Hwave"):
        return lm.check_delta_conv(1.5, 1.0, lid.split("-")[1])
    if lid.startswith("N") and lid[1:].isdigit():
        return lm.check_A_integral(int(lid[1:]))
    raise ConfigError(f"unknown lemma id {lid!r}")


def expand_ids(ids) -> list:
    """Split a comma list of lemma ids, expanding ranges such as ``N1..N12``."""
    raw = ids.split(",") if isinstance(ids, str) else list(ids)
    out = []
    for tok in (str(x).strip() for x in raw):
        m = re.fullmatch(r"([A-Za-z]+)(\d+)\.\.\1?(\d+)", tok)
        if m:
            out.extend(f"{m.group(1)}{i}" for i in range(int(m.group(2)), int(m.group(3)) + 1))
        elif tok:
            out.append(tok)
    return out


def cmd_verify_lemmas(s, p, bands, out: Path, seed: int, threads: int) -> dict:
    ids = expand_ids(s["ids"])
    summary, rows = {}, []
    for lid in ids:
        rep = _lemma_report(lid.strip(), seed)
        d = rep.to_dict()
        (out / f"lemma_{rep.lemma}.json").write_text(json.dumps(_clean(d), indent=1))
        if rep.lemma != "A1":
            for pt, ratio in zip(rep.points, rep.ratio):
                rows.append([rep.lemma, pt.get("x", pt.get("a", "")), pt.get("t", pt.get("b", "")), ratio])
        summary[rep.lemma] = {"constant": rep.constant, "passed": rep.passed}
    _write_csv(out / "lemma_ratios.csv", ["lemma", "x_or_a", "t_or_b", "ratio"], rows)
    return summary


def cmd_envelope_check(s, p, bands, out: Path, seed: int, threads: int) -> dict:
    from .envelopes import EnvelopeSpec, envelope_ratio
    from .synthesis import synthesize_entry

    spec = EnvelopeSpec(s["kind"], eps=float(s["eps"]), c=p.c)
    rows = []
    for t in _floats(s["times"]):
        r = np.linspace(0, p.c * t + 10 * np.sqrt(1 + t), 600)
        ratio, r_at = envelope_ratio(synthesize_entry(s["system"], s["entry"], t, r, p, bands), spec)
        rows.append([t, ratio, r_at])
    _write_csv(out / "envelope_ratios.csv", ["t", "sup_ratio", "r_at"], rows)
    ratios = [row[1] for row in rows]
    return {"variation": max(ratios) / min(ratios)}


def cmd_acceptance(s, p, bands, out: Path, seed: int, threads: int) -> dict:
    from .acceptance import acceptance_suite, validate_report

    ids = None if s["ids"] is None else [int(i) for i in str(s["ids"]).split(",")]
    report = acceptance_suite(s["profile"], ids, seed, log=lambda line: print(line, flush=True))
    report = _clean(report)
    validate_report(report)
    (out / "acceptance.json").write_text(json.dumps(report, indent=1))
    return {"passed": report["passed"]}


COMMANDS = {
    "symbols": cmd_symbols, "green": cmd_green, "decay": cmd_decay, "simulate": cmd_simulate,
    "verify-lemmas": cmd_verify_lemmas, "envelope-check": cmd_envelope_check, "acceptance": cmd_acceptance,
}


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else str(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bnsp", description=__doc__.splitlines()[0])
    ap.add_argument("--config", help="JSON or YAML config file")
    ap.add_argument("--out", default="out", help="output directory")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    for k in ("mu1", "mu2", "gamma", "c"):
        ap.add_argument(f"--{k}", type=float)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("symbols", help="eigenvalue table over k")
    sp.add_argument("--system", choices=("ns", "nsp"))
    sp.add_argument("--kmin", type=float)
    sp.add_argument("--kmax", type=float)
    sp.add_argument("--rows", type=int)

    sp = sub.add_parser("green", help="radial Green's-function profiles")
    sp.add_argument("--system", choices=("ns", "nsp"))
    sp.add_argument("--entry", choices=("11", "12", "21", "22iso", "22aniso"))
    sp.add_argument("--times")
    sp.add_argument("--rmax", type=float)
    sp.add_argument("--nr", type=int)
    sp.add_argument("--band", choices=("all", "long", "mid", "short"))

    sp = sub.add_parser("decay", help="L2 decay series and fitted rate")
    sp.add_argument("--system", choices=("ns", "nsp"))
    sp.add_argument("--quantity", choices=("n", "w"))
    sp.add_argument("--tmin", type=float)
    sp.add_argument("--tmax", type=float)
    sp.add_argument("--ntimes", type=int)
    sp.add_argument("--method", choices=("parseval", "radial"))

    sp = sub.add_parser("simulate", help="nonlinear periodic-box run")
    for k, typ in (("n", int), ("L", float), ("t_end", float), ("dt", float), ("amplitude", float),
                   ("every", int)):
        sp.add_argument(f"--{k.replace('_', '-')}", dest=k, type=typ)
    sp.add_argument("--electric-form", dest="electric_form", choices=("divergence", "direct"))
    sp.add_argument("--linear-only", dest="linear_only", action="store_true", default=None)

    sp = sub.add_parser("verify-lemmas", help="numerical checks of the convolution inequalities")
    sp.add_argument("--ids")

    sp = sub.add_parser("envelope-check", help="sup-ratio of a kernel entry to an envelope")
    sp.add_argument("--system", choices=("ns", "nsp"))
    sp.add_argument("--entry", choices=("11", "12", "21", "22iso", "22aniso"))
    sp.add_argument("--kind")
    sp.add_argument("--times")

    sp = sub.add_parser("acceptance", help="run the acceptance criteria")
    sp.add_argument("--profile", choices=("quick", "full"))
    sp.add_argument("--ids")
    return ap


def run(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    flags = {k: v for k, v in vars(args).items() if k not in ("config", "out", "seed", "threads", "command")}
    t0 = time.perf_counter()
    try:
        file_cfg = load_config(args.config)
        resolved = resolve(args.command, file_cfg, flags)
        p, bands = params_from_config(resolved["physical"])
    except (InvalidParameters, ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    stage = Path(tempfile.mkdtemp(prefix=".partial-", dir=out.parent))
    try:
        result = COMMANDS[args.command](resolved["settings"], p, bands, stage, args.seed, args.threads)
    except (InvalidParameters, ConfigError, ValueError) as exc:
        shutil.rmtree(stage, ignore_errors=True)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BaseException:
        shutil.rmtree(stage, ignore_errors=True)
        raise
    manifest = {
        "command": args.command,
        "seed": args.seed,
        "threads": args.threads,
        "config": {"physical": p.to_dict(), "bands": {"epsilon1": bands.eps1, "K": bands.K},
                   "settings": resolved["settings"]},
        "versions": _versions(),
        "wall_time_s": time.perf_counter() - t0,
        "result": result,
    }
    (stage / "manifest.json").write_text(json.dumps(_clean(manifest), indent=1))
    out.mkdir(parents=True, exist_ok=True)
    for f in stage.iterdir():
        shutil.move(str(f), str(out / f.name))
    stage.rmdir()
    if args.command == "acceptance" and not result["passed"]:
        return 1
    return 0


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
