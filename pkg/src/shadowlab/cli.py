"""Command line entry point.

Usage:
  shadowlab classify  --config cfg.json [--out DIR]
  shadowlab shadow    --config cfg.json [--out DIR] [--seed N] [--jobs N]
  shadowlab conjugacy --config cfg.json [--out DIR] [--seed N]
  shadowlab validate  --config cfg.json

Exit codes: 0 success (including an expected negative result), 1 inconclusive,
2 bad input, 3 a theoretical bound was violated.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

import numpy as np
import jsonschema

from . import __version__
from .conjugacy import (ConjugacyMap, ConstantVector, PerturbedMap, conjugacy_delta,
                        perturbation_from_json, verify_semiconjugacy)
from .errors import ShadowlabError
from .hyperbolicity import (GHCertificate, MultiplicationVerdict, NoCertificate,
                            classify_expansivity_shift, classify_multiplication,
                            delta_for_epsilon, detect_split, expansion_certificate)
from .operators import MultiplicationOperator, operator_from_json, operator_norm_bound
from .shadowing import (adversarial_mult_chain, counterexample_cycle, make_chain,
                        make_two_sided, random_cycle, shadow_finite, shadow_periodic,
                        shadow_two_sided)
from .spaces import Lp, SeqVec, family_from_json, seminorm_eval

EXIT_OK, EXIT_INCONCLUSIVE, EXIT_INPUT, EXIT_BOUND = 0, 1, 2, 3
SEED_ENV = "SHADOWLAB_SEED"
U64 = 2 ** 64


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------------------
# io helpers


def load_schema(name: str) -> dict:
    return json.loads(resources.files("shadowlab").joinpath("schemas", name).read_text())


def _subschema(name: str, which: str) -> dict:
    full = load_schema(name)
    return {"$schema": full["$schema"], "$defs": full["$defs"], "$ref": f"#/$defs/{which}"}


def validate_config(cfg: dict, command: str) -> None:
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    if cfg.get("command", command) != command:
        raise ConfigError(f"config is for {cfg.get('command')!r}, not {command!r}")
    cfg.setdefault("command", command)
    v = jsonschema.Draft202012Validator(_subschema("config.schema.json", command))
    errs = sorted(v.iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errs:
        e = errs[0]
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {e.message}")


def validate_report(report: dict, which: str) -> None:
    jsonschema.validate(report, _subschema("report.schema.json", which))


def _clean(obj):
    # JSON has no inf/nan; spell them out
    if isinstance(obj, float):
        if math.isnan(obj):
            return "nan"
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        return _clean(obj.item())
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def resolve_seed(flag: int | None, cfg: dict) -> tuple[int, str]:
    """Flag beats environment beats config."""
    if flag is not None:
        return flag % U64, "flag"
    env = os.environ.get(SEED_ENV)
    if env not in (None, ""):
        try:
            return int(env) % U64, "env"
        except ValueError:
            raise ConfigError(f"{SEED_ENV} is not an integer: {env!r}") from None
    if "seed" in cfg:
        return int(cfg["seed"]), "config"
    return 0, "default"


def _build(cfg: dict):
    try:
        op = operator_from_json(cfg["operator"]) if "operator" in cfg else None
        fam = family_from_json(cfg["space"]) if "space" in cfg else Lp(2)
    except (ValueError, TypeError, KeyError, ZeroDivisionError) as exc:
        raise ConfigError(f"cannot build operator/space: {exc}") from exc
    return op, fam


def _need_shift(op):
    if op is None or isinstance(op, MultiplicationOperator):
        raise ConfigError("this mode needs a shift or scalar operator")


# ---------------------------------------------------------------------------
# classify


def cmd_classify(cfg: dict, seed: int) -> tuple[dict, int]:
    op, fam = _build(cfg)
    grades = cfg.get("grades", [1, 2, 3])
    if isinstance(op, MultiplicationOperator):
        mv: MultiplicationVerdict = classify_multiplication(op, cfg.get("compacts"))
        report = {
            "command": "classify",
            "certificate": {"kind": "multiplication_split", **mv.to_json()},
            "expansivity": {"kind": mv.expansivity.value, "status": "analytic"},
            "multiplication": mv.to_json(),
        }
        return report, EXIT_OK
    cert = detect_split(op, fam, grades)
    verdict = classify_expansivity_shift(op, fam, grades, cfg.get("horizon", 2000))
    exp = expansion_certificate(op, fam, grades)
    report = {"command": "classify", "certificate": cert.to_json(),
              "expansivity": verdict.to_json(), "expansion": exp.to_json()}
    code = EXIT_INCONCLUSIVE if verdict.status == "inconclusive" else EXIT_OK
    return report, code


# ---------------------------------------------------------------------------
# shadow


def _trial(args) -> dict:
    cfg, idx, seed = args
    op, fam = _build(cfg)
    mode = cfg["mode"]
    grade = cfg.get("grade", 1)
    cert = detect_split(op, fam, [grade])
    delta = _shadow_delta(cfg, cert, op, fam, grade)
    window = tuple(cfg.get("window", (-16, 16)))
    exact = cfg.get("exact", True)
    length = cfg.get("length", 20)
    x0 = SeqVec.from_json(cfg["x0"]) if "x0" in cfg else SeqVec.zeros(window, exact=exact)
    if mode == "finite":
        ch = make_chain(op, fam, x0, length, grade, delta, seed, window=window, exact=exact)
        rep = shadow_finite(ch, cert, op)
    elif mode == "periodic":
        period = length if "length" in cfg else 1 + idx % 8
        ch = random_cycle(op, fam, max(period, 1), grade, delta, seed, window=window,
                          exact=exact)
        rep = shadow_periodic(ch, cert, op, cfg.get("tol", 1e-12))
    else:
        ch = make_two_sided(op, fam, x0, length, grade, delta, seed, window=window, exact=exact)
        rep = shadow_two_sided(ch, cert, op, cfg.get("tol", 0.0))
    out = rep.to_json(include_point=cfg.get("include_points", False))
    out["seed"] = seed
    out["delta"] = delta
    if "epsilon" in cfg:
        out["within_epsilon"] = rep.max_deviation < cfg["epsilon"]
    if cfg.get("csv"):
        out["_csv_rows"] = [[rep.start + i, d, b] for i, (d, b) in
                            enumerate(zip(rep.deviations.tolist(), rep.bounds.tolist()))]
    return out


def _shadow_delta(cfg, cert, op, fam, grade) -> float:
    if "delta" in cfg:
        return float(cfg["delta"])
    if "epsilon" not in cfg:
        raise ConfigError("shadow needs epsilon or delta")
    _, d = delta_for_epsilon(cert, cfg["epsilon"], grade)
    if cfg["mode"] == "two_sided":
        d /= max(1.0, operator_norm_bound(op.inverse(), fam, grade))
    return d


def cmd_shadow(cfg: dict, seed: int, jobs: int = 1) -> tuple[dict, int, dict]:
    mode = cfg["mode"]
    extra = {}
    if mode == "counterexample":
        if "delta" not in cfg:
            raise ConfigError("counterexample mode needs delta")
        fam = family_from_json(cfg["space"]) if "space" in cfg else Lp(2)
        chain, fc = counterexample_cycle(cfg["delta"], fam, cfg.get("grade", 1))
        report = {"command": "shadow", "mode": mode, "failure_certificate": fc.to_json(),
                  "cycle_length": chain.length, "defect_norms": chain.defect_norms().tolist()}
        # a failure is the expected outcome; anything else contradicts the construction
        code = EXIT_OK if fc.shadowing_fails else EXIT_BOUND
        report["exit_code"] = code
        return report, code, extra
    op, fam = _build(cfg)
    if mode == "adversarial":
        if not isinstance(op, MultiplicationOperator):
            raise ConfigError("adversarial mode needs a multiplication operator")
        if "delta" not in cfg:
            raise ConfigError("adversarial mode needs delta")
        try:
            ac = adversarial_mult_chain(op, cfg["delta"], cfg.get("compact"))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        ok = ac.max_defect <= ac.delta * (1 + 1e-12) and ac.marked_value_at_escape >= 2 - 1e-9
        report = {"command": "shadow", "mode": mode, "adversarial": ac.to_json(),
                  "exit_code": EXIT_OK if ok else EXIT_BOUND}
        return report, report["exit_code"], extra
    _need_shift(op)
    grade = cfg.get("grade", 1)
    cert = detect_split(op, fam, [grade])
    if isinstance(cert, NoCertificate):
        report = {"command": "shadow", "mode": mode, "certificate": cert.to_json(),
                  "exit_code": EXIT_INCONCLUSIVE}
        return report, EXIT_INCONCLUSIVE, extra
    n = cfg.get("trials", 1)
    tasks = [(cfg, i, (seed + i) % U64) for i in range(n)]
    if jobs > 1 and n > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            trials = list(pool.map(_trial, tasks))
    else:
        trials = [_trial(t) for t in tasks]
    csv_rows = {}
    for t in trials:
        rows = t.pop("_csv_rows", None)
        if rows is not None:
            csv_rows[t["seed"]] = rows
    devs = np.array([t["max_deviation"] for t in trials])
    all_hold = all(t["holds"] for t in trials)
    report = {
        "command": "shadow", "mode": mode, "certificate": cert.to_json(),
        "trials": trials, "all_hold": all_hold,
        "aggregate": {"min": float(devs.min()), "median": float(np.median(devs)),
                      "max": float(devs.max()), "count": int(devs.size)},
    }
    if "epsilon" in cfg:
        report["all_within_epsilon"] = all(t["within_epsilon"] for t in trials)
        all_hold = all_hold and report["all_within_epsilon"]
    code = EXIT_OK if all_hold else EXIT_BOUND
    report["exit_code"] = code
    extra["csv"] = csv_rows
    return report, code, extra


# ---------------------------------------------------------------------------
# conjugacy


def cmd_conjugacy(cfg: dict, seed: int) -> tuple[dict, int]:
    op, fam = _build(cfg)
    _need_shift(op)
    grade = cfg.get("grade", 1)
    try:
        g = perturbation_from_json(cfg["perturbation"])
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"bad perturbation: {exc}") from exc
    S = PerturbedMap(op, g)
    q = S.contraction_factor(fam, grade)
    base = {"command": "conjugacy", "contraction_factor": q,
            "notes": {"continuity": "sample-based checks cannot tell uniformly continuous "
                                    "perturbations from merely continuous bounded ones"}}
    if not q < 1:
        return {**base, "error": "contraction condition L * ||T^-1|| < 1 fails",
                "terms": 0, "residual_bound": 0.0, "residuals": [], "max_residual": 0.0,
                "exit_code": EXIT_INPUT}, EXIT_INPUT
    cert = detect_split(op, fam, [grade])
    if isinstance(cert, NoCertificate):
        return {**base, "certificate": cert.to_json(), "terms": 0, "residual_bound": 0.0,
                "residuals": [], "max_residual": 0.0,
                "exit_code": EXIT_INCONCLUSIVE}, EXIT_INCONCLUSIVE
    tol = cfg.get("tol", 1e-10)
    exact = cfg.get("exact", True) and isinstance(g, ConstantVector)
    if exact:
        S = PerturbedMap(op, ConstantVector(g.value.to_exact()))
    phi = ConjugacyMap(op, cert, S, tol, fam, grade)
    rng = np.random.default_rng(seed)
    w = tuple(cfg.get("sample_window", (-8, 8)))
    scale = cfg.get("sample_scale", 1.0)
    samples = []
    for _ in range(cfg.get("samples", 100)):
        x = SeqVec(w, rng.standard_normal(w[1] - w[0] + 1) * scale)
        samples.append(x.to_exact() if exact else x)
    first = phi.evaluate(samples[0])
    resid = verify_semiconjugacy(op, S, phi, samples, fam, grade)
    disp = np.array([seminorm_eval(phi(x) - x, fam, grade) for x in samples])
    if exact:
        allowance = 0.0
    else:
        scale_t = max(seminorm_eval(op(phi(x)), fam, grade) for x in samples)
        allowance = 64 * np.finfo(float).eps * max(1.0, scale_t)
    bound = first.residual_bound
    ok = bool(np.all(resid <= bound * (1 + 1e-9) + allowance))
    ok = ok and bool(np.all(disp <= phi.displacement_bound * (1 + 1e-9) + allowance))
    report = {**base, "certificate": cert.to_json(), "terms": first.terms,
              "residual_bound": bound, "rounding_allowance": allowance,
              "residuals": resid.tolist(), "max_residual": float(resid.max()),
              "displacements": disp.tolist(), "max_displacement": float(disp.max()),
              "displacement_bound": phi.displacement_bound,
              "perturbation_bound": phi.bound, "exact": exact}
    if "epsilon" in cfg:
        _, d = conjugacy_delta(cert, cfg["epsilon"], grade)
        report["delta"] = d
        report["respects_delta"] = phi.bound < d
        if phi.bound < d:
            report["within_epsilon"] = bool(np.all(disp < cfg["epsilon"]))
            ok = ok and report["within_epsilon"]
    code = EXIT_OK if ok else EXIT_BOUND
    report["exit_code"] = code
    return report, code


# ---------------------------------------------------------------------------
# main


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="shadowlab", description=__doc__.split("\n\n")[0],
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--version", action="version", version=f"shadowlab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("classify", "shadow", "conjugacy", "validate"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="path to a JSON config")
        sp.add_argument("--out", default="shadowlab-out", help="output directory")
        sp.add_argument("--seed", type=int, default=None,
                        help=f"base seed (overrides ${SEED_ENV} and the config)")
        sp.add_argument("--jobs", type=int, default=1, help="worker processes for batches")
    return p


def _read_config(path: str) -> tuple[dict, bytes]:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    try:
        return json.loads(raw), raw
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    started = datetime.now(timezone.utc).isoformat()
    t0 = time.perf_counter()
    try:
        if args.jobs < 1:
            raise ConfigError("--jobs must be at least 1")
        if args.seed is not None and not 0 <= args.seed < U64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        cfg, raw = _read_config(args.config)
        command = args.command
        if command == "validate":
            command = cfg.get("command") if isinstance(cfg, dict) else None
            if command not in ("classify", "shadow", "conjugacy"):
                raise ConfigError("config needs a command field: classify, shadow or conjugacy")
        validate_config(cfg, command)
        seed, seed_src = resolve_seed(args.seed, cfg)
        if args.command == "validate":
            _build(cfg)
            print(f"{args.config}: valid {command} config")
            return EXIT_OK
        extra = {}
        if command == "classify":
            report, code = cmd_classify(cfg, seed)
        elif command == "shadow":
            report, code, extra = cmd_shadow(cfg, seed, args.jobs)
        else:
            report, code = cmd_conjugacy(cfg, seed)
    except (ConfigError, ShadowlabError) as exc:
        print(f"shadowlab: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    report["exit_code"] = code
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    outputs = [f"{command}.json"]
    (out / outputs[0]).write_text(dumps(report))
    for s, rows in sorted(extra.get("csv", {}).items()):
        tdir = out / "traces"
        tdir.mkdir(exist_ok=True)
        name = f"traces/trial_{s}.csv"
        with open(out / name, "w") as fh:
            fh.write("step,deviation,bound\n")
            for r in rows:
                fh.write(f"{r[0]},{r[1]!r},{r[2]!r}\n")
        outputs.append(name)
    manifest = {
        "command": command, "config_sha256": hashlib.sha256(raw).hexdigest(),
        "tool_version": __version__, "seed": seed, "seed_source": seed_src,
        "jobs": args.jobs,
        "timing": {"started": started, "elapsed_seconds": time.perf_counter() - t0},
        "outputs": outputs, "exit_code": code,
    }
    (out / "manifest.json").write_text(dumps(manifest))
    summary = {EXIT_OK: "ok", EXIT_INCONCLUSIVE: "inconclusive", EXIT_INPUT: "rejected input",
               EXIT_BOUND: "BOUND VIOLATED"}[code]
    print(f"shadowlab {command}: {summary} -> {out / outputs[0]}")
    return code


if __name__ == "__main__":
    sys.exit(main())
