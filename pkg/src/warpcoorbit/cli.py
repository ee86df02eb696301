"""Command-line front end.

Each invocation runs one command from a JSON config file and writes a JSON
report (with the fully resolved config embedded) plus CSV tables to the
output directory.

Exit codes: 0 success, 2 configuration error, 3 verification failure,
4 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__
from .covering import (
    alpha_verify,
    besov_covering,
    cross_intersections,
    element_measures,
    induced_covering,
    lattice_ball,
    neighbor_growth_diagnostic,
    outer_radius_check,
    tightness_radius,
)
from .decomp_norms import norm_equivalence_probe
from .embeddings import (
    INF,
    besov_identification_exponent,
    besov_vs_warped,
    equality_check,
    identify_alpha_modulation,
    identify_mixed_smoothness,
    lattice_power_weight,
    lattice_weight,
    warped_same_map,
)
from .radial_warping import catalog_map, family_component
from .transform import (
    SampledSignal,
    analyze,
    bump_prototype,
    gaussian_signal,
    parseval_defect,
    random_bandlimited,
    read_signal,
    synthesize,
)

log = logging.getLogger("warpcoorbit")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VERIFY = 3
EXIT_NONCONVERGENCE = 4


class ConfigError(Exception):
    """Invalid or inconsistent configuration."""


class VerificationFailure(Exception):
    """A check ran but did not pass."""


class NonConvergence(Exception):
    """A numerical procedure could not reach a decision."""


# ---------------------------------------------------------------------------
# config helpers
# ---------------------------------------------------------------------------


def _exponent(v) -> float:
    if isinstance(v, str) and v.strip().lower() in ("inf", "infinity", "oo"):
        return INF
    try:
        v = float(v)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad exponent {v!r}") from exc
    if not v >= 1:
        raise ConfigError(f"exponent {v} must lie in [1, inf]")
    return v


def _json_safe(obj):
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        if math.isnan(f):
            return "nan"
        return f
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _json_safe(obj.tolist())
    if callable(obj):
        return None
    return obj


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(_json_safe(payload), indent=2) + "\n")


def _write_csv(path: Path, header: list, rows) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow(row)


def _map_from(cfg: dict):
    try:
        return catalog_map(str(cfg.get("map", "identity")), int(cfg.get("d", 1)))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _signal_from(cfg: dict, seed: int, base: Path) -> SampledSignal:
    spec = cfg.get("signal", {"generator": "gaussian"})
    d = int(cfg.get("d", 1))
    if isinstance(spec, str):
        path = Path(spec)
        if not path.is_absolute():
            path = base / path
        try:
            return read_signal(path)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read signal {path}: {exc}") from exc
    gen = spec.get("generator", "gaussian")
    n = int(spec.get("N", 1024))
    L = float(spec.get("L", 64.0))
    if gen == "gaussian":
        return gaussian_signal(d, n, L, spec.get("center", 0.0), float(spec.get("width", 1.0)), spec.get("shift", 0.0))
    if gen == "random":
        return random_bandlimited(d, n, L, float(spec.get("band", 6.0)), seed)
    if gen == "zero":
        return SampledSignal(d, n, L, np.zeros((n,) * d, dtype=complex), "zero")
    raise ConfigError(f"unknown signal generator {gen!r}")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_covering_report(cfg: dict, out: Path, args) -> dict:
    """Neighbour counts, measures, tightness and optional alpha / Besov checks."""
    m = _map_from(cfg)
    delta = float(cfg.setdefault("delta", 1.0))
    r = float(cfg.setdefault("r", 0.5 * math.sqrt(m.dim) + 0.25))
    try:
        cov = induced_covering(m, delta, r)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    radius = float(cfg.setdefault("window_radius", 10))
    n_max = int(cfg.setdefault("n_max", 3))
    ks = lattice_ball(m.dim, radius)
    zero = tuple([0] * m.dim)
    growth = neighbor_growth_diagnostic(cov, zero, n_max)
    mu = element_measures(cov, ks)
    _write_csv(out / "measures.csv", [f"k{i}" for i in range(m.dim)] + ["measure"], [list(k) + [v] for k, v in zip(ks.tolist(), mu)])
    _write_csv(out / "neighbors.csv", ["n", "count", "reference"], [[n, c, ref] for n, (c, ref) in enumerate(zip(growth.counts, growth.reference_power))])
    tight = tightness_radius(cov)
    outer = outer_radius_check(cov)
    report: dict[str, Any] = {
        "covering": cov.describe(),
        "neighbor_growth": growth.to_dict(),
        "measure_range": [float(mu.min()), float(mu.max())],
        "tightness": tight.to_dict(),
        "outer_radius": outer,
    }
    ok = tight.verified and outer["pass"]
    if "alpha_verify" in cfg:
        try:
            rep = alpha_verify(cov, float(cfg["alpha_verify"]), window=lattice_ball(m.dim, min(radius, 200)))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        report["alpha_verify"] = rep.to_dict()
        ok = ok and rep.passed
    if cfg.get("besov_compare", False):
        cross = cross_intersections(cov, besov_covering(m.dim), ks, [(j,) for j in range(int(cfg.get("jmax", 12)) + 1)])
        report["besov_cross"] = cross.to_dict()
    if not ok:
        raise VerificationFailure(report)
    return report


def _kappa_exponent(space: dict, d: int) -> float:
    kap = space.get("kappa", {"type": "power", "s": 0.0})
    if kap.get("type") == "besov-identification":
        return besov_identification_exponent(float(kap.get("s", 0.0)), _exponent(space.get("q", 2)), d)
    if kap.get("type") == "power":
        return float(kap.get("s", 0.0))
    raise ConfigError(f"unsupported weight {kap!r}")


def _as_warped(space: dict, d: int) -> dict:
    kind = space.get("kind")
    if kind == "alpha_mod":
        alpha = float(space.get("alpha", 0.0))
        try:
            desc = identify_alpha_modulation(alpha, float(space.get("s", 0.0)), _exponent(space.get("p", 2)), _exponent(space.get("q", 2)), d)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return {"kind": "warped", "map": desc.map_spec, "p": space.get("p", 2), "q": space.get("q", 2), "kappa": {"type": "power", "s": desc.params["kappa_exponent"]}}
    return space


def cmd_embed_check(cfg: dict, out: Path, args) -> dict:
    """Decide embeddings between two space descriptors."""
    d = int(cfg.setdefault("d", 1))
    try:
        a, b = dict(cfg["space_a"]), dict(cfg["space_b"])
    except KeyError as exc:
        raise ConfigError("embed-check needs space_a and space_b") from exc
    a, b = _as_warped(a, d), _as_warped(b, d)
    kinds = (a.get("kind"), b.get("kind"))
    report: dict[str, Any] = {"space_a": a, "space_b": b}
    verdicts = []
    if "mixed" in kinds:
        mixed = a if a.get("kind") == "mixed" else b
        desc = identify_mixed_smoothness(mixed.get("s", [0.0] * d), _exponent(mixed.get("p", 2)), _exponent(mixed.get("q", 2)))
        report["identification"] = desc.to_dict()
        report["relation"] = "identified"
        return report
    if set(kinds) == {"besov", "warped"}:
        bes, war = (a, b) if kinds[0] == "besov" else (b, a)
        spec = str(war.get("map", "ln"))
        if spec == "identity" or spec.startswith("tensor:"):
            raise ConfigError("Besov comparison needs a radial map (ln or alpha:<a>)")
        try:
            rho = family_component(spec)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        res = besov_vs_warped(
            rho,
            _kappa_exponent(war, d),
            float(bes.get("s", 0.0)),
            _exponent(war.get("p", 2)),
            _exponent(bes.get("p", 2)),
            _exponent(war.get("q", 2)),
            _exponent(bes.get("q", 2)),
            d,
        )
        co_b, b_co = res["coorbit_into_besov"], res["besov_into_coorbit"]
        verdicts = [co_b, b_co]
        report["coorbit_into_besov"] = co_b.to_dict()
        report["besov_into_coorbit"] = b_co.to_dict()
        rel = "equal" if co_b.embeds and b_co.embeds else "coorbit_into_besov" if co_b.embeds else "besov_into_coorbit" if b_co.embeds else "neither"
        report["relation"] = rel
    elif kinds == ("warped", "warped"):
        ma, mb = str(a.get("map", "ln")), str(b.get("map", "ln"))
        if ma == mb:
            try:
                w = lattice_weight(ma, d)
                k1 = lattice_power_weight(ma, d, _kappa_exponent(a, d))
                k2 = lattice_power_weight(ma, d, _kappa_exponent(b, d))
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
            pa, qa = _exponent(a.get("p", 2)), _exponent(a.get("q", 2))
            pb, qb = _exponent(b.get("p", 2)), _exponent(b.get("q", 2))
            ab = warped_same_map(w, k1, k2, pa, pb, qa, qb)
            ba = warped_same_map(w, k2, k1, pb, pa, qb, qa)
            verdicts = [ab, ba]
            report["a_into_b"] = ab.to_dict()
            report["b_into_a"] = ba.to_dict()
            report["relation"] = "equal" if ab.embeds and ba.embeds else "a_into_b" if ab.embeds else "b_into_a" if ba.embeds else "neither"
        else:
            eq = equality_check(_map_from({"map": ma, "d": d}), _map_from({"map": mb, "d": d}))
            report["equality"] = eq.to_dict()
            report["relation"] = eq.verdict
    else:
        raise ConfigError(f"unsupported space pair {kinds}")
    if any(v.relation == "undetermined" for v in verdicts):
        raise NonConvergence(report)
    return report


def _prototype_from(cfg: dict, d: int):
    proto = cfg.setdefault("prototype", {"preset": "unit-l2", "half_width": 1.0})
    try:
        return bump_prototype(d, float(proto.get("half_width", 1.0)), str(proto.get("preset", "unit-l2")))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_transform(cfg: dict, out: Path, args) -> dict:
    """Analysis, Parseval defect, optional round trip and coefficient CSV."""
    m = _map_from(cfg)
    sig = _signal_from(cfg, args.seed, args.config_dir)
    if sig.dim != m.dim:
        raise ConfigError("signal and map dimensions differ")
    theta = _prototype_from(cfg, m.dim)
    delta = float(cfg.setdefault("delta", 0.125))
    tol = float(cfg.setdefault("tolerance", 1e-3))
    coeffs = analyze(sig, m, theta, delta, workers=args.threads)
    pd = parseval_defect(sig, m, theta, delta, coeffs=coeffs)
    report: dict[str, Any] = {"signal": {"label": sig.label, **sig.to_header(), "norm": sig.norm()}, "parseval": pd}
    stride = int(cfg.setdefault("csv_stride", 1))
    y = coeffs.time_axis()
    rows = []
    if m.dim == 1:
        for k, vals in zip(coeffs.ks, coeffs.values):
            for yi, v in list(zip(y, vals))[::stride]:
                rows.append([int(k[0]), float(yi), float(v.real), float(v.imag)])
    _write_csv(out / "coefficients.csv", ["k", "y", "re", "im"], rows)
    if cfg.setdefault("roundtrip", True):
        _, err = synthesize(coeffs, m, theta, sig)
        report["roundtrip_error"] = err
    if pd["defect"] > tol:
        raise VerificationFailure(report)
    return report


def cmd_parseval(cfg: dict, out: Path, args) -> dict:
    """Parseval defect over a list of lattice spacings."""
    m = _map_from(cfg)
    sig = _signal_from(cfg, args.seed, args.config_dir)
    theta = _prototype_from(cfg, m.dim)
    deltas = [float(v) for v in cfg.setdefault("deltas", [0.5, 0.25, 0.125])]
    tol = float(cfg.setdefault("tolerance", 1e-3))
    defects = [parseval_defect(sig, m, theta, dl)["defect"] for dl in deltas]
    _write_csv(out / "parseval.csv", ["delta", "defect"], zip(deltas, defects))
    monotone = all(b < a for a, b in zip(defects, defects[1:])) if sig.norm() > 0 else True
    report = {"deltas": deltas, "defects": defects, "monotone": monotone, "final_within_tolerance": defects[-1] <= tol}
    if not (monotone and defects[-1] <= tol):
        raise VerificationFailure(report)
    return report


def cmd_alpha_verify(cfg: dict, out: Path, args) -> dict:
    """Alpha-covering check for the power warping of a given alpha."""
    alpha = float(cfg.get("alpha", 0.5))
    d = int(cfg.setdefault("d", 1))
    if alpha > 1:
        raise ConfigError(f"alpha = {alpha} > 1 admits no alpha-covering")
    spec = "identity" if alpha == 0 and cfg.get("use_identity", False) else f"alpha:{alpha:g}" if alpha < 1 else None
    if spec is None:
        raise ConfigError("alpha = 1 is the Besov case; use besov-compare")
    m = catalog_map(spec, d)
    delta = float(cfg.setdefault("delta", 1.0))
    r = float(cfg.setdefault("r", 0.5 * math.sqrt(d) + 0.25))
    radius = float(cfg.setdefault("window_radius", 200 if d == 1 else 20))
    cov = induced_covering(m, delta, r)
    rep = alpha_verify(cov, alpha, window=lattice_ball(d, radius))
    report = {"covering": cov.describe(), "alpha_verify": rep.to_dict()}
    if not rep.passed:
        raise VerificationFailure(report)
    return report


def cmd_besov_compare(cfg: dict, out: Path, args) -> dict:
    """Cross-intersection counts between an induced covering and the Besov covering."""
    m = _map_from({"map": cfg.setdefault("map", "ln"), "d": cfg.setdefault("d", 1)})
    delta = float(cfg.setdefault("delta", 1.0))
    r = float(cfg.setdefault("r", 0.5 * math.sqrt(m.dim) + 0.25))
    jmax = int(cfg.setdefault("jmax", 20))
    try:
        cov = induced_covering(m, delta, r)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    cross = cross_intersections(cov, besov_covering(m.dim), lattice_ball(m.dim, 4), [(j,) for j in range(jmax + 1)])
    counts = [cross.counts_b[(j,)] for j in range(jmax + 1)]
    _write_csv(out / "besov_counts.csv", ["j", "count"], enumerate(counts))
    increasing = all(b > a for a, b in zip(counts, counts[1:]))
    return {"covering": cov.describe(), "counts": counts, "strictly_increasing": increasing, "band": [min(counts), max(counts)], "exact": cross.exact, "method": cross.method}


def cmd_norm_probe(cfg: dict, out: Path, args) -> dict:
    """Coorbit / decomposition norm ratio bands over seeded random signals."""
    m = _map_from(cfg)
    delta = float(cfg.setdefault("delta", 0.125))
    r = float(cfg.setdefault("r", 2.0))
    n = int(cfg.setdefault("n_signals", 10))
    spec = cfg.setdefault("signal", {"generator": "random", "N": 2048, "L": 64.0, "band": 6.0})
    limit = float(cfg.setdefault("band_limit", 16.0))
    pairs = [(_exponent(p), _exponent(q)) for p, q in cfg.setdefault("pq", [[2, 2], [1, "inf"], ["inf", 1]])]
    sigs = [random_bandlimited(m.dim, int(spec.get("N", 2048)), float(spec.get("L", 64.0)), float(spec.get("band", 6.0)), args.seed + i) for i in range(n)]
    results = []
    rows = []
    ok = True
    for p, q in pairs:
        res = norm_equivalence_probe(sigs, m, None, p, q, delta, r, workers=args.threads)
        results.append(res.to_dict())
        ok = ok and res.band_width <= limit
        for row in res.rows:
            rows.append([p, q, row.get("signal_id"), row.get("coorbit"), row.get("decomposition"), row.get("ratio")])
    _write_csv(out / "norm_probe.csv", ["p", "q", "signal_id", "coorbit", "decomposition", "ratio"], rows)
    report = {"probes": results, "band_limit": limit}
    if not ok:
        raise VerificationFailure(report)
    return report


COMMANDS: dict[str, Callable] = {
    "covering-report": cmd_covering_report,
    "embed-check": cmd_embed_check,
    "transform": cmd_transform,
    "parseval": cmd_parseval,
    "alpha-verify": cmd_alpha_verify,
    "besov-compare": cmd_besov_compare,
    "norm-probe": cmd_norm_probe,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="warpcoorbit", description="Warped time-frequency coverings, transforms and embedding checks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=(fn.__doc__ or "").strip().splitlines()[0])
        p.add_argument("--config", type=Path, help="JSON config file (defaults are used when omitted)")
        p.add_argument("--out", type=Path, default=Path("."), help="output directory")
        p.add_argument("--seed", type=int, default=0, help="seed for randomized probes")
        p.add_argument("--threads", type=int, default=1, help="worker threads for per-channel FFTs")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    cfg: dict = {}
    args.config_dir = Path(".")
    if args.config is not None:
        try:
            cfg = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        if not isinstance(cfg, dict):
            print("config error: top level must be an object", file=sys.stderr)
            return EXIT_CONFIG
        args.config_dir = args.config.parent
    args.out.mkdir(parents=True, exist_ok=True)
    resolved = dict(cfg)
    code = EXIT_OK
    try:
        report = COMMANDS[args.command](resolved, args.out, args)
        status = "pass"
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        report, status, code = {"error": str(exc)}, "config-error", EXIT_CONFIG
    except VerificationFailure as exc:
        report, status, code = exc.args[0], "verification-failure", EXIT_VERIFY
    except NonConvergence as exc:
        report, status, code = exc.args[0], "non-convergence", EXIT_NONCONVERGENCE
    payload = {
        "command": args.command,
        "status": status,
        "config": {**resolved, "seed": args.seed, "threads": args.threads},
        "version": __version__,
        "report": report,
    }
    _write_json(args.out / f"{args.command}.json", payload)
    if code == EXIT_OK:
        log.info("%s: pass", args.command)
    return code


if __name__ == "__main__":
    sys.exit(main())
