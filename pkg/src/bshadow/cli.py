"""Batch command line: ``bshadow certify | shadow | plotdata``.

Exit codes: 0 success (including runs classified as invalid input), 1
malformed or missing input, 2 partial certification (budget or depth
limits), 3 a proof-backed check failed; a witness file is written next to
the report.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from .boundary import cover_for_l
from .errors import BShadowError, InvalidInput, TheoremViolation
from .geometry import (
    HyperbolicityCertificate,
    certify_delta,
    divergence_profile,
)
from .group import GroupContext, Segment, format_word
from .io import (
    MalformedFile,
    PACKAGED_PREFIX,
    load_certificate,
    load_group,
    load_json,
    load_constants,
    load_pseudo_orbit,
    save_json,
)
from .shadowing import (
    PseudoOrbit,
    ShadowingConstants,
    check_consistency,
    check_pseudo_orbit,
    derive_constants,
    shadow,
    verify_shadowing,
)

EXIT_OK, EXIT_MALFORMED, EXIT_PARTIAL, EXIT_THEOREM = 0, 1, 2, 3

CERTIFICATE_FILE = "certificate.json"
REPORT_FILE = "report.json"
WITNESS_FILE = "witness.json"

DELTA_HEADER = ["radius", "delta"]
DIVERGENCE_HEADER = ["pair", "t", "distance"]
SHADOW_HEADER = ["run", "depth", "distance"]

CONSTANT_DEFAULTS = {
    "l": 5,
    "l2g_radius": 8,
    "morse_radius": 8,
    "divergence_radius": 40,
    "divergence_samples": 500,
}
SHADOW_DEFAULTS = {"check_radius": 8, "chain_radius": 1, "consistency_radius": 1, "depth": None}


def thread_cap() -> int:
    """Parallelism cap from BSHADOW_THREADS (default 1)."""
    raw = os.environ.get("BSHADOW_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise MalformedFile(f"BSHADOW_THREADS:1: not an integer: {raw!r}") from None
    if n < 1:
        raise MalformedFile(f"BSHADOW_THREADS:1: must be at least 1, got {n}")
    return n


@dataclass
class RunConfig:
    command: str
    group: str | None = None
    out: Path = Path("bshadow-out")
    seed: int | None = None
    radius: int | None = None
    depth: int | None = None
    budget: int | None = None
    config_path: str | None = None
    body: dict = field(default_factory=dict)

    def resolve(self, ref: str) -> str:
        """Paths in a config file are relative to the config file."""
        if ref.startswith(PACKAGED_PREFIX) or Path(ref).is_absolute():
            return ref
        base = self.config_path or ""
        if base.startswith(PACKAGED_PREFIX):
            return PACKAGED_PREFIX + ref
        return str(Path(base).parent / ref) if base else ref


def build_config(args: argparse.Namespace) -> RunConfig:
    body: dict = {}
    if args.config:
        body, _, _ = load_json(args.config)
    cfg = RunConfig(
        command=args.command,
        out=Path(args.out),
        seed=args.seed if args.seed is not None else body.get("seed"),
        radius=args.radius if args.radius is not None else body.get("radius"),
        depth=args.depth if args.depth is not None else body.get("depth"),
        budget=args.budget if args.budget is not None else body.get("budget"),
        config_path=args.config,
        body=body,
    )
    if args.group:
        cfg.group = args.group
    elif "group" in body:
        cfg.group = cfg.resolve(body["group"])
    for name in ("seed", "radius", "depth", "budget"):
        v = getattr(cfg, name)
        if v is not None and (not isinstance(v, int) or isinstance(v, bool) or v < 0):
            raise MalformedFile(f"{args.config or '--' + name}:1: {name} must be a non-negative integer")
    return cfg


# -- helpers ---------------------------------------------------------------------


def _check_radius_fits(ctx: GroupContext, radius: int, what: str) -> None:
    if ctx.r_max is not None and radius > ctx.r_max:
        raise MalformedFile(f"--{what}:1: radius {radius} exceeds the group's r_max {ctx.r_max}")


def split_profiles(ctx: GroupContext, radius: int, pairs: int = 4) -> list[dict]:
    """Divergence profiles of normal-form geodesics that split after j letters.

    The first geodesic runs to the ShortLex-least element of the radius
    sphere; the j-th partner is the least element sharing exactly its first
    j letters.
    """
    if radius < 1:
        return []
    sphere = sorted(ctx.sphere(radius), key=ctx.shortlex_key)
    base = sphere[0]
    out = []
    for j in range(min(pairs, radius)):
        partner = next((y for y in sphere if y[:j] == base[:j] and y[j] != base[j]), None)
        if partner is None:
            continue
        c = Segment(1, tuple(ctx.reduce(base[:i]) for i in range(radius + 1)))
        c2 = Segment(1, tuple(ctx.reduce(partner[:i]) for i in range(radius + 1)))
        out.append({
            "c": format_word(base),
            "c_prime": format_word(partner),
            "split": j,
            "profile": divergence_profile(c, c2, ctx),
        })
    return out


def _constants_settings(cfg: RunConfig) -> dict:
    raw = cfg.body.get("constants")
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise MalformedFile(f"{cfg.config_path}:1: 'constants' must be an object")
    unknown = set(raw) - set(CONSTANT_DEFAULTS)
    if unknown:
        raise MalformedFile(f"{cfg.config_path}:1: unknown constants keys {sorted(unknown)}")
    return {**CONSTANT_DEFAULTS, **raw}


def _derive(cfg: RunConfig, ctx: GroupContext, cert: HyperbolicityCertificate, settings: dict) -> ShadowingConstants:
    if cfg.seed is None:
        raise MalformedFile(f"{cfg.config_path or '--seed'}:1: a seed is required to derive constants")
    return derive_constants(
        settings["l"], cert, ctx,
        l2g_radius=settings["l2g_radius"],
        morse_radius=settings["morse_radius"],
        divergence_radius=settings["divergence_radius"],
        divergence_samples=settings["divergence_samples"],
        seed=cfg.seed,
    )


def _load_group(cfg: RunConfig) -> GroupContext:
    if not cfg.group:
        raise MalformedFile("--group:1: no group file given")
    return load_group(cfg.group)


# -- certify ---------------------------------------------------------------------


def cmd_certify(cfg: RunConfig) -> int:
    """Certify delta (and the shadowing constants if configured); write certificate.json."""
    ctx = _load_group(cfg)
    radius = 8 if cfg.radius is None else cfg.radius
    _check_radius_fits(ctx, radius, "radius")
    settings = _constants_settings(cfg)
    cert = certify_delta(ctx, radius, budget=cfg.budget)
    doc = {
        "group": ctx.to_spec(),
        "delta": cert.to_json(),
        "divergence_profiles": split_profiles(ctx, radius),
        "seed": cfg.seed,
    }
    code = EXIT_OK
    notes = []
    if cert.truncated:
        code = EXIT_PARTIAL
        notes.append(f"triangle budget {cfg.budget} reached; delta is a lower bound")
    if settings and code == EXIT_OK:
        try:
            doc["constants"] = _derive(cfg, ctx, cert, settings).to_json()
        except (TheoremViolation, MalformedFile):
            raise
        except BShadowError as exc:
            code = EXIT_PARTIAL
            notes.append(f"constants not certified: {exc}")
    doc["status"] = "partial" if code == EXIT_PARTIAL else "certified"
    doc["notes"] = notes
    save_json(cfg.out / CERTIFICATE_FILE, doc)
    return code


# -- shadow ----------------------------------------------------------------------


def _shadow_settings(cfg: RunConfig) -> dict:
    raw = cfg.body.get("shadow") or {}
    if not isinstance(raw, dict):
        raise MalformedFile(f"{cfg.config_path}:1: 'shadow' must be an object")
    unknown = set(raw) - set(SHADOW_DEFAULTS)
    if unknown:
        raise MalformedFile(f"{cfg.config_path}:1: unknown shadow keys {sorted(unknown)}")
    out = {**SHADOW_DEFAULTS, **raw}
    if cfg.depth is not None:
        out["depth"] = cfg.depth
    return out


def _certificate_for(cfg: RunConfig, ctx: GroupContext) -> tuple[HyperbolicityCertificate, dict]:
    ref = cfg.body.get("certificate")
    if ref is not None:
        return load_certificate(cfg.resolve(ref))
    radius = 8 if cfg.radius is None else cfg.radius
    _check_radius_fits(ctx, radius, "radius")
    cert = certify_delta(ctx, radius, budget=cfg.budget)
    return cert, {"delta": cert.to_json()}


def _orbit_specs(cfg: RunConfig) -> list[dict]:
    specs = cfg.body.get("pseudo_orbits")
    if not isinstance(specs, list) or not specs:
        raise MalformedFile(f"{cfg.config_path}:1: config needs a non-empty 'pseudo_orbits' list")
    names = set()
    for n, spec in enumerate(specs):
        if not isinstance(spec, dict) or "name" not in spec:
            raise MalformedFile(f"{cfg.config_path}:1: pseudo_orbits[{n}] needs a 'name'")
        if spec["name"] in names:
            raise MalformedFile(f"{cfg.config_path}:1: duplicate pseudo-orbit name {spec['name']!r}")
        names.add(spec["name"])
    return specs


def _build_orbit(cfg: RunConfig, spec: dict, ctx: GroupContext, v_cover) -> PseudoOrbit:
    if "file" in spec:
        return load_pseudo_orbit(cfg.resolve(spec["file"]), ctx, v_cover)
    data = {
        "support_radius": spec["support_radius"],
        "generator": {
            "x0": spec["x0"],
            "noise_depth": spec.get("noise") or None,
            "seed": spec.get("seed", cfg.seed),
        },
        "points": spec.get("points", {}),
    }
    return PseudoOrbit.from_json(ctx, data, v_cover)


def _shadow_distances(result) -> list[int]:
    """d(c(t), ray(t)) between the constructed path and its straightening."""
    ctx = result.path.ctx
    path = result.path.values.values
    ray = result.ray.values
    return [ctx.distance(a, b) for a, b in zip(path, ray)]


def run_orbit(
    cfg: RunConfig, spec: dict, ctx: GroupContext, cert: HyperbolicityCertificate,
    constants: ShadowingConstants, settings: dict, u_cover, v_cover,
) -> dict:
    """One pseudo-orbit through check, shadow, verify and consistency."""
    out: dict = {"name": spec["name"]}
    seed = spec.get("seed", cfg.seed)
    try:
        po = _build_orbit(cfg, spec, ctx, v_cover)
    except InvalidInput as exc:
        return {**out, "classification": "invalid input", "reason": str(exc)}
    except (KeyError, TypeError) as exc:
        raise MalformedFile(f"{cfg.config_path}:1: pseudo-orbit {spec['name']!r}: bad entry {exc}") from None
    out["pseudo_orbit"] = po.to_json()
    stored = [p for p in po.overrides.values() if not p.is_exact]
    if stored or (po.x0 is not None and not po.x0.is_exact):
        out["notes"] = ["stored-ray points: neighbourhood predicates are certified over the constructed "
                        "representatives only, at stored depth"]
    try:
        ok, violations = check_pseudo_orbit(po, constants, cert, seed=seed or 0)
        out["pseudo_orbit_check"] = {"ok": ok, "violations": violations}
        if not ok:
            out["classification"] = "invalid input"
            out["reason"] = "pseudo-orbit fails the cover constraint"
            return out
        check_radius = settings["check_radius"]
        if check_radius > po.support_radius:
            raise InvalidInput(f"check radius {check_radius} exceeds support {po.support_radius}")
        res = shadow(po, constants, ctx, cert, settings["depth"], settings["chain_radius"])
        out["shadow"] = res.report
        out["shadow_profile"] = _shadow_distances(res)
        okv, info = verify_shadowing(po, res.point, u_cover, check_radius, ctx, cert, res.certified_depth)
        out["verify"] = {"ok": okv, "checked": info["checked"], "failures": info["failures"]}
        r = settings["consistency_radius"]
        pairs = [(g, ctx.mul(g, (s,))) for g in ctx.ball(r) for s in ctx.symbols]
        cons = check_consistency(po, constants, ctx, cert, pairs, settings["depth"], raise_on_fail=False)
        out["consistency"] = {
            "ok": cons["ok"],
            "pairs": len(cons["pairs"]),
            "failures": [p for p in cons["pairs"] if not p.get("ok")],
        }
        problems = []
        if not okv:
            problems.append({"check": "verify_shadowing", "failures": info["failures"]})
        if not cons["ok"]:
            problems.append({"check": "consistency", "failures": out["consistency"]["failures"]})
        if po.noise_depth is None and not po.overrides and po.x0 is not None and po.x0.is_exact:
            out["recovers_x0"] = res.point == po.x0
            if not out["recovers_x0"]:
                problems.append({"check": "zero-noise control", "x0": po.x0.text(), "shadow": res.point.text()})
        if problems:
            out["classification"] = "theorem failure"
            out["witness"] = problems
        else:
            out["classification"] = "pass"
    except TheoremViolation as exc:
        out["classification"] = "theorem failure"
        out["witness"] = [{"check": type(exc).__name__, "message": str(exc), "witness": exc.witness}]
    except InvalidInput as exc:
        out["classification"] = "invalid input"
        out["reason"] = str(exc)
    except BShadowError as exc:
        out["classification"] = "partial"
        out["reason"] = f"{type(exc).__name__}: {exc}"
    return out


def cmd_shadow(cfg: RunConfig) -> int:
    """Run every configured pseudo-orbit; write report.json (and witness.json on failures)."""
    ctx = _load_group(cfg)
    if not cfg.body:
        raise MalformedFile("--config:1: shadow needs a config file")
    if cfg.seed is None:
        raise MalformedFile(f"{cfg.config_path}:1: a seed is required for shadow runs")
    settings = _shadow_settings(cfg)
    cert, cert_doc = _certificate_for(cfg, ctx)
    if cert.truncated:
        raise MalformedFile(f"{cfg.config_path}:1: the certificate is budget-limited")
    wanted = _constants_settings(cfg) or dict(CONSTANT_DEFAULTS)
    constants = load_constants(cert_doc)
    if constants is None or constants.l != wanted["l"]:
        try:
            constants = _derive(cfg, ctx, cert, wanted)
        except (TheoremViolation, MalformedFile):
            raise
        except BShadowError as exc:
            report = {"command": "shadow", "status": "partial", "reason": str(exc),
                      "certificate": cert.to_json()}
            save_json(cfg.out / REPORT_FILE, report)
            return EXIT_PARTIAL
    u_cover = cover_for_l(constants.l, cert, ctx)
    v_cover = cover_for_l(constants.L, cert, ctx, kind="V-cover")
    runs = [run_orbit(cfg, spec, ctx, cert, constants, settings, u_cover, v_cover) for spec in _orbit_specs(cfg)]
    classes = [r["classification"] for r in runs]
    if "theorem failure" in classes:
        status, code = "theorem failure", EXIT_THEOREM
    elif "partial" in classes:
        status, code = "partial", EXIT_PARTIAL
    else:
        status, code = "ok", EXIT_OK
    report = {
        "command": "shadow",
        "seed": cfg.seed,
        "group": ctx.to_spec(),
        "certificate": cert.to_json(),
        "constants": constants.to_json(),
        "settings": settings,
        "covers": {"U": u_cover.to_json(), "V": v_cover.to_json()},
        "divergence_profiles": split_profiles(ctx, min(cert.radius_certified, 8)),
        "runs": runs,
        "status": status,
    }
    save_json(cfg.out / REPORT_FILE, report)
    if code == EXIT_THEOREM:
        bad = [{"name": r["name"], "witness": r.get("witness")} for r in runs if r["classification"] == "theorem failure"]
        save_json(cfg.out / WITNESS_FILE, {"command": "shadow", "seed": cfg.seed, "failures": bad})
    return code


# -- plotdata ----------------------------------------------------------------------


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def cmd_plotdata(cfg: RunConfig) -> int:
    """CSV tables from certificate.json / report.json found in the output directory."""
    docs = {}
    for name in (CERTIFICATE_FILE, REPORT_FILE):
        p = cfg.out / name
        if p.is_file():
            docs[name], _, _ = load_json(p)
    if not docs:
        raise MalformedFile(f"{cfg.out}:1: no {CERTIFICATE_FILE} or {REPORT_FILE} found")
    cert_doc = docs.get(CERTIFICATE_FILE)
    report = docs.get(REPORT_FILE, {})

    if cert_doc is not None:
        history = (cert_doc.get("delta") or {}).get("history", [])
        profiles = cert_doc.get("divergence_profiles", [])
    else:
        history = (report.get("certificate") or {}).get("history", [])
        profiles = report.get("divergence_profiles", [])

    _write_csv(cfg.out / "delta_vs_radius.csv", DELTA_HEADER, [[r, d] for r, d in history])
    rows = []
    for p in profiles:
        label = f"{p['c']}|{p['c_prime']}"
        rows += [[label, t, d] for t, d in enumerate(p["profile"], start=1)]
    _write_csv(cfg.out / "divergence_profile.csv", DIVERGENCE_HEADER, rows)
    rows = []
    for run in report.get("runs", []):
        rows += [[run["name"], t, d] for t, d in enumerate(run.get("shadow_profile", []), start=1)]
    _write_csv(cfg.out / "shadow_depth.csv", SHADOW_HEADER, rows)
    return EXIT_OK


# -- entry point -------------------------------------------------------------------

COMMANDS = {"certify": cmd_certify, "shadow": cmd_shadow, "plotdata": cmd_plotdata}


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bshadow", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--group", help="group file (JSON); builtin:NAME for shipped files")
    parser.add_argument("--config", help="run configuration (JSON)")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out", default="bshadow-out", help="output directory")
    parser.add_argument("--radius", type=int, help="ball radius for delta certification")
    parser.add_argument("--depth", type=int, help="construction depth for shadow runs")
    parser.add_argument("--budget", type=int, help="cap on the number of triangles scanned")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    start = time.perf_counter()
    try:
        thread_cap()
        cfg = build_config(args)
        code = COMMANDS[args.command](cfg)
    except MalformedFile as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    except InvalidInput as exc:
        print(f"error: {args.config or args.group or 'input'}:1: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    except TheoremViolation as exc:
        save_json(Path(args.out) / WITNESS_FILE, {"command": args.command, "error": type(exc).__name__,
                                                  "message": str(exc), "witness": exc.witness})
        print(f"theorem-backed check failed: {exc}", file=sys.stderr)
        return EXIT_THEOREM
    except BShadowError as exc:
        print(f"partial: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PARTIAL
    print(f"{args.command}: exit {code} in {time.perf_counter() - start:.1f}s", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
