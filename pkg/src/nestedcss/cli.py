"""Command-line entry point: ``nestedcss <subcommand> ...``.

Exit codes: 0 success, 2 usage, 3 domain error, 4 certification failure.
Errors are printed to stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import __version__
from . import certify as cert
from . import construct, enumerators, gf2, scan
from .ensemble import BalancedTriple, DegreeProfile, Mode, SamplerConfig, sample_regular

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_CERT = 0, 2, 3, 4
RANDOMIZED = {"sample", "build", "verify", "oracle"}


class UsageError(Exception):
    pass


class CertificationFailure(Exception):
    def __init__(self, payload: dict):
        super().__init__("certification failed")
        self.payload = payload


@dataclass
class RunConfig:
    subcommand: str
    seed: int | None = None
    mode: str = Mode.MOD2.value
    out: str | None = None
    fmt: str = "json"
    threads: int = 1
    timestamp: bool = True
    strict: bool = False
    min_width: float = cert.DEFAULT_MIN_WIDTH
    max_boxes: int = cert.DEFAULT_MAX_BOXES
    extra: dict = field(default_factory=dict)


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors become JSON with exit code 2
        raise UsageError(message)


def _profile_args(p):
    p.add_argument("--jz", type=int, required=True)
    p.add_argument("--kz", type=int, required=True)
    p.add_argument("--jd", type=int, default=0)
    p.add_argument("--kd", type=int, default=0)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=int, required=True)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="nestedcss", description="Nested LDPC-CSS toolkit")
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("--config", help="TOML file with default flag values (flags take precedence)")
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int)
    common.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.MOD2.value)
    common.add_argument("--out", "-o")
    common.add_argument("--format", dest="fmt", choices=["json", "csv"], default="json")
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    common.add_argument("--no-timestamp", dest="timestamp", action="store_false")
    common.add_argument("--strict", action="store_true", help="require explicit --seed for randomized commands")
    common.add_argument("--min-width", type=float, default=cert.DEFAULT_MIN_WIDTH)
    common.add_argument("--max-boxes", type=int, default=cert.DEFAULT_MAX_BOXES)
    sub = ap.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    p = sub.add_parser("sample", parents=[common], help="sample one configuration-model matrix as F2M")
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--k-row", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--stream", type=int, default=0)

    p = sub.add_parser("build", parents=[common], help="build an instance and report rates")
    _profile_args(p)
    p.add_argument("--stream", type=int, default=0)
    p.add_argument("--matrices", help="directory for F2M dumps of A_Z, A_Delta, B, H_Z, H_X")

    p = sub.add_parser("verify", parents=[common], help="CSS and affine-system checks over seeded instances")
    _profile_args(p)
    p.add_argument("--instances", type=int, default=1)
    p.add_argument("--trials", type=int, default=8)

    p = sub.add_parser("enum", parents=[common], help="exact enumerator queries")
    p.add_argument("what", choices=["outer", "transition", "stacked", "ha-bound"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--jz", type=int, default=0)
    p.add_argument("--jd", type=int, default=0)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--s", type=int, default=0)
    p.add_argument("--l", type=int)
    p.add_argument("--t1", type=int, default=0)
    p.add_argument("--td", type=int, default=0)
    p.add_argument("--w", type=int, default=0)
    p.add_argument("--syndrome", choices=["even", "ones"], default="even")

    p = sub.add_parser("oracle", parents=[common], help="Monte Carlo check of the stacked support probability")
    p.add_argument("--triple", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--t1", type=int, required=True)
    p.add_argument("--td", type=int, default=0)
    p.add_argument("--w", type=int, required=True)
    p.add_argument("--samples", type=int, default=10**5)
    p.add_argument("--syndrome", choices=["even", "ones"], default="even")

    p = sub.add_parser("certify", parents=[common], help="rigorous certificates")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--triple")
    g.add_argument("--all-tables", action="store_true")
    g.add_argument("--boundary", type=int)
    g.add_argument("--psi", type=int)
    p.add_argument("--tables", action="store_true", help="use the published constants for --triple")
    p.add_argument("--beta-z", type=float)
    p.add_argument("--delta-bar", type=float)
    p.add_argument("--beta-x", type=float)

    p = sub.add_parser("scan", parents=[common], help="classify the search window")
    p.add_argument("--window", action="store_true", required=True)

    sub.add_parser("figure", parents=[common], help="figure data CSV (runs the window scan)")

    p = sub.add_parser("tables", parents=[common], help="table reproduction CSV")
    p.add_argument("which", choices=["D", "E", "F"])
    return ap


def _load_config(argv: list[str]) -> dict:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return {}
    with open(known.config, "rb") as fh:
        return tomllib.load(fh)


def parse(argv: list[str]) -> tuple[argparse.Namespace, RunConfig]:
    ap = build_parser()
    defaults = _load_config(argv)
    ns = ap.parse_args(argv)
    given = {a.split("=")[0].lstrip("-").replace("-", "_") for a in argv if a.startswith("--")}
    for key, val in defaults.items():
        key = key.replace("-", "_")
        if key not in given and hasattr(ns, key):
            setattr(ns, key, val)
    if ns.threads < 1:
        raise UsageError("--threads must be >= 1")
    rc = RunConfig(ns.subcommand, getattr(ns, "seed", None), ns.mode, ns.out, ns.fmt, ns.threads,
                   ns.timestamp, ns.strict, ns.min_width, ns.max_boxes)
    if ns.subcommand in RANDOMIZED and rc.seed is None:
        if rc.strict:
            raise UsageError(f"{ns.subcommand} requires --seed under --strict")
        rc.seed = 0
    return ns, rc


def _emit(rc: RunConfig, text: str) -> None:
    if rc.out:
        Path(rc.out).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _json(obj, rc: RunConfig) -> str:
    if isinstance(obj, dict):
        obj = {"toolkit": f"nestedcss {__version__}", **obj}
        if rc.timestamp:
            obj["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    return json.dumps(obj, indent=2, sort_keys=True, default=_default)


def _default(o):
    if isinstance(o, Fraction):
        return str(o)
    if hasattr(o, "to_json"):
        return o.to_json()
    raise TypeError(type(o).__name__)


def _profile(ns) -> DegreeProfile:
    return DegreeProfile(ns.jz, ns.kz, ns.jd, ns.kd, ns.k, ns.n)


# subcommands

def cmd_sample(ns, rc):
    M = sample_regular(ns.j, ns.k_row, ns.n, SamplerConfig(rc.seed, rc.mode), ns.stream)
    _emit(rc, gf2.dumps_f2m(M))


def cmd_build(ns, rc):
    inst = construct.build_instance(_profile(ns), SamplerConfig(rc.seed, rc.mode), ns.stream)
    rep = construct.instance_report(inst)
    if ns.matrices:
        d = Path(ns.matrices)
        d.mkdir(parents=True, exist_ok=True)
        pair = construct.compressed_pair(inst)
        for name, M in (("A_Z", inst.A_Z), ("A_Delta", inst.A_Delta), ("B", inst.B),
                        ("H_Z", pair.H_Z), ("H_X", pair.H_X)):
            gf2.write_f2m(M, d / f"{name}.f2m")
        rep["matrices"] = str(d)
    _emit(rc, _json(rep, rc))


def cmd_verify(ns, rc):
    p = _profile(ns)
    rows = []
    for i in range(ns.instances):
        inst = construct.build_instance(p, SamplerConfig(rc.seed, rc.mode), i)
        css = construct.verify_css(inst)
        rr = construct.rate_report(inst)
        aff = construct.affine_equivalence(inst, rc.seed + i, ns.trials)
        rows.append({"stream": i, "css_ok": bool(css), "css_reason": css.reason,
                     "compressed_ok": construct.check_compressed(inst), "L_X_le_L_Z": rr.L_X <= rr.L_Z,
                     "affine": aff, "rates": rr.to_json()})
    ok = all(r["css_ok"] and r["compressed_ok"] and r["affine"]["ok"] for r in rows)
    _emit(rc, _json({"ok": ok, "instances": rows}, rc))
    if not ok:
        raise ValueError("verification failed")


def cmd_enum(ns, rc):
    q = ns.what
    if q == "outer":
        val = enumerators.outer_enum(ns.n, ns.jz, ns.k, ns.s)
    elif q == "transition":
        if ns.l is None:
            val = [enumerators.transition_kernel(ns.n, ns.k, ns.s, l) for l in range(ns.n + 1)]
        else:
            val = enumerators.transition_kernel(ns.n, ns.k, ns.s, ns.l)
    elif q == "ha-bound":
        val = enumerators.ha_mean_bound(ns.n, ns.jz, ns.k, ns.l if ns.l is not None else ns.s)
    else:
        t = BalancedTriple(ns.jz, ns.jz + ns.jd, ns.k)
        val = enumerators.stacked_mean(t, ns.n, ns.t1, ns.td, ns.w, ns.syndrome)
    if isinstance(val, list):
        out = {"query": q, "values": [str(v) for v in val], "floats": [float(v) for v in val]}
    else:
        out = {"query": q, "value": str(val), "float": float(val)}
    _emit(rc, _json(out, rc))


def cmd_oracle(ns, rc):
    t = BalancedTriple.parse(ns.triple)
    exact = enumerators.support_probability(t, ns.n, ns.t1, ns.td, ns.w, ns.syndrome)
    est, se = enumerators.mc_support_prob(t, ns.n, ns.t1, ns.td, ns.w, ns.samples, rc.seed, syndrome=ns.syndrome)
    z = abs(est - float(exact)) / se if se > 0 else (0.0 if est == float(exact) else float("inf"))
    _emit(rc, _json({"triple": str(t), "exact": str(exact), "exact_float": float(exact), "mc": est,
                     "se": se, "z": z, "within_3sigma": z <= 3}, rc))


def _cert_kw(rc):
    return {"min_width": rc.min_width, "max_boxes": rc.max_boxes}


def cmd_certify(ns, rc):
    certs: list[cert.Certificate] = []
    kw = _cert_kw(rc)
    if ns.psi is not None:
        certs.append(cert.psi_certify(ns.psi, max_boxes=rc.max_boxes))
    elif ns.boundary is not None:
        certs.extend(cert.boundary_certify(ns.boundary, **kw))
    elif ns.all_tables:
        from .tables import boundary_rows, ha_rows, mn_rows

        certs += [cert.ha_certify(r.triple, r.beta_Z, r.delta_bar, **kw) for r in ha_rows()]
        certs += [cert.mn_certify(r.triple, r.beta_X, **kw) for r in mn_rows()]
        for ha_r, _ in boundary_rows():
            certs.extend(cert.boundary_certify(ha_r.triple.j_Z, **kw))
    else:
        t = BalancedTriple.parse(ns.triple)
        if t.boundary:
            certs.extend(cert.boundary_certify(t.j_Z, **kw))
        else:
            from .tables import lookup

            ha_r, mn_r = lookup(t) if ns.tables else (None, None)
            bz = ns.beta_z if ns.beta_z is not None else (ha_r.beta_Z if ha_r else None)
            db = ns.delta_bar if ns.delta_bar is not None else (ha_r.delta_bar if ha_r else None)
            bx = ns.beta_x if ns.beta_x is not None else (mn_r.beta_X if mn_r else None)
            if bz is None or db is None or bx is None:
                ha, mn = scan.auto_certify(t)
                certs += [ha if bz is None or db is None else cert.ha_certify(t, bz, db, **kw),
                          mn if bx is None else cert.mn_certify(t, bx, **kw)]
            else:
                certs += [cert.ha_certify(t, bz, db, **kw), cert.mn_certify(t, bx, **kw)]
    ok = all(c.certified for c in certs)
    payload = {"ok": ok, "certificates": [c.to_json() for c in certs]}
    _emit(rc, _json(payload, rc))
    if not ok:
        raise CertificationFailure({"failed": [
            {"triple": c.triple, "side": c.side, "status": c.status, "reason": c.reason}
            for c in certs if not c.certified]})


def cmd_scan(ns, rc):
    recs = scan.scan_window(rc.threads)
    if rc.fmt == "csv":
        _emit(rc, scan.emit_scan(recs, rc.timestamp))
    else:
        _emit(rc, _json({"summary": scan.summary(recs), "records": [r.to_json() for r in recs]}, rc))


def cmd_figure(ns, rc):
    _emit(rc, scan.emit_figure_data(scan.scan_window(rc.threads), rc.timestamp))


def cmd_tables(ns, rc):
    _emit(rc, scan.emit_tables(ns.which, rc.timestamp))


COMMANDS = {
    "sample": cmd_sample, "build": cmd_build, "verify": cmd_verify, "enum": cmd_enum, "oracle": cmd_oracle,
    "certify": cmd_certify, "scan": cmd_scan, "figure": cmd_figure, "tables": cmd_tables,
}


def _fail(code: int, kind: str, msg: str, extra: dict | None = None) -> int:
    err = {"error": kind, "message": msg, "exit_code": code}
    err.update(extra or {})
    sys.stderr.write(json.dumps(err, sort_keys=True, default=str) + "\n")
    return code


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        ns, rc = parse(argv)
    except UsageError as e:
        return _fail(EXIT_USAGE, "usage", str(e))
    except SystemExit as e:  # --help / --version
        return int(e.code or 0)
    except (OSError, tomllib.TOMLDecodeError) as e:
        return _fail(EXIT_USAGE, "usage", str(e))
    try:
        COMMANDS[rc.subcommand](ns, rc)
    except CertificationFailure as e:
        return _fail(EXIT_CERT, "certification", str(e), e.payload)
    except UsageError as e:
        return _fail(EXIT_USAGE, "usage", str(e))
    except (ValueError, ArithmeticError, gf2.FormatError, OSError) as e:
        return _fail(EXIT_DOMAIN, "domain", f"{type(e).__name__}: {e}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
