"""Command line: ``frobwhit gen | verify | tensor | evolve``.

Every subcommand reads an optional JSON config; flags override it.  Outputs
are deterministic for a fixed config and seed.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import dataclass, field, fields
from itertools import product
from pathlib import Path

from . import frobenius as fb
from . import hierarchy as hy
from . import manifold as mf
from .suites import SUITES, Context, run_suites

log = logging.getLogger("frobwhit")


@dataclass
class RunConfig:
    m: int = 1
    n: int = 1
    seed: int = 1
    seeds: list | None = None
    I_max: int = mf.DEFAULT_IMAX
    K: int = mf.DEFAULT_WINDOW
    N: int = 256
    radius: float = 1.0
    M: int = hy.DEFAULT_M
    Nx: int = hy.DEFAULT_NX
    tolerances: dict = field(default_factory=dict)
    out: str | None = None
    loop: bool = False
    point_file: str | None = None
    loop_file: str | None = None
    tensor: str = "c"
    labels: list | None = None
    flow: str = "s1"
    dt: float = 0.01
    steps: int = 10
    monitor: list = field(default_factory=lambda: ["H1", "H2"])

    def __post_init__(self):
        if self.N < 4 or self.N & (self.N - 1):
            raise ValueError("N must be a power of two")
        if self.m < 1 or self.n < 1:
            raise ValueError("m and n must be positive")

    @classmethod
    def load(cls, path=None, **overrides):
        data = {}
        if path:
            data = json.loads(Path(path).read_text())
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**data)

    def seed_list(self):
        return list(self.seeds) if self.seeds else [self.seed]


def dumps(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


def _write(text: str, out):
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _label_list(cfg: RunConfig, m, n):
    if cfg.labels:
        return [mf.check_label(mf.CoordLabel.parse(s), m, n, cfg.I_max) for s in cfg.labels]
    return mf.all_labels(m, n, min(cfg.I_max, 3))


def _parse_flow(text: str):
    for kind in ("shat", "s"):
        if text.startswith(kind):
            return kind, int(text[len(kind) :])
    raise ValueError(f"bad flow {text!r}")


def _parse_monitor(text: str):
    for kind in ("Hhat", "H"):
        if text.startswith(kind):
            return kind, int(text[len(kind) :])
    raise ValueError(f"bad Hamiltonian {text!r}")


# --------------------------------------------------------------- commands


def cmd_gen(cfg: RunConfig) -> int:
    if cfg.loop:
        obj = hy.random_loop_point(cfg.m, cfg.n, seed=cfg.seed, Nx=cfg.Nx, M=cfg.M, K=cfg.K).to_json()
    else:
        p = mf.random_point(cfg.m, cfg.n, seed=cfg.seed, K=cfg.K, radius=cfg.radius, N=cfg.N)
        rep = mf.validate(p)
        if not rep.ok:
            log.error("generated point failed validation: %s", rep.to_json())
            return 1
        obj = p.to_json()
        obj["validation"] = rep.to_json()
    _write(dumps(obj), cfg.out)
    return 0


def _contexts(cfg: RunConfig):
    if cfg.point_file:
        obj = json.loads(Path(cfg.point_file).read_text())
        obj.pop("validation", None)
        p = mf.PointMN.from_json(obj)
        return [Context(p.m, p.n, cfg.seed, cfg.I_max, cfg.K, p.grid.N, p.grid.radius, cfg.M, cfg.tolerances, p)]
    return [
        Context(cfg.m, cfg.n, s, cfg.I_max, cfg.K, cfg.N, cfg.radius, cfg.M, dict(cfg.tolerances))
        for s in cfg.seed_list()
    ]


def cmd_verify(cfg: RunConfig, suite: str = "all"):
    reports = run_suites(_contexts(cfg), suite)
    _write(dumps([r.to_json() for r in reports]), cfg.out)
    for r in reports:
        log.info("%s %s %.2fs", r.check, r.params, r.wall)
    bad = [r for r in reports if not r.passed]
    for r in bad:
        log.error("FAIL %s %s residual=%.3e tol=%.1e %s", r.check, r.params, r.residual, r.tolerance, r.note)
    return reports, (0 if not bad else 1)


def tensor_rows(cfg: RunConfig, p: mf.PointMN):
    labels = _label_list(cfg, p.m, p.n)
    kind = cfg.tensor
    if kind == "gram":
        G = fb.flat_gram(p, labels)
        for (i, u), (j, v) in product(enumerate(labels), repeat=2):
            yield "gram", (str(u), str(v)), G[i, j]
    elif kind == "c":
        for u, v, w in product(labels, repeat=3):
            yield "c", (str(u), str(v), str(w)), fb.c_tensor(p, u, v, w)
    elif kind == "V1_hess":
        ts = [u for u in labels if u.kind == "t"]
        for u, v in product(ts, repeat=2):
            yield kind, (str(u), str(v)), fb.V1_hess(p, u.index, v.index)
    elif kind == "V2_hess":
        hs = [u for u in labels if u.kind == "h"]
        for u, v in product(hs, repeat=2):
            yield kind, (str(u), str(v)), fb.V2_hess(p, u.index, v.index)
    elif kind == "G_third":
        hs = [u for u in labels if u.kind != "t"]
        for u, v, w in product(hs, repeat=3):
            yield kind, (str(u), str(v), str(w)), fb.G_third(p, u, v, w)
    else:
        raise ValueError(f"unknown tensor {kind!r}")


def cmd_tensor(cfg: RunConfig) -> int:
    if cfg.point_file:
        p = mf.PointMN.from_json({k: v for k, v in json.loads(Path(cfg.point_file).read_text()).items() if k != "validation"})
    else:
        p = mf.random_point(cfg.m, cfg.n, seed=cfg.seed, K=cfg.K, radius=cfg.radius, N=cfg.N)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["quantity", "u", "v", "w", "re", "im"])
    for q, labs, val in tensor_rows(cfg, p):
        labs = list(labs) + [""] * (3 - len(labs))
        w.writerow([q, *labs, repr(float(val.real)), repr(float(val.imag))])
    _write(buf.getvalue(), cfg.out)
    return 0


def cmd_evolve(cfg: RunConfig) -> int:
    if cfg.loop_file:
        lp = hy.LoopPoint.from_json(json.loads(Path(cfg.loop_file).read_text()))
    else:
        lp = hy.random_loop_point(cfg.m, cfg.n, seed=cfg.seed, Nx=cfg.Nx, M=cfg.M, K=cfg.K)
    flow = _parse_flow(cfg.flow)
    mon = [_parse_monitor(s) for s in cfg.monitor]
    code = 0
    try:
        tr = hy.evolve(lp, flow, cfg.dt, cfg.steps, monitor=mon, keep=True)
    except hy.EvolutionError as exc:
        log.error("%s", exc)
        tr, code = exc.trajectory, 2
    traj = "".join(json.dumps(q.to_json(), sort_keys=True) + "\n" for q in tr.points)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    keys = list(tr.drift)
    w.writerow(["step", "time"] + [f"{k}_{c}" for k in keys for c in ("re", "im", "abs", "max_abs")])
    worst = {k: 0.0 for k in keys}
    for i in range(len(tr.times) - 1):
        row = [i + 1, repr(tr.times[i + 1])]
        for k in keys:
            d = complex(tr.drift[k][i])
            worst[k] = max(worst[k], abs(d))
            row += [repr(d.real), repr(d.imag), repr(abs(d)), repr(worst[k])]
        w.writerow(row)
    if cfg.out is None:
        sys.stdout.write(traj)
        sys.stderr.write(buf.getvalue())
    else:
        base = Path(cfg.out)
        base.with_suffix(".jsonl").write_text(traj)
        base.with_name(base.stem + "_drift.csv").write_text(buf.getvalue())
    return code


# ------------------------------------------------------------------ parser


def build_parser():
    ap = argparse.ArgumentParser(prog="frobwhit", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="cmd", required=True)
    for name in ("gen", "verify", "tensor", "evolve"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON run configuration")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", help="output path (stdout when omitted)")
        sp.add_argument("-m", type=int)
        sp.add_argument("-n", type=int)
        if name == "verify":
            sp.add_argument("--suite", default="all", choices=SUITES + ("all",))
        if name == "gen":
            sp.add_argument("--loop", action="store_true", default=None)
        if name == "evolve":
            sp.add_argument("--flow")
            sp.add_argument("--dt", type=float)
            sp.add_argument("--steps", type=int)
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    over = {"seed": args.seed, "out": args.out, "m": args.m, "n": args.n}
    for k in ("loop", "flow", "dt", "steps"):
        over[k] = getattr(args, k, None)
    try:
        cfg = RunConfig.load(args.config, **over)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        log.error("bad configuration: %s", exc)
        return 2
    if args.cmd == "gen":
        return cmd_gen(cfg)
    if args.cmd == "verify":
        return cmd_verify(cfg, args.suite)[1]
    if args.cmd == "tensor":
        return cmd_tensor(cfg)
    return cmd_evolve(cfg)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
