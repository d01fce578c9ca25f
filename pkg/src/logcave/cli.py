"""Command-line front door.

Subcommands: ``gen`` (seeded sample files), ``fit`` (samples -> log-concave
density), ``approx`` (explicit family -> piecewise-linear density), ``eval``
(distance between two densities), ``bench`` (scenario sweep to CSV), and
``selftest`` (dynamic program vs. exhaustive search on tiny instances).

Exit codes: 0 success, 2 success with warnings, 1 error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
import warnings

import numpy as np

from .constants import load_constants
from .errors import LogcaveError, ParseError
from .families import Contaminated, Family, PointMass, parse_family
from .oracle import TinyInstance, brute_force_best, tv_against
from .proper_fit import learn_logconcave
from .pwfunc import (DomainKind, PiecewiseLinearDensity, l1_distance,
                     load_density, save_density, tv_distance)
from .pwl_approx import LcOracle, pwl_approximate
from . import _kernels


# ---------------------------------------------------------------------------
# samples text format


def write_samples(path: str, values: np.ndarray, header: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# {header}\n")
        for v in values:
            fh.write(f"{float(v)!r}\n")


def read_samples(path: str) -> np.ndarray:
    values = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                values.append(float(line))
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: not a number: {line!r}") from exc
    if not values:
        raise ParseError(f"{path}: no samples found")
    return np.asarray(values, dtype=float)


def _parse_noise(spec: str):
    if spec.startswith("point:"):
        return PointMass(float(spec.partition(":")[2]))
    return parse_family(spec)


# ---------------------------------------------------------------------------
# subcommands


def cmd_gen(args) -> int:
    fam = parse_family(args.family)
    source = fam
    header = f"family={fam.spec_string()} n={args.n} seed={args.seed}"
    if args.eta > 0.0:
        noise = _parse_noise(args.noise)
        source = Contaminated(base=fam, noise=noise, eta=args.eta)
        noise_spec = (f"point:{noise.location!r}" if isinstance(noise, PointMass)
                      else noise.spec_string())
        header += f" eta={args.eta!r} noise={noise_spec}"
    values = source.sample(args.n, args.seed)
    write_samples(args.output, values, header)
    return 0


def cmd_fit(args) -> int:
    consts = load_constants(args.constants)
    domain = DomainKind.INTEGER if args.domain == "int" else DomainKind.REAL
    samples = read_samples(args.input)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        h, report = learn_logconcave(samples, args.epsilon, domain, consts)
    save_density(h, args.output)
    if args.report:
        data = report.to_dict()
        data["seed"] = args.seed
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump(data, fh, indent=1)
            fh.write("\n")
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    return 2 if caught else 0


def cmd_approx(args) -> int:
    consts = load_constants(args.constants)
    fam = parse_family(args.family)
    dens = pwl_approximate(LcOracle.from_family(fam), args.epsilon, consts)
    save_density(dens, args.output)
    return 0


def cmd_eval(args) -> int:
    a = load_density(args.density)
    if args.family is not None:
        fam = parse_family(args.family)
        tv = tv_against(a, fam)
        l1 = 2.0 * tv
    else:
        if args.other is None:
            raise ParseError("eval needs a second density file or --family")
        b = load_density(args.other)
        l1 = l1_distance(a, b)
        tv = 0.5 * l1
    print(f"tv {tv:.6f}")
    print(f"l1 {l1:.6f}")
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump({"tv": tv, "l1": l1}, fh, indent=1)
            fh.write("\n")
    return 0


def cmd_bench(args) -> int:
    consts = load_constants(args.constants)
    with open(args.scenario, "r", encoding="utf-8") as fh:
        try:
            scenario = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{args.scenario}: {exc}") from exc
    families = [parse_family(s) for s in scenario["families"]]
    epsilons = [float(e) for e in scenario["epsilons"]]
    ns = [int(n) for n in scenario["ns"]]
    seeds = [int(s) for s in scenario["seeds"]]
    eta = float(scenario.get("eta", 0.0))
    noise = _parse_noise(scenario["noise"]) if eta > 0.0 else None

    rows = []
    for fam in families:
        source = Contaminated(fam, noise, eta) if noise is not None else fam
        for eps in epsilons:
            for n in ns:
                for seed in seeds:
                    row = {"family": fam.spec_string(), "eps": repr(eps),
                           "n": n, "seed": seed, "tv": "", "wall_time": "",
                           "num_vertices": "", "num_edges": "", "status": "ok"}
                    try:
                        samples = source.sample(n, seed)
                        t0 = time.perf_counter()
                        with warnings.catch_warnings():
                            warnings.simplefilter("ignore")
                            h, report = learn_logconcave(samples, eps,
                                                         fam.domain, consts)
                        elapsed = time.perf_counter() - t0
                        row["tv"] = f"{tv_against(h, fam):.6f}"
                        row["wall_time"] = f"{elapsed:.6f}"
                        row["num_vertices"] = report.num_vertices
                        row["num_edges"] = report.num_edges
                    except LogcaveError as exc:
                        row["status"] = type(exc).__name__
                    rows.append(row)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["family", "eps", "n", "seed",
                                                "tv", "wall_time",
                                                "num_vertices", "num_edges",
                                                "status"])
        writer.writeheader()
        writer.writerows(rows)
    return 0


def random_tiny_instance(rng: np.random.Generator,
                         domain: DomainKind | None = None) -> TinyInstance:
    """A random fit problem small enough for exhaustive enumeration."""
    from .grid import FitGrid

    if domain is None:
        domain = DomainKind.REAL if rng.random() < 0.5 else DomainKind.INTEGER
    k = int(rng.integers(2, 5))
    eps = 0.25
    step = eps / k
    L = 1.0 if domain is DomainKind.INTEGER else float(rng.uniform(0.4, 0.9))
    alpha = -0.5 * k * L
    if domain is DomainKind.INTEGER:
        alpha = float(np.floor(alpha))
    m_lo = -int(rng.integers(2, 5))
    m_hi = int(rng.integers(0, 3))
    codes: dict[int, tuple[int, int]] = {}
    for c in range(2):
        for b in range(-3, 4):
            codes.setdefault(b * (1 << c), (b, c))
    keys = sorted(codes)
    grid = FitGrid(domain=domain, alpha=alpha, beta=alpha + k * L, k=k,
                   cell_length=L, eps=eps, m_lo=m_lo, m_hi=m_hi,
                   shifts=np.array([key * step for key in keys]),
                   shift_codes=tuple(codes[key] for key in keys))

    n_pieces = int(rng.integers(1, 4))
    if domain is DomainKind.INTEGER:
        lo = int(alpha) - 1
        width = k + 3
        cuts = np.sort(rng.choice(np.arange(lo + 1, lo + width), size=n_pieces - 1,
                                  replace=False)) if n_pieces > 1 else np.array([])
        bps = np.concatenate([[lo], cuts, [lo + width]])
    else:
        span = k * L + 2.0
        inner = np.sort(rng.uniform(0.05, 0.95, size=n_pieces - 1)) * span
        bps = np.concatenate([[alpha - 1.0], alpha - 1.0 + inner,
                              [alpha - 1.0 + span]])
    pieces = [(0.0, float(rng.uniform(0.1, 1.0))) for _ in range(n_pieces)]
    g = PiecewiseLinearDensity(domain, bps, pieces).normalize()
    return TinyInstance(grid=grid, g=g, scale=1.0)


def cmd_selftest(args) -> int:
    from .dp import shortest_path_fit

    rng = np.random.default_rng(args.seed)
    worst = 0.0
    failures = 0
    for trial in range(args.instances):
        inst = random_tiny_instance(rng)
        table = inst.errors()
        result = shortest_path_fit(inst.g, inst.grid, scale=inst.scale,
                                   errors=table)
        _, best = brute_force_best(inst, errors=table)
        gap = abs(result.cost - best)
        worst = max(worst, gap)
        if gap > 1e-9:
            failures += 1
            print(f"instance {trial}: dp cost {result.cost!r} "
                  f"!= exhaustive {best!r}")
    verdict = "ok" if failures == 0 else "FAIL"
    print(f"selftest {verdict}: {args.instances} instances, "
          f"{failures} mismatches, worst gap {worst:.3e}, "
          f"backend {_kernels.BACKEND}")
    return 0 if failures == 0 else 1


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="logcave",
        description="Agnostic proper learning of univariate log-concave densities.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("gen", help="write a seeded sample file")
    p.add_argument("--family", required=True, help="e.g. gaussian:0,1")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)
    p.add_argument("--eta", type=float, default=0.0,
                   help="contamination fraction")
    p.add_argument("--noise", default="uniform:-10,10",
                   help="contamination source; family spec or point:LOC")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("fit", help="learn a log-concave density from samples")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--domain", choices=["real", "int"], default="real")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--report", default=None)
    p.add_argument("--constants", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("approx",
                       help="piecewise-linear approximation of a known family")
    p.add_argument("--family", required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--constants", default=None)
    p.set_defaults(func=cmd_approx)

    p = sub.add_parser("eval", help="distance between two densities")
    p.add_argument("density")
    p.add_argument("other", nargs="?", default=None)
    p.add_argument("--family", default=None)
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="run a scenario sweep to CSV")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--constants", default=None)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("selftest",
                       help="compare the fitter against exhaustive search")
    p.add_argument("--instances", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_selftest)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except LogcaveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
