"""Command-line front end.

    picard build phi0 --order 4
    picard hecke big_phi0 T 1+3r
    picard hecke s1_10 Tm 2 --span
    picard verify all --order 16
    picard cache compute --norms-up-to 49
    picard tables hecke
    picard restrict phi0 --order 4

Exit status: 0 success, 2 verification failure, 3 missing operator cache,
4 reconstruction failure.
"""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional

from . import catalog as cat
from . import hecke, structure
from .eisenstein import EisensteinInteger, is_prime, split_prime
from .fj import TruncationTooShallow, restrict_to_curve
from .theta import (
    DEFAULT_BOUND,
    LockHeld,
    MissingOperatorTable,
    OperatorTable,
    PrecisionExhausted,
    ReconstructionFailed,
)

EXIT_OK = 0
EXIT_VERIFY = 2
EXIT_NO_CACHE = 3
EXIT_RECONSTRUCTION = 4


def default_cache_path() -> Path:
    env = os.environ.get("PICARD_CACHE")
    if env:
        return Path(env)
    base = Path(os.environ.get("XDG_CACHE_HOME", Path.home() / ".cache"))
    return base / "picard" / "operators.txt"


@dataclass
class Config:
    W: int = 32
    precision_bits: int = 256
    denominator_bound: int = DEFAULT_BOUND
    cache_path: Optional[Path] = None
    output_format: str = "human"

    def validate(self):
        if self.W < 8:
            raise ValueError("W must be at least 8")
        if self.precision_bits < 128:
            raise ValueError("precision_bits must be at least 128")
        if self.output_format not in ("human", "delimited"):
            raise ValueError("output_format is human or delimited")

    @classmethod
    def from_file(cls, path) -> Config:
        cfg = cls()
        types = {f.name: f.type for f in fields(cls)}
        for raw in Path(path).read_text(encoding="utf-8").splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if not sep or key not in types:
                raise ValueError(f"bad config line: {raw!r}")
            if key in ("W", "precision_bits", "denominator_bound"):
                setattr(cfg, key, int(value))
            elif key == "cache_path":
                cfg.cache_path = Path(value)
            else:
                setattr(cfg, key, value)
        return cfg


def load_config(args) -> Config:
    cfg = Config.from_file(args.config) if args.config else Config()
    # flags win over the file
    if args.order is not None:
        cfg.W = args.order
    if args.precision is not None:
        cfg.precision_bits = args.precision
    if args.denominator_bound is not None:
        cfg.denominator_bound = args.denominator_bound
    if args.cache is not None:
        cfg.cache_path = Path(args.cache)
    if args.format is not None:
        cfg.output_format = args.format
    if cfg.cache_path is None:
        cfg.cache_path = default_cache_path()
    cfg.validate()
    return cfg


def make_table(cfg: Config, allow_compute: bool) -> OperatorTable:
    table = OperatorTable.default(cfg.cache_path, precision_bits=cfg.precision_bits,
                                  denominator_bound=cfg.denominator_bound)
    table.allow_compute = allow_compute
    return table


def _emit(cfg: Config, human: str, delimited: str):
    print(delimited if cfg.output_format == "delimited" else human)


# -- subcommands --------------------------------------------------------------

def cmd_build(args, cfg: Config) -> int:
    table = make_table(cfg, args.compute)
    c = cat.Catalog(cfg.W, table)
    form = c.build(args.name)
    if cfg.output_format == "delimited":
        print(f"{form.name}|{form.j}|{form.k}|{form.ell}|{form.last.valid_to}")
        for line in form.last.serialize():
            print("|".join(line.split(" ", 4)))
    else:
        print(f"{form.name}  weight ({form.j},{form.k})  det^{form.ell}  valid to w^{form.last.valid_to}")
        print(form.last.pretty(args.show))
    table.flush()
    return EXIT_OK


def cmd_hecke(args, cfg: Config) -> int:
    table = make_table(cfg, args.compute)
    c = cat.Catalog(cfg.W, table)
    T = hecke.HeckeOperator.parse(args.kind, args.alpha)
    if args.span:
        span = cat.build_span(c, args.form)
        for piece in hecke.eigenvalues_on_pieces(span, T, table):
            for line in piece.lines(args.form):
                _emit(cfg, line.replace("|", "  "), line)
    else:
        try:
            rep = hecke.eigenvalue(c.build(args.form), T, table, n_checks=args.checks)
        except (hecke.NotAnEigenform, hecke.AllCoefficientsZero) as exc:
            print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
            return EXIT_VERIFY
        _emit(cfg, hecke.format_value(rep.eigenvalue), rep.line())
    table.flush()
    return EXIT_OK


def _verify_lines(suite: str, cfg: Config, table: OperatorTable):
    """Yield (line, passed) for every claim in the suite."""
    c = cat.Catalog(cfg.W, table)
    names = []
    if suite in ("all", "identities"):
        names += [("identity", n) for n in cat.IDENTITY_NAMES]
    if suite in ("all", "structure"):
        names += [("structure", n) for n in structure.STRUCTURE_CHECKS]
    if suite in ("all", "hecke"):
        names += [("hecke", e) for e in hecke.TABULATED]
    if not names:
        if suite in cat.IDENTITY_NAMES:
            names = [("identity", suite)]
        elif suite in structure.STRUCTURE_CHECKS:
            names = [("structure", suite)]
        elif any(e.claim == suite for e in hecke.TABULATED):
            names = [("hecke", e) for e in hecke.TABULATED if e.claim == suite]
        else:
            raise cat.UnknownForm(suite)
    catalogs = {cfg.W: c}
    span_cache = hecke._SpanCache()
    for kind, name in names:
        if kind == "identity":
            rep = cat.verify_identity(name, c)
            yield rep.line(), rep.passed
        elif kind == "structure":
            for rep in structure.run_structure_check(c, name):
                yield rep.line(), rep.passed
        else:
            W = max(cfg.W, name.min_W)
            if W not in catalogs:
                catalogs[W] = cat.Catalog(W, table)
            rep = hecke.check_tabulated(name, catalogs[W], span_cache)
            yield rep.line(), rep.passed


def cmd_verify(args, cfg: Config) -> int:
    table = make_table(cfg, args.compute)
    failed = 0
    for line, ok in _verify_lines(args.suite, cfg, table):
        failed += not ok
        _emit(cfg, line.replace("|", "  "), line)
    table.flush()
    return EXIT_VERIFY if failed else EXIT_OK


def _needed_alphas(norm_bound: int) -> list[EisensteinInteger]:
    """nu and conj(nu) for split p, and -p for inert p, with norm up to the bound."""
    out = []
    for p in range(2, norm_bound + 1):
        if not is_prime(p) or p == 3:
            continue
        if p % 3 == 1:
            nu = split_prime(p)
            out += [nu, nu.conjugate()]
        elif p * p <= norm_bound:
            out.append(EisensteinInteger(-p, 0))
    return out


def cmd_cache(args, cfg: Config) -> int:
    if args.action == "list":
        table = make_table(cfg, False)
        keys = set(table.m_images) | {a for a, _ in table.t_images}
        for k in sorted(keys, key=lambda s: (EisensteinInteger.coerce(s).norm(), s)):
            N = EisensteinInteger.coerce(k).norm()
            m_txt = "yes" if k in table.m_images else "-"
            degs = ",".join(str(n) for n in sorted(n for (a, n) in table.t_images if a == k)) or "-"
            _emit(cfg, f"{k:>10}  N={N:<4} m {m_txt:<3}  t degrees {degs}",
                  f"{k}|{N}|{m_txt}|{degs}|{table.precision_bits}")
        return EXIT_OK
    refresh = args.action == "refresh" or args.refresh
    if refresh:
        table = OperatorTable(precision_bits=cfg.precision_bits, denominator_bound=cfg.denominator_bound)
        table.cache_path = cfg.cache_path
    else:
        table = make_table(cfg, True)
    table.allow_compute = True
    for a in _needed_alphas(args.norms_up_to):
        table.m(a)
        for n in range(1, cfg.W // a.norm() + 1):
            table.t(a, n)
        _emit(cfg, f"{a}: m and t up to degree {cfg.W // a.norm()}",
              f"{a}|{a.norm()}|{cfg.W // a.norm()}")
    table._dirty = True
    table.save(cfg.cache_path, blocking=not args.no_wait)
    return EXIT_OK


def cmd_tables(args, cfg: Config) -> int:
    if args.which == "dims":
        # j is fixed by the family; gamma1 is shown at j = 1
        js = {"gamma1": 1, "s1_gamma1": 1, "s1_det": 1, "s2": 2, "m2_det2": 2, "m3": 3, "s3": 3}
        for fam, (desc, _) in structure.DIM_FAMILIES.items():
            vals = []
            for k in range(args.k_max + 1):
                try:
                    vals.append(str(structure.dim_formula(fam, js.get(fam), k, args.ell)))
                except (structure.OutOfStatedRange, structure.FormulaUnavailable, ValueError, TypeError):
                    vals.append("-")
            _emit(cfg, f"{fam:>14}  {' '.join(v.rjust(4) for v in vals)}", f"{fam}|" + "|".join(vals))
        return EXIT_OK
    table = make_table(cfg, args.compute)
    ops = [hecke.HeckeOperator.parse(*o.split(":")) for o in args.ops.split(",")]
    for name in (args.spans.split(",") if args.spans else cat.SPAN_NAMES):
        c = cat.Catalog(cfg.W, table)
        pieces = structure.isotypic_pieces(cat.build_span(c, name))
        for T in ops:
            try:
                found = hecke.eigenvalues_on_pieces(None, T, table, pieces)
            except TruncationTooShallow as exc:
                _emit(cfg, f"{name}  {T}  needs a larger --order ({exc})", f"{name}|{T}|TruncationTooShallow")
                continue
            for piece in found:
                for line in piece.lines(name):
                    _emit(cfg, line.replace("|", "  "), line)
    table.flush()
    return EXIT_OK


def cmd_restrict(args, cfg: Config) -> int:
    table = make_table(cfg, args.compute)
    c = cat.Catalog(cfg.W, table)
    form = c.build(args.name)
    if form.j != 0:
        raise ValueError("restriction is defined for scalar forms")
    q = restrict_to_curve(form.last)
    upto = len(q) - 1 if args.show is None else min(args.show, len(q) - 1)
    coeffs = q.coeffs[: upto + 1]
    _emit(cfg, str(type(q)(coeffs)), "|".join(hecke.format_value(x) for x in coeffs))
    return EXIT_OK


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value config file")
    common.add_argument("--order", type=int, help="truncation W")
    common.add_argument("--precision", type=int, help="working precision in bits")
    common.add_argument("--denominator-bound", type=int)
    common.add_argument("--cache", help="operator cache file")
    common.add_argument("--format", choices=("human", "delimited"))
    common.add_argument("--compute", action="store_true", help="compute missing operator tables")

    parser = argparse.ArgumentParser(prog="picard", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", parents=[common], help="print the FJ expansion of a named form")
    p.add_argument("name")
    p.add_argument("--show", type=int, help="print coefficients up to w^SHOW")
    p.set_defaults(fn=cmd_build)

    p = sub.add_parser("hecke", parents=[common], help="Hecke eigenvalue of a form or a span")
    p.add_argument("form")
    p.add_argument("kind", choices=("T", "Tm"))
    p.add_argument("alpha", help="nu as a+b*r for T, p for Tm")
    p.add_argument("--checks", type=int, default=2, help="certified coefficients required")
    p.add_argument("--span", action="store_true", help="treat FORM as a span name")
    p.set_defaults(fn=cmd_hecke)

    p = sub.add_parser("verify", parents=[common], help="check identities, structure claims, tables")
    p.add_argument("suite", help="all, identities, structure, hecke, or a claim id")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("cache", parents=[common], help="manage the operator cache")
    p.add_argument("action", choices=("list", "compute", "refresh"))
    p.add_argument("--norms-up-to", type=int, default=49)
    p.add_argument("--refresh", action="store_true", help="recompute entries already cached")
    p.add_argument("--no-wait", action="store_true", help="fail instead of waiting for the lock")
    p.set_defaults(fn=cmd_cache)

    p = sub.add_parser("tables", parents=[common], help="eigenvalue or dimension tables")
    p.add_argument("which", choices=("hecke", "dims"))
    p.add_argument("--spans", help="comma-separated span names")
    p.add_argument("--ops", default="T:1+3r,Tm:2", help="comma-separated KIND:ARG")
    p.add_argument("--k-max", type=int, default=6)
    p.add_argument("--ell", type=int, default=0)
    p.set_defaults(fn=cmd_tables)

    p = sub.add_parser("restrict", parents=[common], help="restriction of a scalar form to the modular curve")
    p.add_argument("name")
    p.add_argument("--show", type=int)
    p.set_defaults(fn=cmd_restrict)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command in ("build", "restrict"):
        # --order doubles as the display order; the truncation floor is 8
        if args.order is not None:
            args.show = args.order if args.show is None else args.show
            args.order = max(8, args.order)
        elif args.show is not None:
            args.order = max(8, args.show)
    try:
        cfg = load_config(args)
        return args.fn(args, cfg)
    except MissingOperatorTable as exc:
        print(f"missing operator cache: {exc} (run `picard cache compute` or pass --compute)", file=sys.stderr)
        return EXIT_NO_CACHE
    except (ReconstructionFailed, PrecisionExhausted) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RECONSTRUCTION
    except LockHeld as exc:
        print(f"LockHeld: {exc}", file=sys.stderr)
        return 1
    except (cat.UnknownForm, KeyError) as exc:
        print(f"UnknownForm: {exc.args[0] if exc.args else exc}", file=sys.stderr)
        return 1
    except (ValueError, TruncationTooShallow) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
