import argparse
import cmd
import json
import logging
import os
import re
import shlex
from dataclasses import asdict, dataclass, field
from datetime import datetime
from fractions import Fraction
from typing import Dict, List, Optional

import numpy as np

import utils
from critical_structure import expected_index, omega_image_stats, records_to_csv_rows, scan_sigma
from database import RunStore
from decay_analysis import DecaySeries, fit_decay, remainder_fit, sharpness_plateau
from errors import FitWindowError, InadmissibleIndicesError, LatwaveError, ValidationError
from evolution import (DECAY_RATES, BoxState, StrichartzIndices, decay_bound, nonlinear_evolve,
                       random_sparse_data, strichartz_ratio_test, wraparound_horizon)
from green_function import (DEFAULT_C_GRID, GreenSample, TorusGrid, box_oracle, diagonal_samples,
                            green_wave, sup_samples)
from newton import (DecayIndex, SupportSet, WeightVector, classify_binary_quartic, index_lex_max,
                    is_adapted_2d, karpushkin_combine, newton_report, quad_split_shift, quartic_proportionality)
from osc_engine import (KINDS, AmplitudeSpec, OscSample, PerturbationSpec, eval_J, uniform_stability_probe)
from p4_reduction import DEFAULT_SIGMA, appendix_series, direct_oracle
from polynomial import PolynomialPhase, library_manifest, monomial_support, phase_library

logger = logging.getLogger(__name__)

VERSION = "0.1.0"
SUBCOMMANDS = ("green", "sup-decay", "oscint", "p4-appendix", "newton", "adapted", "quartic", "index-calc",
               "sigma-scan", "strichartz", "nls", "runs")
GLOBAL_CONFIG_KEYS = ("out", "threads", "seed", "force")


@dataclass
class RunManifest:
    """Everything needed to reproduce one run: argv, resolved parameters, seed and output digests."""

    subcommand: str
    argv: List[str]
    params: Dict[str, object]
    seed: int
    version: str = VERSION
    started: str = ""
    finished: str = ""
    outputs: Dict[str, str] = field(default_factory=dict)

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def load(cls, path: str) -> "RunManifest":
        try:
            with open(path, encoding="utf-8") as f:
                data = json.load(f)
            return cls(**data)
        except (OSError, json.JSONDecodeError, TypeError) as e:
            raise ValidationError(f"cannot read manifest {path}: {e}")


_NEGATIVE_VALUE = re.compile(r"^-[\d.]")


def _attach_negative_values(tokens: List[str]) -> List[str]:
    """Join `--a -5/6,0` into `--a=-5/6,0`; argparse would read the value as a flag."""
    out = []
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if tok.startswith("--") and "=" not in tok and i + 1 < len(tokens) and _NEGATIVE_VALUE.match(tokens[i + 1]):
            out.append(f"{tok}={tokens[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def _times(args, lo_default: float, hi_default: float, count_default: int) -> np.ndarray:
    if getattr(args, "times", None):
        return np.array(utils.parse_float_list(args.times))
    lo, hi, count = (args.t_range or [lo_default, hi_default, count_default])
    if not 0 < lo < hi or int(count) < 2:
        raise ValidationError(f"invalid time range {lo}..{hi} with {count} samples")
    return np.geomspace(lo, hi, int(count))


def _add_times(p: argparse.ArgumentParser, name: str = "times"):
    p.add_argument(f"--{name}", dest="times", help="comma-separated sample values")
    p.add_argument(f"--{name[0]}-range", dest="t_range", nargs=3, type=float, metavar=("LO", "HI", "COUNT"),
                   help="geometric sample range")


def _phase_from_args(args) -> PolynomialPhase:
    if getattr(args, "expr", None):
        if not args.d:
            raise ValidationError("--expr needs --d")
        return PolynomialPhase.from_expression(args.expr, args.d)
    library = phase_library()
    if args.phase not in library:
        raise ValidationError(f"unknown phase {args.phase!r}; library: {', '.join(library)}")
    return library[args.phase]


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ValidationError(f"not a rational number: {text!r}") from None


def _exponent(text: str):
    return np.inf if text.strip().lower() in ("inf", "infinity") else _fraction(text)


class CLIHandler(cmd.Cmd):
    """Batch front-end: one do_<subcommand> per pipeline, each writing outputs and a manifest."""

    def __init__(self, out_dir: str = ".", threads: Optional[int] = None, seed: int = 0, force: bool = False,
                 config: Optional[Dict[str, str]] = None, store: Optional[RunStore] = None):
        super().__init__()
        self.out_dir = out_dir
        self.threads = threads or os.cpu_count() or 1
        self.seed = seed
        self.force = force
        self.config = dict(config or {})
        self.store = store
        self.outputs: List[str] = []
        self.params: Dict[str, object] = {}

    # ------------------------------------------------------------------
    # dispatch

    def execute(self, subcommand: str, argv: List[str], full_argv: Optional[List[str]] = None) -> int:
        """Run one subcommand and return its exit code."""
        if subcommand not in SUBCOMMANDS:
            print(utils.format_error(f"Unknown subcommand {subcommand!r}. Choose from: {', '.join(SUBCOMMANDS)}"))
            return 2
        manifest = RunManifest(subcommand, list(full_argv if full_argv is not None else [subcommand] + argv),
                               {}, self.seed, started=datetime.now().isoformat(timespec="seconds"))
        self.outputs = []
        self.params = {}
        try:
            self.onecmd(" ".join([subcommand.replace("-", "_")] + [shlex.quote(a) for a in argv]))
            status = 0
        except SystemExit as e:
            return int(e.code or 0)
        except LatwaveError as e:
            print(utils.format_error(f"Error: {e}"))
            status = e.exit_code
        if subcommand == "runs":
            return status
        manifest.finished = datetime.now().isoformat(timespec="seconds")
        manifest.params = self.params
        manifest_path = None
        if status == 0:
            manifest.outputs = {os.path.basename(p): utils.sha256_file(p) for p in self.outputs}
            manifest_path = utils.write_json(os.path.join(self.out_dir, f"{subcommand}.manifest.json"),
                                             manifest.to_json())
            print(utils.format_success(f"Manifest written to {manifest_path}"))
        if self.store is not None:
            run_id = self.store.record_run(manifest, manifest_path, status)
            logger.debug("recorded run %d", run_id)
        return status

    def default(self, line):
        raise ValidationError(f"unknown subcommand: {line.split()[0] if line.split() else line!r}")

    def emptyline(self):
        raise ValidationError("no subcommand given")

    def _parse(self, parser: argparse.ArgumentParser, arg: str) -> argparse.Namespace:
        """Parse subcommand flags with config-file entries as defaults."""
        known = {a.dest for a in parser._actions}
        defaults = {k: v for k, v in self.config.items() if k in known}
        for k in self.config:
            if k not in known and k not in GLOBAL_CONFIG_KEYS:
                logger.warning("config key %r is not used by %s", k, parser.prog)
        for action in parser._actions:
            if action.dest in defaults and action.type is not None:
                defaults[action.dest] = action.type(defaults[action.dest])
            elif action.dest in defaults and isinstance(action, argparse._StoreTrueAction):
                defaults[action.dest] = defaults[action.dest].strip().lower() in ("1", "true", "yes", "on")
        parser.set_defaults(**defaults)
        args = parser.parse_args(_attach_negative_values(shlex.split(arg)))
        self.params = {k: (str(v) if isinstance(v, Fraction) else v) for k, v in vars(args).items()}
        self.params.update(threads=self.threads, seed=self.seed, force=self.force)
        return args

    def _write_csv(self, name: str, rows) -> str:
        path = utils.write_csv(os.path.join(self.out_dir, name), rows)
        self.outputs.append(path)
        print(utils.format_success(f"Wrote {path}"))
        return path

    def _write_json(self, name: str, payload) -> str:
        path = utils.write_json(os.path.join(self.out_dir, name), payload)
        self.outputs.append(path)
        print(utils.format_success(f"Wrote {path}"))
        return path

    # ------------------------------------------------------------------
    # green-function

    def do_green(self, arg):
        """Green function: green --d D --t T --x X1,..,Xd [--m M] [--c-grid C] [--window R] [--oracle]"""
        p = argparse.ArgumentParser(prog="green")
        p.add_argument("--d", type=int, required=True)
        p.add_argument("--t", type=float, required=True)
        p.add_argument("--x", required=True)
        p.add_argument("--m", type=float, default=0.0)
        p.add_argument("--c-grid", dest="c_grid", type=float, default=DEFAULT_C_GRID)
        p.add_argument("--window", type=int, default=None)
        p.add_argument("--oracle", action="store_true", help="compare with the RK4 box solution")
        args = self._parse(p, arg)
        x = utils.parse_int_list(args.x)
        grid = TorusGrid.for_time(args.d, args.t, args.c_grid)
        sample = green_wave(x, args.t, grid, m=args.m, window=args.window, c_grid=args.c_grid,
                            force=self.force, threads=self.threads)
        print(utils.format_heading(f"G({','.join(map(str, sample.x))}, {utils.format_number(args.t)})"))
        print(utils.format_value(f"{utils.format_number(sample.value)}  ± {utils.format_number(sample.err_est)}"))
        rows = [GreenSample.csv_header(args.d), sample.csv_row()]
        if args.oracle:
            reference = box_oracle(x, args.t, args.d, args.m)
            print(f"RK4 box oracle: {utils.format_value(utils.format_number(reference))}")
            rows.append(GreenSample(sample.x, sample.t, reference, abs(reference - sample.value), grid, args.m,
                                    "box-oracle").csv_row())
        self._write_csv("green.csv", rows)

    def do_sup_decay(self, arg):
        """Decay of sup_x |G(x,t)|: sup-decay --d D (--times T1,.. | --t-range LO HI COUNT) [--diagonal]"""
        p = argparse.ArgumentParser(prog="sup-decay")
        p.add_argument("--d", type=int, required=True)
        _add_times(p)
        p.add_argument("--m", type=float, default=0.0)
        p.add_argument("--c-grid", dest="c_grid", type=float, default=DEFAULT_C_GRID)
        p.add_argument("--diagonal", action="store_true", help="sample G(round(v t), t) on the critical diagonal")
        p.add_argument("--margin", type=float, default=0.05)
        args = self._parse(p, arg)
        times = _times(args, 10.0, 100.0, 12)
        if args.diagonal:
            samples = diagonal_samples(args.d, times, args.c_grid, self.force, self.threads)
            rows = [GreenSample.csv_header(args.d)] + [s.csv_row() for s in samples]
            mags = [abs(s.value) for s in samples]
        else:
            results = sup_samples(args.d, times, args.c_grid, args.m, self.force, self.threads)
            rows = [["t"] + [f"x{j + 1}" for j in range(args.d)] + ["value", "errEst", "orbit"]]
            rows += [[utils.format_number(r.t)] + [str(c) for c in r.x]
                     + [utils.format_number(r.value), utils.format_number(r.err_est), str(r.orbit_size)]
                     for r in results]
            mags = [r.value for r in results]
        self._write_csv("sup-decay.csv", rows)
        fit = fit_decay(DecaySeries(times, np.array(mags), f"d={args.d}"), args.margin)
        print(utils.format_heading("Fitted decay"))
        print(utils.format_value(f"beta={utils.format_number(fit.beta)} p={fit.p} C={utils.format_number(fit.C)}"))
        self._write_json("sup-decay.json", fit.to_json())

    # ------------------------------------------------------------------
    # osc-engine

    def do_oscint(self, arg):
        """Oscillatory integrals: oscint (--phase NAME | --expr EXPR --d D) [--times ..] [--fit] [--stability N]"""
        p = argparse.ArgumentParser(prog="oscint")
        p.add_argument("--phase", default="D4")
        p.add_argument("--expr")
        p.add_argument("--d", type=int)
        _add_times(p)
        p.add_argument("--radius", type=float, default=0.5)
        p.add_argument("--kind", choices=KINDS, default="product-bump")
        p.add_argument("--oversample", type=float, default=2.5)
        p.add_argument("--fit", action="store_true")
        p.add_argument("--stability", type=int, default=0, metavar="TRIALS")
        p.add_argument("--eps", type=float, default=1e-3)
        p.add_argument("--list-phases", dest="list_phases", action="store_true")
        args = self._parse(p, arg)
        if args.list_phases:
            self._write_json("phases.json", library_manifest())
            return
        phase = _phase_from_args(args)
        phase_id = args.expr or args.phase
        amp = AmplitudeSpec.uniform(phase.d, args.radius, args.kind)
        times = _times(args, 10.0, 1000.0, 12)
        samples = [eval_J(t, phase, amp, oversample=args.oversample, threads=self.threads) for t in times]
        self._write_csv("oscint.csv", [OscSample.csv_header()] + [s.csv_row(phase_id) for s in samples])
        report = {"phase": phase_id, "expression": str(phase), "amplitude": amp.describe()}
        if args.fit:
            fit = fit_decay(DecaySeries(times, np.array([abs(s.value) for s in samples]), phase_id))
            print(utils.format_value(f"{phase_id}: beta={utils.format_number(fit.beta)} p={fit.p}"))
            report["fit"] = fit.to_json()
        if args.stability:
            spec = PerturbationSpec(phase.d, eps=args.eps, seed=self.seed)
            stability = uniform_stability_probe(phase, spec, times, args.stability, amp, threads=self.threads)
            worst = stability.worst
            print(utils.format_value(f"worst index: beta={utils.format_number(worst.beta)} p={worst.p}"))
            report["stability"] = stability.to_json()
        self._write_json("oscint.json", report)

    def do_p4_appendix(self, arg):
        """Reduced large-λ evaluation: p4-appendix [--lams ..|--l-range LO HI COUNT] [--sigma S] [--oracle]"""
        p = argparse.ArgumentParser(prog="p4-appendix")
        _add_times(p, "lams")
        p.add_argument("--sigma", type=float, default=DEFAULT_SIGMA)
        p.add_argument("--oracle", action="store_true", help="compare with the direct 4-D sum for λ <= 50")
        p.add_argument("--bound", type=float, default=0.05)
        args = self._parse(p, arg)
        lams = _times(args, 1e3, 1e5, 12)
        results, series = appendix_series(lams, args.sigma)
        rows = [["lambda", "re", "im", "K1", "K2", "errEst"]]
        rows += [[utils.format_number(r.lam), utils.format_number(r.value.real), utils.format_number(r.value.imag),
                  utils.format_number(r.K1), utils.format_number(r.K2), utils.format_number(r.err_est)]
                 for r in results]
        self._write_csv("p4-appendix.csv", rows)
        plateau = sharpness_plateau(series, 4.0 / 3.0, args.bound)
        report = {"results": [r.to_json() for r in results], "plateau": plateau.to_json()}
        if plateau.conclusive:
            try:
                report["remainder"] = remainder_fit(series, 4.0 / 3.0).to_json()
            except FitWindowError as e:
                logger.warning("remainder not fitted: %s", e)
                report["remainder"] = None
            print(utils.format_value(f"c0 = {utils.format_number(plateau.c0)} "
                                     f"(flatness {utils.format_number(plateau.flatness)})"))
        else:
            print(utils.format_error(f"plateau inconclusive: flatness {utils.format_number(plateau.flatness)}"))
        if args.oracle:
            checks = []
            for r in results:
                if r.lam > 50:
                    continue
                direct = direct_oracle(r.lam, args.sigma, threads=self.threads)
                diff = abs(direct.value - r.value)
                checks.append({"lambda": r.lam, "direct_re": direct.value.real, "direct_im": direct.value.imag,
                               "difference": diff, "tolerance": direct.err_est + r.err_est})
            report["oracle"] = checks
        self._write_json("p4-appendix.json", report)

    # ------------------------------------------------------------------
    # newton-polyhedra

    def do_newton(self, arg):
        """Newton distance and principal face: newton (--monomials "2,2;.." | --phase NAME | --expr E --d D)"""
        p = argparse.ArgumentParser(prog="newton")
        p.add_argument("--monomials")
        p.add_argument("--phase")
        p.add_argument("--expr")
        p.add_argument("--d", type=int)
        args = self._parse(p, arg)
        if args.monomials:
            phase = monomial_support(utils.parse_monomials(args.monomials))
        elif args.phase or args.expr:
            phase = _phase_from_args(args)
        else:
            raise ValidationError("give --monomials, --phase or --expr")
        report = newton_report(SupportSet.from_phase(phase), phase)
        print(utils.format_heading("Newton distance"))
        print(utils.format_value(report["distance"]))
        self._write_json("newton.json", report)

    def do_adapted(self, arg):
        """2-D adaptedness: adapted --expr "z1**2*z2**2 + z1**5" """
        p = argparse.ArgumentParser(prog="adapted")
        p.add_argument("--expr", required=True)
        args = self._parse(p, arg)
        result = is_adapted_2d(PolynomialPhase.from_expression(args.expr, 2))
        payload = {"status": result.status, "condition": result.condition, "face": result.face.to_json(),
                   "bound": None if result.bound is None else str(result.bound),
                   "witness": None if result.witness is None else
                   {"interval": [str(e) for e in result.witness.interval],
                    "multiplicity": result.witness.multiplicity}}
        print(utils.format_value(f"{result.status} (condition {result.condition})"))
        self._write_json("adapted.json", payload)

    def do_quartic(self, arg):
        """Binary quartic normal form: quartic --coeffs a0,a1,a2,a3,a4 [--f .. --g .. --c C]"""
        p = argparse.ArgumentParser(prog="quartic")
        p.add_argument("--coeffs")
        p.add_argument("--f", help="quadratic coefficients, highest degree first")
        p.add_argument("--g")
        p.add_argument("--c")
        args = self._parse(p, arg)
        payload = {}
        if args.coeffs:
            cls = classify_binary_quartic(utils.parse_fraction_list(args.coeffs))
            payload["class"] = {"label": cls.label, "index": str(cls.index), "coarse_index": str(cls.coarse_index),
                                "multiplicities": list(cls.multiplicities), "complex_pairs": cls.complex_pairs}
            print(utils.format_value(f"{cls.label}: {cls.index}"))
        if args.f or args.g or args.c:
            if not (args.f and args.g and args.c):
                raise ValidationError("--f, --g and --c go together")
            res = quartic_proportionality(utils.parse_fraction_list(args.f), utils.parse_fraction_list(args.g),
                                          _fraction(args.c))
            payload["proportionality"] = {"kind": res.kind,
                                          "c0": None if res.c0 is None else str(res.c0),
                                          "root": None if res.root is None else str(res.root)}
            print(utils.format_value(res.kind))
        if not payload:
            raise ValidationError("give --coeffs or --f/--g/--c")
        self._write_json("quartic.json", payload)

    def do_index_calc(self, arg):
        """Index calculus: index-calc combine --alpha A --a "b,p" [--b "b,p"] | shift --index "b,p" --m M | max --indices "..;.." """
        p = argparse.ArgumentParser(prog="index-calc")
        sub = p.add_subparsers(dest="op", required=True)
        c = sub.add_parser("combine")
        c.add_argument("--alpha", required=True)
        c.add_argument("--a", required=True)
        c.add_argument("--b")
        s = sub.add_parser("shift")
        s.add_argument("--index", required=True)
        s.add_argument("--m", type=int, required=True)
        m = sub.add_parser("max")
        m.add_argument("--indices", required=True)
        args = self._parse(p, arg)
        if args.op == "combine":
            alpha = WeightVector(tuple(utils.parse_fraction_list(args.alpha)))
            result = karpushkin_combine(alpha, DecayIndex.parse(args.a), DecayIndex.parse(args.b) if args.b else None)
        elif args.op == "shift":
            result = quad_split_shift(DecayIndex.parse(args.index), args.m)
        else:
            result = index_lex_max(*(DecayIndex.parse(t) for t in args.indices.split(";") if t.strip()))
        print(utils.format_value(str(result)))
        self._write_json("index-calc.json", {"op": args.op, "result": str(result)})

    # ------------------------------------------------------------------
    # critical-structure

    def do_sigma_scan(self, arg):
        """Degenerate critical points: sigma-scan [--d 5] [--k 2,3,4] [--resolution R] [--tol TOL]"""
        p = argparse.ArgumentParser(prog="sigma-scan")
        p.add_argument("--d", type=int, default=5)
        p.add_argument("--k", default="2,3,4")
        p.add_argument("--resolution", type=int, default=10)
        p.add_argument("--tol", type=float, default=1e-8)
        args = self._parse(p, arg)
        scans = {k: scan_sigma(args.d, k, args.resolution, args.tol, self.threads)
                 for k in utils.parse_int_list(args.k)}
        records = [r for scan in scans.values() for r in scan.records]
        self._write_csv("sigma-scan.csv", records_to_csv_rows(records) or [["k"]])
        summary = {"scans": [s.summary() for s in scans.values()],
                   "expected_index": {str(k): str(expected_index(k)) for k in scans}}
        populated = {k: s.records for k, s in scans.items() if s.records}
        if populated:
            summary["omega"] = omega_image_stats(populated).to_json()
        for s in scans.values():
            print(utils.format_value(f"Σ_{s.k}: {len(s.records)} points (predicted {s.predicted})"))
        self._write_json("sigma-scan.json", summary)

    # ------------------------------------------------------------------
    # evolution

    def do_strichartz(self, arg):
        """Strichartz ratio: strichartz --q Q --r R [--q-tilde .. --r-tilde ..] [--L 32] [--T 4] [--samples N]"""
        p = argparse.ArgumentParser(prog="strichartz")
        p.add_argument("--q", required=True)
        p.add_argument("--r", required=True)
        p.add_argument("--q-tilde", dest="q_tilde")
        p.add_argument("--r-tilde", dest="r_tilde")
        p.add_argument("--d", type=int, default=5)
        p.add_argument("--L", type=int, default=32)
        p.add_argument("--T", type=float, default=4.0)
        p.add_argument("--samples", type=int, default=4)
        p.add_argument("--nonzeros", type=int, default=4)
        p.add_argument("--allow-inadmissible", dest="allow_inadmissible", action="store_true")
        p.add_argument("--doubling", action="store_true", help="repeat at 2T when the wraparound guard allows")
        args = self._parse(p, arg)
        opt = lambda v: None if v is None else _exponent(v)
        indices = StrichartzIndices(_exponent(args.q), _exponent(args.r), opt(args.q_tilde), opt(args.r_tilde), args.d)
        if not indices.admissible and not args.allow_inadmissible:
            raise InadmissibleIndicesError(f"(q, r) = ({args.q}, {args.r}) is not admissible for d={args.d}")
        samples = random_sparse_data(args.d, args.L, args.samples, args.nonzeros, seed=self.seed)
        horizons = [args.T, 2 * args.T] if args.doubling else [args.T]
        reports = [strichartz_ratio_test(samples, indices, T, args.L, args.d,
                                         allow_inadmissible=args.allow_inadmissible, workers=self.threads)
                   for T in horizons]
        for rep in reports:
            print(utils.format_value(f"T={utils.format_number(rep.T)}: max ratio {utils.format_number(rep.max_ratio)}"))
        exponents = indices.forcing_exponents()
        self._write_json("strichartz.json", {
            "q": str(args.q), "r": str(args.r), "admissible": indices.admissible,
            "data_exponent": str(indices.data_exponent),
            "forcing_exponents": None if exponents is None else [str(e) for e in exponents],
            "reports": [rep.to_json() for rep in reports]})

    def do_nls(self, arg):
        """Nonlinear evolution from ε·δ₀: nls [--d 5] [--L 32] [--T 12] [--k 3] [--steps N] [--eps 1e-3] [--data-bound B]"""
        p = argparse.ArgumentParser(prog="nls")
        p.add_argument("--d", type=int, default=5)
        p.add_argument("--L", type=int, default=32)
        p.add_argument("--T", type=float, default=12.0)
        p.add_argument("--k", type=int, default=3)
        p.add_argument("--steps", type=int, default=None)
        p.add_argument("--eps", type=float, default=1e-3)
        p.add_argument("--data-bound", dest="data_bound", type=float, default=None,
                       help="reject data with |f2|_1 above this small-data bound")
        p.add_argument("--sign", type=int, choices=(1, -1), default=1)
        p.add_argument("--m", type=float, default=0.0)
        p.add_argument("--tol", type=float, default=1e-6)
        p.add_argument("--linear", action="store_true", help="drop the nonlinearity")
        p.add_argument("--no-check", dest="no_check", action="store_true", help="skip the step-halving check")
        args = self._parse(p, arg)
        if args.T > wraparound_horizon(args.L):
            logger.warning("T=%g is beyond the wraparound horizon %g of the L=%d box", args.T,
                           wraparound_horizon(args.L), args.L)
        steps = args.steps or int(np.ceil(20 * args.T))
        state = BoxState.delta(args.d, args.L, "f2", args.eps, args.m)
        traj = nonlinear_evolve(state, args.T, args.k, steps, sign=args.sign, nonlinearity=not args.linear,
                                check=not args.no_check, tol=args.tol, data_bound=args.data_bound,
                                workers=self.threads)
        self._write_csv("nls.csv", traj.csv_rows())
        summary = traj.summary()
        if args.d in DECAY_RATES:
            rate = float(DECAY_RATES[args.d])
            summary["decay_rate"] = rate
            summary["decay_bound"] = decay_bound(traj, args.eps, rate)
            print(utils.format_value(f"sup (1+t)^{rate:.4g}|u|_inf/eps = {utils.format_number(summary['decay_bound'])}"))
        self._write_json("nls.json", summary)

    # ------------------------------------------------------------------
    # registry

    def do_runs(self, arg):
        """Recorded runs: runs [--subcommand NAME] [--delete ID]"""
        p = argparse.ArgumentParser(prog="runs")
        p.add_argument("--subcommand")
        p.add_argument("--delete", type=int)
        args = self._parse(p, arg)
        if self.store is None:
            raise ValidationError("the run registry is disabled (--no-db)")
        if args.delete is not None:
            if self.store.delete_run(args.delete):
                print(utils.format_success(f"Deleted run {args.delete}."))
            else:
                print(utils.format_error(f"Run with ID {args.delete} not found."))
            return
        runs = self.store.list_runs(args.subcommand)
        if not runs:
            print("No runs recorded.")
        for run_id, subcommand, argv_json, seed, version, started, finished, status, path in runs:
            status_text = utils.format_success("ok") if status == 0 else utils.format_error(f"exit {status}")
            print(f"{utils.format_heading(str(run_id))} {started} {subcommand} seed={seed} {status_text} "
                  f"{' '.join(json.loads(argv_json))}")
