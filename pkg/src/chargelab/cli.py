"""Command-line orchestration: every check behind one reproducible tool.

Run records are line-oriented JSON -- a header line carrying the schema
tag, package version, subcommand, seed, and parameters; one line per
check row; a closing summary line -- with sorted keys and repr round-trip
floats, so two runs with the same configuration produce byte-identical
files.  The wall-clock duration is written to a sidecar ``<name>.meta.json``
to keep it out of the deterministic surface.  Plot-ready tables are CSV
with a schema tag comment on the first line; rendering is out of scope.

The verification suite derives one 64-bit seed per check from the master
seed -- ``SeedSequence(master).generate_state(n_checks)``, check i taking
word i -- so the worker count and scheduling order cannot change any
numeric field.

Exit codes: 0 every asserted check holds, 1 a check failed, 2 usage or
validation error, 3 resource/accuracy limit hit.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, bogolubov, correlation, matrixloc, spectral, trialstate, variational
from .errors import (
    AccuracyError,
    BudgetExceededError,
    ConsistencyError,
    DomainError,
    PreconditionError,
    ResourceLimitError,
    SolverError,
)
from .foldy import foldy_j, j_closed_form, j_from_integral, simplified_energy_quadrature
from .numerics import uniform_radial_grid

__all__ = [
    "RunConfig",
    "ReportRecord",
    "run_j_check",
    "run_identity_check",
    "run_bogolubov_ladder",
    "run_bogolubov_fuzz",
    "run_inequality_fuzz",
    "run_dyson",
    "run_pair_identity",
    "run_trace_scaling",
    "run_upper_bound",
    "run_berezin",
    "run_matrixloc_ensemble",
    "run_matrix_localize",
    "run_lt_study",
    "run_sobolev_study",
    "run_stability",
    "run_verification_suite",
    "write_record",
    "write_table",
    "build_parser",
    "main",
]

SCHEMA_RECORD = "chargelab.report/1"
SCHEMA_META = "chargelab.meta/1"
SCHEMA_CSV = "chargelab.table/1"
OUTDIR_ENV = "CHARGELAB_OUTDIR"
DEFAULT_SEED = 1905

IDENTITY_POINTS = tuple(
    (nu, ell) for nu in (0.25, 1.0, 4.0, 100.0) for ell in (0.5, 1.0, 2.0)
)


def _py(value):
    """Coerce numpy scalars so records stay plain JSON/CSV types."""
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


@dataclass(frozen=True)
class RunConfig:
    """What a run was asked to do; the deterministic part of a record."""

    subcommand: str
    params: dict
    seed: int
    out_name: str


@dataclass(frozen=True)
class ReportRecord:
    config: RunConfig
    rows: tuple
    summary: dict
    duration_s: float

    def lines(self) -> list[str]:
        header = {
            "schema": SCHEMA_RECORD,
            "version": __version__,
            "subcommand": self.config.subcommand,
            "seed": self.config.seed,
            "params": {k: _py(v) for k, v in self.config.params.items()},
        }
        out = [json.dumps(header, sort_keys=True)]
        for i, row in enumerate(self.rows):
            out.append(
                json.dumps(
                    {"row": i, **{k: _py(v) for k, v in row.items()}}, sort_keys=True
                )
            )
        out.append(
            json.dumps(
                {"summary": {k: _py(v) for k, v in self.summary.items()}},
                sort_keys=True,
            )
        )
        return out


def write_record(record: ReportRecord, outdir: Path) -> Path:
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / f"{record.config.out_name}.jsonl"
    path.write_text("\n".join(record.lines()) + "\n")
    meta = {
        "schema": SCHEMA_META,
        "duration_s": record.duration_s,
        "written_at": datetime.now(timezone.utc).isoformat(),
    }
    (outdir / f"{record.config.out_name}.meta.json").write_text(
        json.dumps(meta, sort_keys=True) + "\n"
    )
    return path


def write_table(outdir: Path, base: str, name: str, columns, rows) -> Path:
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / f"{base}-{name}.csv"
    with path.open("w", newline="") as fh:
        fh.write(f"# schema: {SCHEMA_CSV} table={name}\n")
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_py(v) for v in row])
    return path


# ---------------------------------------------------------------------------
# Check implementations.  Each returns (rows, summary, tables): rows are
# record dicts carrying a "holds" verdict where something is asserted;
# tables map name -> (columns, tuples) for optional CSV emission.
# ---------------------------------------------------------------------------


def run_j_check(tol: float = 1e-10):
    by_integral = j_from_integral(tol)
    by_gamma = j_closed_form()
    diff = abs(by_integral - by_gamma)
    row = {
        "check": "j-cross-route",
        "j_integral": by_integral,
        "j_gamma": by_gamma,
        "diff": diff,
        "tolerance": 1e-8,
        "holds": diff <= 1e-8,
    }
    return [row], {"j": by_gamma, "cross_route_diff": diff}, {}


def run_identity_check(tol: float = 1e-6):
    """Quadrature of the simplified local energy against -J nu^(5/4) ell^(-3/4)."""
    j = foldy_j().value
    rows, worst = [], 0.0
    for nu, ell in IDENTITY_POINTS:
        quad = simplified_energy_quadrature(nu, ell)
        closed = -j * nu**1.25 * ell**-0.75
        rel = abs(quad - closed) / abs(closed)
        worst = max(worst, rel)
        rows.append(
            {
                "check": "simplified-identity",
                "nu": nu,
                "ell": ell,
                "quadrature": quad,
                "closed_form": closed,
                "rel_err": rel,
                "tolerance": tol,
                "holds": rel <= tol,
            }
        )
    table = (("nu", "ell", "quadrature", "closed_form", "rel_err"),
             [(r["nu"], r["ell"], r["quadrature"], r["closed_form"], r["rel_err"])
              for r in rows])
    return rows, {"points": len(rows), "worst_rel_err": worst}, {"points": table}


def run_bogolubov_ladder(
    t: float, g_plus: float, g_minus: float, n_max_list, gap_fraction_tol: float = 0.01
):
    """Truncated-ladder ground energies against the closed-form bound; the
    deepest cutoff must close the gap to gap_fraction_tol of |bound|."""
    model = bogolubov.BogolubovModel(t=t, g_plus=g_plus, g_minus=g_minus)
    bound = float(bogolubov.closed_form_bound(model))
    rows = []
    for n_max, energy, gap in bogolubov.sharpness_study(model, tuple(n_max_list)):
        fraction = gap / abs(bound) if bound != 0.0 else math.inf
        rows.append(
            {
                "check": "bogolubov-ladder",
                "n_max": n_max,
                "ground_energy": energy,
                "closed_bound": bound,
                "gap": gap,
                "gap_fraction": fraction,
                "holds": gap >= -1e-9,
            }
        )
    rows[-1]["tolerance"] = gap_fraction_tol
    rows[-1]["holds"] = rows[-1]["holds"] and rows[-1]["gap_fraction"] <= gap_fraction_tol
    table = (("n_max", "ground_energy", "gap", "gap_fraction"),
             [(r["n_max"], r["ground_energy"], r["gap"], r["gap_fraction"])
              for r in rows])
    return rows, {"final_gap_fraction": rows[-1]["gap_fraction"]}, {"ladder": table}


def run_bogolubov_fuzz(trials: int, seed: int, n_max_lo: int = 2, n_max_hi: int = 6):
    """Random couplings, random cutoff: ground energy must clear the bound."""
    if trials < 1:
        raise PreconditionError("trials must be >= 1")
    if not 1 <= n_max_lo <= n_max_hi:
        raise PreconditionError("need 1 <= n_max_lo <= n_max_hi")
    trial_seeds = np.random.SeedSequence(seed).generate_state(trials, dtype=np.uint64)
    samples, violations, min_gap = [], 0, math.inf
    for ts in trial_seeds:
        rng = np.random.default_rng(int(ts))
        model = bogolubov.BogolubovModel(
            t=float(rng.uniform(0.0, 5.0)),
            g_plus=float(rng.uniform(0.0, 3.0)),
            g_minus=float(rng.uniform(0.0, 3.0)),
        )
        n_max = int(rng.integers(n_max_lo, n_max_hi + 1))
        energy = bogolubov.ground_energy(bogolubov.build_hamiltonian(model, n_max))
        gap = energy - float(bogolubov.closed_form_bound(model))
        if gap < -1e-9:
            violations += 1
        min_gap = min(min_gap, gap)
        samples.append(
            (int(ts), model.t, model.g_plus, model.g_minus, n_max, energy, gap)
        )
    row = {
        "check": "bogolubov-fuzz",
        "trials": trials,
        "violations": violations,
        "min_gap": min_gap,
        "tolerance": 1e-9,
        "holds": violations == 0,
    }
    table = (("trial_seed", "t", "g_plus", "g_minus", "n_max", "energy", "gap"), samples)
    return [row], {"violations": violations, "min_gap": min_gap}, {"models": table}


_ALL_CHECKERS = ("onsager", "baxter", "positivity")


def run_inequality_fuzz(which: str, trials: int, seed: int):
    """Seeded configuration fuzz for the classical electrostatic inequalities."""
    names = _ALL_CHECKERS if which == "all" else (which,)
    sub_seeds = np.random.SeedSequence(seed).generate_state(len(names), dtype=np.uint64)
    rows, samples = [], []
    total_violations, min_slack = 0, math.inf
    for name, sub in zip(names, sub_seeds):
        ensemble = correlation.run_random_ensemble(name, trials, int(sub))
        slacks = np.array([r[5] for r in ensemble])
        violations = int(np.sum(slacks < -correlation.HOLDS_TOL))
        total_violations += violations
        min_slack = min(min_slack, float(slacks.min()))
        rows.append(
            {
                "check": f"inequality-{name}",
                "trials": trials,
                "violations": violations,
                "min_slack": float(slacks.min()),
                "tolerance": correlation.HOLDS_TOL,
                "holds": violations == 0,
            }
        )
        samples.extend((name,) + r for r in ensemble)
    table = (("checker", "trial_seed", "n", "mu", "lhs", "rhs", "slack"), samples)
    return rows, {"violations": total_violations, "min_slack": min_slack}, {"trials": table}


def run_dyson(nodes: int = 800, r_max: float = 25.0, agreement_tol: float = 1e-4):
    """Minimize the energy functional; assert the scaled-Gaussian ceiling,
    the virial identity, and two-grid agreement."""
    if nodes < 100:
        raise PreconditionError("nodes must be >= 100")
    result = variational.minimize(variational.default_init(nodes, r_max))
    coarse = variational.minimize(variational.default_init(nodes // 2, r_max))
    rel_change = abs(result.energy - coarse.energy) / abs(result.energy)
    virial_cap = 1e-5 * result.potential
    rows = [
        {
            "check": "dyson-minimize",
            "nodes": nodes,
            "r_max": r_max,
            "energy": result.energy,
            "kinetic": result.kinetic,
            "potential": result.potential,
            "iterations": result.iterations,
            "converged": result.converged,
            "ceiling": -0.05,
            "holds": result.converged and result.energy <= -0.05,
        },
        {
            "check": "dyson-virial",
            "virial_residual": result.virial_residual,
            "tolerance": virial_cap,
            "holds": result.virial_residual <= virial_cap,
        },
        {
            "check": "dyson-grid-agreement",
            "nodes_coarse": nodes // 2,
            "energy_coarse": coarse.energy,
            "rel_change": rel_change,
            "tolerance": agreement_tol,
            "holds": rel_change <= agreement_tol,
        },
    ]
    profile = result.profile
    table = (("r", "phi"),
             list(zip(profile.grid.nodes.tolist(), profile.values.tolist())))
    summary = {"e_star": result.energy, "virial_residual": result.virial_residual}
    return rows, summary, {"profile": table}


def run_pair_identity(rhos=(1e-2, 1.0, 1e2, 1e4), tol: float = 1e-6):
    """Pointwise pair energy against -J rho^(5/4)."""
    j = foldy_j().value
    rows, worst = [], 0.0
    for rho in rhos:
        value = trialstate.pointwise_pair_energy(rho)
        closed = -j * rho**1.25
        rel = abs(value - closed) / abs(closed)
        worst = max(worst, rel)
        rows.append(
            {
                "check": "pair-energy-identity",
                "rho": rho,
                "pair_energy": value,
                "closed_form": closed,
                "rel_err": rel,
                "tolerance": tol,
                "holds": rel <= tol,
            }
        )
    return rows, {"worst_rel_err": worst}, {}


def run_trace_scaling(
    n_list=(1_000, 10_000, 100_000, 1_000_000),
    nodes: int = 800,
    r_max: float = 25.0,
    slope_tol: float = 0.01,
):
    """Tr Gamma over a particle-number ladder; the log-log slope must be
    3/5 within slope_tol."""
    if len(n_list) < 2:
        raise PreconditionError("need at least two particle numbers")
    minimizer = variational.minimize(variational.default_init(nodes, r_max))
    rows, traces = [], []
    for n in n_list:
        spec = trialstate.condensate_from_minimizer(int(n), minimizer.profile)
        tr = trialstate.trace_gamma(spec)
        traces.append(tr)
        rows.append(
            {
                "check": "trace-scaling",
                "n_particles": int(n),
                "trace_gamma": tr,
                "ratio_to_n35": tr / float(n) ** 0.6,
                "holds": True,
            }
        )
    slope = float(np.polyfit(np.log([float(n) for n in n_list]), np.log(traces), 1)[0])
    rows.append(
        {
            "check": "trace-scaling-slope",
            "slope": slope,
            "target": 0.6,
            "tolerance": slope_tol,
            "holds": abs(slope - 0.6) <= slope_tol,
        }
    )
    table = (("n_particles", "trace_gamma"),
             [(int(n), tr) for n, tr in zip(n_list, traces)])
    return rows, {"slope": slope}, {"traces": table}


def run_upper_bound(n_list=(1, 32, 100_000), nodes: int = 800, r_max: float = 25.0,
                    tol: float = 1e-8):
    """Many-body upper bound against N^(7/5) times the functional minimum."""
    minimizer = variational.minimize(variational.default_init(nodes, r_max))
    rows, worst = [], 0.0
    for n in n_list:
        value = trialstate.upper_bound_energy(int(n), minimizer.profile)
        target = float(n) ** 1.4 * minimizer.energy
        rel = abs(value - target) / abs(target)
        worst = max(worst, rel)
        rows.append(
            {
                "check": "upper-bound-consistency",
                "n_particles": int(n),
                "upper_bound": value,
                "scaled_e_star": target,
                "rel_err": rel,
                "tolerance": tol,
                "holds": rel <= tol,
            }
        )
    return rows, {"worst_rel_err": worst, "e_star": minimizer.energy}, {}


def run_berezin(trials: int, seed: int, dimension: int = 8, count: int = 24,
                identity_tol: float = 1e-12):
    """Trace-inequality ensembles for every registered xi; the identity xi
    is an equality and must be exact to identity_tol (relative)."""
    names = tuple(sorted(trialstate.XI_FUNCTIONS))
    sub_seeds = np.random.SeedSequence(seed).generate_state(len(names), dtype=np.uint64)
    rows, samples, total_violations = [], [], 0
    for name, sub in zip(names, sub_seeds):
        violations, ensemble = trialstate.berezin_lieb_ensemble(
            name, trials, int(sub), dimension=dimension, count=count
        )
        total_violations += violations
        slacks = np.array([r[3] for r in ensemble])
        row = {
            "check": f"berezin-{name}",
            "trials": trials,
            "violations": violations,
            "min_slack": float(slacks.min()),
            "tolerance": 1e-10,
            "holds": violations == 0,
        }
        if name == "identity":
            scale = np.array([max(1.0, abs(r[1])) for r in ensemble])
            exactness = float(np.max(np.abs(slacks) / scale))
            row["max_rel_slack"] = exactness
            row["holds"] = row["holds"] and exactness <= identity_tol
        rows.append(row)
        samples.extend((name,) + r for r in ensemble)
    table = (("xi", "trial_seed", "lhs", "rhs", "slack"), samples)
    return rows, {"violations": total_violations}, {"instances": table}


def run_matrixloc_ensemble(trials: int, seed: int, size: int = 64, window: int = 8,
                           ceiling: float = 50.0):
    """Gaussian symmetric instances: the restriction construction must meet
    the band budget with constant <= ceiling on every draw."""
    worst, samples = matrixloc.gaussian_ensemble(trials, seed, n=size, window=window)
    row = {
        "check": "matrix-localization",
        "trials": trials,
        "size": size,
        "window": window,
        "worst_c_required": worst,
        "ceiling": ceiling,
        "holds": worst <= ceiling,
    }
    table = (("trial_seed", "lam", "value", "c_required"), samples)
    return [row], {"worst_c_required": worst}, {"instances": table}


def run_matrix_localize(matrix_path, psi_path, window: int, budget_c: float | None = None):
    """Localize one instance read from plain-text files."""
    matrix = matrixloc.read_matrix(matrix_path)
    psi = matrixloc.read_vector(psi_path)
    problem = matrixloc.LocalizationProblem(matrix=matrix, psi=psi, window=window)
    result = matrixloc.localize(problem)
    rows = [
        {
            "check": "matrix-localize",
            "size": problem.size,
            "window": window,
            "offset": result.offset,
            "value": result.value,
            "lam": result.lam,
            "c_required": result.c_required,
            "holds": True,
        }
    ]
    if budget_c is not None:
        report = matrixloc.verify_budget(result, budget_c)
        rows.append(
            {
                "check": "budget",
                "c": budget_c,
                "budget": report.lhs,
                "value": report.rhs,
                "slack": report.slack,
                "holds": report.holds,
            }
        )
    tables = {
        "bands": (("k", "d_k"), list(enumerate(result.d.tolist()))),
        "phi": (
            ("index", "re", "im"),
            [(i, z.real, z.imag) for i, z in enumerate(np.asarray(result.phi, dtype=complex))],
        ),
    }
    return rows, {"value": result.value, "c_required": result.c_required}, tables


def _scale_pair_rows(invariance_tol: float):
    """Matched-grid lambda = 2 covariance rows shared by both spectral studies."""
    base_grid = uniform_radial_grid(1600, 10.0)
    scaled_grid = uniform_radial_grid(1600, 5.0)
    base_spec = spectral.gaussian_well(12.0)
    scaled_spec = spectral.gaussian_well(48.0, 0.5)
    base = spectral.negative_sum(base_spec, base_grid)
    scaled = spectral.negative_sum(scaled_spec, scaled_grid)
    lt_drift = abs(scaled.lt_ratio / base.lt_ratio - 1.0)
    e_base = spectral.ground_state_energy(base_spec, base_grid)
    e_scaled = spectral.ground_state_energy(scaled_spec, scaled_grid)
    sob_base = e_base / base.v_integral
    sob_scaled = e_scaled / scaled.v_integral
    sob_drift = abs(sob_scaled / sob_base - 1.0)
    return [
        {
            "check": "lt-scale-invariance",
            "ratio_base": base.lt_ratio,
            "ratio_scaled": scaled.lt_ratio,
            "rel_drift": lt_drift,
            "tolerance": invariance_tol,
            "holds": lt_drift <= invariance_tol,
        },
        {
            "check": "sobolev-scale-invariance",
            "ratio_base": sob_base,
            "ratio_scaled": sob_scaled,
            "rel_drift": sob_drift,
            "tolerance": invariance_tol,
            "holds": sob_drift <= invariance_tol,
        },
    ]


def run_lt_study(depths=(50.0, 100.0, 200.0), ratio_tol: float = 0.15,
                 invariance_tol: float = 1e-6):
    """Channel-summed spectra of deepening wells against the semiclassical
    ratio, plus the matched-grid scale invariance of both ratios."""
    if len(depths) == 0:
        raise PreconditionError("depths must be nonempty")
    rows = []
    for depth in depths:
        result = spectral.negative_sum(spectral.gaussian_well(float(depth)))
        rel_gap = abs(result.lt_ratio / spectral.SEMICLASSICAL_LT_RATIO - 1.0)
        rows.append(
            {
                "check": "lt-ratio",
                "depth": float(depth),
                "neg_sum": result.neg_sum,
                "v_integral": result.v_integral,
                "lt_ratio": result.lt_ratio,
                "semiclassical": spectral.SEMICLASSICAL_LT_RATIO,
                "rel_gap": rel_gap,
                "holds": True,
            }
        )
    rows[-1]["tolerance"] = ratio_tol
    rows[-1]["holds"] = rows[-1]["rel_gap"] <= ratio_tol
    rows.extend(_scale_pair_rows(invariance_tol))
    table = (("depth", "neg_sum", "v_integral", "lt_ratio", "rel_gap"),
             [(r["depth"], r["neg_sum"], r["v_integral"], r["lt_ratio"], r["rel_gap"])
              for r in rows if r["check"] == "lt-ratio"])
    summary = {"final_rel_gap": rows[len(depths) - 1]["rel_gap"]}
    return rows, summary, {"ratios": table}


def run_sobolev_study(depths=(5.0, 10.0, 20.0, 50.0), invariance_tol: float = 1e-6):
    """Ground-state-to-potential ratios along a depth ladder (the scale
    invariant combination), plus the matched-grid invariance rows."""
    if len(depths) == 0:
        raise PreconditionError("depths must be nonempty")
    rows = []
    for depth in depths:
        spec = spectral.gaussian_well(float(depth))
        e0 = spectral.ground_state_energy(spec)
        v = spec.v_integral()
        rows.append(
            {
                "check": "sobolev-ratio",
                "depth": float(depth),
                "ground_energy": e0,
                "v_integral": v,
                "ratio": e0 / v,
                "holds": True,
            }
        )
    rows.extend(_scale_pair_rows(invariance_tol))
    table = (("depth", "ground_energy", "v_integral", "ratio"),
             [(r["depth"], r["ground_energy"], r["v_integral"], r["ratio"])
              for r in rows if r["check"] == "sobolev-ratio"])
    return rows, {"depths": len(depths)}, {"ratios": table}


def run_stability(charges, q: int, c_lt: float, n_electrons: int,
                  radius: float | None = None, vacuum_strength: float | None = None):
    """Assemble the nearest-nucleus stability bound for a nuclear arrangement
    (positions are immaterial; only the count and the largest charge enter)."""
    if vacuum_strength is not None:
        bound = spectral.stability_bound(
            None, q=q, c_lt=c_lt, n_electrons=n_electrons,
            radius=radius, strength=vacuum_strength,
        )
    else:
        z = np.asarray(list(charges), dtype=float)
        if z.size == 0:
            raise PreconditionError("charges must be nonempty (or use --vacuum-strength)")
        spacing = 4.0 * (radius if radius is not None else 1.0)
        positions = np.zeros((z.size, 3))
        positions[:, 0] = spacing * np.arange(z.size)
        nuclei = correlation.ParticleConfiguration(positions=positions, charges=z)
        bound = spectral.stability_bound(
            nuclei, q=q, c_lt=c_lt, n_electrons=n_electrons, radius=radius
        )
    row = {
        "check": "stability-bound",
        "strength": bound.strength,
        "radius": bound.radius,
        "v_integral": bound.v_integral,
        "n_electrons": bound.n_electrons,
        "total": bound.total,
        "per_electron": bound.per_electron,
        "holds": math.isfinite(bound.total),
    }
    return [row], {"total": bound.total, "per_electron": bound.per_electron}, {}


# ---------------------------------------------------------------------------
# Verification suite
# ---------------------------------------------------------------------------


def _battery(quick: bool):
    full = not quick
    return [
        ("j-cross-route", lambda seed: run_j_check()),
        ("simplified-identity", lambda seed: run_identity_check()),
        ("bogolubov-ladder",
         lambda seed: run_bogolubov_ladder(1.0, 1.0, 0.0, (2, 4, 8, 12))),
        ("inequality-fuzz",
         lambda seed: run_inequality_fuzz("all", 3334 if full else 300, seed)),
        ("dyson-minimize", lambda seed: run_dyson()),
        ("pair-energy-identity", lambda seed: run_pair_identity()),
        ("trace-scaling", lambda seed: run_trace_scaling()),
        ("berezin-lieb", lambda seed: run_berezin(1000 if full else 100, seed)),
        ("matrix-localization",
         lambda seed: run_matrixloc_ensemble(1000 if full else 100, seed)),
        ("lt-semiclassics", lambda seed: run_lt_study()),
    ]


def run_verification_suite(master_seed: int, quick: bool = False,
                           workers: int | None = None):
    """The canonical battery; per-check seeds come from the master seed by
    index, so results do not depend on the worker count."""
    checks = _battery(quick)
    seeds = np.random.SeedSequence(master_seed).generate_state(
        len(checks), dtype=np.uint64
    )
    if workers is None:
        workers = min(4, os.cpu_count() or 1)
    if workers < 1:
        raise PreconditionError("workers must be >= 1")

    def call(i: int):
        return checks[i][1](int(seeds[i]))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(call, i) for i in range(len(checks))]
            outputs = [f.result() for f in futures]
    else:
        outputs = [call(i) for i in range(len(checks))]

    rows, failed = [], []
    for (name, _), (check_rows, summary, _tables) in zip(checks, outputs):
        ok = all(r.get("holds", True) for r in check_rows)
        rows.extend(check_rows)
        rows.append({"check": f"{name}-result", "passed": ok, **summary})
        if not ok:
            failed.append(name)
    summary = {
        "checks": len(checks),
        "failures": len(failed),
        "failed": failed,
        "passed": not failed,
    }
    return rows, summary, {}


# ---------------------------------------------------------------------------
# Argument handling
# ---------------------------------------------------------------------------


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in text.split(",") if tok.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated float list: {text!r}") from exc


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in text.split(",") if tok.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated int list: {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--outdir", default=None,
                        help=f"output directory (default ${OUTDIR_ENV} or '.')")
    common.add_argument("--output", default=None,
                        help="base name for record files (default: the subcommand)")
    common.add_argument("--config", default=None,
                        help="key=value file mirroring the flags; explicit flags win; "
                             "'key = true' switches a flag on")

    parser = argparse.ArgumentParser(
        prog="chargelab",
        description="Checks and studies for charged-gas energy estimates.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("foldy-j", parents=[common],
                       help="constant J by quadrature vs closed form")
    p.add_argument("--tol", type=float, default=1e-10)

    sub.add_parser("foldy-identity", parents=[common],
                   help="simplified local energy vs -J nu^(5/4) ell^(-3/4)")

    p = sub.add_parser("bogolubov-sharpness", parents=[common],
                       help="truncated-ladder gap against the closed bound")
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--gplus", type=float, default=1.0)
    p.add_argument("--gminus", type=float, default=0.0)
    p.add_argument("--nmax-list", type=_int_list, default=(2, 4, 8, 12))
    p.add_argument("--gap-fraction", type=float, default=0.01)

    p = sub.add_parser("bogolubov-fuzz", parents=[common],
                       help="random models against the lower bound")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--nmax-lo", type=int, default=2)
    p.add_argument("--nmax-hi", type=int, default=6)

    p = sub.add_parser("check-inequalities", parents=[common],
                       help="seeded fuzz of the electrostatic inequalities")
    p.add_argument("--which", choices=_ALL_CHECKERS + ("all",), default="all")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)

    p = sub.add_parser("dyson-minimize", parents=[common],
                       help="variational minimum, virial, grid agreement")
    p.add_argument("--nodes", type=int, default=800)
    p.add_argument("--rmax", type=float, default=25.0)

    p = sub.add_parser("trialstate", parents=[common],
                       help="condensate trial-state checks")
    p.add_argument("--check", required=True,
                   choices=("pair-energy", "trace-scaling", "upper-bound", "berezin-lieb"))
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)

    p = sub.add_parser("matrix-localize", parents=[common],
                       help="localize one instance from plain-text files")
    p.add_argument("--matrix", required=True)
    p.add_argument("--psi", required=True)
    p.add_argument("--window", type=int, required=True)
    p.add_argument("--budget-c", type=float, default=None)

    p = sub.add_parser("matrixloc-ensemble", parents=[common],
                       help="Gaussian ensemble for the localization budget")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--size", type=int, default=64)
    p.add_argument("--window", type=int, default=8)
    p.add_argument("--ceiling", type=float, default=50.0)

    p = sub.add_parser("lt-study", parents=[common],
                       help="negative-spectrum sums vs the semiclassical ratio")
    p.add_argument("--depths", type=_float_list, default=(50.0, 100.0, 200.0))

    p = sub.add_parser("sobolev-study", parents=[common],
                       help="scale-invariant ground-state ratios")
    p.add_argument("--depths", type=_float_list, default=(5.0, 10.0, 20.0, 50.0))

    p = sub.add_parser("stability-bound", parents=[common],
                       help="nearest-nucleus lower bound per electron")
    p.add_argument("--charges", type=_float_list, default=(1.0,))
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--c-lt", type=float, default=0.04)
    p.add_argument("--n-electrons", type=int, default=10)
    p.add_argument("--radius", type=float, default=None)
    p.add_argument("--vacuum-strength", type=float, default=None)

    p = sub.add_parser("verify", parents=[common],
                       help="the full verification battery")
    p.add_argument("--quick", action="store_true", default=False,
                   help="reduced trial counts, same checks")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--workers", type=int, default=None)

    return parser


def _handle(args):
    name = args.subcommand
    if name == "foldy-j":
        return run_j_check(tol=args.tol)
    if name == "foldy-identity":
        return run_identity_check()
    if name == "bogolubov-sharpness":
        return run_bogolubov_ladder(args.t, args.gplus, args.gminus,
                                    args.nmax_list, args.gap_fraction)
    if name == "bogolubov-fuzz":
        return run_bogolubov_fuzz(args.trials, args.seed, args.nmax_lo, args.nmax_hi)
    if name == "check-inequalities":
        return run_inequality_fuzz(args.which, args.trials, args.seed)
    if name == "dyson-minimize":
        return run_dyson(args.nodes, args.rmax)
    if name == "trialstate":
        if args.check == "pair-energy":
            return run_pair_identity()
        if args.check == "trace-scaling":
            return run_trace_scaling()
        if args.check == "upper-bound":
            return run_upper_bound()
        return run_berezin(args.trials, args.seed)
    if name == "matrix-localize":
        return run_matrix_localize(args.matrix, args.psi, args.window, args.budget_c)
    if name == "matrixloc-ensemble":
        return run_matrixloc_ensemble(args.trials, args.seed, args.size,
                                      args.window, args.ceiling)
    if name == "lt-study":
        return run_lt_study(args.depths)
    if name == "sobolev-study":
        return run_sobolev_study(args.depths)
    if name == "stability-bound":
        return run_stability(args.charges, args.q, args.c_lt, args.n_electrons,
                             args.radius, args.vacuum_strength)
    if name == "verify":
        return run_verification_suite(args.seed, quick=args.quick, workers=args.workers)
    raise PreconditionError(f"no handler for subcommand {name!r}")


def _load_config_flags(path) -> list[str]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise PreconditionError(f"cannot read config {path!r}: {exc}") from exc
    flags = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise PreconditionError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise PreconditionError(f"{path}:{lineno}: empty key")
        flag = "--" + key.replace("_", "-")
        if value.lower() in ("true", "yes", "on"):
            flags.append(flag)
        elif value.lower() in ("false", "no", "off"):
            continue
        else:
            flags.append(f"{flag}={value}")
    return flags


def _inject_config(argv: list[str]) -> list[str]:
    """Splice config-file flags in right after the subcommand so explicit
    command-line flags (parsed later) win."""
    for i, token in enumerate(argv):
        if token == "--config":
            if i + 1 >= len(argv):
                raise PreconditionError("--config needs a path")
            path, rest = argv[i + 1], argv[:i] + argv[i + 2:]
            break
        if token.startswith("--config="):
            path, rest = token.split("=", 1)[1], argv[:i] + argv[i + 1:]
            break
    else:
        return argv
    if not rest or rest[0].startswith("-"):
        raise PreconditionError("--config must follow a subcommand")
    return rest[:1] + _load_config_flags(path) + rest[1:]


def _short(value) -> str:
    if isinstance(value, float):
        return f"{value:.8g}"
    return str(value)


# workers is scheduling, not configuration: the per-check seed derivation
# guarantees the record cannot depend on it
_PLUMBING_KEYS = ("subcommand", "outdir", "output", "config", "workers")


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    try:
        argv = _inject_config(argv)
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    started = time.perf_counter()
    try:
        rows, summary, tables = _handle(args)
    except (DomainError, PreconditionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ConsistencyError as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return 1
    except (AccuracyError, BudgetExceededError, ResourceLimitError, SolverError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    duration = time.perf_counter() - started

    params = {k: v for k, v in vars(args).items() if k not in _PLUMBING_KEYS}
    config = RunConfig(
        subcommand=args.subcommand,
        params=params,
        seed=int(getattr(args, "seed", 0)),
        out_name=args.output or args.subcommand,
    )
    record = ReportRecord(config=config, rows=tuple(rows), summary=summary,
                          duration_s=duration)
    outdir = Path(args.outdir or os.environ.get(OUTDIR_ENV) or ".")
    record_path = write_record(record, outdir)
    for name, (columns, table_rows) in tables.items():
        write_table(outdir, config.out_name, name, columns, table_rows)

    for row in rows:
        verdict = row.get("holds", row.get("passed"))
        if verdict is None:
            continue
        status = "ok" if verdict else "FAIL"
        detail = " ".join(
            f"{k}={_short(v)}" for k, v in row.items()
            if k not in ("check", "holds", "passed")
        )
        print(f"[{status}] {row.get('check', 'row')}: {detail}")

    passed = summary.get("passed", all(r.get("holds", True) for r in rows))
    failed = summary.get("failed", [])
    if failed:
        print(f"failed checks: {', '.join(failed)}", file=sys.stderr)
    print(f"{args.subcommand}: {'PASS' if passed else 'FAIL'} -> {record_path}")
    return 0 if passed else 1


if __name__ == "__main__":
    sys.exit(main())
