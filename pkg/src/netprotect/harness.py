"""Experiment orchestration: repeated SAA runs per sampler and sample size,
policy evaluation (exact or Monte Carlo), convergence diagnostics, and CSV,
SVG, and manifest emission.

Replicate r of cell (sampler, N, budget fraction) draws its scenarios from a
stream derived from (master seed, sampler index, N, budget, r), so rows are
reproducible and independent of execution order. results.csv and results.svg
are byte-stable for a fixed master seed when runtime recording is off (wall
times are the one non-deterministic column); manifest.json is a run log and
always includes wall times.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from . import __version__ as _pkg_version
from . import _kernels
from .errors import EnumerationCapError, ValidationError
from .mrf import DEFAULT_ENUMERATION_CAP, Mrf, exact_policy_value
from .network import Network, Policy, reachable_weight
from .saa import DEFAULT_ACTION_CAP, SaaInstance, solve_exact, solve_greedy
from .samplers import GibbsConfig, XorConfig, gibbs_sample, xor_sample_weighted
from .seeding import derive_rng

CSV_COLUMNS = [
    "sampler",
    "n_samples",
    "budget_fraction",
    "replicate",
    "policy_actions",
    "value",
    "value_mode",
    "stderr",
    "runtime_ms",
    "error_code",
]

_SAMPLERS = ("gibbs", "xor")


def draw_scenarios(
    mrf: Mrf,
    sampler: str,
    n: int,
    seed: int,
    burn_in: int = 1000,
    thinning: int = 10,
    max_retries: int = 200,
    slice_bounds=None,
) -> list:
    """Draw n scenarios with the named sampler, deterministically from seed."""
    if sampler == "gibbs":
        return gibbs_sample(mrf, GibbsConfig(burn_in=burn_in, thinning=thinning, seed=seed), n)
    if sampler == "xor":
        slices = None
        if slice_bounds is not None:
            from .samplers import build_slices

            slices = build_slices(mrf, bounds=slice_bounds)
        return xor_sample_weighted(mrf, slices, XorConfig(seed=seed, max_retries=max_retries), n)
    raise ValidationError(f"unknown sampler {sampler!r}; expected one of {_SAMPLERS}")


def default_estimation_sampler(mrf: Mrf) -> str:
    """XOR when slice bounds can be enumerated, else Gibbs with long burn-in."""
    return "xor" if mrf.n_vars <= DEFAULT_ENUMERATION_CAP else "gibbs"


class McEstimate(NamedTuple):
    value: float
    stderr: float
    sampler: str
    draws: int


def estimate_policy_value_mc(
    mrf: Mrf,
    network: Network,
    policy: Policy,
    draws: int,
    seed: int,
    sampler: Optional[str] = None,
    **sampler_opts,
) -> McEstimate:
    """Monte Carlo policy value: mean reachable weight over sampled scenarios
    and its standard error."""
    if draws < 1:
        raise ValidationError("draws must be >= 1")
    if sampler is None:
        sampler = default_estimation_sampler(mrf)
        if sampler == "gibbs":
            sampler_opts.setdefault("burn_in", 5000)
    scenarios = draw_scenarios(mrf, sampler, draws, seed, **sampler_opts)
    vals = np.fromiter(
        (reachable_weight(network, s, policy) for s in scenarios),
        dtype=np.float64,
        count=draws,
    )
    mean = float(np.mean(vals))
    stderr = float(np.std(vals, ddof=1) / math.sqrt(draws)) if draws > 1 else 0.0
    return McEstimate(mean, stderr, sampler, draws)


def convergence_diagnostic(
    mrf: Mrf,
    network: Network,
    policy: Policy,
    sizes: Sequence[int],
    seed: int,
    sampler: Optional[str] = None,
    **sampler_opts,
) -> list:
    """Differences of successive batch means over an increasing size sequence.

    Batch i draws sizes[i] fresh scenarios from its own derived stream; the
    returned list holds mean(batch i) - mean(batch i-1) for i >= 1. Values
    shrinking toward zero indicate the estimate has converged.
    """
    sizes = list(sizes)
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValidationError("sizes must be strictly increasing")
    if sampler is None:
        sampler = default_estimation_sampler(mrf)
    means = []
    for idx, n in enumerate(sizes):
        batch_seed = int(derive_rng(seed, idx).integers(0, 2**63))
        scen = draw_scenarios(mrf, sampler, n, batch_seed, **sampler_opts)
        vals = [reachable_weight(network, s, policy) for s in scen]
        means.append(sum(vals) / n)
    return [b - a for a, b in zip(means, means[1:])]


@dataclass(frozen=True)
class ExperimentConfig:
    network_path: str
    mrf_path: str
    samplers: tuple = _SAMPLERS
    sample_sizes: tuple = (10, 60, 120, 180)
    budget_fractions: tuple = (0.1, 0.2, 0.3, 0.4)
    replicates: int = 10
    evaluation_mode: str = "exact"  # exact | monte_carlo
    mc_draws: int = 5000
    seed: int = 0
    gibbs_burn_in: int = 1000
    gibbs_thinning: int = 10
    xor_max_retries: int = 200
    record_runtime: bool = True

    def __post_init__(self):
        if self.replicates < 1:
            raise ValidationError("replicates must be >= 1")
        for f in self.budget_fractions:
            if not (0 <= f <= 1):
                raise ValidationError("budget fractions must be in [0, 1]")
        for s in self.samplers:
            if s not in _SAMPLERS:
                raise ValidationError(f"unknown sampler {s!r}")
        if self.evaluation_mode not in ("exact", "monte_carlo"):
            raise ValidationError("evaluation_mode must be 'exact' or 'monte_carlo'")
        if self.evaluation_mode == "monte_carlo" and self.mc_draws < 1:
            raise ValidationError("mc_draws must be >= 1")

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        doc = dict(doc)
        for key in ("samplers", "sample_sizes", "budget_fractions"):
            if key in doc:
                doc[key] = tuple(doc[key])
        return cls(**doc)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        text = open(path, "rb").read()
        if str(path).endswith(".toml"):
            try:
                import tomllib
            except ImportError:
                import tomli as tomllib
            doc = tomllib.loads(text.decode())
        else:
            doc = json.loads(text.decode())
        return cls.from_dict(doc)


@dataclass
class ReplicateRow:
    sampler: str
    n_samples: int
    budget_fraction: float
    replicate: int
    policy_actions: str
    value: Optional[float]
    value_mode: str
    stderr: Optional[float]
    runtime_ms: Optional[float]
    error_code: str


@dataclass
class CellStats:
    values: list
    mean: float
    std: float  # population formula over replicate values


@dataclass
class ExperimentResult:
    rows: list = field(default_factory=list)
    cells: dict = field(default_factory=dict)  # (sampler, n, fraction) -> CellStats

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow(
                [
                    r.sampler,
                    r.n_samples,
                    repr(float(r.budget_fraction)),
                    r.replicate,
                    r.policy_actions,
                    "" if r.value is None else repr(r.value),
                    r.value_mode,
                    "" if r.stderr is None else repr(r.stderr),
                    "" if r.runtime_ms is None else f"{r.runtime_ms:.3f}",
                    r.error_code,
                ]
            )
        return buf.getvalue()


def _aggregate(rows) -> dict:
    cells = {}
    for r in rows:
        if r.error_code:
            continue
        cells.setdefault((r.sampler, r.n_samples, r.budget_fraction), []).append(r.value)
    out = {}
    for key, vals in cells.items():
        mean = sum(vals) / len(vals)
        var = sum((v - mean) ** 2 for v in vals) / len(vals)
        out[key] = CellStats(vals, mean, math.sqrt(var))
    return out


def run_experiment(
    config: ExperimentConfig,
    out_dir=None,
    network: Optional[Network] = None,
    mrf: Optional[Mrf] = None,
) -> ExperimentResult:
    """Run the full sweep; optionally write results.csv/.svg and manifest.json.

    network/mrf may be passed directly to skip reloading from the configured
    paths."""
    if network is None:
        network = Network.load(config.network_path)
    if mrf is None:
        mrf = Mrf.load(config.mrf_path)
    total_cost = sum(a.cost for a in network.actions)
    exact_eval = config.evaluation_mode == "exact"
    use_exact_solver = len(network.actions) <= DEFAULT_ACTION_CAP

    result = ExperimentResult()
    for si, sampler in enumerate(config.samplers):
        for n in config.sample_sizes:
            for bf in config.budget_fractions:
                budget = bf * total_cost
                for rep in range(config.replicates):
                    seed = int(
                        derive_rng(
                            config.seed, si, n, int(round(bf * 10**6)), rep
                        ).integers(0, 2**63)
                    )
                    t0 = time.perf_counter()
                    try:
                        scen = draw_scenarios(
                            mrf,
                            sampler,
                            n,
                            seed,
                            burn_in=config.gibbs_burn_in,
                            thinning=config.gibbs_thinning,
                            max_retries=config.xor_max_retries,
                        )
                        inst = SaaInstance(network, scen, budget)
                        solved = (
                            solve_exact(inst) if use_exact_solver else solve_greedy(inst)
                        )
                        if exact_eval:
                            value = exact_policy_value(mrf, network, solved.policy)
                            stderr = 0.0
                            mode = "exact"
                        else:
                            est = estimate_policy_value_mc(
                                mrf, network, solved.policy, config.mc_draws, seed + 1
                            )
                            value, stderr = est.value, est.stderr
                            mode = "monte_carlo"
                        row = ReplicateRow(
                            sampler,
                            n,
                            bf,
                            rep,
                            ";".join(sorted(solved.policy.action_ids)),
                            value,
                            mode,
                            stderr,
                            None,
                            "",
                        )
                    except Exception as exc:  # recorded, run continues
                        row = ReplicateRow(
                            sampler, n, bf, rep, "", None, "", None, None, type(exc).__name__
                        )
                    if config.record_runtime:
                        row.runtime_ms = (time.perf_counter() - t0) * 1000.0
                    result.rows.append(row)
    result.cells = _aggregate(result.rows)

    if out_dir is not None:
        import pathlib

        out = pathlib.Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "results.csv").write_text(result.to_csv())
        (out / "results.svg").write_text(render_svg(result))
        manifest = {
            "config": asdict(config),
            "package_version": _pkg_version,
            "kernel": _kernels.impl.KERNEL_NAME,
            "solver": "exact" if use_exact_solver else "greedy",
            "total_action_cost": total_cost,
            "cells": {
                f"{k[0]},{k[1]},{k[2]}": {"mean": c.mean, "std": c.std, "values": c.values}
                for k, c in sorted(result.cells.items())
            },
        }
        (out / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n")
    return result


# -- plotting ------------------------------------------------------------

_PALETTE = ["#1b6ca8", "#d1495b", "#3a7d44", "#8d5a97", "#c77b30", "#4a4e69"]


def render_svg(result: ExperimentResult, width: int = 640, height: int = 420) -> str:
    """Mean value vs sample size per (sampler, budget) series with std bars."""
    series = {}
    for (sampler, n, bf), cell in sorted(result.cells.items()):
        series.setdefault((sampler, bf), []).append((n, cell.mean, cell.std))
    ml, mr, mt, mb = 60, 160, 20, 45
    pw, ph = width - ml - mr, height - mt - mb
    xs = [n for pts in series.values() for n, _, _ in pts]
    ys = [v for pts in series.values() for _, m, s in pts for v in (m - s, m + s)]
    if not xs:
        return (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">'
            "<text x='20' y='30'>no data</text></svg>"
        )
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x1 = x0 + 1
    if y1 == y0:
        y1 = y0 + 1

    def sx(x):
        return ml + pw * (x - x0) / (x1 - x0)

    def sy(y):
        return mt + ph * (1 - (y - y0) / (y1 - y0))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="sans-serif" font-size="11">',
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>',
    ]
    for i in range(5):
        xv = x0 + (x1 - x0) * i / 4
        yv = y0 + (y1 - y0) * i / 4
        parts.append(
            f'<text x="{sx(xv):.1f}" y="{height - mb + 14}" text-anchor="middle">{xv:g}</text>'
        )
        parts.append(
            f'<text x="{ml - 6}" y="{sy(yv):.1f}" text-anchor="end" dominant-baseline="middle">{yv:.4g}</text>'
        )
    parts.append(
        f'<text x="{ml + pw / 2:.1f}" y="{height - 8}" text-anchor="middle">sample size N</text>'
    )
    parts.append(
        f'<text x="14" y="{mt + ph / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 14 {mt + ph / 2:.1f})">policy value</text>'
    )
    for idx, ((sampler, bf), pts) in enumerate(sorted(series.items())):
        color = _PALETTE[idx % len(_PALETTE)]
        pts = sorted(pts)
        path = " ".join(f"{sx(n):.2f},{sy(m):.2f}" for n, m, _ in pts)
        parts.append(
            f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        for n, m, s in pts:
            parts.append(
                f'<line x1="{sx(n):.2f}" y1="{sy(m - s):.2f}" x2="{sx(n):.2f}" '
                f'y2="{sy(m + s):.2f}" stroke="{color}" stroke-width="1"/>'
            )
            parts.append(
                f'<circle cx="{sx(n):.2f}" cy="{sy(m):.2f}" r="2.5" fill="{color}"/>'
            )
        ly = mt + 16 * idx + 10
        parts.append(
            f'<line x1="{width - mr + 10}" y1="{ly}" x2="{width - mr + 30}" y2="{ly}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        parts.append(
            f'<text x="{width - mr + 35}" y="{ly + 4}">{sampler}, budget {bf:g}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
