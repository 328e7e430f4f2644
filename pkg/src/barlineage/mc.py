"""Replicated-tree Monte Carlo harness for size/power tables.

Each table cell is (generation, hypothesis): ``replicas`` trees are
simulated to that depth, the configured test is run on each, and the
rejection proportion is recorded per threshold.  Replicas where some
generation has no observed cell (extinct) or where the test statistic
is undefined (degenerate) are removed from the denominator and counted.

Every replica owns the stream keyed by (master_seed, hypothesis,
generation, replica_id), so tables are bit-identical across runs and
across worker counts.
"""

from __future__ import annotations

import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import bar, gw
from .errors import StatError, TooManyDiscards
from .numerics import replica_stream

EXTINCT = "extinct"
DEGENERATE = "degenerate"

TESTS = ("gw_mean", "coefficient", "fixed_point")
_HYP_CODE = {"H0": 0, "H1": 1}

# Reproduction laws of the published size/power experiments: the null
# law on both types, and a perturbed law on one type under the
# alternative.  The perturbed law goes to type 0: the root is type 1,
# so this keeps the root's offspring law at the null and matches the
# published power column (the assignment is NOT distribution-neutral in
# finite samples because extinction rates differ).
P0_LAW = gw.ReproductionLaw(0.04, 0.08, 0.08, 0.8)
P1_LAW = gw.ReproductionLaw(0.15, 0.08, 0.08, 0.69)

# Noise defaults for the trait-process tables (the originals leave the
# noise unstated); configuration values, override freely.
DEFAULT_SIGMA2 = 1.0
DEFAULT_RHO = 0.5


@dataclass(frozen=True)
class McConfig:
    which_test: str
    gw_null: gw.GwModel
    gw_alt: gw.GwModel | None = None
    bar_null: bar.BarModel | None = None
    bar_alt: bar.BarModel | None = None
    generations: tuple[int, ...] = (7, 8, 9, 10, 11)
    replicas: int = 1000
    thresholds: tuple[float, ...] = (0.05, 0.01, 0.001)
    master_seed: int = 0

    def __post_init__(self):
        if self.which_test not in TESTS:
            raise ValueError(f"which_test must be one of {TESTS}")
        if self.replicas < 1:
            raise ValueError("replicas must be >= 1")
        if any(not 0.0 < t < 1.0 for t in self.thresholds):
            raise ValueError("thresholds must lie in (0, 1)")
        if list(self.generations) != sorted(self.generations):
            raise ValueError("generations must be sorted ascending")
        if self.which_test != "gw_mean" and self.bar_null is None:
            raise ValueError(f"{self.which_test} needs bar_null")

    @property
    def hypotheses(self) -> tuple[str, ...]:
        alt = self.gw_alt if self.which_test == "gw_mean" else self.bar_alt
        return ("H0", "H1") if alt is not None else ("H0",)


def table_config(table: int, replicas: int = 1000, master_seed: int = 0,
                 generations=(7, 8, 9, 10, 11)) -> McConfig:
    """Preset configurations for the three published experiments."""
    gw_null = gw.GwModel(P0_LAW, P0_LAW)
    if table == 1:
        return McConfig(
            which_test="gw_mean",
            gw_null=gw_null,
            gw_alt=gw.GwModel(P1_LAW, P0_LAW),
            generations=tuple(generations),
            replicas=replicas,
            master_seed=master_seed,
        )
    if table in (2, 3):
        null = bar.BarModel(0.5, 0.5, 0.5, 0.5, DEFAULT_SIGMA2, DEFAULT_RHO)
        alt = bar.BarModel(0.5, 0.5, 0.5, 0.4, DEFAULT_SIGMA2, DEFAULT_RHO)
        return McConfig(
            which_test="coefficient" if table == 2 else "fixed_point",
            gw_null=gw_null,
            bar_null=null,
            bar_alt=alt,
            generations=tuple(generations),
            replicas=replicas,
            master_seed=master_seed,
        )
    raise ValueError(f"no preset for table {table}")


def run_replica(config: McConfig, hypothesis: str, generation: int, replica_id: int):
    """One replica: simulate, test, return a p-value, EXTINCT or DEGENERATE."""
    rng = replica_stream(
        config.master_seed, _HYP_CODE[hypothesis], generation, replica_id
    )
    gw_model = config.gw_null
    if config.which_test == "gw_mean" and hypothesis == "H1":
        gw_model = config.gw_alt
    tree = gw.simulate_observation_tree(gw_model, generation, rng)
    if tree.counts().extinct:
        return EXTINCT
    try:
        if config.which_test == "gw_mean":
            report = gw.gw_mean_test(tree)
        else:
            model = config.bar_null if hypothesis == "H0" else config.bar_alt
            values = bar.simulate_bar_values(
                model, generation, model.fixed_point_odd, rng
            )
            est = bar.estimate_bar(values, tree)
            if config.which_test == "coefficient":
                report = bar.coefficient_test(est)
            else:
                report = bar.fixed_point_test(est)
    except StatError:
        return DEGENERATE
    return report.p_value


@dataclass(frozen=True)
class McCell:
    """Aggregated outcome of one (generation, hypothesis) cell."""

    rejections: tuple[int, ...]  # aligned with the table's thresholds
    n_used: int
    n_extinct: int
    n_degenerate: int

    def proportion(self, i: int) -> float:
        return self.rejections[i] / self.n_used if self.n_used else 0.0


@dataclass
class McTable:
    thresholds: tuple[float, ...]
    cells: dict  # (generation, hypothesis) -> McCell
    pvalues: dict = field(default_factory=dict, compare=False)  # raw archives


def _cell_worker(args):
    config, hypothesis, generation, lo, hi = args
    return [run_replica(config, hypothesis, generation, r) for r in range(lo, hi)]


def run_table(config: McConfig, workers: int | None = None) -> McTable:
    """Run the whole grid.  ``workers`` > 1 fans replicas out per cell."""
    if workers is None:
        workers = int(os.environ.get("BARLINEAGE_WORKERS", "1"))
    cells, archives = {}, {}
    for generation in config.generations:
        for hypothesis in config.hypotheses:
            outcomes = _run_cell(config, hypothesis, generation, workers)
            pvals = np.array([o for o in outcomes if isinstance(o, float)])
            n_extinct = outcomes.count(EXTINCT)
            n_degenerate = outcomes.count(DEGENERATE)
            if n_extinct + n_degenerate > config.replicas / 2:
                raise TooManyDiscards(
                    generation, hypothesis, n_extinct + n_degenerate, config.replicas
                )
            key = (generation, hypothesis)
            cells[key] = McCell(
                rejections=tuple(int((pvals < t).sum()) for t in config.thresholds),
                n_used=len(pvals),
                n_extinct=n_extinct,
                n_degenerate=n_degenerate,
            )
            archives[key] = pvals
    return McTable(tuple(config.thresholds), cells, archives)


def _run_cell(config, hypothesis, generation, workers):
    n = config.replicas
    if workers <= 1:
        return [run_replica(config, hypothesis, generation, r) for r in range(n)]
    bounds = np.linspace(0, n, workers + 1).astype(int)
    jobs = [
        (config, hypothesis, generation, int(lo), int(hi))
        for lo, hi in zip(bounds[:-1], bounds[1:])
        if hi > lo
    ]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        chunks = list(pool.map(_cell_worker, jobs))
    return [o for chunk in chunks for o in chunk]


_CSV_HEADER = "generation,hypothesis,threshold,rejection_pct,n_used,n_extinct,n_degenerate"


def _rows(table: McTable):
    for (generation, hypothesis), cell in sorted(table.cells.items()):
        for i, t in enumerate(table.thresholds):
            yield {
                "generation": generation,
                "hypothesis": hypothesis,
                "threshold": t,
                "rejection_pct": round(100.0 * cell.proportion(i), 1),
                "n_used": cell.n_used,
                "n_extinct": cell.n_extinct,
                "n_degenerate": cell.n_degenerate,
            }


def emit_table(table: McTable, fmt: str = "csv") -> str:
    """Render as CSV (one row per cell x threshold) or the JSON mirror."""
    if fmt == "json":
        return json.dumps(list(_rows(table)), indent=2) + "\n"
    if fmt != "csv":
        raise ValueError(f"unsupported format {fmt!r}")
    out = io.StringIO()
    out.write(_CSV_HEADER + "\n")
    for r in _rows(table):
        out.write(
            f"{r['generation']},{r['hypothesis']},{r['threshold']:g},"
            f"{r['rejection_pct']:.1f},{r['n_used']},{r['n_extinct']},{r['n_degenerate']}\n"
        )
    return out.getvalue()


def parse_table(text: str, fmt: str = "csv") -> McTable:
    """Rebuild an McTable from emit_table output (without p-value archives).

    Rejection counts are recovered from the one-decimal percentage; the
    recovery is exact whenever n_used <= 1000 (rounding error below half
    a count), which covers the published experiments.
    """
    if fmt == "json":
        rows = json.loads(text)
    elif fmt == "csv":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if lines[0] != _CSV_HEADER:
            raise ValueError("unrecognized table header")
        rows = []
        for ln in lines[1:]:
            g, h, t, pct, used, ext, deg = ln.split(",")
            rows.append(
                {
                    "generation": int(g),
                    "hypothesis": h,
                    "threshold": float(t),
                    "rejection_pct": float(pct),
                    "n_used": int(used),
                    "n_extinct": int(ext),
                    "n_degenerate": int(deg),
                }
            )
    else:
        raise ValueError(f"unsupported format {fmt!r}")
    thresholds: list[float] = []
    grouped: dict = {}
    for r in rows:
        if r["threshold"] not in thresholds:
            thresholds.append(r["threshold"])
        grouped.setdefault((r["generation"], r["hypothesis"]), []).append(r)
    cells = {}
    for key, cell_rows in grouped.items():
        cell_rows.sort(key=lambda r: thresholds.index(r["threshold"]))
        rej = tuple(
            int(round(r["rejection_pct"] / 100.0 * r["n_used"])) for r in cell_rows
        )
        r0 = cell_rows[0]
        cells[key] = McCell(rej, r0["n_used"], r0["n_extinct"], r0["n_degenerate"])
    return McTable(tuple(thresholds), cells)
