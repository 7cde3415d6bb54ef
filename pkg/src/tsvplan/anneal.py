"""Two-loop placement search: per-layer simulated annealing inside a
stack-level loop that keeps the floorplan with the best whole-stack average
temperature.

The annealing chain is sequential by nature; all randomness flows from one
numpy PCG64 generator seeded from the config so traces replay exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import InvalidMoveError
from .metrics import CostBreakdown, CostWeights, cost, floorplan_area, wirelength
from .model import Design, move_farm, reshape_farm
from .thermal import (FieldStats, GridSpec, couple_leakage, field_stats, grid_for,
                      layer_averages, solve_design)

RNG_KIND = "numpy-PCG64"  # echoed into reports so traces are replayable


@dataclass(frozen=True)
class AnnealConfig:
    t_initial: float | None = None    # None: calibrate from probe moves
    t_threshold: float | None = None  # None: t_initial * 1e-3
    cooling: float = 0.85
    max_moves: int = 40
    seed: int = 0
    probe_moves: int = 100
    retry_cap: int = 50

    def __post_init__(self):
        if not (0 < self.cooling < 1):
            raise ValueError("cooling factor must be in (0, 1)")
        if self.max_moves < 1:
            raise ValueError("max_moves must be >= 1")
        if self.t_initial is not None and self.t_threshold is not None:
            if not (self.t_initial > self.t_threshold > 0):
                raise ValueError("need t_initial > t_threshold > 0")


@dataclass(frozen=True)
class FlowConfig:
    outer_iterations: int = 3
    cell_size: float | None = None       # None: tech.grid_cell
    leakage_coeff: float | None = None   # None: tech.leakage_coeff
    leakage_tref: float | None = None

    def __post_init__(self):
        if self.outer_iterations < 1:
            raise ValueError("outer_iterations must be >= 1")


@dataclass(frozen=True)
class MoveRecord:
    outer: int
    layer: int
    kind: str            # reshape | move | null
    farm: str | None
    delta_cost: float
    temperature: float
    draw: float | None   # acceptance draw for uphill candidates
    accepted: bool
    best_cost: float


@dataclass(frozen=True)
class PassRecord:
    outer: int
    layer: int
    eligible: int
    moves: int
    accepted: int
    pre_avg: float
    pre_peak: float
    post_avg: float
    post_peak: float


@dataclass(frozen=True)
class OuterRecord:
    outer: int
    stack_average: float
    best_average: float


@dataclass
class RunTrace:
    moves: list[MoveRecord] = dc_field(default_factory=list)
    passes: list[PassRecord] = dc_field(default_factory=list)
    outers: list[OuterRecord] = dc_field(default_factory=list)
    best_cost_curve: list[float] = dc_field(default_factory=list)


def accept(delta_cost: float, temperature: float, rng) -> tuple[bool, float | None]:
    """Metropolis rule: downhill always, uphill with probability e^(-dC/T)."""
    if delta_cost <= 0:
        return True, None
    draw = float(rng.random())
    return draw < math.exp(-delta_cost / temperature), draw


def gen_move(design: Design, eligible: list[str], rng, grid: GridSpec,
             retry_cap: int = 50) -> tuple[Design, str, str | None]:
    """Draw one candidate: pick a farm, then reshape (draw < 1/2) or relocate.

    Relocation targets a uniformly drawn grid-aligned origin. An illegal
    candidate discards the whole draw and retries; after retry_cap illegal
    draws the unmodified floorplan is returned as a null move.
    """
    if not eligible:
        return design, "null", None
    tech = design.stack.tech
    cell = grid.cell_size
    fw, fh = design.stack.footprint
    for _ in range(retry_cap):
        name = eligible[int(rng.integers(len(eligible)))]
        farm = design.floorplan.farm(name)
        branch = float(rng.random())
        try:
            if branch < 0.5:
                choices = [r for r in tech.aspect_ratios
                           if abs(r - farm.aspect_ratio) > 1e-9 * r]
                if not choices:
                    raise InvalidMoveError("no alternative ratio")
                ratio = choices[int(rng.integers(len(choices)))]
                return reshape_farm(design, name, ratio), "reshape", name
            max_ix = math.floor((fw - farm.width) / cell + 1e-9)
            max_iy = math.floor((fh - farm.height) / cell + 1e-9)
            if max_ix < 0 or max_iy < 0:
                raise InvalidMoveError("farm larger than footprint")
            origin = (int(rng.integers(max_ix + 1)) * cell,
                      int(rng.integers(max_iy + 1)) * cell)
            if abs(origin[0] - farm.x) < 1e-12 and abs(origin[1] - farm.y) < 1e-12:
                raise InvalidMoveError("position unchanged")
            return move_farm(design, name, origin), "move", name
        except InvalidMoveError:
            continue
    return design, "null", None


def calibrate_t_initial(state: Design, cost_fn, propose, rng,
                        probe_moves: int, current_cost: float) -> float:
    """Pick T0 so a median uphill step is accepted with probability 0.8."""
    uphill = []
    for _ in range(probe_moves):
        candidate, kind, _ = propose(state, rng)
        if kind == "null":
            continue
        delta = cost_fn(candidate) - current_cost
        if delta > 0:
            uphill.append(delta)
    if uphill:
        return float(np.median(uphill)) / -math.log(0.8)
    return max(abs(current_cost) * 1e-3, 1e-9)


def sa_placement(state: Design, cost_fn, propose, config: AnnealConfig, rng,
                 trace: RunTrace | None = None, outer: int = 0,
                 layer: int = -1) -> tuple[Design, float]:
    """Simulated annealing over candidate floorplans; returns the best seen.

    cost_fn maps a legal floorplan to a scalar; propose(state, rng) yields
    (candidate, kind, farm). Temperature cools geometrically after each
    batch of max_moves candidates until it falls below the threshold.
    """
    current_cost = cost_fn(state)
    t0 = config.t_initial
    if t0 is None:
        t0 = calibrate_t_initial(state, cost_fn, propose, rng,
                                 config.probe_moves, current_cost)
    threshold = config.t_threshold if config.t_threshold is not None else t0 * 1e-3
    if not (t0 > threshold > 0):
        raise ValueError(f"resolved t_initial {t0} must exceed threshold {threshold} > 0")

    best, best_cost = state, current_cost
    temperature = t0
    while temperature > threshold:
        for _ in range(config.max_moves):
            candidate, kind, farm = propose(state, rng)
            candidate_cost = current_cost if kind == "null" else cost_fn(candidate)
            delta = candidate_cost - current_cost
            accepted, draw = accept(delta, temperature, rng)
            if accepted:
                state, current_cost = candidate, candidate_cost
            if best_cost > current_cost:
                best, best_cost = state, current_cost
            if trace is not None:
                trace.moves.append(MoveRecord(outer, layer, kind, farm, delta,
                                              temperature, draw, accepted, best_cost))
                trace.best_cost_curve.append(best_cost)
        temperature *= config.cooling
    return best, best_cost


class Evaluator:
    """Solves and prices candidate floorplans, warm-starting each solve from
    the previous temperature field (moves are local, so the previous field is
    an excellent initial guess)."""

    def __init__(self, grid: GridSpec, weights: CostWeights | None,
                 leakage_coeff: float, leakage_tref: float | None):
        self.grid = grid
        self.weights = weights
        self.leakage_coeff = leakage_coeff
        self.leakage_tref = leakage_tref
        self.evaluations = 0
        self._warm = None

    def solve(self, design: Design, warm: bool = True):
        x0 = self._warm if warm else None
        if self.leakage_coeff > 0:
            result = couple_leakage(design, self.grid, self.leakage_coeff,
                                    self.leakage_tref, x0=x0)
            field = result.field
        else:
            field = solve_design(design, self.grid, x0=x0)
        self._warm = field.t
        return field

    def breakdown(self, design: Design) -> CostBreakdown:
        # with gradient weighting off the cost uses no field at all, so the
        # per-candidate re-solve would be dead work
        field = self.solve(design) if design.stack.tech.gradient_weighting else None
        self.evaluations += 1
        return cost(design, field, self.grid, self.weights)

    def cost(self, design: Design) -> float:
        return self.breakdown(design).total


@dataclass(frozen=True)
class DesignSummary:
    """Table-II-style row for one floorplan: geometry and solved temperatures."""

    wirelength: float
    area: float
    average: float
    peak: float
    hottest_block: str | None
    hottest_block_avg: float | None
    per_layer_average: tuple[float, ...]
    layer_peaks: tuple[float, ...]


def summarize(design: Design, grid: GridSpec, leakage_coeff: float = 0.0,
              leakage_tref: float | None = None) -> DesignSummary:
    """Cold solve plus metrics; the report path, reproducible by cmd_analyze."""
    if leakage_coeff > 0:
        field = couple_leakage(design, grid, leakage_coeff, leakage_tref).field
    else:
        field = solve_design(design, grid)
    stats: FieldStats = field_stats(field, design, grid)
    return DesignSummary(
        wirelength=wirelength(design),
        area=floorplan_area(design.floorplan),
        average=stats.average,
        peak=stats.peak,
        hottest_block=stats.hottest_block,
        hottest_block_avg=stats.hottest_block_avg,
        per_layer_average=tuple(layer_averages(field)),
        layer_peaks=tuple(float(field.t[i].max()) for i in range(field.t.shape[0])),
    )


@dataclass
class OptimizeResult:
    best: Design
    trace: RunTrace
    weights: CostWeights
    grid: GridSpec
    before: DesignSummary
    after: DesignSummary
    evaluations: int


def layer_pass(design: Design, layer: int, evaluator: Evaluator,
               config: AnnealConfig, rng, trace: RunTrace,
               outer: int, current_cost: float | None = None) -> tuple[Design, float]:
    """Anneal the farms that start on one layer; identity pass when none do."""
    eligible = [f.name for f in design.floorplan.farms if f.start_layer == layer]
    pre_field = evaluator.solve(design)
    pre_avg = float(pre_field.t[layer].mean())
    pre_peak = float(pre_field.t[layer].max())

    if not eligible:
        trace.passes.append(PassRecord(outer, layer, 0, 0, 0,
                                       pre_avg, pre_peak, pre_avg, pre_peak))
        if current_cost is None:
            current_cost = evaluator.cost(design)
        return design, current_cost

    def propose(state, r):
        return gen_move(state, eligible, r, evaluator.grid, config.retry_cap)

    moves_before = len(trace.moves)
    best, best_cost = sa_placement(design, evaluator.cost, propose, config, rng,
                                   trace, outer=outer, layer=layer)
    new_moves = trace.moves[moves_before:]
    post_field = evaluator.solve(best)
    trace.passes.append(PassRecord(
        outer, layer, len(eligible), len(new_moves),
        sum(1 for m in new_moves if m.accepted),
        pre_avg, pre_peak,
        float(post_field.t[layer].mean()), float(post_field.t[layer].max())))
    return best, best_cost


def optimize_stack(design: Design, anneal: AnnealConfig = AnnealConfig(),
                   flow: FlowConfig = FlowConfig(),
                   weights: CostWeights | None = None,
                   grid: GridSpec | None = None) -> OptimizeResult:
    """Run the full two-loop flow and return the floorplan with the largest
    whole-stack average-temperature reduction (the input if nothing improves)."""
    tech = design.stack.tech
    if grid is None:
        grid = grid_for(design.stack, flow.cell_size)
    lam = tech.leakage_coeff if flow.leakage_coeff is None else flow.leakage_coeff
    tref = tech.leakage_tref if flow.leakage_tref is None else flow.leakage_tref

    before = summarize(design, grid, lam, tref)
    evaluator = Evaluator(grid, weights, lam, tref)
    if weights is None:
        field0 = evaluator.solve(design, warm=False)
        weights = CostWeights.calibrated(design, field0, grid)
    evaluator.weights = weights

    rng = np.random.default_rng(anneal.seed)
    trace = RunTrace()
    current = design
    current_cost = evaluator.cost(current)
    best_design = design
    best_average = before.average

    for outer in range(1, flow.outer_iterations + 1):
        for layer in range(design.stack.num_layers):
            current, current_cost = layer_pass(current, layer, evaluator,
                                               anneal, rng, trace, outer,
                                               current_cost)
        snapshot = summarize(current, grid, lam, tref)
        if snapshot.average < best_average:
            best_average = snapshot.average
            best_design = current
        trace.outers.append(OuterRecord(outer, snapshot.average, best_average))

    after = summarize(best_design, grid, lam, tref)
    return OptimizeResult(best_design, trace, weights, grid, before, after,
                          evaluator.evaluations)
