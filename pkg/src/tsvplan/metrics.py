"""Objective terms for the placement search and their weighted combination.

The search minimizes

    total = area_w * bbox_area + efficiency_w * f_H + ratio_w * R + wirelength_w * W

with efficiency_w < 0 so that better lateral heat conduction lowers the cost.
f_H sums the per-unit-temperature conduction of adjacent same-layer block
pairs; a farm sitting in the corridor between two blocks drags the pair's
composite conductivity down, which is exactly what the optimizer pushes
against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DesignError
from .model import Block, Design, Floorplan
from .thermal import GridSpec, TemperatureField, block_average_temperature


@dataclass(frozen=True)
class CostWeights:
    area: float
    efficiency: float   # must be negative: higher efficiency lowers cost
    ratio: float
    wirelength: float
    ratio_target: float = 1.0

    def __post_init__(self):
        # <= 0 rather than < 0 so an all-zero weighting stays constructible
        if self.efficiency > 0:
            raise ValueError("efficiency weight must not be positive")
        if self.area < 0 or self.ratio < 0 or self.wirelength < 0:
            raise ValueError("area/ratio/wirelength weights must be >= 0")

    @classmethod
    def calibrated(cls, design: Design, field: TemperatureField, grid: GridSpec,
                   efficiency_per_kelvin: float | None = None) -> "CostWeights":
        """Derive default weights from the initial state.

        The anchor is the efficiency equivalent of one kelvin of average
        temperature at the initial floorplan; a 1% area or wirelength
        increase is priced at that same anchor, so thermal gains cannot buy
        more than a percent-scale overhead. The ratio weight scales the
        (dimensionless) aspect deviation by the footprint-area cost.
        """
        ambient = design.stack.tech.ambient
        if efficiency_per_kelvin is None:
            f_h = total_efficiency(design, field, grid)
            rise = max(field.average - ambient, 1.0)
            efficiency_per_kelvin = f_h / rise if f_h > 0 else 1.0
        anchor = efficiency_per_kelvin
        area0 = floorplan_area(design.floorplan)
        wl0 = wirelength(design)
        area_w = anchor / (0.01 * area0) if area0 > 0 else 0.0
        wl_w = anchor / (0.01 * wl0) if wl0 > 0 else 0.0
        footprint_area = design.stack.tech.footprint_width * design.stack.tech.footprint_height
        return cls(area=area_w, efficiency=-1.0, ratio=area_w * footprint_area,
                   wirelength=wl_w, ratio_target=bounding_ratio(design.floorplan))


@dataclass(frozen=True)
class CostBreakdown:
    area: float         # m^2
    efficiency: float   # W/K
    ratio: float        # dimensionless
    wirelength: float   # m
    total: float


def heat_conduction(conductivity: float, area: float, delta_t: float,
                    distance: float) -> float:
    """Heat flow rate k*A*dT/x in watts between two regions a distance x apart."""
    if distance <= 0:
        raise ValueError(f"distance must be > 0, got {distance}")
    return conductivity * area * delta_t / distance


def conduction_efficiency(conductivity: float, area: float, distance: float) -> float:
    """Heat flow per unit temperature difference, k*A/x in W/K; 0 without a shared face."""
    if area == 0:
        return 0.0
    if distance <= 0:
        raise ValueError(f"distance must be > 0, got {distance}")
    return conductivity * area / distance


def adjacent_block_pairs(design: Design) -> list[tuple[Block, Block, str]]:
    """Same-layer block pairs whose projections overlap on one axis and whose
    facing gap on the other axis is below the adjacency window."""
    tech = design.stack.tech
    window = tech.adjacency_window if tech.adjacency_window is not None else tech.grid_cell
    blocks = design.floorplan.blocks
    pairs = []
    for i in range(len(blocks)):
        for j in range(i + 1, len(blocks)):
            a, b = blocks[i], blocks[j]
            if a.layer != b.layer:
                continue
            ax0, ay0, ax1, ay1 = a.rect
            bx0, by0, bx1, by1 = b.rect
            overlap_x = min(ax1, bx1) - max(ax0, bx0)
            overlap_y = min(ay1, by1) - max(ay0, by0)
            gap_x = max(ax0 - bx1, bx0 - ax1)
            gap_y = max(ay0 - by1, by0 - ay1)
            if overlap_y > 0 and 0 <= gap_x < window:
                pairs.append((a, b, "x"))
            elif overlap_x > 0 and 0 <= gap_y < window:
                pairs.append((a, b, "y"))
    return pairs


def path_conductivity(design: Design, a: Block, b: Block, axis: str,
                      offset: float | None = None) -> tuple[float, float, float]:
    """Composite conductivity, shared area, and distance for the a->b corridor.

    Conductivity is the series (harmonic) combination along the straight
    segment between block center coordinates, taken at `offset` across the
    shared projection (its middle by default). Farms crossed by the segment
    contribute their lateral conductivity, except on their landing layer
    where the blockage is gone.
    """
    layer = design.stack.layers[a.layer]
    k_si = layer.material.conductivity
    ax0, ay0, ax1, ay1 = a.rect
    bx0, by0, bx1, by1 = b.rect
    if axis == "x":
        shared = min(ay1, by1) - max(ay0, by0)
        line = (max(ay0, by0) + min(ay1, by1)) / 2 if offset is None else offset
        lo, hi = sorted((a.center[0], b.center[0]))
    else:
        shared = min(ax1, bx1) - max(ax0, bx0)
        line = (max(ax0, bx0) + min(ax1, bx1)) / 2 if offset is None else offset
        lo, hi = sorted((a.center[1], b.center[1]))
    distance = hi - lo
    area = shared * layer.thickness
    if distance <= 0 or shared <= 0:
        return k_si, 0.0, max(distance, 0.0)

    crossing = 0.0  # sum of length/k over farm segments on the path
    farm_length = 0.0
    for farm in design.floorplan.farms:
        if not farm.blocks_laterally(a.layer):
            continue
        fx0, fy0, fx1, fy1 = farm.rect
        if axis == "x":
            if not (fy0 <= line <= fy1):
                continue
            seg = min(hi, fx1) - max(lo, fx0)
        else:
            if not (fx0 <= line <= fx1):
                continue
            seg = min(hi, fy1) - max(lo, fy0)
        if seg > 0:
            crossing += seg / farm.k_lateral
            farm_length += seg
    k_eff = distance / (crossing + (distance - farm_length) / k_si)
    return k_eff, area, distance


def pair_efficiency(design: Design, a: Block, b: Block, axis: str) -> float:
    """Conduction efficiency of one adjacent pair, integrated across the face.

    The shared projection is split into grid-cell-wide strips and the series
    composite is evaluated on each strip's center line, so a farm covering
    part of the face blocks exactly that part. Uniform material collapses to
    the single-path k*A/x of the whole face.
    """
    layer = design.stack.layers[a.layer]
    ax0, ay0, ax1, ay1 = a.rect
    bx0, by0, bx1, by1 = b.rect
    if axis == "x":
        span_lo, span_hi = max(ay0, by0), min(ay1, by1)
    else:
        span_lo, span_hi = max(ax0, bx0), min(ax1, bx1)
    shared = span_hi - span_lo
    if shared <= 0:
        return 0.0
    strip = design.stack.tech.grid_cell
    count = max(1, int(math.ceil(shared / strip - 1e-9)))
    width = shared / count
    total = 0.0
    for i in range(count):
        line = span_lo + (i + 0.5) * width
        k_eff, _, distance = path_conductivity(design, a, b, axis, offset=line)
        total += conduction_efficiency(k_eff, width * layer.thickness, distance)
    return total


def total_efficiency(design: Design, field: TemperatureField | None = None,
                     grid: GridSpec | None = None) -> float:
    """Sum of pair conduction efficiencies over adjacent block pairs.

    With a solved field, each pair is weighted by its normalized block-average
    temperature difference so the hottest gradients dominate the objective
    (disable via tech.gradient_weighting).
    """
    pairs = adjacent_block_pairs(design)
    if not pairs:
        return 0.0
    terms = [pair_efficiency(design, a, b, axis) for a, b, axis in pairs]

    use_gradients = (design.stack.tech.gradient_weighting
                     and field is not None and grid is not None)
    if not use_gradients:
        return float(sum(terms))
    deltas = [abs(block_average_temperature(field, a, grid)
                  - block_average_temperature(field, b, grid))
              for a, b, _ in pairs]
    # the denominator is floored at 1 K: normalizing by a noise-scale
    # maximum would let renormalization dwarf the conduction terms
    top = max(max(deltas), 1.0)
    return float(sum(t * d / top for t, d in zip(terms, deltas)))


def wirelength(design: Design) -> float:
    """Total Manhattan distance from each farm center to its client block centers."""
    total = 0.0
    for net in design.nets:
        try:
            farm = design.floorplan.farm(net.farm)
        except KeyError:
            raise DesignError(f"net references unknown farm {net.farm!r}")
        fx, fy = farm.center
        for client in net.clients:
            try:
                block = design.floorplan.block(client)
            except KeyError:
                raise DesignError(f"net {net.farm!r} references unknown block {client!r}")
            cx, cy = block.center
            total += abs(fx - cx) + abs(fy - cy)
    return total


def floorplan_area(floorplan: Floorplan) -> float:
    """Area of the bounding box of everything placed, across all layers."""
    x0, y0, x1, y1 = floorplan.bounding_box()
    return (x1 - x0) * (y1 - y0)


def bounding_ratio(floorplan: Floorplan) -> float:
    x0, y0, x1, y1 = floorplan.bounding_box()
    if y1 - y0 <= 0:
        return 1.0
    return (x1 - x0) / (y1 - y0)


def ratio_penalty(floorplan: Floorplan, ratio_target: float) -> float:
    """Absolute deviation of the bounding-box aspect ratio from the target."""
    if not floorplan.blocks and not floorplan.farms:
        return 0.0
    return abs(bounding_ratio(floorplan) - ratio_target)


def combine(weights: CostWeights, area: float, efficiency: float, ratio: float,
            wirelength_m: float) -> CostBreakdown:
    """Weighted sum of precomputed terms (pure; also the unit-test surface)."""
    total = (weights.area * area + weights.efficiency * efficiency
             + weights.ratio * ratio + weights.wirelength * wirelength_m)
    return CostBreakdown(area, efficiency, ratio, wirelength_m, total)


def cost(design: Design, field: TemperatureField | None, grid: GridSpec,
         weights: CostWeights) -> CostBreakdown:
    """All four objective terms plus their weighted total for one floorplan."""
    return combine(
        weights,
        floorplan_area(design.floorplan),
        total_efficiency(design, field, grid),
        ratio_penalty(design.floorplan, weights.ratio_target),
        wirelength(design),
    )
