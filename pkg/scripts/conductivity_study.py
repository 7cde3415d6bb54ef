#!/usr/bin/env python3
"""Optimization gain versus farm thermal conductivity.

Sweeps the farm lateral conductivity across the materials ladder (insulated
composite up to bulk silicon) on the core+memory benchmark: the lower the
conductivity, the stronger the blockage and the larger the reduction the
placement flow can recover.
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from tsvplan.anneal import AnnealConfig, FlowConfig
from tsvplan.benchmarks import corememory_design
from tsvplan.sweeps import format_sweep_table, run_sweep

LADDER = [0.5, 1.0, 2.75, 5.0, 23.1, 149.0]


def main():
    design = corememory_design()
    anneal = AnnealConfig(seed=3, max_moves=40, cooling=0.88)
    flow = FlowConfig(outer_iterations=2)
    points = run_sweep(design, "k_farm", LADDER, anneal, flow)
    print(format_sweep_table("k_farm", points))
    print()
    for p in points:
        if p.status == "ok":
            print(f"k_farm {p.value:g}: core peak reduction "
                  f"{p.peak_reduction:.3f} K, stack avg reduction "
                  f"{p.stack_avg_reduction:.3f} K")


if __name__ == "__main__":
    main()
