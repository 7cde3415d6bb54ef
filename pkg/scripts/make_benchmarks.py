#!/usr/bin/env python3
"""Regenerate the shipped design files in designs/ from the builders."""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from tsvplan.benchmarks import BUILDERS
from tsvplan.design_io import write_design
from tsvplan.model import validate


def main():
    out_dir = Path(__file__).resolve().parents[1] / "designs"
    out_dir.mkdir(exist_ok=True)
    for name, builder in BUILDERS.items():
        design = builder()
        violations = validate(design)
        assert not violations, (name, violations)
        path = out_dir / f"{name}.design"
        write_design(design, path)
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
