"""Regenerate the bundled netlists and vector files."""

from pathlib import Path

from . import BENCHMARKS, bundled_vectors
from .designs import GENERATORS
from ..vectors import write_vectors


def write_all(directory: Path):
    for name, gen in GENERATORS.items():
        (directory / f"{name}.v").write_text(gen(), encoding="utf-8")
        write_vectors(bundled_vectors(BENCHMARKS[name]), directory / f"{name}.csv")


if __name__ == "__main__":
    write_all(Path(__file__).parent)
