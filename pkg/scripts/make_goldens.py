#!/usr/bin/env python3
"""Regenerate the golden fixtures under tests/fixtures/.

Golden files pin exact random streams and output bytes; regenerate only when
the pinned generator or CSV schema changes deliberately, and expect every
golden-comparison test to be re-frozen when you do.
"""

from pathlib import Path

from shakyladder import (
    ShakyLadder,
    Rng,
    gaussian,
    laplace,
    make_random_label_sample,
    run_random_analyst,
    shaky_params,
)
from shakyladder.core import write_trace_csv
from shakyladder.experiments import ExperimentConfig, experiment_csv

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def write_stream(name: str, values) -> None:
    text = "\n".join(format(float(v), ".17g") for v in values) + "\n"
    (FIXTURES / name).write_text(text, encoding="utf-8")
    print(f"wrote {name}")


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)

    rng = Rng(42)
    write_stream("laplace_seed42_scale0.5.txt", [laplace(rng, 0.5) for _ in range(20)])
    rng = Rng(42)
    write_stream("gaussian_seed42_stddev1.txt", [gaussian(rng, 1.0) for _ in range(20)])
    rng = Rng(42)
    write_stream("uniform_seed42.txt", [rng.random() for _ in range(20)])

    # Seeded mechanism trace under a fixed random submission stream.
    params = shaky_params(10000, 100, 0.1)
    sample = make_random_label_sample(10000, 7)
    mechanism = ShakyLadder(params, seed=7)
    _, trace = run_random_analyst(mechanism, sample, 100, 7)
    write_trace_csv(trace, FIXTURES / "shaky_trace_seed7.csv")
    print("wrote shaky_trace_seed7.csv")

    # Small experiment output for CLI golden comparison.
    config = ExperimentConfig(
        experiment="vary-queries", n=400, k_grid=(20, 50), reps=5, seed=1,
    )
    (FIXTURES / "vq_small.csv").write_bytes(experiment_csv(config).encode("utf-8"))
    print("wrote vq_small.csv")


if __name__ == "__main__":
    main()
