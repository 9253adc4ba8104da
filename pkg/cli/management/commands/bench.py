from pathlib import Path

from bench.runner import (
    GRIDS,
    run_bench,
    scaling_frame,
    summarize_timings,
    write_scaling,
    write_summary,
    write_timings,
)

from cli.base import DepthCommand


def _positive_ints(text):
    return tuple(int(value) for value in text.split(","))


class Command(DepthCommand):
    help = "Time halfspace-mass and Mahalanobis depth on synthetic Wishart-Gaussian data."

    def add_command_arguments(self, parser):
        parser.add_argument(
            "--grid",
            choices=sorted(GRIDS),
            default="desk",
            help="desk: d <= 512, n <= 5000; paper: the full grid, d up to 5000, n up to 10000 (slow).",
        )
        parser.add_argument(
            "--out",
            help="Directory for timings.csv, summary.csv and scaling.csv (default <output-dir>/bench).",
        )
        parser.add_argument("--dims", type=_positive_ints, help="Override the grid dimensions, e.g. 8,16.")
        parser.add_argument("--sizes", type=_positive_ints, help="Override the grid sample sizes.")
        parser.add_argument("--k-values", type=_positive_ints, help="Override the grid K settings.")
        parser.add_argument("--repeats", type=int, help="Override the number of timed repeats.")
        parser.add_argument("--seed", type=int, help="Override the data seed.")

    def run(self, **options):
        overrides = {
            field: options[option]
            for field, option in (
                ("dims", "dims"),
                ("sizes", "sizes"),
                ("k_values", "k_values"),
                ("repeats", "repeats"),
                ("seed", "seed"),
            )
            if options[option] is not None
        }
        grid = GRIDS[options["grid"]].replace(threads=options["threads"], **overrides)
        out = Path(options["out"] or Path(options["output_dir"]) / "bench")
        out.mkdir(parents=True, exist_ok=True)

        records = run_bench(grid)
        timings, summary, scaling = out / "timings.csv", out / "summary.csv", out / "scaling.csv"
        write_timings(records, timings)
        write_summary(summarize_timings(records), summary)
        write_scaling(scaling_frame(records), scaling)
        self.stdout.write(f"{len(records)} timing records written to {out}")
        parameters = {
            "grid": options["grid"],
            "dims": list(grid.dims),
            "sizes": list(grid.sizes),
            "k_values": list(grid.k_values),
            "repeats": grid.repeats,
            "seed": grid.seed,
        }
        return parameters, [], [timings, summary, scaling]
