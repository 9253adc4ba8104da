from ingest.formats import read_dataset, write_dataset
from ingest.models import SplitSpec
from ingest.splits import scenario1_split

from cli.base import DepthCommand


class Command(DepthCommand):
    help = "Draw the disjoint attack-source (X1) and clean (X2) subsets of a test set."

    def add_command_arguments(self, parser):
        parser.add_argument("--input", required=True, help="Test-set embedding file.")
        parser.add_argument("--n1", type=int, required=True, help="Size of the attack-source subset X1.")
        parser.add_argument("--n2", type=int, required=True, help="Size of the clean subset X2.")
        parser.add_argument("--seed", type=int, default=0)
        parser.add_argument("--out-x1", required=True)
        parser.add_argument("--out-x2", required=True)

    def run(self, **options):
        spec = SplitSpec(seed=options["seed"], n1=options["n1"], n2=options["n2"])
        x1, x2 = scenario1_split(read_dataset(options["input"]), spec)
        write_dataset(x1, options["out_x1"])
        write_dataset(x2, options["out_x2"])
        parameters = {"seed": spec.seed, "n1": spec.n1, "n2": spec.n2}
        return parameters, [options["input"]], [options["out_x1"], options["out_x2"]]
