"""
Convergence command - error tables and EOCs over a list of mesh sizes
"""
import config
from utils.reports import print_reports
from .options import add_common_arguments
from .runner import ExperimentConfig, run_example


class Convergence:
    """
    Solve one example at a fixed delta on successively halved meshes
    """
    name = "convergence"
    defaults = {"example": "parabola", "h": "1/32,1/64,1/128", "delta": 0.0,
                "basis": config.BASIS_LAGRANGE}

    def __init__(self, subparsers):
        parser = subparsers.add_parser(self.name, help="L2 and energy errors with convergence orders")
        add_common_arguments(parser)
        parser.set_defaults(command=self)

    def run(self, cfg: ExperimentConfig):
        reports = run_example(cfg, self.name)
        print_reports(reports, title=f"{cfg.example}, delta={cfg.delta:g}, basis={cfg.basis}")
        return reports


def setup(subparsers):
    return Convergence(subparsers)
