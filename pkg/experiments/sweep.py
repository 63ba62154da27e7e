"""
Sweep command - errors and interface counters over a range of interface shifts
"""
from utils.reports import print_reports
from .options import add_common_arguments
from .runner import ExperimentConfig, sweep_delta


class Sweep:
    name = "sweep"
    defaults = {"example": "parabola", "h": "1/32", "delta_range": "0:1:11"}

    def __init__(self, subparsers):
        parser = subparsers.add_parser(self.name, help="errors, PN and n_l over a delta range")
        add_common_arguments(parser)
        parser.set_defaults(command=self)

    def run(self, cfg: ExperimentConfig):
        reports = sweep_delta(cfg, self.name)
        print_reports(reports, title=f"{cfg.example}, delta sweep {cfg.sweep}")
        return reports


def setup(subparsers):
    return Sweep(subparsers)
