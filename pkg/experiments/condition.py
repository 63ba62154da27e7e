"""
Condition command - Lagrange against scaled hierarchical condition numbers
"""
from utils.reports import print_reports
from .options import add_common_arguments
from .runner import ExperimentConfig, condition_study


class Condition:
    """
    Estimate the condition number of the free block in both bases for every
    delta of the range. The default h = 1/16 keeps inverse iteration short;
    pass --h 1/32 for the finer study.
    """
    name = "condition"
    defaults = {"example": "parabola", "h": "1/16", "delta_range": "0:1:51", "condition": True}

    def __init__(self, subparsers):
        parser = subparsers.add_parser(self.name, help="condition numbers over a delta range")
        add_common_arguments(parser)
        parser.set_defaults(command=self)

    def run(self, cfg: ExperimentConfig):
        reports = condition_study(cfg, self.name)
        print_reports(reports, title=f"{cfg.example}, condition numbers", columns="condition")
        return reports


def setup(subparsers):
    return Condition(subparsers)
