"""
Experiment harness for the manufactured interface problems
"""
from .examples import ExampleDefinition, EXAMPLES, build_example, parabola_example, circle_example
from .runner import (ExperimentConfig, RunResult, make_grid, solve_example, condition_numbers, run_example,
                     sweep_delta, condition_study, csv_path)

__all__ = [
    'ExampleDefinition',
    'EXAMPLES',
    'build_example',
    'parabola_example',
    'circle_example',
    'ExperimentConfig',
    'RunResult',
    'make_grid',
    'solve_example',
    'condition_numbers',
    'run_example',
    'sweep_delta',
    'condition_study',
    'csv_path',
]
