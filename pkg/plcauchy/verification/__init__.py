from .bench import BumpField, TraceBenchReport, bench_grid, default_family, stress_family, trace_bench
from .case import Case, CaseResult
from .exact import (ExactSolution, exact_fundamental, exact_harmonic_mode, exact_linear,
                    exact_logarithmic, interior_error)
from .runner import CaseRunner
from .suites import SUITES, run_suite, suite_cases

__all__ = [
    'BumpField', 'TraceBenchReport', 'bench_grid', 'default_family', 'stress_family', 'trace_bench',
    'Case', 'CaseResult', 'CaseRunner',
    'ExactSolution', 'exact_fundamental', 'exact_harmonic_mode', 'exact_linear', 'exact_logarithmic',
    'interior_error', 'SUITES', 'run_suite', 'suite_cases',
]
