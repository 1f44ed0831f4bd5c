"""qopt: quantized-resolution global optimization.

The package centers on a blind random-search optimizer that accepts or
rejects candidates by comparing objective values rounded to a progressively
finer integer grid.  Early on the grid is coarse, so the acceptance test is
blind to small differences and the walk drifts freely across plateaus of
near-equal cost; as the resolution exponent grows the search sharpens into
plain descent.  Simulated annealing and path-integral simulated quantum
annealing are included as baselines, with a Euclidean TSP benchmark, a
statistics lab for the rounding-error noise model, and a CSV/SVG reporting
harness around them.
"""

from .quantizer import (
    EXACT_FLOOR_CAP,
    MismatchedConfigError,
    PrecisionOverflowError,
    QuantConfig,
    QuantizedValue,
    compare,
    init_eta,
    max_h_exp,
    quantization_error,
    quantize,
)
from .schedules import (
    ScheduleKind,
    ScheduleSpec,
    h_greedy,
    h_log,
    h_lower_bound,
    next_h,
    sigma_inf,
)
from .tsp import (
    Tour,
    TspInstance,
    generate_instance,
    load_instance,
    nn_tour,
    save_instance,
    tour_cost,
    two_opt_apply,
    two_opt_delta,
)
from .solvers import (
    RunTrace,
    SaCooling,
    SolverConfig,
    TraceRecord,
    TspProblem,
    UniformSearchProblem,
    brute_force_tsp,
    qa_optimize,
    qbo_optimize,
    sa_optimize,
)
from .statslab import (
    DiffErrorStats,
    DivergenceError,
    ErrorStats,
    SdeParams,
    TooFewSamplesError,
    diff_error_stats,
    double_well,
    double_well_grad,
    error_stats,
    global_basin,
    hitting_rate,
    langevin_simulate,
    sublevel_measure_trace,
    trace_error_stats,
)

__version__ = "0.1.0"
