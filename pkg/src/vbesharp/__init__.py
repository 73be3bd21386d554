"""Sharp constants for extended von Bahr-Esseen moment inequalities.

Library layout:

* :mod:`vbesharp.momfun` -- the admissible moment-function class, its
  concrete families, and the mixing-measure representation;
* :mod:`vbesharp.constants` -- every sharp constant and explicit bound;
* :mod:`vbesharp.oracle` -- exact expectations over finite-support laws and
  v-martingale trees, and the inequality checks built on them;
* :mod:`vbesharp.ineqcheck` -- proof-level piecewise-polynomial sweeps;
* :mod:`vbesharp.suites` -- seeded randomized verification suites;
* :mod:`vbesharp.cli` -- the ``vbesharp`` command-line front end.
"""

__version__ = "0.1.0"

from .constants import (
    ConstantResult,
    PowerConstants,
    bregman_gap,
    bregman_ratio_max,
    centering_argmin,
    centering_constant,
    centering_objective,
    power_centering_constant,
    power_constant_bounds,
    power_gap,
    power_gap_argmax,
    power_sharp_constant,
    sharp_constant,
    spread_factor,
    vbe_D,
    vbe_constant,
)
from .errors import (
    BracketError,
    ConfigurationError,
    DomainError,
    InvariantError,
    PreconditionError,
    ResourceLimitError,
)
from .momfun import (
    AltSplineParams,
    GammaMeasure,
    MomentFunction,
    altspline_momfun,
    block_position,
    clipped_square,
    clipped_square_slope,
    effective_exponent,
    extreme_momfun,
    from_second_derivative,
    gamma_of,
    limiting_exponent,
    momfun_of_gamma,
    power_momfun,
)
from .oracle import (
    CheckReport,
    DiscreteDist,
    MartingaleTree,
    VectorDist,
    check_centering,
    check_concentration,
    check_main_inequality,
    check_spread,
    check_sum_norm,
    check_tree_inequality,
    convolve,
    discrete,
    expect,
    expect_f,
    growth_ratio,
    near_extremal_probe,
    tree_from_independent,
    two_point,
)

__all__ = [name for name in dir() if not name.startswith("_")]
