"""Matrix functions, matrix monotonicity falsifiers and Powers-Stormer type
trace inequalities for real symmetric matrices."""

__version__ = "0.1.0"

from .scalarfn import (  # noqa: E402
    DomainError,
    DomainInterval,
    ParseError,
    ScalarFunction,
    companion,
    eval_dual,
    evaluate,
    parse,
)
from .symmat import (  # noqa: E402
    Spectrum,
    State,
    abs_diff,
    apply_fn,
    direct_sum_pad,
    eig_sym,
    functional,
    random_contraction,
    random_ordered_pair,
    random_psd,
)
from .verdict import Verdict, Witness, replay  # noqa: E402
from .monotone import (  # noqa: E402
    NodeGrid,
    chain_consistency,
    check_hansen_pedersen,
    check_n_concave,
    check_n_monotone,
    divided_difference,
    frechet_derivative,
    loewner_matrix,
)
from .psineq import (  # noqa: E402
    DerivCondParams,
    PSCheckConfig,
    check_ps,
    counterexample_search,
    deriv_condition_closed_form,
    exp_example_check,
    first_order_lhs,
    ps_margin,
    ps_margin_ordered,
    reproduce_fixtures,
    trace_condition_inf,
)
