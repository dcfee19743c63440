"""Linear network-coding schedules for broadcast with side information,
measured by average packet decoding delay (APDD)."""

from .instance import (
    DemandHypergraph,
    InstanceError,
    StateFeedbackMatrix,
    gen_bernoulli,
    gen_complete_graph_instance,
    gen_efl_instance,
    gen_uniform_pairs,
    hypergraph_from_sfm,
    parse_sfm,
    render_sfm,
    sfm_from_hypergraph,
)
from .simulator import (
    DecodeReport,
    Policy,
    Schedule,
    apdd,
    is_perfect,
    is_throughput_optimal,
    lower_bound,
    rlnc_apdd_closed_form,
    simulate,
)

__version__ = "0.1.0"
