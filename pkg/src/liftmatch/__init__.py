"""Perfect matchings in random lifts of multigraphs: exact moments, their
asymptotics, short-cycle statistics and simulation."""

__version__ = "0.1.0"

from .graph import Multigraph, load_graph, build_matrices, k4, banana, petersen, prism3
from .first_moment import exact_first_moment, asymptotic_first_moment
from .second_moment import exact_second_moment, asymptotic_second_moment
from .nbwalks import cycle_series, ssc_constant, a4_check, walk_counts
from .lifts import sample_lift, exhaustive_lift_oracle, monte_carlo_moments
from .counting import count_perfect_matchings, count_k_cycles

__all__ = [
    "Multigraph", "load_graph", "build_matrices", "k4", "banana", "petersen", "prism3",
    "exact_first_moment", "asymptotic_first_moment",
    "exact_second_moment", "asymptotic_second_moment",
    "cycle_series", "ssc_constant", "a4_check", "walk_counts",
    "sample_lift", "exhaustive_lift_oracle", "monte_carlo_moments",
    "count_perfect_matchings", "count_k_cycles",
]
