"""Globally optimal maximum-likelihood estimation for crowdsourced filtering and rating."""

from .core import (
    ConfusionMatrix,
    Dataset,
    Mapping,
    bucketize,
    log_likelihood_given_matrix,
    majority_vote,
)
from .em import EmInit, EmResult, em_run, em_star, filter_presets, rating_presets
from .errors import CapExceeded, ConfigError, CrowdMLEError, InputError
from .extensions import (
    TwoClassDataset,
    build_two_class_poset,
    build_variable_poset,
    count_variable_boundaries,
    two_class_opt,
    variable_opt,
)
from .filtering import FilterParams, cut_point_mapping, filter_opt, filter_params, is_reasonable
from .metrics import distance_weighted_score, emd_score, evaluate, fraction_incorrect, jsd_score
from .poset import (
    BucketPoset,
    build_rating_poset,
    count_monotone_maps,
    dominates,
    enumerate_monotone_maps,
    join,
    meet,
)
from .rating import count_dominance_consistent, rating_likelihood, rating_opt, rating_params
from .synth import SynthConfig, gen_matrix, gen_truth, generate, simulate_responses, subsample_responses

__version__ = "0.1.0"
