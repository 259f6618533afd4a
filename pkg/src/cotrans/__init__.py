"""Cotranslations of finitely presented groups and their numerical calculus."""

from .cotranslation import (
    Cotranslation,
    check_dihedral_conditions,
    check_relation_preservation,
    evaluate,
    free_product_lift,
    from_group_morphism,
    presentation_descent,
    scalar_twist,
    verify_cotranslation,
)
from .difference import MatrixSequence, cotranslation_from_sequence, generator_from_cotranslation, transition_matrix, verify_cocycle
from .errors import *  # noqa: F401,F403
from .evolution import (
    EvolutionOperator,
    FlowCotranslation,
    GeneratorFunction,
    cotranslation_of_evolution,
    evolution_of_cotranslation,
    integrate_transition,
    verify_derivative_identities,
    verify_evolution_properties,
)
from .gallery import NAMES as GALLERY, build_example
from .groupoid import GroupoidElement, compose_pair, inv_pair, verify_groupoid_axioms
from .groups import (
    Cyclic,
    Dihedral,
    FreeGroup,
    FreeProduct,
    InfiniteDihedral,
    Integers,
    Word,
    ball,
    invert_word,
    multiply,
    normal_form,
    project_free_factor,
)
from .partial import (
    ConstantBlock,
    MatrixCocycle,
    PartialCotranslation,
    Projector,
    bounded_diagonalizer,
    complete,
    conjugate,
    evaluate_partial,
    factorize,
    orthogonal_sum,
    rank_of,
    restrict,
    units_projector,
    verify_invariant_projector,
    verify_partial_law,
)
from .report import Report, render
from .skew import Suspension, cotranslation_from_hull, hull_from_cotranslation, verify_skew_axiom
from .transforms import Affine, Euclidean, Rotation, apply, compose, invert

__version__ = "0.1.0"
