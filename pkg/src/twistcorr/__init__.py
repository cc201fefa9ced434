"""Twisted topological correspondences, normalizing atlases and Cartan subalgebras on finite Čech models."""
from .bundle import CoveringSpace, LineBundle, build_covering, build_twisted_covering, coverings_isomorphic
from .cocycle import TransitionSystem, from_pairs, verify_cocycle
from .cohomology import chern_class, cohomology_of
from .correspondence import (TwistedCorrespondence, correspondences_isomorphic, cstar_correspondences_isomorphic,
                             left_action_of, make_correspondence)
from .group import DiagPermUnitary, Permutation
from .space import CechSpace

__all__ = [
    "CechSpace", "CoveringSpace", "DiagPermUnitary", "LineBundle", "Permutation", "TransitionSystem",
    "TwistedCorrespondence", "build_covering", "build_twisted_covering", "chern_class", "cohomology_of",
    "correspondences_isomorphic", "coverings_isomorphic", "cstar_correspondences_isomorphic", "from_pairs",
    "left_action_of", "make_correspondence", "verify_cocycle",
]
__version__ = "0.1.0"
