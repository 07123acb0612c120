"""Expected voting weights and representation axioms for selection mechanisms."""

__version__ = "0.1.0"

from repsel.matrix import (  # noqa: E402
    CandidateSet,
    Fallback,
    ProjectedMatrix,
    RepresentationMatrix,
    expected_vote_share,
    load_matrix,
    normalize_l1,
    project_matrix,
    validate_matrix,
)
from repsel.mechanisms import (  # noqa: E402
    ExpectedWeightVector,
    Kind,
    MechanismSpec,
    MonteCarlo,
    TieRule,
    evaluate,
)
