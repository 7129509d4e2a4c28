from .identities import classification_identities
from .residuals import (
    CRITERIA,
    RESIDUAL_FUNCTIONS,
    CriterionResidual,
    curvature_contraction_residual,
    humbilical_residual,
    humbilical_residual_of,
    kahler_residual,
    kahler_residual_of,
    kahler_rewriting_residuals,
    reduced_residual,
    reduced_residual_of,
    reduced_residual_of_field,
    spaceform_residual,
    spaceform_residual_of,
    split_residual,
    split_residual_of,
)
