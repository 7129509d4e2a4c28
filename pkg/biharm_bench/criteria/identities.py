from typing import Dict


def classification_identities(m: int, lam: float, mu: float, epsilon: float) -> Dict[str, float]:
    """
    Closed-form relations satisfied by the biharmonic PNMC Lagrangian
    H-umbilical family.

    Args:
        m: real dimension of the submanifold.
        lam: the lambda coefficient of the second fundamental form.
        mu: the mu coefficient; must be nonzero when epsilon == 1.
        epsilon: curvature sign of the ambient space form.

    Returns:
        mu_lambda_relation: |mu^2 - lambda mu - epsilon|
        trace_relation: |lambda^2 + (m-1) mu^2 - epsilon (m+3)|
        lambda_formula: |lambda - (mu^2 - 1)/mu| (only for epsilon == 1)
    """
    residuals = {
        "mu_lambda_relation": abs(mu * mu - lam * mu - epsilon),
        "trace_relation": abs(lam * lam + (m - 1) * mu * mu - epsilon * (m + 3)),
    }
    if epsilon == 1.0:
        if mu == 0.0:
            raise ValueError("The lambda formula needs mu != 0.")
        residuals["lambda_formula"] = abs(lam - (mu * mu - 1.0) / mu)
    return residuals
