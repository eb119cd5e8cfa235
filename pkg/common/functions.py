def gamma(rho: float, delta: float) -> float:
    """
    Calculate the right-hand side scale of the affine search system.
    :param rho: Squared norm of the internal residual (ρ = ‖r(x)‖²).
    :param delta: Squared length of the Kaczmarz step (δ = ‖P(x) - x‖²).
    :return: The scale γ = (ρ + δ) / 2, which equals (x - x*)ᵀ(x - P(x)).
    """
    return 0.5 * (rho + delta)


def line_search_step_size(rho: float, delta: float) -> float:
    """
    Calculate the exact minimiser of ‖x + s(P(x) - x) - x*‖² over s without knowing x*.
    :param rho: Squared norm of the internal residual (ρ).
    :param delta: Squared length of the Kaczmarz step (δ), strictly positive.
    :return: The optimal step size s* = 1/2 + ρ/(2δ).
    """
    return 0.5 + rho / (2.0 * delta)


def line_search_gain(rho: float, delta: float) -> float:
    """
    Calculate the decrease of the squared error achieved by the optimal line-search step.
    :param rho: Squared norm of the internal residual (ρ).
    :param delta: Squared length of the Kaczmarz step (δ), strictly positive.
    :return: The gain γ s* = (ρ + δ)² / (4δ).
    """
    return gamma(rho, delta) * line_search_step_size(rho, delta)


def plain_cycle_gain(rho: float) -> float:
    """A plain cycle lowers the squared error by exactly ‖r(x)‖² (Pythagoras over the projections)."""
    return rho


def oncost(ell: int, n_rows: int, n_cols: int, nnz: int) -> float:
    """
    Calculate the cost of one enhanced acceleration step relative to one Kaczmarz cycle.
    :param ell: Dimension of the affine search space (ℓ).
    :param n_rows: Number of equations (m).
    :param n_cols: Number of unknowns (n).
    :param nnz: Number of stored nonzeros of A.
    :return: ((3 + 5ℓ)n + 2m + 5ℓ) / (4 nnz + m).
    """
    return ((3 + 5 * ell) * n_cols + 2 * n_rows + 5 * ell) / (4 * nnz + n_rows)


def stopping_threshold(tol: float, x_norm_sq: float) -> float:
    """Squared step length below which a deterministic cycle declares the iterate solved."""
    return tol ** 2 * max(1.0, x_norm_sq)
