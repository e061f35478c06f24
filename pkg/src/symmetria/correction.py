"""Rotation correction of the eigenbasis on SO(k').

Eigenfunctions computed on a nearly symmetric mesh are only nearly even or
odd. A rotation ``R`` of the active eigenbasis is sought that keeps ``R^T D R``
close to diagonal and makes the delta functions of every detected pair
symmetric images of each other under ``C``:

    f(R) = off(R^T D R) + |R^T D R - D|_F^2 + mu |R^T Fbar - C R^T Gbar|_F^2

The minimisation is a Riemannian trust-region method with a truncated
(Steihaug-Toint) conjugate-gradient inner solver, a QR retraction and either
an analytic or a finite-difference Hessian.

Tangent vectors at ``R`` are stored in ambient form ``R @ Omega`` with
``Omega`` skew-symmetric; the metric is the Frobenius inner product.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ConvergenceWarning, DegenerateMapError
from .functional_map import FunctionalMap
from .spectral import SpectralBasis

logger = logging.getLogger(__name__)

__all__ = [
    "CorrectionProblem",
    "RotationCorrection",
    "build_problem",
    "cost",
    "euclidean_gradient",
    "euclidean_hessian",
    "project_tangent",
    "riemannian_gradient",
    "riemannian_hessian",
    "retract",
    "optimize",
]


def _sym(X: np.ndarray) -> np.ndarray:
    return 0.5 * (X + X.T)


def _skew(X: np.ndarray) -> np.ndarray:
    return 0.5 * (X - X.T)


@dataclass(frozen=True)
class CorrectionProblem:
    """Data of the rotation cost on the active eigenfunctions.

    ``Fbar``/``Gbar`` are ``k' x 2c``: column ``m`` of ``Fbar`` is the basis
    row at one end of a pair and the same column of ``Gbar`` the row at the
    other end; both directions of each pair are present.
    """

    D: np.ndarray
    C: np.ndarray
    Fbar: np.ndarray
    Gbar: np.ndarray
    mu: float = 1.0

    @property
    def k(self) -> int:
        return int(self.D.shape[0])

    @property
    def S(self) -> np.ndarray:
        return self.Fbar @ self.Gbar.T + self.Gbar @ self.Fbar.T


@dataclass(frozen=True)
class RotationCorrection:
    R: np.ndarray
    final_cost: float
    iterations: int
    initial_cost: float = 0.0
    grad_norm: float = 0.0
    converged: bool = True
    trace: tuple[dict, ...] = field(default=(), repr=False)


def build_problem(
    basis: SpectralBasis,
    fmap: FunctionalMap,
    vertex_pairs: Sequence[tuple[int, int]],
    mu: float = 1.0,
) -> CorrectionProblem:
    """Restrict to the active columns and lay out both directions of every pair."""
    if fmap.active.size == 0:
        raise DegenerateMapError("no active eigenfunctions to correct")
    if not vertex_pairs:
        raise ValueError("need at least one symmetric pair")
    phi = basis.phi[:, fmap.active]
    f_idx: list[int] = []
    g_idx: list[int] = []
    for x, y in vertex_pairs:
        f_idx += [x, y]
        g_idx += [y, x]
    return CorrectionProblem(
        D=np.diag(basis.eigenvalues[fmap.active]),
        C=np.diag(fmap.sign[fmap.active].astype(np.float64)),
        Fbar=phi[f_idx].T.copy(),
        Gbar=phi[g_idx].T.copy(),
        mu=float(mu),
    )


# ───────────────────────────── Cost and derivatives ─────────────────────────────
def _terms(prob: CorrectionProblem, R: np.ndarray) -> tuple[float, float, float]:
    B = R.T @ prob.D @ R
    off = float(np.sum(B * B) - np.sum(np.diag(B) ** 2))
    diff = B - prob.D
    E = R.T @ prob.Fbar - prob.C @ R.T @ prob.Gbar
    return off, float(np.sum(diff * diff)), float(np.sum(E * E))


def cost(prob: CorrectionProblem, R: np.ndarray) -> float:
    off, dev, pair = _terms(prob, R)
    return off + dev + prob.mu * pair


def euclidean_gradient(prob: CorrectionProblem, R: np.ndarray) -> np.ndarray:
    """Gradient of :func:`cost` over all ``k' x k'`` matrices.

    ``4 D R (B - diag B) + 4 D R (B - D) + 2 mu (Fbar E^T - Gbar E^T C)`` with
    ``B = R^T D R`` and ``E = R^T Fbar - C R^T Gbar``.
    """
    D, C = prob.D, prob.C
    B = R.T @ D @ R
    DR = D @ R
    g_off = 4.0 * DR @ (B - np.diag(np.diag(B)))
    g_dev = 4.0 * DR @ (B - D)
    E = R.T @ prob.Fbar - C @ R.T @ prob.Gbar
    g_pair = 2.0 * (prob.Fbar @ E.T - prob.Gbar @ E.T @ C)
    return g_off + g_dev + prob.mu * g_pair


def euclidean_hessian(prob: CorrectionProblem, R: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Directional derivative of :func:`euclidean_gradient` along ``V``."""
    D, C = prob.D, prob.C
    B = R.T @ D @ R
    dB = V.T @ D @ R + R.T @ D @ V
    DR = D @ R
    DV = D @ V
    h_off = 4.0 * (DV @ (B - np.diag(np.diag(B))) + DR @ (dB - np.diag(np.diag(dB))))
    h_dev = 4.0 * (DV @ (B - D) + DR @ dB)
    dE = V.T @ prob.Fbar - C @ V.T @ prob.Gbar
    h_pair = 2.0 * (prob.Fbar @ dE.T - prob.Gbar @ dE.T @ C)
    return h_off + h_dev + prob.mu * h_pair


def project_tangent(R: np.ndarray, X: np.ndarray) -> np.ndarray:
    """``R (R^T X - X^T R) / 2``: orthogonal projection onto ``T_R SO(k)``."""
    return R @ (R.T @ X - X.T @ R) / 2.0


def riemannian_gradient(prob: CorrectionProblem, R: np.ndarray) -> np.ndarray:
    return project_tangent(R, euclidean_gradient(prob, R))


def retract(R: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """QR retraction with the triangular factor's diagonal made positive."""
    Q, T = np.linalg.qr(R + xi)
    signs = np.sign(np.diag(T))
    signs[signs == 0] = 1.0
    return Q * signs[np.newaxis, :]


def riemannian_hessian(
    prob: CorrectionProblem, R: np.ndarray, xi: np.ndarray, method: str = "fd"
) -> np.ndarray:
    """Hessian-vector product at ``R`` along tangent ``xi``.

    ``"analytic"`` projects the Euclidean Hessian with the curvature
    correction ``-xi sym(R^T grad f)``; ``"fd"`` differentiates the Riemannian
    gradient along the retraction and projects back to ``T_R``.
    """
    if method == "analytic":
        egrad = euclidean_gradient(prob, R)
        ehess = euclidean_hessian(prob, R, xi)
        return project_tangent(R, ehess - xi @ _sym(R.T @ egrad))
    if method != "fd":
        raise ValueError(f"unknown Hessian method {method!r}")
    norm = np.linalg.norm(xi)
    if norm < 1e-30:
        return np.zeros_like(xi)
    step = 2.0 ** -14 / norm
    grad0 = riemannian_gradient(prob, R)
    grad1 = project_tangent(R, riemannian_gradient(prob, retract(R, step * xi)))
    return (grad1 - grad0) / step


# ───────────────────────────── Trust region ─────────────────────────────
class _TrustRegion:
    """Riemannian trust-region iterations for one :class:`CorrectionProblem`."""

    NEGATIVE_CURVATURE = "negative curvature"
    EXCEEDED_TR = "exceeded trust region"
    REACHED_TARGET_LINEAR = "reached target residual-kappa (linear)"
    REACHED_TARGET_SUPERLINEAR = "reached target residual-theta (superlinear)"
    MAX_INNER_ITER = "maximum inner iterations"
    MODEL_INCREASED = "model increased"

    def __init__(
        self,
        prob: CorrectionProblem,
        hessian: str = "fd",
        kappa: float = 0.1,
        theta: float = 1.0,
        rho_prime: float = 0.1,
        rho_regularization: float = 1e3,
    ) -> None:
        self.prob = prob
        self.hessian = hessian
        self.kappa = kappa
        self.theta = theta
        self.rho_prime = rho_prime
        self.rho_regularization = rho_regularization
        k = prob.k
        self.dim = k * (k - 1) // 2
        self.delta_bar = np.pi * np.sqrt(k)
        self.delta0 = self.delta_bar / 8.0

    def _hess(self, R: np.ndarray, xi: np.ndarray) -> np.ndarray:
        return riemannian_hessian(self.prob, R, xi, self.hessian)

    def _truncated_cg(self, R, grad, delta):
        inner = lambda a, b: float(np.sum(a * b))  # noqa: E731
        eta = np.zeros_like(grad)
        Heta = np.zeros_like(grad)
        r = grad
        norm_r0 = np.sqrt(inner(r, r))
        z = r
        z_r = inner(z, r)
        d_Pd = z_r
        d = -z
        e_Pe = 0.0
        e_Pd = 0.0
        model_value = 0.0
        stop = self.MAX_INNER_ITER
        j = 0
        for j in range(max(1, self.dim)):
            Hd = self._hess(R, d)
            d_Hd = inner(d, Hd)
            alpha = z_r / d_Hd if d_Hd != 0 else np.inf
            e_Pe_new = e_Pe + 2.0 * alpha * e_Pd + alpha ** 2 * d_Pd
            if d_Hd <= 0 or e_Pe_new >= delta ** 2:
                tau = (-e_Pd + np.sqrt(e_Pd * e_Pd + d_Pd * (delta ** 2 - e_Pe))) / d_Pd
                eta = eta + tau * d
                Heta = Heta + tau * Hd
                stop = self.NEGATIVE_CURVATURE if d_Hd <= 0 else self.EXCEEDED_TR
                break
            e_Pe = e_Pe_new
            new_eta = eta + alpha * d
            new_Heta = Heta + alpha * Hd
            new_model = inner(new_eta, grad) + 0.5 * inner(new_eta, new_Heta)
            if new_model >= model_value:
                stop = self.MODEL_INCREASED
                break
            eta, Heta, model_value = new_eta, new_Heta, new_model
            r = r + alpha * Hd
            norm_r = np.sqrt(inner(r, r))
            if j >= 1 and norm_r <= norm_r0 * min(norm_r0 ** self.theta, self.kappa):
                stop = (
                    self.REACHED_TARGET_LINEAR
                    if self.kappa < norm_r0 ** self.theta
                    else self.REACHED_TARGET_SUPERLINEAR
                )
                break
            z = r
            zold_rold = z_r
            z_r = inner(z, r)
            beta = z_r / zold_rold
            d = -z + beta * d
            e_Pd = beta * (e_Pd + alpha * d_Pd)
            d_Pd = z_r + beta * beta * d_Pd
        return eta, Heta, j + 1, stop

    def run(self, R0: np.ndarray, max_iter: int, tol_grad: float) -> RotationCorrection:
        prob = self.prob
        R = R0.copy()
        fx = cost(prob, R)
        initial = fx
        grad = riemannian_gradient(prob, R)
        norm_grad = float(np.linalg.norm(grad))
        delta = self.delta0
        trace: list[dict] = [
            {"iteration": 0, "cost": fx, "grad_norm": norm_grad, "accepted": True, "radius": delta}
        ]
        it = 0
        while norm_grad > tol_grad and it < max_iter:
            it += 1
            eta, Heta, numit, stop_inner = self._truncated_cg(R, grad, delta)
            R_prop = retract(R, eta)
            fx_prop = cost(prob, R_prop)

            rhonum = fx - fx_prop
            rhoden = -float(np.sum(grad * eta)) - 0.5 * float(np.sum(eta * Heta))
            rho_reg = max(1.0, abs(fx)) * np.spacing(1) * self.rho_regularization
            rhonum += rho_reg
            rhoden += rho_reg
            model_decreased = rhoden >= 0
            rho = rhonum / rhoden if rhoden != 0 else np.nan

            if not model_decreased or np.isnan(rho) or rho < 0.25:
                delta /= 4.0
            elif rho > 0.75 and stop_inner in (self.NEGATIVE_CURVATURE, self.EXCEEDED_TR):
                delta = min(2.0 * delta, self.delta_bar)

            # Never accept an increase of the actual cost.
            accepted = model_decreased and rho > self.rho_prime and fx_prop <= fx
            if accepted:
                R, fx = R_prop, fx_prop
                grad = riemannian_gradient(prob, R)
                norm_grad = float(np.linalg.norm(grad))
            trace.append(
                {
                    "iteration": it,
                    "cost": fx,
                    "grad_norm": norm_grad,
                    "accepted": bool(accepted),
                    "radius": delta,
                    "inner": numit,
                    "inner_stop": stop_inner,
                }
            )
            logger.debug(
                "%s k=%3d inner=%2d f=%+.6e |grad|=%.3e radius=%.3e (%s)",
                "acc" if accepted else "REJ", it, numit, fx, norm_grad, delta, stop_inner,
            )
            if delta < 1e-15:
                logger.debug("Trust-region radius collapsed; stopping")
                break

        converged = norm_grad <= tol_grad
        if not converged and it >= max_iter:
            msg = f"rotation correction hit max_iter={max_iter} (|grad|={norm_grad:.3e})"
            logger.warning(msg)
            warnings.warn(msg, ConvergenceWarning, stacklevel=3)
        return RotationCorrection(
            R=R,
            final_cost=fx,
            iterations=it,
            initial_cost=initial,
            grad_norm=norm_grad,
            converged=converged,
            trace=tuple(trace),
        )


def optimize(
    prob: CorrectionProblem,
    R0: Optional[np.ndarray] = None,
    max_iter: int = 200,
    tol_grad: float = 1e-7,
    *,
    hessian: str = "fd",
) -> RotationCorrection:
    """Minimise :func:`cost` over SO(k') from ``R0`` (identity by default).

    Returns the last accepted iterate; ``cost(R) <= cost(R0)`` always holds.
    A :class:`ConvergenceWarning` is issued when ``max_iter`` is reached.
    """
    R0 = np.eye(prob.k) if R0 is None else np.asarray(R0, dtype=np.float64)
    result = _TrustRegion(prob, hessian=hessian).run(R0, max_iter, tol_grad)
    logger.info(
        "Rotation correction: cost %.6g -> %.6g in %d iterations (|grad|=%.3e)",
        result.initial_cost, result.final_cost, result.iterations, result.grad_norm,
    )
    return result
