"""
Operator-splitting QP solver.

Dense ADMM in the form ``l <= C y <= u`` with ``C = [A_eq; A_in; I]``,
Ruiz equilibration, a per-row penalty vector with adaptive updates,
over-relaxation and active-set polishing on a regularized reduced KKT
system. Infeasibility verdicts come from dual-divergence certificates
confirmed by a phase-one LP, or from interval arithmetic on the box.
"""

import time
from typing import Optional, Tuple

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, lu_factor, lu_solve

from dcaport.qp.phase_one import incompatible_bounds, phase_one_feasible
from dcaport.qp.problem import (
    KktResiduals,
    QpProblem,
    QpSettings,
    QpSolution,
    QpStatus,
    QpWarmStart,
    inf_norm,
    kkt_residuals,
)
from dcaport.utils.logger import get_logger

logger = get_logger()

MIN_SCALING = 1e-4
MAX_SCALING = 1e4
RHO_MIN = 1e-6
RHO_MAX = 1e6
RHO_EQ_FACTOR = 1e3
RHO_UPDATE_RATIO = 5.0
POLISH_TRIGGER = 1e-4
POLISH_EVERY_CHECKS = 10

Candidate = Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]


class AdmmSolver:
    """
    One-shot ADMM solver for a fixed ``QpProblem``.

    The constructor scales the data and factors the linear system; call
    ``solve`` once per instance.
    """

    def __init__(self, problem: QpProblem, settings: QpSettings):
        self.problem = problem
        self.settings = settings
        self.m = problem.size
        self.n_eq = problem.n_eq
        self.n_in = problem.n_in

        self.C = np.vstack([problem.A_eq, problem.A_in, np.eye(self.m)])
        self.l = np.concatenate([problem.b_eq, np.full(self.n_in, -np.inf),
                                 problem.lower])
        self.u = np.concatenate([problem.b_eq, problem.h_in, problem.upper])

        self._scale()
        self.rho_base = settings.rho
        self._set_rho(self.rho_base)

    # ------------------------------------------------------------------
    # setup

    def _scale(self):
        """Ruiz equilibration of the KKT matrix plus cost scaling."""
        Ps = self.problem.P.copy()
        qs = self.problem.q.copy()
        Cs = self.C.copy()
        D = np.ones(self.m)
        E = np.ones(Cs.shape[0])
        c = 1.0

        for _ in range(self.settings.scaling_iter):
            col = np.maximum(np.max(np.abs(Ps), axis=0) if self.m else 0.0,
                             np.max(np.abs(Cs), axis=0))
            row = np.max(np.abs(Cs), axis=1)
            col = np.clip(np.where(col < MIN_SCALING, 1.0, col),
                          None, MAX_SCALING)
            row = np.clip(np.where(row < MIN_SCALING, 1.0, row),
                          None, MAX_SCALING)
            d = 1.0 / np.sqrt(col)
            e = 1.0 / np.sqrt(row)

            Ps = d[:, None] * Ps * d[None, :]
            qs = d * qs
            Cs = e[:, None] * Cs * d[None, :]
            D *= d
            E *= e

            p_norm = float(np.mean(np.max(np.abs(Ps), axis=0)))
            gamma = max(p_norm, inf_norm(qs))
            gamma = 1.0 if gamma < MIN_SCALING else min(gamma, MAX_SCALING)
            Ps /= gamma
            qs /= gamma
            c /= gamma

        self.Ps, self.qs, self.Cs = Ps, qs, Cs
        self.D, self.E, self.c = D, E, c
        with np.errstate(invalid='ignore'):
            self.ls = E * self.l
            self.us = E * self.u

    def _set_rho(self, rho: float):
        """Build the per-row penalty vector and refactor."""
        eq = self.l == self.u
        free = np.isinf(self.l) & np.isinf(self.u)
        vec = np.full(self.Cs.shape[0], rho)
        vec[eq] = min(rho * RHO_EQ_FACTOR, RHO_MAX)
        vec[free] = RHO_MIN
        self.rho = vec
        K = (self.Ps + self.settings.sigma * np.eye(self.m)
             + self.Cs.T @ (vec[:, None] * self.Cs))
        self.factor = cho_factor(K)

    # ------------------------------------------------------------------
    # conversions

    def _unscale(self, x: np.ndarray, w: np.ndarray) -> Candidate:
        y = self.D * x
        duals = self.E * w / self.c
        lam = duals[:self.n_eq]
        mu = duals[self.n_eq:self.n_eq + self.n_in]
        nu = duals[self.n_eq + self.n_in:]
        return y, lam, mu, nu

    def _from_warm_start(self, ws: QpWarmStart):
        x = np.asarray(ws.y, dtype=float).reshape(-1) / self.D
        parts = []
        for arr, k in ((ws.eq_duals, self.n_eq), (ws.in_duals, self.n_in),
                       (ws.bound_duals, self.m)):
            parts.append(np.zeros(k) if arr is None
                         else np.asarray(arr, dtype=float).reshape(-1))
        w = self.c * np.concatenate(parts) / self.E
        z = np.clip(self.Cs @ x, self.ls, self.us)
        return x, z, w

    def _evaluate(self, cand: Candidate) -> KktResiduals:
        return kkt_residuals(self.problem, *cand)

    # ------------------------------------------------------------------
    # polishing

    def _polish(self, x: np.ndarray, z: np.ndarray,
                w: np.ndarray) -> Optional[Candidate]:
        """
        Solve the equality-constrained QP on the guessed active set.

        Wrongly signed multipliers shrink the active set for one more
        pass.
        """
        finite_l = np.isfinite(self.ls)
        finite_u = np.isfinite(self.us)
        eq = self.l == self.u
        low = finite_l & (z - self.ls < -w) & ~eq
        upp = finite_u & (self.us - z < w) & ~eq
        low &= ~upp | (w < 0)
        upp &= ~low

        cand = None
        for _ in range(2):
            active = eq | low | upp
            cand, w_full = self._polish_once(active, upp)
            if cand is None:
                return None
            wrong = (low & (w_full > 0)) | (upp & (w_full < 0))
            if not np.any(wrong):
                break
            low &= ~wrong
            upp &= ~wrong
        return cand

    def _polish_once(self, active: np.ndarray, upp: np.ndarray):
        delta = self.settings.polish_delta
        Ca = self.Cs[active]
        target = np.where(upp, self.us, self.ls)[active]
        k = Ca.shape[0]
        K0 = np.block([[self.Ps, Ca.T], [Ca, np.zeros((k, k))]])
        reg = np.concatenate([np.full(self.m, delta), np.full(k, -delta)])
        K = K0 + np.diag(reg)
        rhs = np.concatenate([-self.qs, target])
        try:
            lu = lu_factor(K, check_finite=False)
            sol = lu_solve(lu, rhs)
            scale = max(1.0, inf_norm(rhs))
            for _ in range(self.settings.polish_refine_iter):
                resid = rhs - K0 @ sol
                if inf_norm(resid) <= 1e-15 * scale:
                    break
                sol = sol + lu_solve(lu, resid)
        except (LinAlgError, ValueError) as e:
            logger.debug(f"Polish factorization failed: {e}")
            return None, None
        if not np.all(np.isfinite(sol)):
            return None, None

        w_full = np.zeros(self.Cs.shape[0])
        w_full[active] = sol[self.m:]
        return self._unscale(sol[:self.m], w_full), w_full

    # ------------------------------------------------------------------
    # certificates

    def _primal_infeasibility(self, dw: np.ndarray) -> Optional[str]:
        eps = self.settings.infeasibility_tol
        dy = self.E * dw / self.c
        norm = inf_norm(dy)
        if norm <= np.sqrt(eps):
            return None
        dy = dy / norm
        if np.any(dy[np.isinf(self.u)] > eps) or \
                np.any(dy[np.isinf(self.l)] < -eps):
            return None
        if inf_norm(self.C.T @ dy) > eps:
            return None
        u_fin = np.where(np.isfinite(self.u), self.u, 0.0)
        l_fin = np.where(np.isfinite(self.l), self.l, 0.0)
        support = u_fin @ np.maximum(dy, 0.0) + l_fin @ np.minimum(dy, 0.0)
        if support >= -eps:
            return None
        if phase_one_feasible(self.problem) is not False:
            return None
        return (f"primal infeasible: dual ray with support {support:.3e} "
                f"confirmed by phase-one LP")

    def _dual_infeasibility(self, dx: np.ndarray) -> Optional[str]:
        eps = self.settings.infeasibility_tol
        d = self.D * dx
        norm = inf_norm(d)
        if norm <= np.sqrt(eps):
            return None
        d = d / norm
        p = self.problem
        if inf_norm(p.P @ d) > eps or p.q @ d >= -eps:
            return None
        Cd = self.C @ d
        if np.any(Cd[np.isfinite(self.u)] > eps) or \
                np.any(Cd[np.isfinite(self.l)] < -eps):
            return None
        return (f"dual infeasible: objective decreases along a recession "
                f"direction with slope {p.q @ d:.3e}")

    # ------------------------------------------------------------------
    # rho adaptation

    def _maybe_update_rho(self, x, z, w) -> bool:
        Cx = self.Cs @ x
        Px = self.Ps @ x
        Ctw = self.Cs.T @ w
        prim = inf_norm(Cx - z) / max(inf_norm(Cx), inf_norm(z), 1e-30)
        dual = inf_norm(Px + self.qs + Ctw) / max(
            inf_norm(Px), inf_norm(Ctw), inf_norm(self.qs), 1e-30)
        if prim <= 0.0 or dual <= 0.0:
            return False
        new = float(np.clip(self.rho_base * np.sqrt(prim / dual),
                            RHO_MIN, RHO_MAX))
        if self.rho_base / RHO_UPDATE_RATIO <= new <= \
                self.rho_base * RHO_UPDATE_RATIO:
            return False
        logger.debug(f"ADMM rho {self.rho_base:.3e} -> {new:.3e}")
        self.rho_base = new
        self._set_rho(new)
        return True

    # ------------------------------------------------------------------

    def _result(self, cand: Candidate, status: QpStatus,
                res: KktResiduals, iterations: int, start: float,
                certificate: Optional[str] = None,
                polished: bool = False) -> QpSolution:
        y, lam, mu, nu = cand
        return QpSolution(
            y=y, eq_duals=lam, in_duals=mu, bound_duals=nu, status=status,
            residuals=res, iterations=iterations,
            objective=self.problem.objective(y), certificate=certificate,
            polished=polished, seconds=time.perf_counter() - start,
        )

    def solve(self, tol: float,
              warm_start: Optional[QpWarmStart] = None) -> QpSolution:
        """
        Run ADMM until the KKT residuals drop below ``tol``.

        Args:
            tol: Bound on primal, dual and complementarity residuals
            warm_start: Optional primal-dual starting point

        Returns:
            QpSolution: Best point found and its status
        """
        s = self.settings
        start = time.perf_counter()

        reason = incompatible_bounds(self.problem)
        if reason is not None:
            cand = self._unscale(np.zeros(self.m),
                                 np.zeros(self.Cs.shape[0]))
            return self._result(cand, QpStatus.INFEASIBLE,
                                self._evaluate(cand), 0, start,
                                certificate=reason)

        rows = self.Cs.shape[0]
        x = np.zeros(self.m)
        z = np.clip(np.zeros(rows), self.ls, self.us)
        w = np.zeros(rows)
        best: Optional[Candidate] = None
        best_res: Optional[KktResiduals] = None

        if warm_start is not None and s.warm_start:
            if warm_start.matches(self.problem):
                x, z, w = self._from_warm_start(warm_start)
                if s.polish:
                    cand = self._polish(x, z, w)
                    if cand is not None:
                        res = self._evaluate(cand)
                        if res.within(tol):
                            return self._result(cand, QpStatus.OPTIMAL, res,
                                                0, start, polished=True)
                        best, best_res = cand, res
            else:
                logger.debug("Ignoring warm start with mismatched sizes")

        last_active = None
        checks = 0
        phase_one_done = False
        iteration = 0
        for iteration in range(1, s.max_iter + 1):
            x_prev, z_prev, w_prev = x, z, w
            rhs = (s.sigma * x_prev - self.qs
                   + self.Cs.T @ (self.rho * z_prev - w_prev))
            x_tilde = cho_solve(self.factor, rhs)
            z_tilde = self.Cs @ x_tilde
            x = s.alpha * x_tilde + (1.0 - s.alpha) * x_prev
            z_relaxed = s.alpha * z_tilde + (1.0 - s.alpha) * z_prev
            z = np.clip(z_relaxed + w_prev / self.rho, self.ls, self.us)
            w = w_prev + self.rho * (z_relaxed - z)

            if iteration % s.check_interval and iteration != s.max_iter:
                continue
            checks += 1

            cand = self._unscale(x, w)
            res = self._evaluate(cand)
            if best_res is None or res.worst < best_res.worst:
                best, best_res = cand, res
            if res.within(tol):
                return self._result(cand, QpStatus.OPTIMAL, res,
                                    iteration, start)

            cert = (self._primal_infeasibility(w - w_prev)
                    or self._dual_infeasibility(x - x_prev))
            if cert is not None:
                return self._result(cand, QpStatus.INFEASIBLE, res,
                                    iteration, start, certificate=cert)

            if s.polish:
                active = (tuple(np.flatnonzero(z - self.ls < -w)),
                          tuple(np.flatnonzero(self.us - z < w)))
                due = (res.worst <= POLISH_TRIGGER
                       or checks % POLISH_EVERY_CHECKS == 0)
                if due and active != last_active:
                    last_active = active
                    polished = self._polish(x, z, w)
                    if polished is not None:
                        p_res = self._evaluate(polished)
                        if p_res.within(tol):
                            return self._result(polished, QpStatus.OPTIMAL,
                                                p_res, iteration, start,
                                                polished=True)
                        if p_res.worst < best_res.worst:
                            best, best_res = polished, p_res

            if not phase_one_done and iteration >= s.phase_one_iter:
                phase_one_done = True
                if phase_one_feasible(self.problem) is False:
                    return self._result(
                        cand, QpStatus.INFEASIBLE, res, iteration, start,
                        certificate="primal infeasible: phase-one LP")

            if s.adaptive_rho:
                self._maybe_update_rho(x, z, w)

        if not phase_one_done and phase_one_feasible(self.problem) is False:
            cand = self._unscale(x, w)
            return self._result(cand, QpStatus.INFEASIBLE,
                                self._evaluate(cand), iteration, start,
                                certificate="primal infeasible: phase-one LP")

        logger.debug(f"ADMM hit {s.max_iter} iterations, best residual "
                     f"{best_res.worst:.3e}")
        return self._result(best, QpStatus.ITERATION_LIMIT, best_res,
                            iteration, start)


def solve_qp(p: QpProblem, tol: Optional[float] = None,
             max_iter: Optional[int] = None,
             settings: Optional[QpSettings] = None,
             warm_start: Optional[QpWarmStart] = None) -> QpSolution:
    """
    Solve a convex QP to certified KKT accuracy.

    Args:
        p: Problem to solve
        tol: Residual tolerance, defaults to ``settings.tol``
        max_iter: Iteration limit, defaults to ``settings.max_iter``
        settings: Solver settings
        warm_start: Optional primal-dual starting point

    Returns:
        QpSolution: ``optimal`` only when every KKT residual is within
        ``tol``; ``infeasible`` with a certificate; otherwise
        ``iteration-limit`` with the best iterate seen
    """
    settings = settings or QpSettings()
    if max_iter is not None and max_iter != settings.max_iter:
        settings = QpSettings(**{**settings.__dict__, 'max_iter': max_iter})
    tol = settings.tol if tol is None else tol

    if p.size == 0:
        empty = np.zeros(0)
        lam = np.zeros(p.n_eq)
        mu = np.zeros(p.n_in)
        res = kkt_residuals(p, empty, lam, mu, empty)
        status = QpStatus.OPTIMAL if res.within(tol) else QpStatus.INFEASIBLE
        return QpSolution(y=empty, eq_duals=lam, in_duals=mu,
                          bound_duals=empty, status=status, residuals=res,
                          objective=0.0,
                          certificate=None if res.within(tol)
                          else "empty problem with violated constants")

    solver = AdmmSolver(p, settings)
    sol = solver.solve(tol, warm_start=warm_start)
    logger.debug(f"QP size {p.size}: {sol.status.value} after "
                 f"{sol.iterations} iterations, residual "
                 f"{sol.residuals.worst:.3e}")
    return sol
