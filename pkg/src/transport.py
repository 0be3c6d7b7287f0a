"""
Exact discrete optimal transport by the transportation simplex.

The basis is kept as a spanning tree of m + n - 1 cells over the bipartite
row/column graph. Potentials come from the tree, the entering cell from the
most negative reduced cost (lowest index on ties, Bland's rule after a run of
degenerate pivots) and the leaving cell from the alternating cycle.
"""
import numpy as np
import pandas as pd

import logging
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Tuple

from .config import NumericTolerances, SolverSettings, get_solver_settings, get_tolerances
from .utils import read_csv, write_csv
from .validation import PLAN_SCHEMA, validate_frame

logger = logging.getLogger(__name__)

class TransportError(ValueError):
    """Invalid transport instance or a solver failure."""

@dataclass(frozen=True, eq=False)
class Coupling:
    plan: np.ndarray
    objective: float
    iterations: int = 0

    def row_sums(self) -> np.ndarray:
        return self.plan.sum(axis=1)

    def col_sums(self) -> np.ndarray:
        return self.plan.sum(axis=0)

@dataclass(frozen=True, eq=False)
class DualPair:
    u: np.ndarray
    v: np.ndarray

    def objective(self, p: np.ndarray, q: np.ndarray) -> float:
        return float(self.u @ p + self.v @ q)

    def shifted(self, alpha: float) -> "DualPair":
        return DualPair(self.u + alpha, self.v - alpha)

    def max_violation(self, cost: np.ndarray) -> float:
        """Largest u_i + v_j - C_ij; at most the dual feasibility tolerance for a certificate."""
        return float((self.u[:, None] + self.v[None, :] - cost).max())

    def max_slackness(self, cost: np.ndarray, plan: np.ndarray) -> float:
        """Largest |C_ij - u_i - v_j| over cells carrying mass; zero under complementary slackness."""
        support = plan > 0.0
        if not support.any():
            return 0.0
        return float(np.abs(cost - self.u[:, None] - self.v[None, :])[support].max())

    def certify(self, cost: np.ndarray, plan: np.ndarray, tol: NumericTolerances | None = None) -> "DualPair":
        """Raise TransportError unless these potentials prove plan optimal for cost."""
        tol = get_tolerances(tol)
        violation = self.max_violation(cost)
        if violation > tol.dual_feasibility:
            raise TransportError(f"Potentials are not dual feasible: max u_i + v_j - C_ij = {violation}")
        slack = self.max_slackness(cost, plan)
        if slack > tol.slackness:
            raise TransportError(f"Complementary slackness violated by {slack} on the plan support")
        return self

def _check_instance(cost, p, q, tol: NumericTolerances) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    cost = np.asarray(cost, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)

    if cost.ndim != 2:
        raise TransportError(f"Cost must be a matrix. Got shape {cost.shape}")
    if p.shape != (cost.shape[0],) or q.shape != (cost.shape[1],):
        raise TransportError(f"Marginal shapes {p.shape}, {q.shape} do not match cost shape {cost.shape}")
    if np.isnan(cost).any() or not np.isfinite(cost).all():
        raise TransportError("Cost matrix contains NaN or infinite entries")
    if cost.min() < 0.0:
        raise TransportError(f"Costs must be non-negative. Got min {cost.min()}")
    for name, marginal in (("p", p), ("q", q)):
        if not np.isfinite(marginal).all() or marginal.min() < 0.0:
            raise TransportError(f"Marginal {name} must be finite and non-negative")
    if abs(p.sum() - q.sum()) > tol.marginal_sum:
        raise TransportError(f"Marginal sums differ: {p.sum()!r} vs {q.sum()!r}")
    if abs(p.sum() - 1.0) > tol.marginal_sum:
        raise TransportError(f"Marginals must be probability vectors. Got sum {p.sum()!r}")
    return cost, p, q

class _BasisTree:
    """Basic cells with flows and the row/column adjacency of the spanning tree."""

    def __init__(self, m: int, n: int):
        self.m = m
        self.n = n
        self.flow: dict[tuple[int, int], float] = {}
        self.row_adj: list[set[int]] = [set() for _ in range(m)]
        self.col_adj: list[set[int]] = [set() for _ in range(n)]

    def add(self, i: int, j: int, flow: float):
        self.flow[(i, j)] = flow
        self.row_adj[i].add(j)
        self.col_adj[j].add(i)

    def remove(self, i: int, j: int):
        del self.flow[(i, j)]
        self.row_adj[i].discard(j)
        self.col_adj[j].discard(i)

    def potentials(self, cost: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        u = np.full(self.m, np.nan)
        v = np.full(self.n, np.nan)
        u[0] = 0.0
        queue = deque([(0, True)])
        while queue:
            node, is_row = queue.popleft()
            if is_row:
                for j in self.row_adj[node]:
                    if np.isnan(v[j]):
                        v[j] = cost[node, j] - u[node]
                        queue.append((j, False))
            else:
                for i in self.col_adj[node]:
                    if np.isnan(u[i]):
                        u[i] = cost[i, node] - v[node]
                        queue.append((i, True))
        if np.isnan(u).any() or np.isnan(v).any():
            raise TransportError("Basis is not a spanning tree")
        return u, v

    def path(self, row: int, col: int) -> list[tuple[int, int]]:
        """Cells on the tree path from row node `row` to column node `col`."""
        # nodes: rows are 0..m-1, columns m..m+n-1
        target = self.m + col
        parent = {row: None}
        queue = deque([row])
        while queue:
            node = queue.popleft()
            if node == target:
                break
            if node < self.m:
                neighbours = (self.m + j for j in self.row_adj[node])
            else:
                neighbours = iter(self.col_adj[node - self.m])
            for nxt in neighbours:
                if nxt not in parent:
                    parent[nxt] = node
                    queue.append(nxt)
        if target not in parent:
            raise TransportError(f"No tree path from row {row} to column {col}")

        cells = []
        node = target
        while parent[node] is not None:
            prev = parent[node]
            if node >= self.m:
                cells.append((prev, node - self.m))
            else:
                cells.append((node, prev - self.m))
            node = prev
        cells.reverse()
        return cells

def _northwest_corner(supply: np.ndarray, demand: np.ndarray) -> _BasisTree:
    m, n = len(supply), len(demand)
    supply, demand = supply.copy(), demand.copy()
    tree = _BasisTree(m, n)
    i = j = 0
    while True:
        x = min(supply[i], demand[j])
        tree.add(i, j, x)
        supply[i] -= x
        demand[j] -= x
        if i == m - 1 and j == n - 1:
            break
        if i == m - 1:
            j += 1
        elif j == n - 1 or supply[i] <= demand[j]:
            i += 1
        else:
            j += 1
    return tree

def _line_penalties(masked: np.ndarray, n_active: int, axis: int) -> np.ndarray:
    if n_active >= 2:
        two = np.partition(masked, 1, axis=axis)
        two = two[:, :2] if axis == 1 else two[:2, :].T
        return two[:, 1] - two[:, 0]
    return masked.min(axis=axis)

def _vogel(cost: np.ndarray, supply: np.ndarray, demand: np.ndarray) -> _BasisTree:
    m, n = cost.shape
    supply, demand = supply.copy(), demand.copy()
    rows_on = np.ones(m, dtype=bool)
    cols_on = np.ones(n, dtype=bool)
    tree = _BasisTree(m, n)

    while rows_on.any() and cols_on.any():
        masked = np.where(rows_on[:, None] & cols_on[None, :], cost, np.inf)
        row_pen = np.full(m, -1.0)
        col_pen = np.full(n, -1.0)
        row_pen[rows_on] = _line_penalties(masked[rows_on][:, cols_on], int(cols_on.sum()), axis=1)
        col_pen[cols_on] = _line_penalties(masked[rows_on][:, cols_on], int(rows_on.sum()), axis=0)

        best = int(np.argmax(np.concatenate([row_pen, col_pen])))
        if best < m:
            i = best
            j = int(np.argmin(masked[i]))
        else:
            j = best - m
            i = int(np.argmin(masked[:, j]))

        x = min(supply[i], demand[j])
        tree.add(i, j, x)
        supply[i] -= x
        demand[j] -= x

        # cross out exactly one line so the basis stays a spanning tree
        last_row = rows_on.sum() == 1
        last_col = cols_on.sum() == 1
        if last_row and last_col:
            rows_on[i] = False
            cols_on[j] = False
        elif last_row:
            cols_on[j] = False
        elif last_col or supply[i] <= demand[j]:
            rows_on[i] = False
        else:
            cols_on[j] = False
    return tree

def _extract_flows(tree: _BasisTree, p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Basic flows for the unperturbed marginals, by peeling leaves off the tree."""
    m, n = tree.m, tree.n
    remaining = np.concatenate([p, q]).astype(np.float64)
    adjacency = [set(tree.m + j for j in tree.row_adj[i]) for i in range(m)]
    adjacency += [set(tree.col_adj[j]) for j in range(n)]
    leaves = [node for node in range(m + n) if len(adjacency[node]) == 1]
    plan = np.zeros((m, n))

    while leaves:
        node = leaves.pop()
        if len(adjacency[node]) != 1:
            continue
        other = adjacency[node].pop()
        adjacency[other].discard(node)
        i, j = (node, other - m) if node < m else (other, node - m)
        plan[i, j] = remaining[node]
        remaining[other] -= remaining[node]
        remaining[node] = 0.0
        if len(adjacency[other]) == 1:
            leaves.append(other)
    return plan

def solve_ot(
    cost,
    p,
    q,
    tol: NumericTolerances | None = None,
    settings: SolverSettings | None = None,
) -> Tuple[Coupling, DualPair]:
    """
    Minimize <P, C> over plans with row sums p and column sums q.

    Parameters
    ----------
    cost : array_like
        Non-negative finite cost matrix of shape (m, n).
    p, q : array_like
        Row and column marginals; both must sum to 1.
    tol : NumericTolerances, optional
    settings : SolverSettings, optional
        Initial basis rule and iteration cap.

    Returns
    -------
    (Coupling, DualPair)
        The optimal plan with its objective and potentials certifying optimality.
    """
    tol = get_tolerances(tol)
    settings = get_solver_settings(settings)
    cost, p, q = _check_instance(cost, p, q, tol)
    m, n = cost.shape

    # lexicographic perturbation keeps every basic flow positive
    eps = tol.ot_perturbation
    supply = p + eps
    demand = q.copy()
    demand[-1] += m * eps + (p.sum() - q.sum())

    if settings.init == "northwest":
        tree = _northwest_corner(supply, demand)
    else:
        tree = _vogel(cost, supply, demand)
    if len(tree.flow) != m + n - 1:
        raise TransportError(f"Initial basis has {len(tree.flow)} cells, expected {m + n - 1}")

    degenerate = 0
    iterations = 0
    while True:
        u, v = tree.potentials(cost)
        reduced = cost - u[:, None] - v[None, :]
        if reduced.min() >= -tol.ot_reduced_cost:
            break
        if iterations >= settings.max_iterations:
            raise TransportError(f"Transport simplex did not converge within {settings.max_iterations} iterations")

        if degenerate >= settings.degenerate_run:
            flat = int(np.flatnonzero(reduced.ravel() < -tol.ot_reduced_cost)[0])
        else:
            flat = int(np.argmin(reduced))
        i0, j0 = divmod(flat, n)

        path = tree.path(i0, j0)
        minus = path[0::2]
        plus = path[1::2]
        theta = min(tree.flow[cell] for cell in minus)
        leaving = min(cell for cell in minus if tree.flow[cell] == theta)

        for cell in minus:
            tree.flow[cell] -= theta
        for cell in plus:
            tree.flow[cell] += theta
        tree.remove(*leaving)
        tree.add(i0, j0, theta)

        degenerate = degenerate + 1 if theta <= eps * 1e-3 else 0
        iterations += 1

    plan = _extract_flows(tree, p, q)
    if plan.min() < -tol.marginal_sum:
        raise TransportError(f"Optimal basis gives a negative flow {plan.min()} for the given marginals")
    plan[plan < 0.0] = 0.0

    if np.abs(plan.sum(axis=1) - p).max() > tol.marginal_sum or np.abs(plan.sum(axis=0) - q).max() > tol.marginal_sum:
        raise TransportError("Extracted plan violates the marginal constraints")

    objective = float(np.sum(plan * cost))
    logger.debug(f"Transport {m}x{n} solved in {iterations} pivots, objective {objective:.6g}")
    duals = DualPair(u, v).certify(cost, plan, tol)
    return Coupling(plan, objective, iterations), duals

## CSV helpers

def read_cost_csv(path: str | Path) -> np.ndarray:
    return read_csv(path).to_numpy(dtype=np.float64)

def write_cost_csv(cost: np.ndarray, path: str | Path) -> Path:
    cost = np.asarray(cost, dtype=np.float64)
    return write_csv(pd.DataFrame(cost, columns=[str(j) for j in range(cost.shape[1])]), path)

def plan_to_frame(plan: np.ndarray) -> pd.DataFrame:
    """Sparse (i, j, mass) triples of the positive plan entries, row-major."""
    rows, cols = np.nonzero(plan > 0.0)
    df = pd.DataFrame({"i": rows, "j": cols, "mass": plan[rows, cols]})
    return validate_frame(df, PLAN_SCHEMA)

def write_plan_csv(coupling: Coupling, path: str | Path) -> Path:
    return write_csv(plan_to_frame(coupling.plan), path)

def read_plan_csv(path: str | Path, shape: Tuple[int, int]) -> np.ndarray:
    df = validate_frame(read_csv(path), PLAN_SCHEMA)
    plan = np.zeros(shape)
    plan[df["i"].to_numpy(), df["j"].to_numpy()] = df["mass"].to_numpy()
    return plan
