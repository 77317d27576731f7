"""DC grid linearization: PTDF matrices and power flow.

Sensitivities are computed island-wise from the susceptance matrix; each
island gets its own reference (slack) bus whose PTDF column is zero.  Flows
are signed positive in the ``from_bus -> to_bus`` direction of each branch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components


class GridError(ValueError):
    pass


@dataclass
class PtdfMatrix:
    """Branch x bus sensitivity matrix plus the index bookkeeping around it."""

    matrix: np.ndarray
    bus_ids: list
    branch_ids: list
    slack_buses: list
    island_of_bus: np.ndarray

    def bus_index(self, bus_id):
        return self._bus_pos[bus_id]

    def branch_index(self, branch_id):
        return self._branch_pos[branch_id]

    def __post_init__(self):
        self._bus_pos = {b: k for k, b in enumerate(self.bus_ids)}
        self._branch_pos = {b: k for k, b in enumerate(self.branch_ids)}

    def injection_vector(self, injections):
        """Mapping bus id -> MW (missing buses are zero) to a dense vector."""
        if isinstance(injections, np.ndarray):
            if injections.shape != (len(self.bus_ids),):
                raise GridError("injection vector has wrong length")
            return injections.astype(float)
        vec = np.zeros(len(self.bus_ids))
        for bus, mw in injections.items():
            vec[self._bus_pos[bus]] += mw
        return vec

    def flows(self, injections):
        return self.matrix @ self.injection_vector(injections)


def build_ptdf(buses, branches, slack=None):
    """PTDF of the network formed by ``buses`` and in-service ``branches``.

    Disconnected networks produce one sub-matrix per island (stacked into a
    single PTDF whose cross-island sensitivities are zero), never a silent
    merge.  ``slack`` pins the reference bus of its island; every other
    island takes its lowest bus id.
    """
    bus_ids = [b.id for b in buses]
    pos = {b: k for k, b in enumerate(bus_ids)}
    n = len(bus_ids)
    branch_list = list(branches)
    m = len(branch_list)

    rows, cols, vals = [], [], []
    for k, br in enumerate(branch_list):
        i, j = pos[br.from_bus], pos[br.to_bus]
        rows.append(i)
        cols.append(j)
        vals.append(1.0)
    adj = sp.coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    n_islands, labels = connected_components(adj, directed=False)

    ptdf = np.zeros((m, n))
    slack_buses = []
    for island in range(n_islands):
        members = np.flatnonzero(labels == island)
        island_ids = [bus_ids[k] for k in members]
        if slack is not None and slack in island_ids:
            slack_id = slack
        else:
            slack_id = min(island_ids)
        slack_buses.append(slack_id)
        if len(members) == 1:
            continue
        local = {bus_ids[k]: i for i, k in enumerate(members)}
        nloc = len(members)
        b_mat = np.zeros((nloc, nloc))
        island_branches = []
        for k, br in enumerate(branch_list):
            if br.from_bus not in local:
                continue
            i, j = local[br.from_bus], local[br.to_bus]
            y = 1.0 / br.reactance
            b_mat[i, i] += y
            b_mat[j, j] += y
            b_mat[i, j] -= y
            b_mat[j, i] -= y
            island_branches.append((k, i, j, y))
        keep = [i for i, k in enumerate(members) if bus_ids[k] != slack_id]
        b_red = b_mat[np.ix_(keep, keep)]
        # theta = B^-1 P restricted to non-slack buses; slack angle is 0
        x_red = np.linalg.solve(b_red, np.eye(len(keep)))
        theta = np.zeros((nloc, len(keep)))
        theta[keep, :] = x_red
        for k, i, j, y in island_branches:
            sens = y * (theta[i, :] - theta[j, :])
            for col_local, col_global in enumerate(keep):
                ptdf[k, members[col_global]] = sens[col_local]

    return PtdfMatrix(
        matrix=ptdf,
        bus_ids=bus_ids,
        branch_ids=[br.id for br in branch_list],
        slack_buses=slack_buses,
        island_of_bus=labels,
    )


def dc_power_flow(ptdf, injections, balance_tol=1e-6):
    """Branch flows for a balanced injection vector (MW per bus).

    Injections must sum to ~0 per island; an imbalance is an error naming the
    island, never silently slack-absorbed.
    """
    vec = ptdf.injection_vector(injections)
    for island in range(ptdf.island_of_bus.max() + 1 if len(ptdf.bus_ids) else 0):
        mask = ptdf.island_of_bus == island
        imbalance = float(vec[mask].sum())
        if abs(imbalance) > balance_tol:
            raise GridError(
                f"island {island} (slack {ptdf.slack_buses[island]}) injections "
                f"unbalanced by {imbalance:.6g} MW"
            )
    return ptdf.matrix @ vec
