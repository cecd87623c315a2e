#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Interaction graphs and phase potentials
"""
# Copyright 2021 mobius_flock developers
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import dataclasses
import functools

import numpy as np
import numba
import scipy.linalg as sla

from . import FlockError
from .misc import Choices
from .num import NOT_CI

#: Minimal algebraic connectivity of a connected graph
CONNECTIVITY_TOLERANCE = 1e-10

GRAPH_PRESETS = Choices(
    {
        "cycle": "ring where agent k talks to agents k-1 and k+1",
        "path": "open chain of agents",
        "complete": "all-to-all graph",
        "star": "all agents talk to the first one",
    },
    parameter="preset",
    description="Named graph topology",
)


class GraphError(FlockError):
    pass


class DisconnectedGraphError(GraphError):
    pass


class SelfLoopError(GraphError):
    pass


class DuplicateEdgeError(GraphError):
    pass


class NotCirculantError(GraphError):
    pass


@dataclasses.dataclass(frozen=True, eq=False)
class InteractionGraph:
    """Undirected connected graph of interacting agents

    Use :func:`build_graph` or :func:`get_preset_graph` to build it.
    Agents and edges are 0-indexed.
    """

    n: int
    edges: tuple
    laplacian: np.ndarray
    incidence: np.ndarray
    circulant: bool
    eigenvalues: np.ndarray

    @property
    def nedges(self):
        return len(self.edges)

    @property
    def lambda_max(self):
        """Largest eigenvalue of the Laplacian"""
        return float(self.eigenvalues[-1])

    @functools.cached_property
    def adjacency(self):
        return np.diag(np.diag(self.laplacian)) - self.laplacian

    @functools.cached_property
    def indptr(self):
        """Offsets of the neighbor lists in :attr:`indices`"""
        return np.concatenate(([0], np.cumsum(np.diag(self.laplacian)))).astype("l")

    @functools.cached_property
    def indices(self):
        """Concatenated sorted neighbor lists"""
        return np.concatenate([self.neighbors(k) for k in range(self.n)] + [[]]).astype("l")

    def neighbors(self, k):
        """Sorted neighbors of agent `k`"""
        return np.flatnonzero(self.adjacency[k])


def build_graph(n, edges, base=1):
    """Build an :class:`InteractionGraph`

    Parameters
    ----------
    n: int
        Number of agents
    edges: list(tuple(int, int))
        Unordered pairs of agent indices
    base: int
        Index of the first agent in `edges`, ``1`` by default

    Return
    ------
    InteractionGraph

    Example
    -------
    .. ipython:: python

        @suppress
        from mobius_flock.graph import build_graph
        g = build_graph(3, [(1, 2), (2, 3)])
        g.laplacian
        g.circulant
    """
    if n < 2:
        raise GraphError(f"At least two agents are needed: {n}")
    pairs = []
    for edge in edges:
        j, k = (int(i) - base for i in edge)
        if j == k:
            raise SelfLoopError(f"Self loop on agent {j + base}")
        if not (0 <= j < n and 0 <= k < n):
            raise GraphError(f"Invalid edge {tuple(edge)} for {n} agents")
        pair = (min(j, k), max(j, k))
        if pair in pairs:
            raise DuplicateEdgeError(f"Duplicate edge {tuple(edge)}")
        pairs.append(pair)
    pairs = tuple(sorted(pairs))

    incidence = np.zeros((n, len(pairs)))
    for i, (j, k) in enumerate(pairs):
        incidence[j, i] = 1
        incidence[k, i] = -1
    laplacian = incidence @ incidence.T

    eigenvalues = sla.eigh(laplacian, eigvals_only=True)
    if eigenvalues[1] <= CONNECTIVITY_TOLERANCE:
        raise DisconnectedGraphError(f"The graph is not connected: {pairs}")

    return InteractionGraph(
        n=n,
        edges=pairs,
        laplacian=laplacian,
        incidence=incidence,
        circulant=is_circulant(laplacian),
        eigenvalues=eigenvalues,
    )


def is_circulant(matrix):
    """Check whether each row of a square matrix is a cyclic shift of the first one"""
    return bool(np.array_equal(matrix, sla.circulant(matrix[:, 0])))


@GRAPH_PRESETS.format_function_docstring
def get_preset_graph(preset, n):
    """Build a named graph

    Parameters
    ----------
    {preset}
    n: int
        Number of agents

    Return
    ------
    InteractionGraph
    """
    preset = GRAPH_PRESETS[preset]
    if preset == "cycle":
        edges = [(k, (k + 1) % n) for k in range(n)] if n > 2 else [(0, 1)]
    elif preset == "path":
        edges = [(k, k + 1) for k in range(n - 1)]
    elif preset == "complete":
        edges = [(j, k) for j in range(n) for k in range(j + 1, n)]
    else:
        edges = [(0, k) for k in range(1, n)]
    return build_graph(n, edges, base=0)


def circulant_eigenbasis(g):
    """Fourier eigenbasis of a circulant Laplacian

    Parameters
    ----------
    g: InteractionGraph

    Return
    ------
    numpy.ndarray
        Eigenvectors :math:`e^{i(l-1)\\Phi}` with :math:`\\Phi_k=(k-1)2\\pi/n`,
        as columns of an ``(n, n)`` complex array
    numpy.ndarray
        Associated real eigenvalues
    """
    if not g.circulant:
        raise NotCirculantError("The Laplacian is not circulant")
    n = g.n
    phases = np.arange(n) * 2 * np.pi / n
    vectors = np.exp(1j * np.outer(phases, np.arange(n)))
    eigenvalues = np.real(np.einsum("kl,kj,jl->l", vectors.conj(), g.laplacian, vectors)) / n

    lf = g.laplacian @ vectors
    if not np.allclose(lf, vectors * eigenvalues, rtol=0, atol=1e-10):
        raise NotCirculantError("Fourier vectors are not eigenvectors of the Laplacian")
    fourier = vectors / np.sqrt(n)
    if not np.allclose(
        fourier @ np.diag(eigenvalues) @ fourier.conj().T, g.laplacian, rtol=0, atol=1e-10
    ):
        raise NotCirculantError("The Fourier basis does not diagonalize the Laplacian")
    return vectors, eigenvalues


def potential_u(g, gamma):
    """Quadratic phase potential :math:`\\frac{1}{2}\\langle e^{i\\gamma}, L e^{i\\gamma}\\rangle`

    It is minimal and null for synchronized phases.
    """
    z = np.exp(1j * np.asarray(gamma, "d"))
    return 0.5 * float(np.real(z.conj() @ g.laplacian @ z))


def potential_gradient(g, gamma):
    """Gradient of :func:`potential_u` with respect to the phases"""
    z = np.exp(1j * np.asarray(gamma, "d"))
    return np.imag(z.conj() * (g.laplacian @ z))


def edge_phasor_sum(g, gamma):
    """Sum over edges of :math:`|e^{i\\gamma_j}-e^{i\\gamma_k}|^2`"""
    z = np.exp(1j * np.asarray(gamma, "d"))
    j, k = np.array(g.edges, dtype="l").reshape(-1, 2).T
    return float(np.sum(np.abs(z[j] - z[k]) ** 2))


@numba.njit(cache=NOT_CI)
def _coupling_(k, phases, indptr, indices):
    out = 0.0
    for i in range(indptr[k], indptr[k + 1]):
        out -= np.sin(phases[indices[i]] - phases[k])
    return out


def neighbor_coupling(g, gamma, k=None):
    """Phase coupling of agents computed from their neighbors only

    It equals :math:`-\\sum_{j\\in N_k}\\sin(\\gamma_j-\\gamma_k)`, i.e the
    component `k` of :func:`potential_gradient`.

    Parameters
    ----------
    g: InteractionGraph, None
        No graph means isolated agents
    gamma: array_like
        Phases of all agents
    k: None, int
        Single agent index, else all agents

    Return
    ------
    float, numpy.ndarray
    """
    gamma = np.asarray(gamma, "d")
    if g is None:
        indptr, indices = np.zeros(gamma.size + 1, "l"), np.zeros(0, "l")
    else:
        indptr, indices = g.indptr, g.indices
    if k is not None:
        return _coupling_(k, gamma, indptr, indices)
    return np.array([_coupling_(i, gamma, indptr, indices) for i in range(gamma.size)])


def get_csr(g, n):
    """Neighbor lists as ``(indptr, indices)`` arrays, empty when `g` is None"""
    if g is None:
        return np.zeros(n + 1, "l"), np.zeros(0, "l")
    return g.indptr, g.indices
