"""Directed tail-impact estimation and the symmetric risk network.

For each ordered firm pair (source j, target i) inside one window the
directed weight is the complement of the source's tail impact on the
target, estimated on the pair's common observed days. Pairs that cannot be
estimated (short overlap, degenerate target, estimator domain violations)
get weight zero and a diagnostic record instead of an exception: one bad
pair must never sink a window.

The undirected network averages the two directions, zeros included, so a
one-sided effect still leaves a (weaker) edge.

Precondition violations by the caller (bad indices, too-small networks)
raise ValueError; data-driven failures raise the package's typed errors.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import IO

import numpy as np

from .errors import (
    DegeneratePairError,
    EstimationError,
    InestimablePairError,
    NetworkFormatError,
    WindowError,
)
from .measures import edge_weight, estimate_mes, risk_profile
from .windows import WindowSlice, pairwise_common_days

__all__ = [
    "Diagnostic",
    "DirectedWeights",
    "RiskNetwork",
    "VertexStats",
    "build_directed",
    "symmetrize",
    "density",
    "vertex_stats",
    "network_to_dict",
    "network_from_dict",
    "write_network",
    "read_network",
]

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Diagnostic:
    """Why a pair (or every pair touching one firm) was zeroed."""

    kind: str
    source: str | None
    target: str | None
    detail: str


@dataclass(frozen=True)
class DirectedWeights:
    """Raw directed weight matrix for one window; entry [j, i] is the
    weight of the edge source j -> target i."""

    window_id: int
    label: str
    firms: tuple[str, ...]
    matrix: np.ndarray
    diagnostics: tuple[Diagnostic, ...] = ()

    def __post_init__(self) -> None:
        n = len(self.firms)
        if self.matrix.shape != (n, n):
            raise ValueError(f"matrix shape {self.matrix.shape} for {n} firms")
        self.matrix.setflags(write=False)


@dataclass(frozen=True)
class RiskNetwork:
    """Undirected weighted network of one window.

    ``weights`` is symmetric with zero diagonal and entries in [0, 1];
    vertex order follows ``firms``.
    """

    window_id: int
    label: str
    firms: tuple[str, ...]
    weights: np.ndarray

    def __post_init__(self) -> None:
        n = len(self.firms)
        w = self.weights
        if w.shape != (n, n):
            raise NetworkFormatError(f"weight shape {w.shape} for {n} firms")
        if not np.all(np.isfinite(w)):
            raise NetworkFormatError("non-finite weight")
        if not np.array_equal(w, w.T):
            raise NetworkFormatError("weights must be symmetric")
        if np.any(np.diagonal(w) != 0.0):
            raise NetworkFormatError("self-weights must be zero")
        if w.size and (w.min() < 0.0 or w.max() > 1.0):
            raise NetworkFormatError("weights must lie in [0, 1]")
        w.setflags(write=False)

    @property
    def n(self) -> int:
        return len(self.firms)

    @property
    def m(self) -> int:
        iu = np.triu_indices(self.n, k=1)
        return int(np.count_nonzero(self.weights[iu]))

    @property
    def adjacency(self) -> np.ndarray:
        return self.weights > 0.0

    @property
    def strengths(self) -> np.ndarray:
        return self.weights.sum(axis=1)


@dataclass(frozen=True)
class VertexStats:
    firm: str
    degree: int
    strength: float


def _firm_profiles(window: WindowSlice, alpha: float):
    """Profiles for each slice firm on its own observed days; firms whose
    series violate the estimator domain come back as None plus a
    diagnostic."""
    profiles = []
    diags: list[Diagnostic] = []
    for col, firm in enumerate(window.firms):
        try:
            profiles.append(risk_profile(firm, window.observed(col), alpha))
        except EstimationError as exc:
            profiles.append(None)
            diags.append(Diagnostic("inestimable_firm", None, firm, str(exc)))
    return profiles, diags


def _build_directed_fast(window: WindowSlice, alpha: float) -> DirectedWeights:
    """Vectorized path for fully observed slices."""
    r = window.returns
    t, n = r.shape
    k = max(1, math.floor(alpha * t))
    q = np.partition(r, k - 1, axis=0)[k - 1]
    tail = r <= q
    counts = tail.sum(axis=0)
    means = r.mean(axis=0)
    es = -(r * tail).sum(axis=0) / counts
    # cond[j, i]: mean of target i's returns over source j's tail days
    cond = (tail.T.astype(float) @ r) / counts[:, None]
    mes = -cond
    spread = means + es
    diags: list[Diagnostic] = []
    matrix = np.zeros((n, n))
    ok = spread > 0.0
    for i in np.flatnonzero(~ok):
        diags.append(
            Diagnostic(
                "degenerate_firm",
                None,
                window.firms[i],
                f"non-positive tail spread {spread[i]}",
            )
        )
    with np.errstate(invalid="ignore", divide="ignore"):
        raw = (es[None, :] - mes) / spread[None, :]
    clipped = np.clip(raw, 0.0, 1.0)
    matrix[:, ok] = 1.0 - clipped[:, ok]
    np.fill_diagonal(matrix, 0.0)
    return DirectedWeights(
        window_id=window.window_id,
        label=window.label,
        firms=window.firms,
        matrix=matrix,
        diagnostics=tuple(diags),
    )


def _build_directed_general(window: WindowSlice, alpha: float) -> DirectedWeights:
    """Per-pair path honouring missing days via common-day intersection."""
    n = window.n_firms
    matrix = np.zeros((n, n))
    profiles, diags = _firm_profiles(window, alpha)
    floor = max(window.min_obs, math.ceil(1.0 / alpha))
    for a in range(n):
        for b in range(a + 1, n):
            common = pairwise_common_days(window, a, b)
            if len(common) < floor:
                diags.append(
                    Diagnostic(
                        "short_overlap",
                        window.firms[a],
                        window.firms[b],
                        f"{len(common)} common days, need {floor}",
                    )
                )
                continue
            series_a = window.returns[common, a]
            series_b = window.returns[common, b]
            for target, source, r_t, r_s in (
                (a, b, series_a, series_b),
                (b, a, series_b, series_a),
            ):
                if profiles[target] is None or profiles[source] is None:
                    continue
                try:
                    mes = estimate_mes(r_t, r_s, alpha)
                    matrix[source, target] = edge_weight(
                        profiles[target], profiles[source], mes
                    )
                except DegeneratePairError as exc:
                    diags.append(
                        Diagnostic(
                            "degenerate_pair",
                            window.firms[source],
                            window.firms[target],
                            str(exc),
                        )
                    )
                except (InestimablePairError, EstimationError) as exc:
                    diags.append(
                        Diagnostic(
                            "inestimable_pair",
                            window.firms[source],
                            window.firms[target],
                            str(exc),
                        )
                    )
    return DirectedWeights(
        window_id=window.window_id,
        label=window.label,
        firms=window.firms,
        matrix=matrix,
        diagnostics=tuple(diags),
    )


def build_directed(window: WindowSlice, alpha: float) -> DirectedWeights:
    """Estimate all directed pair weights of one window.

    Fully observed windows take a vectorized route; windows with missing
    days fall back to per-pair estimation on common observed days. Both
    routes agree exactly on fully observed data.
    """
    if window.degenerate:
        raise WindowError(
            f"window {window.label}: fewer than two eligible firms"
        )
    if not 0.0 < alpha < 0.5:
        raise EstimationError(f"tail level must lie in (0, 0.5), got {alpha}")
    if window.n_days < math.ceil(1.0 / alpha):
        profiles, diags = _firm_profiles(window, alpha)
        return DirectedWeights(
            window_id=window.window_id,
            label=window.label,
            firms=window.firms,
            matrix=np.zeros((window.n_firms, window.n_firms)),
            diagnostics=tuple(diags),
        )
    if window.mask.all():
        return _build_directed_fast(window, alpha)
    return _build_directed_general(window, alpha)


def symmetrize(directed: DirectedWeights) -> RiskNetwork:
    """Average the two directions of every pair into an undirected network.

    Zeros take part in the average: a pair with one live direction keeps
    half that weight.
    """
    m = directed.matrix
    if np.any(np.diagonal(m) != 0.0):
        raise NetworkFormatError("directed matrix must have a zero diagonal")
    if m.size and (np.nanmin(m) < 0.0 or np.nanmax(m) > 1.0 or not np.all(np.isfinite(m))):
        raise NetworkFormatError("directed weights must lie in [0, 1]")
    return RiskNetwork(
        window_id=directed.window_id,
        label=directed.label,
        firms=directed.firms,
        weights=(m + m.T) / 2.0,
    )


def density(net: RiskNetwork) -> float:
    """Fraction of firm pairs joined by a positive-weight edge."""
    if net.n < 2:
        raise ValueError("density needs at least two vertices")
    return net.m / math.comb(net.n, 2)


def vertex_stats(net: RiskNetwork) -> tuple[VertexStats, ...]:
    """Degree and strength of every vertex, in network order."""
    degrees = net.adjacency.sum(axis=1)
    strengths = net.strengths
    return tuple(
        VertexStats(firm=firm, degree=int(degrees[i]), strength=float(strengths[i]))
        for i, firm in enumerate(net.firms)
    )


def network_to_dict(net: RiskNetwork) -> dict:
    """JSON-ready form: firms plus the positive upper-triangle edges."""
    edges = []
    for i in range(net.n):
        for j in range(i + 1, net.n):
            w = net.weights[i, j]
            if w > 0.0:
                edges.append([i, j, float(w)])
    return {
        "schema_version": SCHEMA_VERSION,
        "window_id": net.window_id,
        "label": net.label,
        "n": net.n,
        "firms": list(net.firms),
        "edges": edges,
    }


def network_from_dict(payload: dict) -> RiskNetwork:
    """Inverse of :func:`network_to_dict`, with schema validation."""
    try:
        version = payload["schema_version"]
        if version != SCHEMA_VERSION:
            raise NetworkFormatError(f"unsupported schema version {version!r}")
        firms = tuple(str(f) for f in payload["firms"])
        n = int(payload["n"])
        window_id = int(payload["window_id"])
        label = str(payload["label"])
        edges = payload["edges"]
    except (KeyError, TypeError, ValueError) as exc:
        raise NetworkFormatError(f"bad network payload: {exc}") from None
    if n != len(firms):
        raise NetworkFormatError(f"n={n} but {len(firms)} firms listed")
    weights = np.zeros((n, n))
    for entry in edges:
        try:
            i, j, w = int(entry[0]), int(entry[1]), float(entry[2])
        except (TypeError, ValueError, IndexError) as exc:
            raise NetworkFormatError(f"bad edge entry {entry!r}: {exc}") from None
        if not 0 <= i < j < n:
            raise NetworkFormatError(f"edge indices out of order or range: {entry!r}")
        if not 0.0 < w <= 1.0:
            raise NetworkFormatError(f"edge weight outside (0, 1]: {entry!r}")
        if weights[i, j] != 0.0:
            raise NetworkFormatError(f"duplicate edge ({i}, {j})")
        weights[i, j] = w
        weights[j, i] = w
    return RiskNetwork(window_id=window_id, label=label, firms=firms, weights=weights)


def write_network(net: RiskNetwork, target: str | Path | IO[str]) -> None:
    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8", newline="\n") as handle:
            write_network(net, handle)
        return
    json.dump(network_to_dict(net), target, indent=2)
    target.write("\n")


def read_network(source: str | Path | IO[str]) -> RiskNetwork:
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as handle:
            return read_network(handle)
    try:
        payload = json.load(source)
    except json.JSONDecodeError as exc:
        raise NetworkFormatError(f"invalid JSON: {exc}") from None
    return network_from_dict(payload)
