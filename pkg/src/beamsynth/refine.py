"""
Candidate compression: exact deduplication, then agglomerative clustering over
circular phase distance with medoid representatives.
"""
import logging
from dataclasses import dataclass
from typing import Iterable, Iterator, List, Optional, Sequence

import numpy as np

from beamsynth.encoding import PhaseCode, decode_phases, snap_to_grid
from beamsynth.errors import DomainError
from beamsynth.solvers.base import CandidateBatch, SolverKind

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi
DEFAULT_REFINE_M = 8

BRANCH_QUANTUM = "quantum"
BRANCH_CLASSICAL = "classical"
BRANCH_FALLBACK = "fallback"
BRANCH_ORDER = (BRANCH_QUANTUM, BRANCH_CLASSICAL, BRANCH_FALLBACK)

_SOLVER_TAGS = frozenset(kind.value for kind in SolverKind)


@dataclass(frozen=True, eq=False)
class Candidate:
    """
    One phase solution with its objective energy and origin.

    `provenance` is a solver kind name for quantum candidates, otherwise
    "classical" or "fallback". Classical and fallback candidates carry no spins.
    """

    phases: np.ndarray
    energy: float
    provenance: str
    spins: Optional[np.ndarray] = None
    amplitudes: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        phases = np.mod(np.asarray(self.phases, dtype=float), TWO_PI)
        phases[phases >= TWO_PI] = 0.0
        object.__setattr__(self, "phases", phases)
        object.__setattr__(self, "energy", float(self.energy))
        if self.spins is not None:
            object.__setattr__(self, "spins", np.asarray(self.spins, dtype=np.int8))
        if self.amplitudes is not None:
            object.__setattr__(self, "amplitudes", np.asarray(self.amplitudes, dtype=float))

    @property
    def branch(self) -> str:
        if self.provenance in _SOLVER_TAGS:
            return BRANCH_QUANTUM
        return self.provenance

    def key(self) -> bytes:
        """Identity used by dedup: the spin assignment, or the phases when spin-free."""
        if self.spins is not None:
            return b"s" + self.spins.tobytes()
        amplitudes = b"" if self.amplitudes is None else self.amplitudes.tobytes()
        return b"p" + self.phases.tobytes() + amplitudes


class CandidateSet:
    """Ordered collection of candidates."""

    def __init__(self, candidates: Iterable[Candidate] = ()):
        self.candidates: List[Candidate] = list(candidates)

    def __len__(self) -> int:
        return len(self.candidates)

    def __iter__(self) -> Iterator[Candidate]:
        return iter(self.candidates)

    def __getitem__(self, index: int) -> Candidate:
        return self.candidates[index]

    def __add__(self, other: "CandidateSet") -> "CandidateSet":
        return CandidateSet(self.candidates + other.candidates)

    @property
    def phase_matrix(self) -> np.ndarray:
        if not self.candidates:
            return np.empty((0, 0))
        return np.stack([candidate.phases for candidate in self.candidates])

    @property
    def energies(self) -> np.ndarray:
        return np.array([candidate.energy for candidate in self.candidates], dtype=float)

    @classmethod
    def from_batch(
        cls,
        batch: CandidateBatch,
        code: PhaseCode,
        n_antennas: int,
        target_bits: Optional[int] = None,
    ) -> "CandidateSet":
        """
        Decode a solver batch into phase candidates.

        Args:
            batch: Solver output
            code: Phase code the problem was built with
            n_antennas: Number of antennas
            target_bits: Grid to snap onto when it is coarser than the code's own
        """
        if len(batch) == 0:
            return cls()
        phases = decode_phases(code, batch.spins, n_antennas)
        if target_bits is not None and target_bits != code.bits:
            phases, _ = snap_to_grid(phases, target_bits)
        return cls(
            Candidate(
                phases=phases[row],
                energy=batch.energies[row],
                provenance=SolverKind(batch.provenance[row]).value,
                spins=batch.spins[row],
            )
            for row in range(len(batch))
        )

    def sorted_by_energy(self) -> "CandidateSet":
        order = np.argsort(self.energies, kind="stable")
        return CandidateSet(self.candidates[i] for i in order)


def dedup(candidates: Iterable[Candidate]) -> CandidateSet:
    """Drop repeated assignments, keeping the first occurrence of each."""
    seen = set()
    kept: List[Candidate] = []
    for candidate in candidates:
        key = candidate.key()
        if key in seen:
            continue
        seen.add(key)
        kept.append(candidate)
    return CandidateSet(kept)


def _circular_gap(alpha_i: np.ndarray, alpha_j: np.ndarray) -> np.ndarray:
    gap = np.mod(np.abs(alpha_i - alpha_j), TWO_PI)
    return np.minimum(gap, TWO_PI - gap)


def phase_distance(alpha_i, alpha_j) -> float:
    """Mean per-antenna circular distance, in [0, π]."""
    alpha_i = np.asarray(alpha_i, dtype=float)
    alpha_j = np.asarray(alpha_j, dtype=float)
    if alpha_i.shape != alpha_j.shape:
        raise DomainError(f"phase vectors differ in shape: {alpha_i.shape} vs {alpha_j.shape}")
    return float(np.mean(_circular_gap(alpha_i, alpha_j)))


def distance_matrix(phases: np.ndarray) -> np.ndarray:
    """Pairwise phase_distance over the rows of an (M, N) array."""
    phases = np.asarray(phases, dtype=float)
    count = phases.shape[0]
    distances = np.zeros((count, count))
    for row in range(count):
        distances[row] = np.mean(_circular_gap(phases[row][None, :], phases), axis=1)
    return 0.5 * (distances + distances.T)


def _merge_clusters(distances: np.ndarray, m: int) -> List[List[int]]:
    count = distances.shape[0]
    members: List[List[int]] = [[i] for i in range(count)]
    sizes = np.ones(count)
    active = np.ones(count, dtype=bool)
    # average pairwise distance between clusters
    linkage = distances.copy()
    upper = np.triu(np.ones((count, count), dtype=bool), k=1)

    for _ in range(count - m):
        # pair criterion: summed distance over |C_p| + |C_q|
        pair_sizes = sizes[:, None] + sizes[None, :]
        criterion = linkage * np.outer(sizes, sizes) / pair_sizes
        valid = upper & active[:, None] & active[None, :]
        criterion = np.where(valid, criterion, np.inf)
        p, q = np.unravel_index(int(np.argmin(criterion)), criterion.shape)

        merged = (sizes[p] * linkage[p] + sizes[q] * linkage[q]) / (sizes[p] + sizes[q])
        linkage[p, :] = merged
        linkage[:, p] = merged
        linkage[p, p] = 0.0
        sizes[p] += sizes[q]
        active[q] = False
        members[p].extend(members[q])
        members[q] = []

    return [sorted(members[i]) for i in range(count) if active[i]]


def _medoid(distances: np.ndarray, members: Sequence[int]) -> int:
    index = np.asarray(members)
    totals = distances[np.ix_(index, index)].sum(axis=1)
    return int(index[int(np.argmin(totals))])


def cluster_refine(candidates: Iterable[Candidate], m: int = DEFAULT_REFINE_M) -> CandidateSet:
    """
    Compress candidates to at most m cluster medoids, ordered by energy.

    Merging always takes the pair with the smallest summed inter-cluster
    distance divided by the combined size, breaking ties on the lowest pair
    index; medoid ties go to the lowest member index.

    Args:
        candidates: Decoded candidates
        m: Target count, at least 1

    Returns:
        min(m, |dedup(candidates)|) representatives drawn from the input

    Raises:
        DomainError: If m < 1
    """
    if m < 1:
        raise DomainError(f"refinement target m must be >= 1, got {m}")
    unique = dedup(candidates)
    if len(unique) <= m:
        return unique.sorted_by_energy()

    distances = distance_matrix(unique.phase_matrix)
    clusters = _merge_clusters(distances, m)
    representatives = CandidateSet(unique[_medoid(distances, members)] for members in clusters)
    logger.debug(f"Clustered {len(unique)} unique candidates into {len(representatives)}")
    return representatives.sorted_by_energy()
