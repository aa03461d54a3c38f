"""
Numeric containers for the density-matrix oracle.

These types wrap dense numpy arrays. They are frozen: the arrays are
copied on construction and marked read-only, so every operation in
app.services.quantum_core returns a new object.

Qubit ordering is big-endian: qubit 0 is the most significant bit of
the basis index, so |q0 q1 ... q(n-1)>.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Tuple

import numpy as np

from app.config import settings
from common.utils.exceptions import (
    InvalidOperatorError,
    ParameterRangeError,
    ResourceCapError,
)


def _qubits_for_dim(dim: int) -> int:
    num_qubits = dim.bit_length() - 1
    if dim < 2 or (1 << num_qubits) != dim:
        raise ParameterRangeError(
            f"Matrix side {dim} is not a power of two",
            details={"dim": dim},
        )
    return num_qubits


def _frozen(array: np.ndarray) -> np.ndarray:
    copy = np.array(array, dtype=np.complex128, copy=True)
    copy.flags.writeable = False
    return copy


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """
    Dense density operator on 1..MAX_QUBITS qubits.

    `normalized` is False only for post-measurement branches whose
    probability fell below the renormalization floor.
    """

    entries: np.ndarray
    normalized: bool = True
    num_qubits: int = field(init=False)

    def __post_init__(self) -> None:
        entries = np.asarray(self.entries)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ParameterRangeError(
                "Density matrix must be square",
                details={"shape": list(entries.shape)},
            )
        num_qubits = _qubits_for_dim(entries.shape[0])
        if num_qubits > settings.MAX_QUBITS:
            raise ResourceCapError(
                f"{num_qubits} qubits exceed the cap of {settings.MAX_QUBITS}",
                details={"num_qubits": num_qubits, "cap": settings.MAX_QUBITS},
            )
        object.__setattr__(self, "entries", _frozen(entries))
        object.__setattr__(self, "num_qubits", num_qubits)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def trace(self) -> float:
        return float(np.real(np.trace(self.entries)))

    def eigenvalues(self) -> np.ndarray:
        """Ascending real eigenvalues of the Hermitian part."""
        hermitian = (self.entries + self.entries.conj().T) / 2
        return np.linalg.eigvalsh(hermitian)

    def validate(self) -> None:
        """
        Check Hermiticity, trace and positivity.

        Raises:
            ParameterRangeError: If any invariant is violated
        """
        deviation = float(np.max(np.abs(self.entries - self.entries.conj().T)))
        if deviation > settings.HERMITIAN_TOL:
            raise ParameterRangeError(
                "Density matrix is not Hermitian",
                details={"max_deviation": deviation},
            )
        if self.normalized and abs(self.trace() - 1.0) > settings.TRACE_TOL:
            raise ParameterRangeError(
                "Density matrix trace differs from 1",
                details={"trace": self.trace()},
            )
        smallest = float(self.eigenvalues()[0])
        if smallest < -settings.PSD_TOL:
            raise ParameterRangeError(
                "Density matrix is not positive semidefinite",
                details={"min_eigenvalue": smallest},
            )


@dataclass(frozen=True, eq=False)
class KetState:
    """Normalized pure state vector."""

    amplitudes: np.ndarray
    num_qubits: int = field(init=False)

    def __post_init__(self) -> None:
        amplitudes = np.asarray(self.amplitudes).reshape(-1)
        num_qubits = _qubits_for_dim(amplitudes.shape[0])
        if num_qubits > settings.MAX_QUBITS:
            raise ResourceCapError(
                f"{num_qubits} qubits exceed the cap of {settings.MAX_QUBITS}",
                details={"num_qubits": num_qubits, "cap": settings.MAX_QUBITS},
            )
        norm = float(np.linalg.norm(amplitudes))
        if abs(norm - 1.0) > settings.TRACE_TOL:
            raise ParameterRangeError(
                "Ket is not normalized",
                details={"norm": norm},
            )
        object.__setattr__(self, "amplitudes", _frozen(amplitudes))
        object.__setattr__(self, "num_qubits", num_qubits)


@dataclass(frozen=True, eq=False)
class PovmElementSet:
    """
    Labelled POVM on a fixed number of qubits.

    Elements must be positive semidefinite and sum to the identity.
    """

    elements: Tuple[np.ndarray, ...]
    labels: Tuple[str, ...]
    num_qubits: int = field(init=False)

    def __post_init__(self) -> None:
        elements = tuple(_frozen(element) for element in self.elements)
        labels = tuple(str(label) for label in self.labels)
        if not elements:
            raise InvalidOperatorError("POVM has no elements")
        if len(elements) != len(labels):
            raise InvalidOperatorError(
                "POVM needs one label per element",
                details={"elements": len(elements), "labels": len(labels)},
            )
        if len(set(labels)) != len(labels):
            raise InvalidOperatorError("POVM labels must be unique")

        dim = elements[0].shape[0]
        num_qubits = _qubits_for_dim(dim)
        total = np.zeros((dim, dim), dtype=np.complex128)
        for label, element in zip(labels, elements):
            if element.shape != (dim, dim):
                raise InvalidOperatorError(
                    f"POVM element {label} has shape {element.shape}",
                    details={"expected": [dim, dim]},
                )
            hermitian = (element + element.conj().T) / 2
            if float(np.max(np.abs(element - hermitian))) > settings.POVM_TOL:
                raise InvalidOperatorError(f"POVM element {label} is not Hermitian")
            if float(np.linalg.eigvalsh(hermitian)[0]) < -settings.POVM_TOL:
                raise InvalidOperatorError(
                    f"POVM element {label} is not positive semidefinite"
                )
            total += element

        deviation = float(np.max(np.abs(total - np.eye(dim))))
        if deviation > settings.POVM_TOL:
            raise InvalidOperatorError(
                "POVM elements do not sum to the identity",
                details={"max_deviation": deviation},
            )

        object.__setattr__(self, "elements", elements)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "num_qubits", num_qubits)

    def __len__(self) -> int:
        return len(self.elements)

    def element(self, label: str) -> np.ndarray:
        return self.elements[self.labels.index(label)]


@dataclass(frozen=True, eq=False)
class PovmOutcome:
    """One measurement branch: label, probability and post-state."""

    label: str
    probability: float
    state: DensityMatrix


class RangeClass(str, Enum):
    """How many product states lie in the range of a two-qubit state."""

    INFINITELY_MANY = "InfinitelyManyProductStates"
    TWO = "TwoProductStates"
    ONE = "OneProductState"
    PURE = "PureState"
    RANK_ABOVE_TWO = "RankAboveTwo"
