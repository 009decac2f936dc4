"""
Per-layer PCA fitting for the PCA + concatenation interface.
"""

import numpy as np

from dataclasses import dataclass
from typing import Dict, Iterable

from interfaces.spec import InterfaceKind, InterfaceSpec
from interfaces.stack import LayerStack
from numerics.linalg import sym_eig
from numerics.tensor import Tensor
from utils.errors import ConfigurationError, DataError, DimensionError
from utils.logging_config import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class PcaFit:
    """Fitted means (L, D), bases (L, D, k) and full spectra (L, D)."""
    means: Tensor
    bases: Tensor
    eigenvalues: Tensor
    num_frames: int

    def buffers(self) -> Dict[str, Tensor]:
        return {"pca_mean": self.means, "pca_basis": self.bases}

    def discarded_mass(self) -> Tensor:
        """Per-layer sum of eigenvalues not kept in the basis."""
        k = self.bases.shape[2]
        return self.eigenvalues[:, k:].sum(axis=1)


def fit_pca(frames: Iterable[LayerStack], spec: InterfaceSpec, num_layers: int, dim: int) -> PcaFit:
    """
    Fit per-layer means and top-k principal axes over a stream of stacks.

    Statistics are merged stack by stack in stream order (single pass);
    the covariance uses the population denominator N.

    Raises:
        ConfigurationError: If ``spec`` is not a PCA interface
        DimensionError: If a stack does not match (L, D)
        DataError: If fewer than k + 1 frames were seen
    """
    if spec.kind is not InterfaceKind.PCA_CONCAT:
        raise ConfigurationError(f"fit_pca needs a {InterfaceKind.PCA_CONCAT.value} spec, got {spec.kind.value}")
    spec = spec.resolve(num_layers, dim)
    k = spec.pca_k

    count = 0
    mean = np.zeros((num_layers, dim))
    scatter = np.zeros((num_layers, dim, dim))
    for stack in frames:
        if (stack.num_layers, stack.dim) != (num_layers, dim):
            raise DimensionError(
                f"Stack dims {(stack.num_layers, stack.dim)} do not match bound {(num_layers, dim)}"
            )
        x = stack.values
        n_batch = x.shape[1]
        batch_mean = x.mean(axis=1)
        centered = x - batch_mean[:, None, :]
        batch_scatter = np.einsum("ltd,lte->lde", centered, centered)
        total = count + n_batch
        delta = batch_mean - mean
        mean = mean + delta * (n_batch / total)
        scatter = scatter + batch_scatter + np.einsum("ld,le->lde", delta, delta) * (count * n_batch / total)
        count = total

    if count < k + 1:
        raise DataError(f"PCA with k={k} needs at least {k + 1} frames, got {count}")

    covariance = scatter / count
    bases = np.empty((num_layers, dim, k))
    spectra = np.empty((num_layers, dim))
    for layer in range(num_layers):
        eigenvalues, eigenvectors = sym_eig(covariance[layer])
        spectra[layer] = eigenvalues
        bases[layer] = eigenvectors[:, :k]
        if eigenvalues[k - 1] <= 1e-12 * max(1.0, eigenvalues[0]):
            logger.warning(f"Layer {layer}: component {k} has no variance, the kept basis is partly arbitrary")
    logger.info(f"Fitted PCA on {count} frames: {num_layers} layers x {k} components")
    return PcaFit(means=mean, bases=bases, eigenvalues=spectra, num_frames=count)
