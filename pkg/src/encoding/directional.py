"""Parameter-free directional encodings: real spherical harmonics and one-blob."""

import numpy as np

SH_COEFFICIENTS = 16
ONE_BLOB_BINS = 32
ONE_BLOB_SIGMA = 1.0 / ONE_BLOB_BINS

_BIN_CENTERS = (np.arange(ONE_BLOB_BINS) + 0.5) / ONE_BLOB_BINS


def encode_direction(directions: np.ndarray) -> np.ndarray:
    """
    Real spherical harmonics of bands 0 to 3 (16 coefficients) per direction.

    Coefficients are ordered by band and, within a band, by m from -l to l, with
    the Condon-Shortley phase included.

    Arguments:
        directions (np.ndarray): (N, 3) or (3,) unit vectors.

    Returns:
        np.ndarray: (N, 16) coefficients.
    """
    d = np.asarray(directions, dtype=np.float64).reshape(-1, 3)
    x, y, z = d[:, 0], d[:, 1], d[:, 2]
    xx, yy, zz = x * x, y * y, z * z
    xy, yz, xz = x * y, y * z, x * z
    out = np.empty((len(d), SH_COEFFICIENTS))
    out[:, 0] = 0.28209479177387814
    out[:, 1] = -0.48860251190291987 * y
    out[:, 2] = 0.48860251190291987 * z
    out[:, 3] = -0.48860251190291987 * x
    out[:, 4] = 1.0925484305920792 * xy
    out[:, 5] = -1.0925484305920792 * yz
    out[:, 6] = 0.94617469575755997 * zz - 0.31539156525251999
    out[:, 7] = -1.0925484305920792 * xz
    out[:, 8] = 0.54627421529603959 * (xx - yy)
    out[:, 9] = 0.59004358992664352 * y * (yy - 3.0 * xx)
    out[:, 10] = 2.8906114426405538 * xy * z
    out[:, 11] = 0.45704579946446572 * y * (1.0 - 5.0 * zz)
    out[:, 12] = 0.3731763325901154 * z * (5.0 * zz - 3.0)
    out[:, 13] = 0.45704579946446572 * x * (1.0 - 5.0 * zz)
    out[:, 14] = 1.4453057213202769 * z * (xx - yy)
    out[:, 15] = 0.59004358992664352 * x * (3.0 * yy - xx)
    return out


def one_blob(values: np.ndarray) -> np.ndarray:
    """Gaussian kernel (σ = 1/32) of scalars in [0, 1] evaluated at 32 bin centres, (N, 32)."""
    t = np.asarray(values, dtype=np.float64).reshape(-1, 1)
    return np.exp(-0.5 * ((t - _BIN_CENTERS[None, :]) / ONE_BLOB_SIGMA) ** 2)


def encode_normal(normals: np.ndarray) -> np.ndarray:
    """
    One-blob encoding of each normal component after mapping [-1, 1] to [0, 1].

    Returns:
        np.ndarray: (N, 96) activations, 32 per component in x, y, z order.
    """
    n = np.asarray(normals, dtype=np.float64).reshape(-1, 3)
    t = 0.5 * (n + 1.0)
    return one_blob(t.reshape(-1)).reshape(len(n), 3 * ONE_BLOB_BINS)
