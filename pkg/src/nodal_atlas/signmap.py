"""Sign-map image dumps of sampled eigenfunctions, for visual debugging.

``.pgm`` writes a grey-scale map (positive white, negative black, zero grey),
``.ppm`` a colour map (positive red, negative blue, zero white), and
``.png`` the colour map through matplotlib.  Row 0 of the image is the top
edge ``y = 1``.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import NodalAtlasError

POSITIVE_RGB = (200, 40, 40)
NEGATIVE_RGB = (40, 70, 200)
ZERO_RGB = (255, 255, 255)


def sign_image(values: np.ndarray, tol: float = 0.0) -> np.ndarray:
    """Signs (-1, 0, 1) oriented as an image: rows run from ``y = 1`` down."""
    s = np.where(values > tol, 1, np.where(values < -tol, -1, 0))
    return np.flipud(s.T)


def _rgb(signs):
    img = np.empty(signs.shape + (3,), dtype=np.uint8)
    img[signs > 0] = POSITIVE_RGB
    img[signs < 0] = NEGATIVE_RGB
    img[signs == 0] = ZERO_RGB
    return img


def write_signmap(values: np.ndarray, path, tol: float = 0.0) -> Path:
    path = Path(path)
    signs = sign_image(np.asarray(values, dtype=float), tol)
    h, w = signs.shape
    suffix = path.suffix.lower()
    if suffix == ".pgm":
        grey = np.where(signs > 0, 255, np.where(signs < 0, 0, 128)).astype(np.uint8)
        path.write_bytes(b"P5\n%d %d\n255\n" % (w, h) + grey.tobytes())
    elif suffix == ".ppm":
        path.write_bytes(b"P6\n%d %d\n255\n" % (w, h) + _rgb(signs).tobytes())
    elif suffix == ".png":
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        plt.imsave(path, _rgb(signs))
    else:
        raise NodalAtlasError(f"unsupported sign-map format {suffix!r}; use .pgm, .ppm or .png")
    return path


def read_pnm(path) -> np.ndarray:
    """Pixels of a binary PGM (``h x w``) or PPM (``h x w x 3``) written by :func:`write_signmap`."""
    data = Path(path).read_bytes()
    magic, dims, maxval, body = data.split(b"\n", 3)
    w, h = (int(t) for t in dims.split())
    px = np.frombuffer(body, dtype=np.uint8)
    return px.reshape(h, w) if magic == b"P5" else px.reshape(h, w, 3)
