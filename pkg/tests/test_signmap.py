import numpy as np
import pytest

from nodal_atlas.errors import NodalAtlasError
from nodal_atlas.nodal import sample_grid
from nodal_atlas.signmap import read_pnm, sign_image, write_signmap
from nodal_atlas.spectra import square_product


class TestSignMap:
    def test_orientation(self):
        v = np.array([[1.0, -1.0], [0.0, 2.0]])  # v[i, j] at (x_i, y_j)
        img = sign_image(v)
        # top row is y = y_1, left column is x = x_0
        assert img.tolist() == [[-1, 1], [1, 0]]

    def test_pgm_roundtrip(self, tmp_path):
        g = sample_grid(square_product(2, 1), 33)
        path = write_signmap(g.values, tmp_path / "s.pgm")
        px = read_pnm(path)
        assert px.shape == (33, 33)
        assert set(np.unique(px)) <= {0, 128, 255}
        assert px[16, 8] == 255 and px[16, 24] == 0

    def test_ppm_and_png(self, tmp_path):
        g = sample_grid(square_product(1, 1), 17)
        assert read_pnm(write_signmap(g.values, tmp_path / "s.ppm")).shape == (17, 17, 3)
        assert (tmp_path / "s.png").exists() is False
        write_signmap(g.values, tmp_path / "s.png")
        assert (tmp_path / "s.png").read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"

    def test_unknown_format(self, tmp_path):
        with pytest.raises(NodalAtlasError):
            write_signmap(np.zeros((2, 2)), tmp_path / "s.bmp")
