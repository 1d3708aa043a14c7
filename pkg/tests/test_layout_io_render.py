import pytest

from farm.farm_domain import make_square_grid
from utils.layout_io import read_layout_csv, write_layout_csv
from utils.render import render_layout


class TestLayoutCsv:
    def test_write_and_read(self, tmp_path):
        grid = make_square_grid(2000.0, 10)
        path = write_layout_csv(tmp_path / "layout.csv", [11, 0], grid)
        lines = path.read_text().splitlines()
        assert lines[0] == "cell_index,x_m,y_m"
        assert lines[1] == "0,100.0,100.0"
        assert read_layout_csv(path) == [0, 11]

    def test_repeated_cell(self, tmp_path):
        path = tmp_path / "layout.csv"
        path.write_text("cell_index,x_m,y_m\n1,0,0\n1,0,0\n")
        with pytest.raises(ValueError):
            read_layout_csv(path)

    def test_missing_column(self, tmp_path):
        path = tmp_path / "layout.csv"
        path.write_text("x_m,y_m\n0,0\n")
        with pytest.raises(ValueError):
            read_layout_csv(path)


class TestRender:
    def test_svg_is_written_and_stable(self, tmp_path):
        grid = make_square_grid(2000.0, 5)
        a = render_layout(grid, [0, 6, 12], tmp_path / "a.svg", wind_direction=0.0)
        b = render_layout(grid, [12, 6, 0], tmp_path / "b.svg", wind_direction=0.0)
        text = a.read_text()
        assert text.lstrip().startswith("<?xml")
        assert "<svg" in text
        assert a.read_bytes() == b.read_bytes()

    def test_without_wind(self, tmp_path):
        path = render_layout(make_square_grid(2000.0, 2), [], tmp_path / "empty.svg")
        assert path.exists()

    def test_cell_out_of_range(self, tmp_path):
        with pytest.raises(ValueError):
            render_layout(make_square_grid(2000.0, 2), [4], tmp_path / "bad.svg")
