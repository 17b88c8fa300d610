import numpy as np
import pytest

pytest.importorskip("matplotlib")
from matplotlib import pyplot as plt

from thz_absorption.plotting import create_line_plot, save_svg


def make_figure():
    x = np.linspace(0.1, 2.0, 50)
    return create_line_plot(
        x,
        [("0 km", 100 * x**2), ("10 km", np.where(x > 1, x, 0.0))],
        xlabel="Frequency [THz]",
        ylabel="Absorption coefficient [dB/km]",
        title="Example",
        log_y=True,
    )


def test_create_line_plot_labels_and_series():
    fig = make_figure()
    ax = fig.axes[0]
    assert ax.get_xlabel() == "Frequency [THz]"
    assert ax.get_yscale() == "log"
    assert [line.get_label() for line in ax.lines] == ["0 km", "10 km"]
    plt.close(fig)


def test_create_line_plot_requires_series():
    with pytest.raises(ValueError):
        create_line_plot(np.arange(3), [], xlabel="x", ylabel="y")


def test_save_svg_is_reproducible(tmp_path):
    first = save_svg(make_figure(), tmp_path / "first.svg")
    second = save_svg(make_figure(), tmp_path / "second.svg")
    assert first.read_bytes() == second.read_bytes()
    assert b"<svg" in first.read_bytes()
