import pytest

from bfdr_figures import (
    EmptyInputError,
    FigureSpec,
    SchemaMismatchError,
    build_figure,
    load_rows,
    render,
)
from bfdr_figures.render import color_for

CURVE_CSV = """procedure,q,bfdr_hat,se
SL,0.1,0.05,0.002
SL,0.2,0.11,0.003
TSSL(q),0.1,0.09,0.003
TSSL(q),0.2,0.17,0.004
"""

BOXPLOT_CSV = """procedure,rho,q,bfdr_hat,se,pi0_q25,pi0_median,pi0_q75,pi0_mean
Storey(1/2),0,0.2,0.19,0.004,0.7,0.78,0.85,0.78
Storey(1/2),0.5,0.2,0.3,0.005,0.5,0.75,0.95,0.74
Storey(q),0,0.2,0.18,0.004,0.7,0.79,0.86,0.79
Storey(q),0.5,0.2,0.2,0.004,0.6,0.77,0.9,0.76
"""

HEATMAP_CSV = """procedure,pi0,m,q,power,relative_power,bfdr_hat,se
SL,0.25,16,0.2,0.6,0.83,0.05,0.002
SL,0.5,16,0.2,0.55,0.86,0.08,0.003
Oracle,0.25,16,0.2,0.72,1.0,0.2,0.004
Oracle,0.5,16,0.2,0.64,1.0,0.2,0.004
"""

CALIBRATION_CSV = """t,alpha,alpha_pi0
0.05,0.2893,0.2893
0.1,0.3854,0.3854
0.2,0.4668,0.4668
"""


def write(tmp_path, text, name="in.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestSchema:
    def test_loads_with_expected_columns(self, tmp_path):
        rows = load_rows(write(tmp_path, CURVE_CSV), "curve")
        assert len(rows) == 4
        assert rows[0]["bfdr_hat"] == 0.05

    def test_missing_column_lists_names(self, tmp_path):
        path = write(tmp_path, "procedure,q,se\nSL,0.1,0.01\n")
        with pytest.raises(SchemaMismatchError, match="bfdr_hat"):
            load_rows(path, "curve")

    def test_empty_csv(self, tmp_path):
        with pytest.raises(EmptyInputError):
            load_rows(write(tmp_path, "procedure,q,bfdr_hat,se\n"), "curve")
        with pytest.raises(EmptyInputError):
            load_rows(write(tmp_path, ""), "curve")

    def test_missing_file(self, tmp_path):
        with pytest.raises(EmptyInputError):
            load_rows(tmp_path / "ghost.csv", "curve")

    def test_unknown_kind(self, tmp_path):
        with pytest.raises(SchemaMismatchError):
            load_rows(write(tmp_path, CURVE_CSV), "sparkline")
        with pytest.raises(SchemaMismatchError):
            FigureSpec("sparkline", "in.csv", "out.svg")


def legend_labels(ax):
    return ax.get_legend_handles_labels()[1]


class TestBuilders:
    def test_curve_one_series_per_procedure_plus_references(self, tmp_path):
        spec = FigureSpec("curve", write(tmp_path, CURVE_CSV), tmp_path / "out.svg")
        fig = build_figure(spec)
        labels = legend_labels(fig.axes[0])
        assert "SL" in labels and "TSSL(q)" in labels
        assert "bFDR = q" in labels and "q/(1-q)" in labels

    def test_curve_reference_lines_can_be_disabled(self, tmp_path):
        spec = FigureSpec(
            "curve", write(tmp_path, CURVE_CSV), tmp_path / "out.svg",
            style={"reference_lines": False},
        )
        assert "bFDR = q" not in legend_labels(build_figure(spec).axes[0])

    def test_boxplot_panels(self, tmp_path):
        spec = FigureSpec("boxplot", write(tmp_path, BOXPLOT_CSV), tmp_path / "out.png")
        fig = build_figure(spec)
        assert len(fig.axes) == 2
        labels = legend_labels(fig.axes[0])
        assert "Storey(1/2)" in labels and "Storey(q)" in labels
        assert "q" in labels and "q/(1-q)" in labels

    def test_heatmap_annotates_values(self, tmp_path):
        spec = FigureSpec("heatmap", write(tmp_path, HEATMAP_CSV), tmp_path / "out.png")
        fig = build_figure(spec)
        texts = [t.get_text() for t in fig.axes[0].texts]
        assert "0.83" in texts and "1.00" in texts

    def test_calibration_curves_and_cutoffs(self, tmp_path):
        spec = FigureSpec(
            "calibration", write(tmp_path, CALIBRATION_CSV), tmp_path / "out.svg",
            style={"cutoffs": [0.1, 0.2]},
        )
        fig = build_figure(spec)
        ax = fig.axes[0]
        labels = [line.get_label() for line in ax.get_lines()]
        assert "alpha(t)" in labels and "alpha_pi0(t)" in labels
        verticals = [line for line in ax.get_lines() if line.get_xdata()[0] in (0.1, 0.2)]
        assert len(verticals) >= 2


class TestRender:
    @pytest.mark.parametrize(
        "kind,text",
        [
            ("curve", CURVE_CSV),
            ("boxplot", BOXPLOT_CSV),
            ("heatmap", HEATMAP_CSV),
            ("calibration", CALIBRATION_CSV),
        ],
    )
    def test_writes_image(self, tmp_path, kind, text):
        out = render(FigureSpec(kind, write(tmp_path, text), tmp_path / f"{kind}.png"))
        assert out.exists() and out.stat().st_size > 0

    def test_default_extension_by_kind(self, tmp_path):
        out = render(FigureSpec("curve", write(tmp_path, CURVE_CSV), tmp_path / "fig"))
        assert out.suffix == ".svg"
        out = render(
            FigureSpec("heatmap", write(tmp_path, HEATMAP_CSV), tmp_path / "fig2")
        )
        assert out.suffix == ".png"

    def test_deterministic_output(self, tmp_path):
        path = write(tmp_path, CURVE_CSV)
        a = render(FigureSpec("curve", path, tmp_path / "a.svg")).read_bytes()
        b = render(FigureSpec("curve", path, tmp_path / "b.svg")).read_bytes()
        assert a == b


def test_color_map_is_shared_and_deterministic():
    assert color_for("SL") == color_for("SL")
    assert color_for("SomeNewProcedure") == color_for("SomeNewProcedure")
    assert color_for("SL") != color_for("Oracle")
