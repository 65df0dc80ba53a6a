import numpy as np
import pytest

from speckleplots.render import (
    InputError,
    read_csv,
    render,
    render_speckle_overlay,
    render_squeezing_stack,
    render_variance_vs_dim,
)


def write_trace(path, times, p0, stream=0):
    lines = ["time,p_0,p_1,re_rho_0_1,im_rho_0_1,stream"]
    for t, p in zip(times, p0):
        lines.append(f"{t:.17g},{p:.17g},{1 - p:.17g},0,0,{stream}")
    path.write_text("\n".join(lines) + "\n")
    return path


def write_scaling(path, dims, var, bound, with_measured=True):
    header = "dim_e,t,sigma_rho_sq,variance_bound,speckle_std_p0,n"
    if not with_measured:
        header = "dim_e,t,variance_bound,speckle_std_p0,n"
    lines = [header]
    for k, d in enumerate(dims):
        if with_measured:
            lines.append(f"{d},5,{var[k]:.6g},{bound[k]:.6g},0.01,50")
        else:
            lines.append(f"{d},5,{bound[k]:.6g},0.01,50")
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture
def traces(tmp_path):
    times = np.linspace(0.0, 10.0, 21)
    rng = np.random.default_rng(0)
    return [
        write_trace(tmp_path / f"speckle_dim{dim}_r0.csv", times,
                    0.6 + 0.05 * rng.standard_normal(times.size))
        for dim in (50, 100, 200, 400)
    ]


class TestReadCsv:
    def test_roundtrip(self, tmp_path):
        path = write_trace(tmp_path / "t.csv", [0.0, 1.0], [0.0, 0.5])
        table = read_csv(path)
        assert list(table) == ["time", "p_0", "p_1", "re_rho_0_1", "im_rho_0_1", "stream"]
        assert np.allclose(table["p_0"], [0.0, 0.5])

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputError, match="not found"):
            read_csv(tmp_path / "nothing.csv")


class TestSpeckleOverlay:
    def test_renders_with_theory_line(self, tmp_path, traces):
        out = render_speckle_overlay(traces[:2], tmp_path / "fig.svg", theory_line=0.683)
        svg = out.read_text()
        assert "stroke-dasharray" in svg  # the dashed prediction line
        assert "speckle_dim50_r0" in svg and "speckle_dim100_r0" in svg

    def test_empty_inputs_rejected(self, tmp_path):
        with pytest.raises(InputError, match="no input"):
            render_speckle_overlay([], tmp_path / "fig.svg")

    def test_missing_column_named(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("time,q\n0,1\n")
        with pytest.raises(InputError, match="p_0"):
            render_speckle_overlay([bad], tmp_path / "fig.svg")

    def test_mismatched_time_grids_rejected(self, tmp_path):
        a = write_trace(tmp_path / "a.csv", [0.0, 1.0], [0.1, 0.2])
        b = write_trace(tmp_path / "b.csv", [0.0, 2.0], [0.1, 0.2])
        with pytest.raises(InputError, match="time grid"):
            render_speckle_overlay([a, b], tmp_path / "fig.svg")

    def test_deterministic_bytes_and_inputs_untouched(self, tmp_path, traces):
        before = [p.read_bytes() for p in traces[:2]]
        one = render_speckle_overlay(traces[:2], tmp_path / "one.svg", theory_line=0.683)
        two = render_speckle_overlay(traces[:2], tmp_path / "two.svg", theory_line=0.683)
        assert one.read_bytes() == two.read_bytes()
        assert [p.read_bytes() for p in traces[:2]] == before


class TestSqueezingStack:
    def test_renders_all_traces(self, tmp_path, traces):
        out = render_squeezing_stack(traces, tmp_path / "stack.svg", shift=0.1)
        svg = out.read_text()
        for dim in (50, 100, 200, 400):
            assert f"speckle_dim{dim}_r0" in svg

    def test_unknown_kind(self, tmp_path, traces):
        with pytest.raises(InputError, match="kind"):
            render("volcano", traces, tmp_path / "x.svg")


class TestVarianceVsDim:
    def test_renders(self, tmp_path):
        path = write_scaling(
            tmp_path / "scaling.csv", [50, 100, 200], [3e-3, 1.5e-3, 8e-4],
            [8e-2, 4e-2, 2e-2],
        )
        out = render_variance_vs_dim([path], tmp_path / "var.svg")
        assert "1/dim guide" in out.read_text()

    def test_needs_two_dims(self, tmp_path):
        path = write_scaling(tmp_path / "one.csv", [50], [1e-3], [1e-2])
        with pytest.raises(InputError, match="2 distinct"):
            render_variance_vs_dim([path], tmp_path / "var.svg")

    def test_repeated_dims_rejected(self, tmp_path):
        a = write_scaling(tmp_path / "a.csv", [50, 100], [1e-3, 5e-4], [1e-2, 5e-3])
        b = write_scaling(tmp_path / "b.csv", [100, 200], [5e-4, 2e-4], [5e-3, 2e-3])
        with pytest.raises(InputError, match="repeated"):
            render_variance_vs_dim([a, b], tmp_path / "var.svg")

    def test_bound_only_with_warning(self, tmp_path):
        path = write_scaling(
            tmp_path / "b.csv", [50, 100], None, [8e-2, 4e-2], with_measured=False
        )
        with pytest.warns(UserWarning, match="bound-only"):
            out = render_variance_vs_dim([path], tmp_path / "var.svg")
        assert out.exists()
