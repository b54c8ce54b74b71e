import json

import numpy as np
import pytest

from salfuse import (
    Image,
    NoPairsError,
    ParameterError,
    ShapeMismatchError,
    average_summary,
    edge_energy,
    flow_summary,
    gaussian_blur,
    horn_schunck,
    run_benchmark,
    temporal_average,
)
from salfuse import bench as bench_mod
from salfuse.bench import FlowField, luma

from helpers import (
    SHIFT_MEAN_ABS_V,
    SHIFT_MEAN_U,
    ListStream,
    random_image,
    shifted_blob_pair,
)


class TestLuma:
    def test_grayscale_passthrough(self):
        rng = np.random.default_rng(50)
        img = random_image(rng, 1, 5, 5)
        np.testing.assert_array_equal(luma(img), img.data[0])

    def test_bt601_weights(self):
        rng = np.random.default_rng(51)
        img = random_image(rng, 3, 6, 6)
        expected = 0.299 * img.data[0] + 0.587 * img.data[1] + 0.114 * img.data[2]
        np.testing.assert_array_equal(luma(img), expected)


class TestHornSchunck:
    def test_identical_frames_exactly_zero(self):
        rng = np.random.default_rng(52)
        frame = rng.random((16, 16)) * 255.0
        flow = horn_schunck(frame, frame.copy())
        np.testing.assert_array_equal(flow.u, np.zeros((16, 16)))
        np.testing.assert_array_equal(flow.v, np.zeros((16, 16)))

    def test_constant_frames_zero(self):
        a = np.full((8, 8), 120.0)
        b = np.full((8, 8), 120.0)
        flow = horn_schunck(a, b, alpha=1.0, iters=10)
        np.testing.assert_array_equal(flow.u, np.zeros((8, 8)))
        np.testing.assert_array_equal(flow.v, np.zeros((8, 8)))

    def test_one_pixel_shift_regression(self):
        blob, moved, support = shifted_blob_pair()
        flow = horn_schunck(blob, moved, alpha=1.0, iters=100)
        mean_u = float(flow.u[support].mean())
        mean_abs_v = float(np.abs(flow.v[support]).mean())
        assert abs(mean_u - SHIFT_MEAN_U) < 1e-9
        assert abs(mean_abs_v - SHIFT_MEAN_ABS_V) < 1e-9
        # sanity band for the synthetic-shift recovery
        assert 0.5 <= mean_u <= 1.2
        assert mean_abs_v < 0.2

    def test_deterministic(self):
        blob, moved, _ = shifted_blob_pair()
        a = horn_schunck(blob, moved, alpha=2.0, iters=25)
        b = horn_schunck(blob, moved, alpha=2.0, iters=25)
        np.testing.assert_array_equal(a.u, b.u)
        np.testing.assert_array_equal(a.v, b.v)

    def test_output_finite_and_shaped(self):
        rng = np.random.default_rng(53)
        f1 = rng.random((9, 13)) * 255
        f2 = rng.random((9, 13)) * 255
        flow = horn_schunck(f1, f2, iters=5)
        assert flow.u.shape == (9, 13) and flow.v.shape == (9, 13)
        assert np.isfinite(flow.u).all() and np.isfinite(flow.v).all()

    def test_parameter_validation(self):
        frame = np.zeros((4, 4))
        with pytest.raises(ParameterError):
            horn_schunck(frame, frame, alpha=0.0)
        with pytest.raises(ParameterError):
            horn_schunck(frame, frame, iters=0)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            horn_schunck(np.zeros((4, 4)), np.zeros((4, 5)))


class TestAverageSummary:
    def test_equals_temporal_average_bitwise(self):
        rng = np.random.default_rng(54)
        stream = ListStream([random_image(rng, 3, 6, 6) for _ in range(5)])
        np.testing.assert_array_equal(
            average_summary(stream).data, temporal_average(stream).data
        )

    def test_two_frame_midpoint(self):
        frames = [Image(np.zeros((1, 2, 2))), Image(np.ones((1, 2, 2)))]
        np.testing.assert_array_equal(
            average_summary(ListStream(frames)).data, np.full((1, 2, 2), 0.5)
        )


class TestFlowSummary:
    def test_returns_average_bitwise(self):
        rng = np.random.default_rng(55)
        frames = [random_image(rng, 3, 8, 8) for _ in range(4)]
        stream = ListStream(frames)
        out = flow_summary(stream, iters=2)
        np.testing.assert_array_equal(out.data, temporal_average(stream).data)

    @pytest.mark.parametrize("n_frames,expected_calls", [(2, 1), (5, 4)])
    def test_invocation_count(self, monkeypatch, n_frames, expected_calls):
        rng = np.random.default_rng(56)
        frames = [random_image(rng, 1, 4, 4) for _ in range(n_frames)]
        calls = []

        def counting_stub(f1, f2, alpha=1.0, iters=100):
            calls.append(1)
            return FlowField(u=np.zeros_like(f1), v=np.zeros_like(f1))

        monkeypatch.setattr(bench_mod, "horn_schunck", counting_stub)
        flow_summary(ListStream(frames))
        assert len(calls) == expected_calls

    def test_single_frame_raises(self):
        with pytest.raises(NoPairsError):
            flow_summary(ListStream([Image(np.zeros((1, 4, 4)))]))

    def test_empty_stream_raises(self):
        with pytest.raises(NoPairsError):
            flow_summary(ListStream([]))


class TestRunBenchmark:
    def make_stream(self, n=4, size=8):
        rng = np.random.default_rng(57)
        return ListStream([random_image(rng, 1, size, size) for _ in range(n)])

    def test_report_fields(self):
        reports = run_benchmark(self.make_stream(), ["average"], repeats=2, flow_iters=2)
        report = reports[0]
        assert report.method == "average"
        assert report.frames == 4
        assert (report.width, report.height) == (8, 8)
        assert report.wall_seconds >= 0.0
        assert report.per_frame_ms == 1000.0 * report.wall_seconds / report.frames
        assert report.threads == 1
        assert report.repeats == 2

    def test_json_line_schema(self):
        reports = run_benchmark(self.make_stream(), ["optical_flow"], repeats=1, flow_iters=2)
        record = json.loads(reports[0].to_json_line())
        required = {
            "method",
            "frames",
            "width",
            "height",
            "wall_seconds",
            "per_frame_ms",
            "threads",
            "repeats",
        }
        assert required <= set(record)

    def test_wall_seconds_is_min_of_repeats(self, monkeypatch):
        # Scripted clock: three timed runs lasting 10, 5 and 3 units.
        ticks = iter([0.0, 10.0, 100.0, 105.0, 200.0, 203.0])
        monkeypatch.setattr(bench_mod, "_clock", lambda: next(ticks))
        reports = run_benchmark(self.make_stream(), ["average"], repeats=3)
        assert reports[0].wall_seconds == 3.0

    def test_unknown_method(self):
        with pytest.raises(ParameterError):
            run_benchmark(self.make_stream(), ["tss"], repeats=1)

    def test_bad_repeats_and_threads(self):
        with pytest.raises(ParameterError):
            run_benchmark(self.make_stream(), ["average"], repeats=0)
        with pytest.raises(ParameterError):
            run_benchmark(self.make_stream(), ["average"], repeats=1, threads=0)

    def test_methods_run_in_requested_order(self):
        reports = run_benchmark(
            self.make_stream(), ["optical_flow", "average"], repeats=1, flow_iters=2
        )
        assert [r.method for r in reports] == ["optical_flow", "average"]

    def test_threads_recorded_per_method(self):
        reports = run_benchmark(
            self.make_stream(),
            ["average", "optical_flow"],
            repeats=1,
            flow_iters=2,
            threads=4,
        )
        by_method = {r.method: r.threads for r in reports}
        assert by_method == {"average": 1, "optical_flow": 4}

    def test_workload_monotonicity(self):
        # Doubling the frame count must not shrink wall time (10% slack
        # on the min-of-repeats statistic).
        rng = np.random.default_rng(58)
        frames = [random_image(rng, 1, 64, 64) for _ in range(16)]
        small = ListStream(frames[:8])
        large = ListStream(frames)
        results = {}
        for name, stream in (("small", small), ("large", large)):
            reports = run_benchmark(
                stream, ["average", "optical_flow"], repeats=5, flow_iters=30
            )
            results[name] = {r.method: r.wall_seconds for r in reports}
        for method in ("average", "optical_flow"):
            assert results["large"][method] >= 0.9 * results["small"][method]

    def test_empty_stream(self):
        from salfuse import NoFramesError

        with pytest.raises(NoFramesError):
            run_benchmark(ListStream([]), ["average"], repeats=1)


class TestEdgeEnergy:
    def test_blur_reduces_energy(self):
        rng = np.random.default_rng(59)
        sharp = random_image(rng, 1, 32, 32)
        soft = gaussian_blur(sharp, sigma=2.0)
        assert edge_energy(soft) < edge_energy(sharp)

    def test_impulse_value(self):
        plane = np.zeros((1, 7, 7))
        plane[0, 3, 3] = 1.0
        # |-4| at the center plus four |1| neighbors
        assert edge_energy(Image(plane)) == 8.0

    def test_sums_over_channels(self):
        plane = np.zeros((7, 7))
        plane[3, 3] = 1.0
        tripled = Image(np.stack([plane] * 3))
        assert edge_energy(tripled) == 24.0
