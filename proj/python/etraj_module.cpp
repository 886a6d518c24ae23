#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>

#include "etraj/blur.hpp"
#include "etraj/errors.hpp"
#include "etraj/evaluate.hpp"
#include "etraj/extraction.hpp"
#include "etraj/io.hpp"
#include "etraj/objective.hpp"
#include "etraj/parallel.hpp"
#include "etraj/recover.hpp"
#include "etraj/synthesis.hpp"
#include "etraj/trajectory.hpp"

namespace py = pybind11;
using namespace etraj;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// (H, W) or (H, W, C) -> Image
Image to_image(const Array& a) {
    if (a.ndim() != 2 && a.ndim() != 3) {
        throw DimensionError("image arrays must have shape (H, W) or (H, W, C)");
    }
    const int c = a.ndim() == 3 ? static_cast<int>(a.shape(2)) : 1;
    Image img(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)), c);
    std::copy_n(a.data(), img.size(), img.data().begin());
    return img;
}

Array from_image(const Image& img) {
    Array a({img.height(), img.width(), img.channels()});
    std::copy(img.data().begin(), img.data().end(), a.mutable_data());
    return a;
}

FlowMap to_flow(const Array& a) {
    if (a.ndim() != 3 || a.shape(2) != 2) {
        throw DimensionError("flow arrays must have shape (H, W, 2)");
    }
    FlowMap f(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
    std::copy_n(a.data(), f.data().size(), f.data().begin());
    return f;
}

Array from_flow(const FlowMap& f) {
    Array a({f.height(), f.width(), 2});
    std::copy(f.data().begin(), f.data().end(), a.mutable_data());
    return a;
}

OffsetField to_offsets(const Array& a) {
    if (a.ndim() != 4 || a.shape(3) != 2) {
        throw DimensionError("offset arrays must have shape (N, H, W, 2)");
    }
    OffsetField f(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)), static_cast<int>(a.shape(2)));
    std::copy_n(a.data(), f.size(), f.data().begin());
    return f;
}

Array from_offsets(const OffsetField& f) {
    Array a({f.steps(), f.height(), f.width(), 2});
    std::copy(f.data().begin(), f.data().end(), a.mutable_data());
    return a;
}

BoundaryMode boundary(const std::string& name) {
    if (name == "clamp") return BoundaryMode::ClampToEdge;
    if (name == "zero") return BoundaryMode::ZeroOutside;
    throw ArgumentError("boundary must be 'clamp' or 'zero'");
}

}  // namespace

PYBIND11_MODULE(_etraj, m) {
    m.doc() = "Per-pixel exposure trajectories: blur synthesis, recovery and frame extraction.";

    auto base = py::register_exception<Error>(m, "Error");
    py::register_exception<IoError>(m, "IoError", base.ptr());
    py::register_exception<FormatError>(m, "FormatError", base.ptr());
    py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
    py::register_exception<NonFiniteLoss>(m, "NonFiniteLoss", base.ptr());
    py::register_exception<ArgumentError>(m, "ArgumentError", PyExc_ValueError);

    m.def("set_num_threads", &set_num_threads, py::arg("n"));
    m.def("num_threads", &num_threads);

    py::class_<TrajectoryField>(m, "TrajectoryField")
        .def(py::init([](const std::string& mode, int steps, int height, int width) {
                 return TrajectoryField(parse_constraint_mode(mode), steps, height, width);
             }),
             py::arg("mode"), py::arg("steps"), py::arg("height"), py::arg("width"))
        .def_static("from_offsets", [](const Array& a) { return TrajectoryField::from_offsets(to_offsets(a)); })
        .def_property_readonly("mode", [](const TrajectoryField& t) { return std::string(to_string(t.mode())); })
        .def_property_readonly("steps", &TrajectoryField::steps)
        .def_property_readonly("height", &TrajectoryField::height)
        .def_property_readonly("width", &TrajectoryField::width)
        .def_property(
            "params",
            [](const TrajectoryField& t) {
                Array a({t.height(), t.width(), t.stride()});
                std::copy(t.params().begin(), t.params().end(), a.mutable_data());
                return a;
            },
            [](TrajectoryField& t, const Array& a) {
                if (a.ndim() != 3 || a.shape(0) != t.height() || a.shape(1) != t.width() ||
                    a.shape(2) != t.stride()) {
                    throw DimensionError("params must have shape (H, W, stride)");
                }
                std::copy_n(a.data(), t.params().size(), t.params().begin());
            })
        .def("expand", [](const TrajectoryField& t, int steps) { return from_offsets(expand(t, steps)); },
             py::arg("steps"))
        .def("endpoint_flow", [](const TrajectoryField& t) { return from_flow(endpoint_flow(t)); })
        .def("__eq__", [](const TrajectoryField& a, const TrajectoryField& b) { return a == b; });

    m.def("load_image", [](const std::filesystem::path& p) { return from_image(load_image(p)); });
    m.def("save_image", [](const Array& a, const std::filesystem::path& p) { save_image(to_image(a), p); });
    m.def("read_trajectory", &read_trajectory);
    m.def("write_trajectory",
          [](const TrajectoryField& t, const std::filesystem::path& p) { write_offsets(t, p); });

    m.def("create_blur",
          [](const Array& sharp, const Array& offsets, const std::string& b) {
              return from_image(create_blur(to_image(sharp), to_offsets(offsets), boundary(b)));
          },
          py::arg("sharp"), py::arg("offsets"), py::arg("boundary") = "clamp");
    m.def("reblur",
          [](const Array& sharp, const TrajectoryField& t, int steps, const std::string& b) {
              return from_image(reblur(to_image(sharp), t, steps, boundary(b)));
          },
          py::arg("sharp"), py::arg("traj"), py::arg("steps") = kDefaultSteps, py::arg("boundary") = "clamp");

    m.def("recover",
          [](const Array& blurry, const Array& sharp, const std::string& mode, int steps, int iterations,
             double lambda_ssim, double lambda_reg, double lambda_tv, const std::string& b,
             double step_size, int levels, double search_radius) {
              RecoveryConfig cfg;
              cfg.mode = parse_constraint_mode(mode);
              cfg.steps = steps;
              cfg.iterations = iterations;
              cfg.weights = {lambda_ssim, lambda_reg, lambda_tv};
              cfg.boundary = boundary(b);
              cfg.step_size = step_size;
              cfg.pyramid_levels = levels;
              cfg.search_radius = search_radius;
              const Image b_img = to_image(blurry);
              const Image s_img = to_image(sharp);
              auto [traj, report] = [&] {
                  py::gil_scoped_release release;
                  return recover(b_img, s_img, cfg);
              }();
              py::dict r;
              r["final_loss"] = report.final_loss;
              r["loss_trace"] = report.loss_trace;
              r["reblur_psnr"] = report.reblur_psnr;
              r["reblur_ssim"] = report.reblur_ssim;
              r["iterations_run"] = report.iterations_run;
              return py::make_tuple(traj, r);
          },
          py::arg("blurry"), py::arg("sharp"), py::arg("mode") = "linear", py::arg("steps") = kDefaultSteps,
          py::arg("iterations") = RecoveryConfig{}.iterations, py::arg("lambda_ssim") = LossWeights{}.ssim,
          py::arg("lambda_reg") = LossWeights{}.reg, py::arg("lambda_tv") = LossWeights{}.tv,
          py::arg("boundary") = "clamp", py::arg("step_size") = RecoveryConfig{}.step_size,
          py::arg("levels") = RecoveryConfig{}.pyramid_levels,
          py::arg("search_radius") = RecoveryConfig{}.search_radius);

    m.def("psnr", [](const Array& a, const Array& b) { return psnr(to_image(a), to_image(b)); });
    m.def("ssim", [](const Array& a, const Array& b) { return ssim(to_image(a), to_image(b)); });
    m.def("motion_mse", [](const Array& e, const Array& g) { return motion_mse(to_flow(e), to_flow(g)); });
    m.def("endpoint_error",
          [](const Array& e, const Array& g) { return endpoint_error(to_flow(e), to_flow(g)); });
    m.def("flow_to_color",
          [](const Array& f, std::optional<double> max_mag) { return from_image(flow_to_color(to_flow(f), max_mag)); },
          py::arg("flow"), py::arg("max_mag") = py::none());

    m.def("generate_flow",
          [](int h, int w, const std::string& model, double max_disp, double min_disp, double fraction,
             std::uint64_t seed) {
              SynthConfig cfg;
              cfg.motion_model = parse_motion_model(model);
              cfg.max_displacement = max_disp;
              cfg.min_displacement = min_disp;
              cfg.object_fraction = fraction;
              cfg.seed = seed;
              return from_flow(generate_flow(h, w, cfg));
          },
          py::arg("height"), py::arg("width"), py::arg("motion") = "translate", py::arg("max_disp") = 8.0,
          py::arg("min_disp") = 0.0, py::arg("object_fraction") = 0.25, py::arg("seed") = 0);
    m.def("render_blur",
          [](const Array& sharp, const Array& flow, int steps) {
              return from_image(render_blur(to_image(sharp), to_flow(flow), steps));
          },
          py::arg("sharp"), py::arg("flow"), py::arg("steps") = kDefaultSteps);

    m.def("extract_frames",
          [](const Array& sharp, const TrajectoryField& t, int frames) {
              py::list out;
              for (const Image& f : extract_frames(to_image(sharp), t, frames)) out.append(from_image(f));
              return out;
          },
          py::arg("sharp"), py::arg("traj"), py::arg("frames") = kDefaultSteps);
}
