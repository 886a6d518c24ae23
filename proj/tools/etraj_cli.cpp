// etraj: synthesize, recover, reblur, extract, evaluate and visualize
// per-pixel exposure trajectories.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
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

namespace fs = std::filesystem;
using namespace etraj;

namespace {

enum Exit { kOk = 0, kIo = 2, kArgs = 3, kNumeric = 4 };

BoundaryMode parse_boundary(const std::string& s) {
    return s == "zero" ? BoundaryMode::ZeroOutside : BoundaryMode::ClampToEdge;
}

const std::vector<std::string> kBoundaries{"clamp", "zero"};

struct SynthArgs {
    std::string sharp_dir, out;
    int count = 50;
    std::string motion = "translate";
    double max_disp = 8.0;
    double min_disp = 0.0;
    std::uint64_t seed = 0;
    int n = kDefaultSteps;
    double object_fraction = 0.25;
};

struct RecoverArgs {
    std::string blurry, sharp, out, report;
    std::string mode = "linear";
    int n = kDefaultSteps;
    int iters = 500;
    double lambda_ssim = LossWeights{}.ssim;
    double lambda_reg = LossWeights{}.reg;
    double lambda_tv = LossWeights{}.tv;
    std::string boundary = "clamp";
    double step_size = 0.1;
    int levels = 3;
    double search_radius = 8.0;
    int ssim_scales = kDefaultSsimScales;
    bool no_ssim_gradient = false;
};

struct ReblurArgs {
    std::string sharp, traj, out;
    int n = 0;
    std::string boundary = "clamp";
};

struct ExtractArgs {
    std::string sharp, traj, out_dir;
    int frames = kDefaultSteps;
    bool reverse = false;
    std::string boundary = "clamp";
};

struct EvalArgs {
    std::string a, b, est_flow, gt_flow;
};

struct VizArgs {
    std::string traj, flow, image, out;
    int stride = 8;
    int samples = kDefaultSteps;
    double max_mag = 0.0;
};

int run_synth(const SynthArgs& a) {
    require_odd_steps(a.n);
    SynthConfig cfg;
    cfg.motion_model = parse_motion_model(a.motion);
    cfg.max_displacement = a.max_disp;
    cfg.min_displacement = a.min_disp;
    cfg.object_fraction = a.object_fraction;
    cfg.n_steps = a.n;
    cfg.seed = a.seed;
    const auto manifest = make_dataset(a.sharp_dir, a.out, a.count, cfg);
    std::cout << "instances: " << manifest.size() << '\n';
    return kOk;
}

int run_recover(const RecoverArgs& a) {
    require_odd_steps(a.n);
    if (a.iters < 1 || a.levels < 1) {
        throw ArgumentError("--iters and --levels must be >= 1");
    }
    RecoveryConfig cfg;
    cfg.mode = parse_constraint_mode(a.mode);
    cfg.steps = a.n;
    cfg.iterations = a.iters;
    cfg.weights = {a.lambda_ssim, a.lambda_reg, a.lambda_tv};
    cfg.boundary = parse_boundary(a.boundary);
    cfg.step_size = a.step_size;
    cfg.pyramid_levels = a.levels;
    cfg.search_radius = a.search_radius;
    cfg.ssim_scales = a.ssim_scales;
    cfg.ssim_gradient = !a.no_ssim_gradient;
    const Image blurry = load_image(a.blurry);
    const Image sharp = load_image(a.sharp);
    const auto [traj, report] = recover(blurry, sharp, cfg);
    write_offsets(traj, a.out);
    if (!a.report.empty()) {
        write_report(report, a.report);
    }
    std::cout << "final_loss: " << format_number(report.final_loss) << '\n'
              << "reblur_psnr: " << format_number(report.reblur_psnr) << '\n'
              << "reblur_ssim: " << format_number(report.reblur_ssim) << '\n'
              << "iterations_run: " << report.iterations_run << '\n';
    return kOk;
}

int run_reblur(const ReblurArgs& a) {
    if (a.n != 0) {
        require_odd_steps(a.n);
    }
    const Image sharp = load_image(a.sharp);
    const TrajectoryField traj = read_trajectory(a.traj);
    const int steps = a.n != 0 ? a.n : traj.steps();
    save_image(reblur(sharp, traj, steps, parse_boundary(a.boundary)), a.out);
    return kOk;
}

int run_extract(const ExtractArgs& a) {
    require_odd_steps(a.frames);
    const Image sharp = load_image(a.sharp);
    const TrajectoryField traj = read_trajectory(a.traj);
    std::vector<Image> frames = extract_frames(sharp, traj, a.frames, parse_boundary(a.boundary));
    if (a.reverse) {
        std::reverse(frames.begin(), frames.end());
    }
    std::error_code ec;
    fs::create_directories(a.out_dir, ec);
    if (ec) {
        throw IoError("cannot create " + a.out_dir + ": " + ec.message());
    }
    for (std::size_t k = 0; k < frames.size(); ++k) {
        char name[32];
        std::snprintf(name, sizeof(name), "frame_%03zu.png", k);
        save_image(frames[k], fs::path(a.out_dir) / name);
    }
    std::cout << "frames: " << frames.size() << '\n';
    return kOk;
}

int run_eval(const EvalArgs& a) {
    const bool images = !a.a.empty() || !a.b.empty();
    const bool flows = !a.est_flow.empty() || !a.gt_flow.empty();
    if (images == flows || (images && (a.a.empty() || a.b.empty())) ||
        (flows && (a.est_flow.empty() || a.gt_flow.empty()))) {
        throw ArgumentError("eval needs either --a and --b or --est-flow and --gt-flow");
    }
    if (images) {
        const Image x = load_image(a.a);
        const Image y = load_image(a.b);
        std::cout << "psnr: " << format_number(psnr(x, y)) << '\n';
        if (std::min(x.height(), x.width()) >= kSsimWindow) {
            std::cout << "ssim: " << format_number(ssim(x, y)) << '\n';
        } else {
            std::cout << "ssim: nan\n";
        }
        return kOk;
    }
    const FlowMap est = endpoint_flow(read_trajectory(a.est_flow));
    const FlowMap gt = endpoint_flow(read_trajectory(a.gt_flow));
    std::cout << "motion_mse: " << format_number(motion_mse(est, gt)) << '\n'
              << "epe: " << format_number(endpoint_error(est, gt)) << '\n';
    return kOk;
}

int run_viz(const VizArgs& a) {
    if (a.traj.empty() == a.flow.empty()) {
        throw ArgumentError("viz needs exactly one of --traj or --flow");
    }
    if (a.stride < 1) {
        throw ArgumentError("--stride must be >= 1");
    }
    if (!a.flow.empty()) {
        const FlowMap flow = endpoint_flow(read_trajectory(a.flow));
        std::optional<double> max_mag;
        if (a.max_mag > 0.0) max_mag = a.max_mag;
        save_image(flow_to_color(flow, max_mag), a.out);
        return kOk;
    }
    if (a.image.empty()) {
        throw ArgumentError("--traj needs --image to draw on");
    }
    require_odd_steps(a.samples);
    const Image img = load_image(a.image);
    const TrajectoryField traj = read_trajectory(a.traj);
    save_image(overlay_trajectories(img, traj, a.stride, a.samples), a.out);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Per-pixel exposure trajectory toolkit.\n"
                 "Defaults marked [paper] follow the published settings; [tuned] ones were "
                 "chosen for this solver."};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "Worker threads, 0 = all cores (outputs do not depend on it)")
        ->check(CLI::NonNegativeNumber);

    SynthArgs sa;
    auto* synth = app.add_subcommand("synth", "Generate blurry/sharp/flow triplets from sharp PNGs");
    synth->add_option("--sharp-dir", sa.sharp_dir, "Directory of sharp PNG images")->required();
    synth->add_option("--out", sa.out, "Output directory (manifest.tsv plus triplets)")->required();
    synth->add_option("--count", sa.count, "Instances per image [paper: 50]")
        ->capture_default_str()->check(CLI::NonNegativeNumber);
    synth->add_option("--motion", sa.motion, "Motion model [tuned]")
        ->capture_default_str()->check(CLI::IsMember({"translate", "affine", "two-layer"}));
    synth->add_option("--max-disp", sa.max_disp, "Largest flow magnitude in px [tuned]")
        ->capture_default_str()->check(CLI::NonNegativeNumber);
    synth->add_option("--min-disp", sa.min_disp, "Smallest sampled translation magnitude in px [tuned]")
        ->capture_default_str()->check(CLI::NonNegativeNumber);
    synth->add_option("--seed", sa.seed, "Base seed")->capture_default_str();
    synth->add_option("--n", sa.n, "Steps used to render the blur [paper: 15]")->capture_default_str();
    synth->add_option("--object-fraction", sa.object_fraction,
                      "Area fraction of the moving object for two-layer [tuned]")
        ->capture_default_str()->check(CLI::Range(0.0, 1.0));

    RecoverArgs ra;
    auto* rec = app.add_subcommand("recover", "Fit a trajectory field to a blurry/sharp pair");
    rec->add_option("--blurry", ra.blurry, "Blurry PNG")->required();
    rec->add_option("--sharp", ra.sharp, "Sharp reference PNG")->required();
    rec->add_option("--mode", ra.mode, "Constraint family [tuned]")
        ->capture_default_str()->check(CLI::IsMember({"zero", "linear", "bd-linear", "quadratic"}));
    rec->add_option("--n", ra.n, "Offsets per exposure, odd [paper: 15]")->capture_default_str();
    rec->add_option("--iters", ra.iters, "Adam iterations per pyramid level [tuned]")->capture_default_str();
    rec->add_option("--lambda-ssim", ra.lambda_ssim, "MS-SSIM weight [paper: 0.1]")->capture_default_str();
    rec->add_option("--lambda-reg", ra.lambda_reg, "Offset magnitude weight [paper: 2e-5]")->capture_default_str();
    rec->add_option("--lambda-tv", ra.lambda_tv, "Total variation weight [paper: 5e-4]")->capture_default_str();
    rec->add_option("--boundary", ra.boundary, "Sampling outside the image [tuned]")
        ->capture_default_str()->check(CLI::IsMember(kBoundaries));
    rec->add_option("--out", ra.out, "Output trajectory (.etrf)")->required();
    rec->add_option("--report", ra.report, "Optional plain-text report");
    rec->add_option("--step-size", ra.step_size, "Initial Adam learning rate in px [tuned]")
        ->capture_default_str()->check(CLI::PositiveNumber);
    rec->add_option("--levels", ra.levels, "Pyramid levels [tuned]")->capture_default_str();
    rec->add_option("--search-radius", ra.search_radius,
                    "Largest |dp| tried by the initial search in px, 0 = zero start [tuned]")
        ->capture_default_str()->check(CLI::NonNegativeNumber);
    rec->add_option("--ssim-scales", ra.ssim_scales, "MS-SSIM scales [tuned]")
        ->capture_default_str()->check(CLI::PositiveNumber);
    rec->add_flag("--no-ssim-gradient", ra.no_ssim_gradient,
                  "Keep SSIM in the loss value only, not in the descent direction");

    ReblurArgs rb;
    auto* reb = app.add_subcommand("reblur", "Blur a sharp image along a trajectory field");
    reb->add_option("--sharp", rb.sharp, "Sharp PNG")->required();
    reb->add_option("--traj", rb.traj, "Trajectory (.etrf)")->required();
    reb->add_option("--out", rb.out, "Output PNG")->required();
    reb->add_option("--n", rb.n, "Steps, 0 = the field's own count");
    reb->add_option("--boundary", rb.boundary, "Sampling outside the image [tuned]")
        ->capture_default_str()->check(CLI::IsMember(kBoundaries));

    ExtractArgs ea;
    auto* ext = app.add_subcommand("extract", "Warp a sharp image into frames across the exposure");
    ext->add_option("--sharp", ea.sharp, "Sharp PNG")->required();
    ext->add_option("--traj", ea.traj, "Trajectory (.etrf)")->required();
    ext->add_option("--frames", ea.frames, "Frame count M, odd and >= 3 [paper: 15]")->capture_default_str();
    ext->add_flag("--reverse", ea.reverse, "Emit frames in reversed time order");
    ext->add_option("--out-dir", ea.out_dir, "Directory for frame_000.png ...")->required();
    ext->add_option("--boundary", ea.boundary, "Sampling outside the image [tuned]")
        ->capture_default_str()->check(CLI::IsMember(kBoundaries));

    EvalArgs va;
    auto* ev = app.add_subcommand("eval", "Image quality (--a/--b) or motion accuracy (--est-flow/--gt-flow)");
    ev->add_option("--a", va.a, "First PNG");
    ev->add_option("--b", va.b, "Second PNG");
    ev->add_option("--est-flow", va.est_flow, "Estimated trajectory (.etrf)");
    ev->add_option("--gt-flow", va.gt_flow, "Ground-truth trajectory (.etrf)");

    VizArgs za;
    auto* viz = app.add_subcommand("viz", "Color-coded flow or trajectory overlay");
    viz->add_option("--traj", za.traj, "Trajectory (.etrf) to draw over --image");
    viz->add_option("--flow", za.flow, "Trajectory (.etrf) whose endpoint flow is color coded");
    viz->add_option("--image", za.image, "Background PNG for --traj");
    viz->add_option("--stride", za.stride, "Pixel spacing of drawn trajectories [tuned]")->capture_default_str();
    viz->add_option("--samples", za.samples, "Points per drawn trajectory [paper: 15]")->capture_default_str();
    viz->add_option("--max-mag", za.max_mag, "Flow magnitude at full saturation, 0 = 99th percentile [tuned]")
        ->capture_default_str()->check(CLI::NonNegativeNumber);
    viz->add_option("--out", za.out, "Output PNG")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kArgs;
    }

    set_num_threads(threads);
    try {
        if (synth->parsed()) return run_synth(sa);
        if (rec->parsed()) return run_recover(ra);
        if (reb->parsed()) return run_reblur(rb);
        if (ext->parsed()) return run_extract(ea);
        if (ev->parsed()) return run_eval(va);
        if (viz->parsed()) return run_viz(za);
    } catch (const NonFiniteLoss& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumeric;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kIo;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kIo;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kArgs;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kIo;
    }
    return kArgs;
}
