#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <string>
#include <sys/wait.h>

#include "etraj/io.hpp"
#include "etraj/recover.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace etraj;
using namespace etraj::testing;

namespace {

struct Result {
    int status = -1;
    std::string out;
};

Result run(const std::string& args) {
    const std::string cmd = std::string("\"") + ETRAJ_CLI_PATH + "\" " + args + " 2>/dev/null";
    Result r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    for (std::size_t n; (n = std::fread(buf, 1, sizeof(buf), pipe)) > 0;) r.out.append(buf, n);
    const int raw = pclose(pipe);
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    return r;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("help and argument errors") {
    CHECK(run("--help").status == 0);
    CHECK(run("recover --help").out.find("[paper: 15]") != std::string::npos);
    CHECK(run("").status == 3);
    CHECK(run("bogus").status == 3);
    CHECK(run("recover --blurry a.png --sharp b.png --out t.etrf --n 4").status == 3);
    CHECK(run("extract --sharp a.png --traj t.etrf --out-dir d --frames 1").status == 3);
    CHECK(run("recover --blurry a.png --sharp b.png --out t.etrf --boundary wrap").status == 3);
    CHECK(run("eval --a x.png").status == 3);
    CHECK(run("viz --out v.png").status == 3);
}

TEST_CASE("io errors") {
    CHECK(run("recover --blurry /nonexistent/a.png --sharp /nonexistent/b.png --out t.etrf").status == 2);
    CHECK(run("synth --sharp-dir /nonexistent --out /tmp/x").status == 2);
    const fs::path dir = temp_dir("cli_io");
    std::ofstream(dir / "bad.etrf") << "not a trajectory";
    Rng rng(91);
    save_image(random_image(rng, 8, 8, 1), dir / "a.png");
    CHECK(run("reblur --sharp " + q(dir / "a.png") + " --traj " + q(dir / "bad.etrf") + " --out " +
              q(dir / "o.png")).status == 2);
    fs::remove_all(dir);
}

TEST_CASE("pipeline") {
    const fs::path dir = temp_dir("cli_pipeline");
    Rng rng(92);
    fs::create_directories(dir / "sharp");
    save_image(texture_image(rng, 32, 32, 3), dir / "sharp" / "img.png");

    CHECK(run("synth --sharp-dir " + q(dir / "sharp") + " --out " + q(dir / "none") + " --count 0").status == 0);
    CHECK(slurp(dir / "none" / "manifest.tsv").empty());

    CHECK(run("synth --sharp-dir " + q(dir / "sharp") + " --out " + q(dir / "still") +
              " --count 1 --max-disp 0").status == 0);
    CHECK(load_image(dir / "still" / "img_000_blurry.png") == load_image(dir / "still" / "img_000_sharp.png"));

    const std::string synth = "synth --sharp-dir " + q(dir / "sharp") + " --count 2 --seed 4 --out ";
    REQUIRE(run(synth + q(dir / "data")).status == 0);
    REQUIRE(run(synth + q(dir / "data2")).status == 0);
    for (const char* name : {"manifest.tsv", "img_001_blurry.png", "img_001_flow.etrf"})
        CHECK(slurp(dir / "data" / name) == slurp(dir / "data2" / name));

    const fs::path blurry = dir / "data" / "img_000_blurry.png";
    const fs::path sharp = dir / "data" / "img_000_sharp.png";
    const fs::path gt = dir / "data" / "img_000_flow.etrf";

    // The stored ground truth reproduces the stored blur.
    REQUIRE(run("reblur --sharp " + q(sharp) + " --traj " + q(gt) + " --out " + q(dir / "re.png")).status == 0);
    CHECK(slurp(dir / "re.png") == slurp(blurry));

    const Result same = run("eval --a " + q(sharp) + " --b " + q(sharp));
    CHECK(same.status == 0);
    CHECK(same.out == "psnr: inf\nssim: 1.0\n");

    // No blur: the recovered report says the loss is negligible.
    REQUIRE(run("recover --blurry " + q(sharp) + " --sharp " + q(sharp) + " --iters 100 --out " +
                q(dir / "still.etrf") + " --report " + q(dir / "still.txt")).status == 0);
    {
        std::ifstream rep(dir / "still.txt");
        std::string key;
        double value = 1.0;
        rep >> key >> value;
        CHECK(key == "final_loss:");
        CHECK(value < 1e-4);
    }

    REQUIRE(run("recover --blurry " + q(blurry) + " --sharp " + q(sharp) + " --iters 60 --out " +
                q(dir / "est.etrf")).status == 0);
    const Result flow = run("eval --est-flow " + q(dir / "est.etrf") + " --gt-flow " + q(gt));
    CHECK(flow.status == 0);
    CHECK(flow.out.rfind("motion_mse: ", 0) == 0);
    CHECK(flow.out.find("\nepe: ") != std::string::npos);

    REQUIRE(run("extract --sharp " + q(sharp) + " --traj " + q(dir / "est.etrf") + " --frames 5 --out-dir " +
                q(dir / "frames")).status == 0);
    REQUIRE(run("extract --sharp " + q(sharp) + " --traj " + q(dir / "est.etrf") +
                " --frames 5 --reverse --out-dir " + q(dir / "rev")).status == 0);
    for (int k = 0; k < 5; ++k) {
        char a[32], b[32];
        std::snprintf(a, sizeof(a), "frame_%03d.png", k);
        std::snprintf(b, sizeof(b), "frame_%03d.png", 4 - k);
        CHECK(slurp(dir / "frames" / a) == slurp(dir / "rev" / b));
    }
    CHECK(slurp(dir / "frames" / "frame_002.png") == slurp(sharp));

    CHECK(run("viz --flow " + q(dir / "est.etrf") + " --out " + q(dir / "flow.png")).status == 0);
    CHECK(run("viz --traj " + q(dir / "est.etrf") + " --image " + q(sharp) + " --stride 4 --out " +
              q(dir / "traj.png")).status == 0);
    CHECK(load_image(dir / "flow.png").channels() == 3);
    CHECK(load_image(dir / "traj.png").height() == 32);
    fs::remove_all(dir);
}
