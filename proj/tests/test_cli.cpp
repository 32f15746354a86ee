#include "doctest.h"

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;

struct RunResult {
    int status = -1;
    std::string out;
};

// Runs the installed front end through the shell, capturing stdout and the
// exit status; stderr is dropped so expected failures stay quiet.
RunResult run_cli(const std::string& args) {
    const std::string cmd = std::string(ORBHOLO_CLI_PATH) + " " + args + " 2>/dev/null";
    RunResult result;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return result;
    char buf[4096];
    std::size_t n = 0;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) result.out.append(buf, n);
    const int raw = pclose(pipe);
    if (WIFEXITED(raw)) result.status = WEXITSTATUS(raw);
    return result;
}

const std::string& work_dir() {
    static const std::string dir = [] {
        const fs::path p =
            fs::temp_directory_path() / ("orbholo-cli-" + std::to_string(getpid()));
        fs::create_directories(p);
        return p.string();
    }();
    return dir;
}

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

void spit(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    os << text;
}

int count_data_rows(const std::string& text) {
    std::istringstream is(text);
    int rows = 0;
    for (std::string line; std::getline(is, line);)
        if (!line.empty() && line[0] != '#') ++rows;
    return rows;
}

} // namespace

TEST_CASE("estimate prints the analytic summary") {
    const RunResult r = run_cli("estimate");
    CHECK(r.status == 0);
    CHECK(r.out.find("critical ellipticity") != std::string::npos);
    CHECK(r.out.find("0.334") != std::string::npos);
    CHECK(r.out.find("sigma = 0.17") != std::string::npos);

    // The overlap rule is tunable and feeds straight into the estimate.
    const RunResult strict = run_cli("estimate --multiplier 6");
    CHECK(strict.status == 0);
    CHECK(strict.out.find("0.334") == std::string::npos);
}

TEST_CASE("times prints the grouped saddle pair") {
    const RunResult r = run_cli("times --pz 0.5 --px 0.2");
    CHECK(r.status == 0);
    CHECK(r.out.find("# eps = 0.3") != std::string::npos);
    CHECK(r.out.find("\na  ") != std::string::npos);
    CHECK(r.out.find("\nb  ") != std::string::npos);

    const RunResult all = run_cli("times --all --pz 0.5 --px 0.2");
    CHECK(all.status == 0);
    for (const char* name : {"t11", "t12", "t21", "t22"})
        CHECK(all.out.find(name) != std::string::npos);

    // The circular limit has a single branch.
    const RunResult circ = run_cli("times --eps 1 --pz 0.5 --px 0.2");
    CHECK(circ.status == 0);
    CHECK(circ.out.find("\na  ") != std::string::npos);
    CHECK(circ.out.find("\nb  ") == std::string::npos);
}

TEST_CASE("exit codes separate usage, domain, and numerical failures") {
    CHECK(run_cli("frobnicate").status == 64);
    CHECK(run_cli("").status == 64);
    CHECK(run_cli("times --no-such-flag").status == 64);
    CHECK(run_cli("times --config /no/such/file").status == 64);

    CHECK(run_cli("times --eps 1.5 --pz 0.5 --px 0.2").status == 1);
    CHECK(run_cli("estimate --multiplier 0").status == 1);
    const std::string bad_orbits =
        "pmd --orbits q --nz 2 --nx 2 --out " + work_dir() + "/bad.pmd";
    CHECK(run_cli(bad_orbits).status == 1);

    // An unreachable residual bound stalls the shooting loop.
    const RunResult stalled = run_cli(
        "traj --method sfa --orbit a --newton-tol 1e-18 --pz 0.5 --px 0.3");
    CHECK(stalled.status == 2);
}

TEST_CASE("pmd files regenerate bit for bit from their headers") {
    const std::string base = "pmd --method sfa --eps 0.3 --pz-min 0.1 --pz-max 0.5 "
                             "--nz 3 --px-min -0.4 --px-max 0.4 --nx 3";
    const std::string first = work_dir() + "/first.pmd";
    const std::string second = work_dir() + "/second.pmd";

    CHECK(run_cli(base + " --out " + first).status == 0);
    REQUIRE(fs::exists(first));
    CHECK(fs::exists(first + ".gp"));
    CHECK(slurp(first + ".gp").find("gnuplot") != std::string::npos);

    CHECK(run_cli("pmd --from " + first + " --out " + second).status == 0);
    const std::string first_bytes = slurp(first);
    CHECK(first_bytes == slurp(second));
    CHECK(first_bytes.find("# format_version = 1\n") == 0);
    CHECK(first_bytes.find("# method = sfa\n") != std::string::npos);

    // Scaled output carries its scale in the header and still regenerates.
    const std::string scaled = work_dir() + "/scaled.pmd";
    const std::string rescaled = work_dir() + "/rescaled.pmd";
    CHECK(run_cli(base + " --scale log10 --out " + scaled).status == 0);
    CHECK(run_cli("pmd --from " + scaled + " --out " + rescaled).status == 0);
    CHECK(slurp(scaled) == slurp(rescaled));
    CHECK(slurp(scaled).find("# scale = log10\n") != std::string::npos);

    // The worker count is a performance knob, never a results knob.
    const std::string threaded = work_dir() + "/threaded.pmd";
    CHECK(run_cli(base + " --threads 3 --out " + threaded).status == 0);
    CHECK(first_bytes == slurp(threaded));
}

TEST_CASE("pair interference matches the stored-amplitude route") {
    const std::string base = "--method sfa --eps 0.3 --pz-min 0.1 --pz-max 0.5 "
                             "--nz 3 --px-min -0.4 --px-max 0.4 --nx 3";
    const std::string full = work_dir() + "/full.pmd";
    const std::string from_file = work_dir() + "/pair-in.pmd";
    const std::string fresh = work_dir() + "/pair-fresh.pmd";

    CHECK(run_cli("pmd " + base + " --out " + full).status == 0);
    CHECK(run_cli("pair --pair ab --in " + full + " --out " + from_file).status == 0);
    CHECK(run_cli("pair --pair ab " + base + " --out " + fresh).status == 0);

    const std::string a = slurp(from_file);
    const std::string b = slurp(fresh);
    // Both routes end at the same grid; only provenance metadata may differ.
    CHECK(a.substr(a.find("# pair = ab")) == b.substr(b.find("# pair = ab")));

    CHECK(run_cli("pair --pair ax --in " + full + " --out " + from_file).status == 1);
}

TEST_CASE("config files mirror flags and flags win") {
    const std::string cfg = work_dir() + "/run.cfg";
    spit(cfg, "eps=0.25\npz=0.25\npx=0.125\n");

    const RunResult from_cfg = run_cli("times --config " + cfg);
    CHECK(from_cfg.status == 0);
    CHECK(from_cfg.out.find("# eps = 0.25") != std::string::npos);
    CHECK(from_cfg.out.find("p = (0.25, 0.125)") != std::string::npos);

    const RunResult overridden = run_cli("times --config " + cfg + " --px 0.5");
    CHECK(overridden.status == 0);
    CHECK(overridden.out.find("# eps = 0.25") != std::string::npos);
    CHECK(overridden.out.find("p = (0.25, 0.5)") != std::string::npos);
}

TEST_CASE("scan output is a labeled curve per orbit") {
    const std::string one = work_dir() + "/scan.dat";
    const std::string many = work_dir() + "/scan-all.dat";

    CHECK(run_cli("scan-imt --method sfa --orbit a --eps 0 --px-min -0.6 "
                  "--px-max 0.6 --n 5 --out " +
                  one)
              .status == 0);
    const std::string text = slurp(one);
    CHECK(text.find("# method = sfa\n") != std::string::npos);
    CHECK(text.find("# orbit = a\n") != std::string::npos);
    CHECK(count_data_rows(text) == 5);
    CHECK(fs::exists(one + ".gp"));

    CHECK(run_cli("scan-imt --method sfa --orbit all --eps 0 --px-min -0.6 "
                  "--px-max 0.6 --n 5 --out " +
                  many)
              .status == 0);
    CHECK(fs::exists(many + ".a"));
    CHECK(fs::exists(many + ".b"));
    CHECK(slurp(many + ".b").find("# orbit = b\n") != std::string::npos);

    CHECK(run_cli("scan-imt --n 1 --out " + one).status == 1);
}

TEST_CASE("stokes reports the branch-merge boundary") {
    const RunResult r = run_cli("stokes --eps 0.4");
    CHECK(r.status == 0);
    CHECK(r.out.find("# columns = angle p_crit re_action_gap") != std::string::npos);

    std::istringstream is(r.out);
    double angle = -1.0, p_crit = 0.0, gap = 1.0;
    for (std::string line; std::getline(is, line);) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        row >> angle >> p_crit >> gap;
        break;
    }
    CHECK(angle == 0.0);
    CHECK(p_crit == doctest::Approx(3.2908).epsilon(3e-3));
    CHECK(std::abs(gap) < 1e-5);
}

TEST_CASE("trajectory dumps carry the exit point and samples") {
    const std::string out = work_dir() + "/traj.dat";
    CHECK(run_cli("traj --method cqsfa --z-eff 0 --pz 0.5 --px 0.3 "
                  "--duration 0.5 --out " +
                  out)
              .status == 0);
    const std::string text = slurp(out);
    CHECK(text.find("# tunnel exit at t = ") != std::string::npos);
    CHECK(text.find("# columns = tau r_z r_x p_z p_x") != std::string::npos);
    CHECK(count_data_rows(text) > 10);

    const RunResult to_stdout =
        run_cli("traj --method sfa --orbit b --pz 0.5 --px 0.2 --duration 0.25");
    CHECK(to_stdout.status == 0);
    CHECK(to_stdout.out.find("# p0 = (") != std::string::npos);
}
