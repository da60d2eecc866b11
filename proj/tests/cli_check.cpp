// End-to-end checks of the command-line tool: every command runs through the
// real binary, exit codes match the contract, and reruns with the same config
// and seed reproduce the artifacts byte for byte (manifest timings excluded).

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int failures = 0;

#define REQUIRE(cond, msg)                                                       \
    do {                                                                         \
        if (!(cond)) {                                                           \
            std::cerr << "[FAIL] " << __FILE__ << ":" << __LINE__ << " " << msg \
                      << "\n";                                                   \
            ++failures;                                                          \
        }                                                                        \
    } while (0)

std::string g_binary;

int run_cli(const std::string& args) {
    const std::string cmd = g_binary + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    if (status == -1) return -1;
    return WEXITSTATUS(status);
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json manifest_without_timings(const fs::path& path) {
    json doc = json::parse(read_file(path));
    doc.erase("timings");
    return doc;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: tieq_cli_check <path-to-tieq-binary>\n";
        return 2;
    }
    g_binary = argv[1];

    const fs::path work = fs::temp_directory_path() / "tieq_cli_check";
    fs::remove_all(work);
    fs::create_directories(work);

    // --- solve-merton: runs, emits artifacts, records the indicator ---------
    const fs::path merton_cfg = work / "merton.cfg";
    write_file(merton_cfg, R"(command = solve-merton
[merton]
r = 0.05
mu = 0.10
sigma = 0.2
beta = 0.5
T = 1.0
kernel = exponential
delta = 0.1
[grid]
N_t = 120
[solver]
tol = 1e-8
)");
    {
        const fs::path out1 = work / "m1";
        const fs::path out2 = work / "m2";
        REQUIRE(run_cli("--config " + merton_cfg.string() + " --out " + out1.string()) == 0,
                "solve-merton exits 0");
        REQUIRE(fs::exists(out1 / "merton.csv"), "merton.csv written");
        REQUIRE(fs::exists(out1 / "manifest.json"), "manifest written");
        const json m = json::parse(read_file(out1 / "manifest.json"));
        REQUIRE(m["results"]["inconsistency_indicator"] == false,
                "classical kernel is time-consistent in the manifest");
        REQUIRE(m["seed"].is_number(), "seed echoed");
        REQUIRE(m["parameters"]["tol"] == 1e-8, "solver parameters echoed");

        // reproducibility: identical artifacts modulo wall-clock timings
        REQUIRE(run_cli("--config " + merton_cfg.string() + " --out " + out2.string()) == 0,
                "second run exits 0");
        REQUIRE(read_file(out1 / "merton.csv") == read_file(out2 / "merton.csv"),
                "merton.csv byte-identical across runs");
        REQUIRE(manifest_without_timings(out1 / "manifest.json") ==
                    manifest_without_timings(out2 / "manifest.json"),
                "manifest identical modulo timings");
    }

    // --- malformed config: exit 2, no artifacts ----------------------------
    {
        const fs::path bad_cfg = work / "bad.cfg";
        write_file(bad_cfg, R"(command = solve-merton
[merton]
r = 0.05
mu = 0.10
sigma = -0.2
beta = 0.5
T = 1.0
kernel = exponential
delta = 0.1
[grid]
N_t = 64
)");
        const fs::path out = work / "bad_out";
        REQUIRE(run_cli("--config " + bad_cfg.string() + " --out " + out.string()) == 2,
                "negative sigma exits 2");
        REQUIRE(!fs::exists(out / "merton.csv") && !fs::exists(out / "manifest.json"),
                "no partial artifacts on config error");

        write_file(bad_cfg, "command = solve-merton\n[merton]\nbogus_key = 1\n");
        REQUIRE(run_cli("--config " + bad_cfg.string() + " --out " + out.string()) == 2,
                "unknown key exits 2");
        REQUIRE(run_cli("--config " + (work / "missing.cfg").string()) == 2,
                "missing config exits 2");
        REQUIRE(run_cli("solve-lq --config " + merton_cfg.string()) == 2,
                "positional command mismatch exits 2");
    }

    // --- solve-lq with both solver modes ------------------------------------
    const fs::path lq_cfg = work / "lq.cfg";
    write_file(lq_cfg, R"(command = solve-lq
[lq]
T = 1.0
n = 1
m = 1
A = 0
A1 = 0.3
B = 1
B1 = 0
Q = 0
R = 1
G = 1 + tau
[grid]
N_t = 96
)");
    {
        const fs::path out = work / "lq_out";
        REQUIRE(run_cli("--config " + lq_cfg.string() + " --out " + out.string()) == 0,
                "solve-lq exits 0");
        REQUIRE(fs::exists(out / "P.csv") && fs::exists(out / "Gamma.csv"),
                "LQ artifacts written");
        REQUIRE(run_cli("--config " + lq_cfg.string() + " --out " + (work / "lq_fp").string() +
                        " --solver fixed-point") == 0,
                "fixed-point mode runs");
    }

    // --- solve-hjb and partition-game ---------------------------------------
    const std::string grid_model = R"([model]
kind = lq
T = 1.0
sigma_mult = 0.3
wR = 1
wG = 1 + tau
[grid]
x_min = -3
x_max = 3
M = 60
N_t = 48
boundary = linearity
)";
    {
        const fs::path cfg = work / "hjb.cfg";
        write_file(cfg, "command = solve-hjb\n" + grid_model + R"([fixed_point]
tol = 1e-5
[output]
theta_csv = false
)");
        const fs::path out = work / "hjb_out";
        REQUIRE(run_cli("--config " + cfg.string() + " --out " + out.string()) == 0,
                "solve-hjb exits 0");
        REQUIRE(fs::exists(out / "V.csv"), "V.csv written");
        REQUIRE(!fs::exists(out / "theta.csv"), "theta_csv=false honoured");
        const json m = json::parse(read_file(out / "manifest.json"));
        REQUIRE(m["results"]["residual"].get<double>() <= 1e-4, "residual recorded and small");
    }
    {
        const fs::path cfg = work / "game.cfg";
        write_file(cfg, "command = partition-game\n" + grid_model + R"([partition]
N = 4
)");
        const fs::path out = work / "game_out";
        REQUIRE(run_cli("--config " + cfg.string() + " --out " + out.string()) == 0,
                "partition-game exits 0");
        REQUIRE(fs::exists(out / "V_pi.csv") && fs::exists(out / "jumps.csv"),
                "game artifacts written");
    }

    // --- verify-inconsistency: positive gap, closed-form agreement ----------
    {
        const fs::path cfg = work / "verify.cfg";
        write_file(cfg, R"(command = verify-inconsistency
[model]
kind = lq-example
sigma = 1.0
T = 1.0
g = 1 + tau
[verify]
t = 0
tau = 0.5
x = 1
n_paths = 4000
dt = 0.002
)");
        const fs::path out = work / "verify_out";
        REQUIRE(run_cli("--config " + cfg.string() + " --out " + out.string() + " --seed 7") == 0,
                "verify-inconsistency exits 0");
        const json rep = json::parse(read_file(out / "report.json"));
        REQUIRE(rep["gap_positive"] == true, "gap is positive");
        REQUIRE(rep["closed_form_agreement"] == true, "closed form agrees");

        // Monte Carlo outputs reproduce bit-exactly under the same seed
        const fs::path out2 = work / "verify_out2";
        REQUIRE(run_cli("--config " + cfg.string() + " --out " + out2.string() + " --seed 7") ==
                    0,
                "verify rerun exits 0");
        REQUIRE(read_file(out / "report.json") == read_file(out2 / "report.json"),
                "verify report byte-identical under the same seed");
    }

    // --- solve-hjb on the log-wealth consumption model -----------------------
    {
        const fs::path cfg = work / "hjb_merton.cfg";
        write_file(cfg, R"(command = solve-hjb
[model]
kind = merton
[model_merton]
r = 0.05
mu = 0.10
sigma = 0.2
beta = 0.5
T = 1.0
kernel = exponential
delta = 0.25
[grid]
x_min = -3
x_max = 3
M = 48
N_t = 32
boundary = linearity
[fixed_point]
tol = 1e-5
[output]
theta_csv = false
)");
        const fs::path out = work / "hjb_merton_out";
        REQUIRE(run_cli("--config " + cfg.string() + " --out " + out.string()) == 0,
                "solve-hjb merton exits 0");
        REQUIRE(fs::exists(out / "V.csv"), "merton V.csv written");
    }

    // --- merton verify variant ----------------------------------------------
    {
        const fs::path cfg = work / "verify_m.cfg";
        write_file(cfg, R"(command = verify-inconsistency
[model]
kind = merton
[merton]
r = 0.05
mu = 0.10
sigma = 0.2
beta = 0.5
T = 1.0
kernel = hyperbolic
kappa = 1.0
[verify]
t = 0.1
t_bar = 0.5
)");
        const fs::path out = work / "verify_m_out";
        REQUIRE(run_cli("--config " + cfg.string() + " --out " + out.string()) == 0,
                "merton verify exits 0");
        const json rep = json::parse(read_file(out / "report.json"));
        REQUIRE(rep["indicator"] == true, "hyperbolic kernel is inconsistent");
    }

    // --- spike-test -----------------------------------------------------------
    {
        const fs::path cfg = work / "spike.cfg";
        write_file(cfg, R"(command = spike-test
[model]
kind = lq-example
sigma = 0.5
T = 1.0
g = 1 + tau
[spike]
t = 0.25
x = 1
eps = 0.2, 0.1
deviations = -1, 0, 1
n_paths = 2000
dt = 0.005
N_t = 64
)");
        const fs::path out = work / "spike_out";
        REQUIRE(run_cli("--config " + cfg.string() + " --out " + out.string() + " --seed 3") == 0,
                "spike-test exits 0");
        const json rep = json::parse(read_file(out / "report.json"));
        REQUIRE(rep["pass"] == true, "spike test passes");
    }

    // --- convergence-study ------------------------------------------------------
    {
        const fs::path cfg = work / "study.cfg";
        write_file(cfg, "command = convergence-study\n" + grid_model + R"([study]
sizes = 4, 8, 16
[fixed_point]
tol = 1e-5
)");
        const fs::path out = work / "study_out";
        REQUIRE(run_cli("--config " + cfg.string() + " --out " + out.string()) == 0,
                "convergence-study exits 0");
        REQUIRE(fs::exists(out / "study.csv"), "study.csv written");
        const json m = json::parse(read_file(out / "manifest.json"));
        REQUIRE(m["results"]["fitted_order"].get<double>() >= 0.8, "fitted order recorded");
    }

    if (failures == 0) {
        std::cout << "cli_check: all checks passed\n";
        return 0;
    }
    std::cerr << "cli_check: " << failures << " failure(s)\n";
    return 1;
}
