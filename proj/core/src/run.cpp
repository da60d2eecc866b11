#include "tieq/run.hpp"

#include "tieq/common.hpp"
#include "tieq/expr.hpp"
#include "tieq/hjb.hpp"
#include "tieq/lq.hpp"
#include "tieq/mc.hpp"
#include "tieq/merton.hpp"
#include "tieq/model.hpp"
#include "tieq/oracle.hpp"

#include <json.hpp>

#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#ifndef TIEQ_VERSION
#define TIEQ_VERSION "0.0.0"
#endif

namespace tieq {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// small output helpers
// ---------------------------------------------------------------------------

std::string fmt_num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

    void row(const std::vector<double>& values) {
        std::string line;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) line += ',';
            line += fmt_num(values[i]);
        }
        lines_.push_back(std::move(line));
    }

    void write(const fs::path& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw SolverError("cannot write " + path.string());
        for (std::size_t i = 0; i < header_.size(); ++i)
            out << (i ? "," : "") << header_[i];
        out << '\n';
        for (const std::string& line : lines_) out << line << '\n';
    }

private:
    std::vector<std::string> header_;
    std::vector<std::string> lines_;
};

void write_json_atomic(const fs::path& path, const json& doc) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw SolverError("cannot write " + tmp.string());
        out << doc.dump(2) << '\n';
    }
    fs::rename(tmp, path);
}

class StageClock {
public:
    void start(const std::string& name) {
        name_ = name;
        t0_ = std::chrono::steady_clock::now();
    }
    void stop(json& timings) {
        const auto dt = std::chrono::steady_clock::now() - t0_;
        timings[name_] = std::chrono::duration<double>(dt).count();
    }

private:
    std::string name_;
    std::chrono::steady_clock::time_point t0_;
};

json config_echo(const Config& cfg) {
    json out;
    out["command"] = cfg.command();
    for (const auto& [section, keys] : cfg.sections()) {
        json s;
        for (const auto& [k, v] : keys) s[k] = v;
        out["sections"][section] = s;
    }
    return out;
}

// ---------------------------------------------------------------------------
// model construction from configs
// ---------------------------------------------------------------------------

Kernel2 kernel2_from(const std::string& text) {
    const Expr e = Expr::parse(text);
    return [e](double tau, double t) { return e.eval({.tau = tau, .t = t, .x = 0.0, .u = 0.0}); };
}

Weight1 weight1_from(const std::string& text) {
    const Expr e = Expr::parse(text);
    return [e](double tau) { return e.eval({.tau = tau, .t = 0.0, .x = 0.0, .u = 0.0}); };
}

SigmaTX sigma_from(const std::string& text) {
    const Expr e = Expr::parse(text);
    return [e](double t, double x) { return e.eval({.tau = 0.0, .t = t, .x = x, .u = 0.0}); };
}

oracle::MertonParams merton_params_from(const Config& cfg, const std::string& section) {
    cfg.check_known_keys(section, {"r", "mu", "sigma", "beta", "T", "kernel", "delta", "kappa",
                                   "nu", "rho"});
    oracle::MertonParams p;
    p.r = cfg.get_num(section, "r");
    p.mu = cfg.get_num(section, "mu");
    p.sigma = cfg.get_num(section, "sigma");
    p.beta = cfg.get_num(section, "beta");
    p.T = cfg.get_num(section, "T");
    const std::string kernel = cfg.get_str_or(section, "kernel", "exponential");
    if (kernel == "exponential") {
        const double delta = cfg.get_num(section, "delta");
        p.nu = [delta](double t, double s) { return std::exp(-delta * (s - t)); };
        p.rho = [delta, T = p.T](double t) { return std::exp(-delta * (T - t)); };
    } else if (kernel == "hyperbolic") {
        const double kappa = cfg.get_num(section, "kappa");
        p.nu = [kappa](double t, double s) { return 1.0 / (1.0 + kappa * (s - t)); };
        p.rho = [kappa, T = p.T](double t) { return 1.0 / (1.0 + kappa * (T - t)); };
    } else if (kernel == "expression") {
        // nu(tau, t): tau is the assessment time, t the consumption time
        p.nu = kernel2_from(cfg.get_str(section, "nu"));
        p.rho = weight1_from(cfg.get_str(section, "rho"));
    } else {
        throw ConfigError("unknown kernel '" + kernel + "'");
    }
    try {
        p.validate();
    } catch (const std::domain_error& e) {
        throw ConfigError(std::string("bad merton parameters: ") + e.what());
    }
    return p;
}

GeneralModel grid_model_from(const Config& cfg) {
    const std::string kind = cfg.get_str("model", "kind");
    if (kind == "lq") {
        cfg.check_known_keys("model", {"kind", "T", "sigma_mult", "sigma_add", "wR", "wQ", "wG"});
        return make_lq1d(cfg.get_num("model", "T"), cfg.get_num_or("model", "sigma_mult", 0.0),
                         cfg.get_num_or("model", "sigma_add", 0.0),
                         kernel2_from(cfg.get_str("model", "wR")),
                         kernel2_from(cfg.get_str_or("model", "wQ", "0")),
                         weight1_from(cfg.get_str("model", "wG")));
    }
    if (kind == "example33" || kind == "example34" || kind == "example35") {
        cfg.check_known_keys("model", {"kind", "T", "R", "sigma"});
        const double T = cfg.get_num("model", "T");
        Kernel2 R = kernel2_from(cfg.get_str("model", "R"));
        SigmaTX sg = sigma_from(cfg.get_str("model", "sigma"));
        if (kind == "example33") return make_example33(T, std::move(R), std::move(sg));
        if (kind == "example34") return make_example34(T, std::move(R), std::move(sg));
        return make_example35(T, std::move(R), std::move(sg));
    }
    if (kind == "merton") {
        oracle::MertonParams p = merton_params_from(cfg, "model_merton");
        MertonLogSpec spec{p.r, p.mu, p.sigma, p.beta, p.T, p.nu, p.rho};
        return make_merton_log(spec);
    }
    if (kind == "custom") {
        cfg.check_known_keys("model", {"kind", "T", "drift", "sigma", "running", "terminal",
                                       "control_lo", "control_hi", "declared_bounded"});
        CustomModelSpec spec;
        spec.T = cfg.get_num("model", "T");
        spec.drift = cfg.get_str("model", "drift");
        spec.sigma = cfg.get_str("model", "sigma");
        spec.running = cfg.get_str("model", "running");
        spec.terminal = cfg.get_str("model", "terminal");
        spec.declared_bounded = cfg.get_str_or("model", "declared_bounded", "false") == "true";
        const double lo = cfg.get_num_or("model", "control_lo",
                                         -std::numeric_limits<double>::infinity());
        const double hi = cfg.get_num_or("model", "control_hi",
                                         std::numeric_limits<double>::infinity());
        spec.control_set = std::isfinite(lo) || std::isfinite(hi)
                               ? ControlSet::interval(lo, hi)
                               : ControlSet::real_line(1);
        return make_custom(spec);
    }
    throw ConfigError("unknown model kind '" + kind + "'");
}

hjb::GridSpec grid_spec_from(const Config& cfg, double T) {
    cfg.check_known_keys("grid", {"x_min", "x_max", "M", "N_t", "boundary"});
    hjb::GridSpec g;
    g.space = SpatialGrid1D(cfg.get_num("grid", "x_min"), cfg.get_num("grid", "x_max"),
                            static_cast<std::size_t>(cfg.get_int("grid", "M")));
    g.time = TimeGrid::uniform(T, static_cast<std::size_t>(cfg.get_int("grid", "N_t")));
    const std::string rule = cfg.get_str_or("grid", "boundary", "linearity");
    if (rule == "linearity")
        g.boundary = hjb::BoundaryRule::Linearity;
    else
        throw ConfigError("unknown boundary rule '" + rule + "'");
    return g;
}

lq::LQModel lq_model_from(const Config& cfg) {
    cfg.check_known_keys("lq", {"T", "n", "m", "A", "A1", "B", "B1", "Q", "R", "G"});
    lq::LQModel md;
    md.T = cfg.get_num("lq", "T");
    md.n = static_cast<int>(cfg.get_int_or("lq", "n", 1));
    md.m = static_cast<int>(cfg.get_int_or("lq", "m", 1));

    const auto mat_t = [&](const std::string& key, int rows, int cols) -> lq::MatT {
        const MatrixText mt = parse_matrix_text(cfg.get_str("lq", key));
        if (mt.rows != static_cast<std::size_t>(rows) || mt.cols != static_cast<std::size_t>(cols))
            throw ConfigError("matrix '" + key + "' must be " + std::to_string(rows) + "x" +
                              std::to_string(cols));
        std::vector<Expr> exprs;
        for (const auto& cell : mt.entries) exprs.push_back(Expr::parse(cell));
        return [exprs, rows, cols](double t) {
            lq::Mat m(rows, cols);
            for (int i = 0; i < rows; ++i)
                for (int j = 0; j < cols; ++j)
                    m(i, j) = exprs[static_cast<std::size_t>(i * cols + j)].eval(
                        {.tau = t, .t = t, .x = 0.0, .u = 0.0});
            return m;
        };
    };
    const auto mat_taut = [&](const std::string& key, int rows, int cols) -> lq::MatTauT {
        const MatrixText mt = parse_matrix_text(cfg.get_str("lq", key));
        if (mt.rows != static_cast<std::size_t>(rows) || mt.cols != static_cast<std::size_t>(cols))
            throw ConfigError("matrix '" + key + "' must be " + std::to_string(rows) + "x" +
                              std::to_string(cols));
        std::vector<Expr> exprs;
        for (const auto& cell : mt.entries) exprs.push_back(Expr::parse(cell));
        return [exprs, rows, cols](double tau, double t) {
            lq::Mat m(rows, cols);
            for (int i = 0; i < rows; ++i)
                for (int j = 0; j < cols; ++j)
                    m(i, j) = exprs[static_cast<std::size_t>(i * cols + j)].eval(
                        {.tau = tau, .t = t, .x = 0.0, .u = 0.0});
            return m;
        };
    };

    md.A = mat_t("A", md.n, md.n);
    md.A1 = mat_t("A1", md.n, md.n);
    md.B = mat_t("B", md.n, md.m);
    md.B1 = mat_t("B1", md.n, md.m);
    md.Q = mat_taut("Q", md.n, md.n);
    md.R = mat_taut("R", md.m, md.m);
    md.G = mat_t("G", md.n, md.n);
    try {
        md.validate();
    } catch (const std::domain_error& e) {
        throw ConfigError(std::string("bad lq model: ") + e.what());
    }
    return md;
}

oracle::LQExampleParams lq_example_from(const Config& cfg) {
    cfg.check_known_keys("model", {"kind", "sigma", "T", "g"});
    oracle::LQExampleParams p;
    p.sigma = cfg.get_num("model", "sigma");
    p.T = cfg.get_num("model", "T");
    p.g = weight1_from(cfg.get_str("model", "g"));
    try {
        p.validate();
    } catch (const std::domain_error& e) {
        throw ConfigError(std::string("bad lq example: ") + e.what());
    }
    if (!(p.g(0.0) > 0.0) || !(p.g(p.T) > 0.0))
        throw ConfigError("terminal weight g must be positive");
    return p;
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::istringstream in(text);
    std::string cell;
    while (std::getline(in, cell, ',')) {
        char* end = nullptr;
        const double v = std::strtod(cell.c_str(), &end);
        if (end == cell.c_str()) throw ConfigError("bad list entry '" + cell + "'");
        out.push_back(v);
    }
    if (out.empty()) throw ConfigError("empty list");
    return out;
}

// ---------------------------------------------------------------------------
// command implementations; each returns an exit code and fills the manifest
// ---------------------------------------------------------------------------

struct RunContext {
    const Config& cfg;
    const RunOptions& opts;
    fs::path out;
    json manifest;
    StageClock clock;
    std::uint64_t seed;
    lq::LQSolverMode lq_mode = lq::LQSolverMode::Marching;
};

int cmd_solve_lq(RunContext& rc) {
    const lq::LQModel md = lq_model_from(rc.cfg);
    rc.cfg.check_known_keys("grid", {"N_t"});
    const auto n_t = static_cast<std::size_t>(rc.cfg.get_int("grid", "N_t"));
    const TimeGrid grid = TimeGrid::uniform(md.T, n_t);

    lq::LQSolverOptions sopts;
    sopts.mode = rc.lq_mode;
    rc.manifest["parameters"] = {{"N_t", n_t},
                                 {"mode", sopts.mode == lq::LQSolverMode::Marching
                                              ? "marching"
                                              : "fixed-point"},
                                 {"corrector_passes", sopts.corrector_passes},
                                 {"cond_limit", sopts.cond_limit}};

    rc.clock.start("solve");
    const lq::RiccatiVolterraSolution sol = solve_riccati_volterra(md, grid, sopts);
    rc.clock.stop(rc.manifest["timings"]);

    CsvWriter pcsv([&] {
        std::vector<std::string> h{"tau", "t"};
        for (int i = 0; i < md.n; ++i)
            for (int j = 0; j < md.n; ++j)
                h.push_back("P_" + std::to_string(i) + std::to_string(j));
        return h;
    }());
    for (std::size_t i = 0; i < grid.size(); ++i)
        for (std::size_t j = i; j < grid.size(); ++j) {
            std::vector<double> row{grid[i], grid[j]};
            const lq::Mat& P = sol.P(i, j);
            for (int a = 0; a < md.n; ++a)
                for (int b = 0; b < md.n; ++b) row.push_back(P(a, b));
            pcsv.row(row);
        }
    pcsv.write(rc.out / "P.csv");

    CsvWriter gcsv([&] {
        std::vector<std::string> h{"t"};
        for (int i = 0; i < md.m; ++i)
            for (int j = 0; j < md.n; ++j)
                h.push_back("Gamma_" + std::to_string(i) + std::to_string(j));
        return h;
    }());
    for (std::size_t j = 0; j < grid.size(); ++j) {
        std::vector<double> row{grid[j]};
        for (int a = 0; a < md.m; ++a)
            for (int b = 0; b < md.n; ++b) row.push_back(sol.Gamma[j](a, b));
        gcsv.row(row);
    }
    gcsv.write(rc.out / "Gamma.csv");

    rc.manifest["results"]["nonpsd_warning"] = sol.nonpsd_warning;
    if (!sol.iteration_log.empty()) rc.manifest["results"]["sweeps"] = sol.iteration_log.size();
    return kExitOk;
}

int cmd_solve_merton(RunContext& rc) {
    const oracle::MertonParams p = merton_params_from(rc.cfg, "merton");
    rc.cfg.check_known_keys("grid", {"N_t"});
    rc.cfg.check_known_keys("solver", {"tol", "max_iter", "omega"});
    const auto n_t = static_cast<std::size_t>(rc.cfg.get_int("grid", "N_t"));
    const TimeGrid grid = TimeGrid::uniform(p.T, n_t);

    merton::MertonSolverOptions mopts;
    mopts.tol = rc.cfg.get_num_or("solver", "tol", 1e-8);
    mopts.max_iter = static_cast<int>(rc.cfg.get_int_or("solver", "max_iter", 400));
    mopts.omega = rc.cfg.get_num_or("solver", "omega", 0.5);
    rc.manifest["parameters"] = {{"N_t", n_t},
                                 {"tol", mopts.tol},
                                 {"max_iter", mopts.max_iter},
                                 {"omega", mopts.omega},
                                 {"normalize", mopts.normalize}};

    rc.clock.start("solve");
    const merton::MertonEquilibrium eq = solve_merton_equilibrium(p, grid, mopts);
    rc.clock.stop(rc.manifest["timings"]);

    const double u_coeff = (p.mu - p.r) / (p.sigma * p.sigma * (1.0 - p.beta));
    CsvWriter csv({"t", "z", "lower", "upper", "c_coeff", "u_coeff"});
    for (std::size_t j = 0; j < grid.size(); ++j)
        csv.row({grid[j], eq.z[j], eq.lower[j], eq.upper[j], eq.consumption_coeff(grid[j]),
                 u_coeff});
    csv.write(rc.out / "merton.csv");

    const bool indicator = oracle::merton_inconsistency_indicator(p, 0.0, 0.5 * p.T);
    rc.manifest["results"]["residual"] = eq.residual;
    rc.manifest["results"]["iterations"] = eq.iterations;
    rc.manifest["results"]["kappa"] = eq.kappa;
    rc.manifest["results"]["lambda"] = eq.lambda;
    rc.manifest["results"]["lambda_bar"] =
        std::isfinite(eq.lambda_bar) ? json(eq.lambda_bar) : json("unbounded");
    rc.manifest["results"]["inconsistency_indicator"] = indicator;
    return kExitOk;
}

int cmd_solve_hjb(RunContext& rc) {
    const GeneralModel model = grid_model_from(rc.cfg);
    const hjb::GridSpec grids = grid_spec_from(rc.cfg, model.T);
    rc.cfg.check_known_keys("fixed_point", {"tol", "max_iter", "window"});
    rc.cfg.check_known_keys("output", {"theta_csv"});

    hjb::EquilibriumOptions eopts;
    eopts.tol = rc.cfg.get_num_or("fixed_point", "tol", 1e-6);
    eopts.max_iter = static_cast<int>(rc.cfg.get_int_or("fixed_point", "max_iter", 60));
    eopts.window = rc.cfg.get_num_or("fixed_point", "window", 0.0);
    eopts.scheme.n_threads = rc.opts.threads;
    const bool theta_csv = rc.cfg.get_str_or("output", "theta_csv", "true") == "true";
    rc.manifest["parameters"] = {{"tol", eopts.tol},
                                 {"max_iter", eopts.max_iter},
                                 {"window", eopts.window},
                                 {"drift_stencil", "central"},
                                 {"boundary", "linearity"},
                                 {"theta_csv", theta_csv},
                                 {"threads", rc.opts.threads}};

    rc.clock.start("solve");
    const hjb::EquilibriumSolution sol = solve_equilibrium_hjb(model, grids, eopts);
    rc.clock.stop(rc.manifest["timings"]);

    rc.clock.start("write");
    const std::size_t n = grids.space.points();
    if (theta_csv) {
        CsvWriter theta({"tau", "t", "x", "theta"});
        for (std::size_t i = 0; i < grids.time.size(); ++i)
            for (std::size_t j = i; j < grids.time.size(); ++j)
                for (std::size_t k = 0; k < n; ++k)
                    theta.row({grids.time[i], grids.time[j], grids.space[k],
                               sol.theta.theta(i, j, k)});
        theta.write(rc.out / "theta.csv");
    }
    CsvWriter vcsv({"t", "x", "V", "psi"});
    const auto V = sol.V();
    for (std::size_t j = 0; j < grids.time.size(); ++j)
        for (std::size_t k = 0; k < n; ++k)
            vcsv.row({grids.time[j], grids.space[k], V(j, k), sol.psi.at(j, k)});
    vcsv.write(rc.out / "V.csv");
    rc.clock.stop(rc.manifest["timings"]);

    rc.manifest["results"]["residual"] = sol.residual;
    rc.manifest["results"]["sweeps"] = sol.iters;
    rc.manifest["results"]["windows"] = sol.window_log.size();
    return kExitOk;
}

int cmd_partition_game(RunContext& rc) {
    const GeneralModel model = grid_model_from(rc.cfg);
    const hjb::GridSpec grids = grid_spec_from(rc.cfg, model.T);
    rc.cfg.check_known_keys("partition", {"N", "nodes"});

    TimeGrid partition = [&] {
        if (rc.cfg.has("partition", "nodes")) {
            std::vector<double> nodes = parse_list(rc.cfg.get_str("partition", "nodes"));
            return TimeGrid(std::move(nodes));
        }
        const auto np = static_cast<std::size_t>(rc.cfg.get_int("partition", "N"));
        const std::size_t nt = grids.time.steps();
        if (np == 0 || nt % np != 0)
            throw ConfigError("partition N must divide the number of time steps");
        std::vector<double> nodes;
        for (std::size_t p = 0; p <= np; ++p) nodes.push_back(grids.time[p * (nt / np)]);
        return TimeGrid(std::move(nodes));
    }();
    rc.manifest["parameters"] = {{"intervals", partition.steps()}, {"mesh", partition.mesh()}};

    rc.clock.start("solve");
    hjb::SchemeOptions sopts;
    sopts.n_threads = rc.opts.threads;
    const hjb::PartitionGameSolution sol = solve_partition_game(model, partition, grids, sopts);
    rc.clock.stop(rc.manifest["timings"]);

    CsvWriter vcsv({"t", "x", "V", "psi"});
    for (std::size_t j = 0; j < grids.time.size(); ++j)
        for (std::size_t k = 0; k < grids.space.points(); ++k)
            vcsv.row({grids.time[j], grids.space[k], sol.value(j, k), sol.psi.at(j, k)});
    vcsv.write(rc.out / "V_pi.csv");

    CsvWriter jumps({"t", "max_jump"});
    for (std::size_t kp = 1; kp < partition.size() - 1; ++kp) {
        double jmax = 0.0;
        for (std::size_t k = 0; k < grids.space.points(); ++k)
            jmax = std::max(jmax,
                            std::abs(sol.value_left(kp, k) - sol.value_right(kp, k)));
        jumps.row({partition[kp], jmax});
    }
    jumps.write(rc.out / "jumps.csv");
    return kExitOk;
}

int cmd_verify_inconsistency(RunContext& rc) {
    const std::string kind = rc.cfg.get_str("model", "kind");
    if (kind == "merton") {
        const oracle::MertonParams p = merton_params_from(rc.cfg, "merton");
        rc.cfg.check_known_keys("verify", {"t", "t_bar"});
        const double t = rc.cfg.get_num_or("verify", "t", 0.0);
        const double tb = rc.cfg.get_num_or("verify", "t_bar", 0.5 * p.T);
        const bool indicator = oracle::merton_inconsistency_indicator(p, t, tb);
        rc.manifest["results"]["inconsistency_indicator"] = indicator;
        json report{{"kind", "merton"}, {"t", t}, {"t_bar", tb}, {"indicator", indicator}};
        write_json_atomic(rc.out / "report.json", report);
        return kExitOk;
    }
    if (kind != "lq-example") throw ConfigError("verify-inconsistency: model kind must be "
                                                "lq-example or merton");

    const oracle::LQExampleParams p = lq_example_from(rc.cfg);
    rc.cfg.check_known_keys("verify", {"t", "tau", "x", "n_paths", "dt"});
    const double t0 = rc.cfg.get_num_or("verify", "t", 0.0);
    const double tau = rc.cfg.get_num_or("verify", "tau", 0.5 * p.T);
    const double x0 = rc.cfg.get_num_or("verify", "x", 1.0);
    const auto n_paths = static_cast<std::size_t>(rc.cfg.get_int_or("verify", "n_paths", 100000));
    const double dt = rc.cfg.get_num_or("verify", "dt", 1e-3);
    rc.manifest["parameters"] = {{"t", t0}, {"tau", tau}, {"x", x0},
                                 {"n_paths", n_paths}, {"dt", dt}, {"seed", rc.seed}};

    // model: dX = u ds + sigma X dW, cost int u^2 + g(tau) X_T^2
    GeneralModel model = make_lq1d(p.T, p.sigma, 0.0,
                                   [](double, double) { return 1.0; },
                                   [](double, double) { return 0.0; }, p.g);

    // restriction of the time-t0 optimal feedback vs re-optimization at tau
    mc::Policy restricted = mc::Policy::linear_gain(1, [p, t0](double s, std::span<double> g) {
        g[0] = -oracle::lq_riccati_closed_form(p, t0, s);
    });
    mc::Policy reopt = mc::Policy::linear_gain(1, [p, tau, t0](double s, std::span<double> g) {
        g[0] = -oracle::lq_riccati_closed_form(p, s < tau ? t0 : tau, s);
    });

    std::vector<double> formula_gap(n_paths), estimator_diff(n_paths);
    mc::SimOptions sim;
    sim.scheme = mc::Scheme::LogEuler;
    sim.n_threads = rc.opts.threads;

    rc.clock.start("simulate");
    const mc::PairedDiff diff = mc::estimate_cost_difference_paired(
        model, restricted, reopt, t0, x0, tau, tau, n_paths, dt, rc.seed, sim,
        [&](std::size_t path, double w, double ca, double cb) {
            formula_gap[path] = oracle::lq_inconsistency_gap(p, t0, tau, x0, w);
            estimator_diff[path] = (ca - cb) - formula_gap[path];
        });
    rc.clock.stop(rc.manifest["timings"]);

    const MeanStderr gap_formula = mean_stderr(formula_gap);
    const MeanStderr paired = mean_stderr(estimator_diff);
    const bool agree = std::abs(paired.mean) <= 3.0 * paired.std_error;
    const bool positive = diff.mean > 0.0;

    json report{{"kind", "lq-example"},
                {"gap_estimate", diff.mean},
                {"gap_std_error", diff.std_error},
                {"gap_formula_mean", gap_formula.mean},
                {"paired_difference_mean", paired.mean},
                {"paired_difference_std_error", paired.std_error},
                {"closed_form_agreement", agree},
                {"gap_positive", positive},
                {"n_paths", n_paths},
                {"seed", rc.seed}};
    write_json_atomic(rc.out / "report.json", report);
    rc.manifest["results"]["gap_estimate"] = diff.mean;
    rc.manifest["results"]["closed_form_agreement"] = agree;
    rc.manifest["results"]["gap_positive"] = positive;
    return agree && positive ? kExitOk : kExitVerification;
}

int cmd_spike_test(RunContext& rc) {
    const oracle::LQExampleParams p = lq_example_from(rc.cfg);
    rc.cfg.check_known_keys("spike",
                            {"t", "x", "eps", "deviations", "n_paths", "dt", "N_t"});
    const double t = rc.cfg.get_num_or("spike", "t", 0.25 * p.T);
    const double x0 = rc.cfg.get_num_or("spike", "x", 1.0);
    const std::vector<double> eps = parse_list(rc.cfg.get_str_or("spike", "eps", "0.2,0.1,0.05"));
    const std::vector<double> devs =
        parse_list(rc.cfg.get_str_or("spike", "deviations", "-2,-1,0,1"));
    const auto n_paths = static_cast<std::size_t>(rc.cfg.get_int_or("spike", "n_paths", 20000));
    const double dt = rc.cfg.get_num_or("spike", "dt", 1e-3);
    const auto n_t = static_cast<std::size_t>(rc.cfg.get_int_or("spike", "N_t", 256));
    rc.manifest["parameters"] = {{"t", t}, {"x", x0}, {"n_paths", n_paths},
                                 {"dt", dt}, {"N_t", n_t}, {"seed", rc.seed}};

    GeneralModel model = make_lq1d(p.T, p.sigma, 0.0,
                                   [](double, double) { return 1.0; },
                                   [](double, double) { return 0.0; }, p.g);

    rc.clock.start("equilibrium");
    const lq::LQModel lqm = lq::scalar_lq(
        p.T, 0.0, 1.0, p.sigma, 0.0, [](double, double) { return 0.0; },
        [](double, double) { return 1.0; }, p.g);
    const lq::RiccatiVolterraSolution rv =
        solve_riccati_volterra(lqm, TimeGrid::uniform(p.T, n_t));
    rc.clock.stop(rc.manifest["timings"]);

    mc::Policy equilibrium = mc::Policy::linear_gain(1, [&rv](double s, std::span<double> g) {
        g[0] = -rv.gamma_at(s)(0, 0);
    });

    mc::SimOptions sim;
    sim.scheme = mc::Scheme::LogEuler;
    sim.n_threads = rc.opts.threads;
    rc.clock.start("simulate");
    const mc::SpikeReport report =
        mc::spike_deviation_test(model, equilibrium, x0, t, eps, devs, n_paths, dt, rc.seed, sim);
    rc.clock.stop(rc.manifest["timings"]);

    json cells = json::array();
    for (const auto& c : report.cells)
        cells.push_back({{"eps", c.eps}, {"deviation", c.deviation}, {"delta", c.delta},
                         {"std_error", c.std_error}});
    json doc{{"cells", cells},
             {"delta_max", report.delta_max},
             {"fitted_c", report.fitted_c},
             {"pass", report.pass},
             {"shrinking", report.shrinking},
             {"seed", rc.seed}};
    write_json_atomic(rc.out / "report.json", doc);
    rc.manifest["results"]["pass"] = report.pass;
    rc.manifest["results"]["shrinking"] = report.shrinking;
    rc.manifest["results"]["fitted_c"] = report.fitted_c;
    return report.pass && report.shrinking ? kExitOk : kExitVerification;
}

int cmd_convergence_study(RunContext& rc) {
    rc.cfg.check_known_keys("study", {"sizes"});
    std::vector<std::size_t> sizes;
    for (double v : parse_list(rc.cfg.get_str("study", "sizes")))
        sizes.push_back(static_cast<std::size_t>(v));

    const GeneralModel model = grid_model_from(rc.cfg);
    const hjb::GridSpec grids = grid_spec_from(rc.cfg, model.T);
    rc.cfg.check_known_keys("fixed_point", {"tol", "max_iter", "window"});
    hjb::EquilibriumOptions eopts;
    eopts.tol = rc.cfg.get_num_or("fixed_point", "tol", 1e-6);
    eopts.max_iter = static_cast<int>(rc.cfg.get_int_or("fixed_point", "max_iter", 60));
    eopts.window = rc.cfg.get_num_or("fixed_point", "window", 0.0);
    eopts.scheme.n_threads = rc.opts.threads;
    rc.manifest["parameters"] = {{"sizes", sizes}, {"tol", eopts.tol}};

    rc.clock.start("study");
    const hjb::ConvergenceTable table = refine_and_compare(model, sizes, grids, eopts);
    rc.clock.stop(rc.manifest["timings"]);

    CsvWriter csv({"N", "mesh", "gap"});
    for (const auto& row : table.rows)
        csv.row({static_cast<double>(row.n_intervals), row.mesh, row.gap});
    csv.write(rc.out / "study.csv");
    rc.manifest["results"]["fitted_order"] = table.fitted_order;
    return kExitOk;
}

}  // namespace

int run(const RunOptions& opts) {
    Config cfg;
    try {
        cfg = Config::parse_file(opts.config_path);
        if (cfg.command().empty()) throw ConfigError("config is missing the 'command' key");
        cfg.check_known_sections({"model", "model_merton", "merton", "lq", "grid", "solver",
                                  "fixed_point", "partition", "verify", "spike", "study",
                                  "output", "run"});
        if (!opts.solver.empty() && opts.solver != "marching" && opts.solver != "fixed-point")
            throw ConfigError("--solver must be 'marching' or 'fixed-point'");
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }

    RunContext rc{cfg, opts, fs::path(opts.out_dir), json::object(), StageClock{}, 0,
                  lq::LQSolverMode::Marching};
    rc.manifest["command"] = cfg.command();
    rc.manifest["config"] = config_echo(cfg);
    rc.manifest["versions"] = {{"tieq", TIEQ_VERSION}, {"compiler", __VERSION__}};
    rc.manifest["timings"] = json::object();

    int code = kExitOk;
    try {
        rc.cfg.check_known_keys("run", {"seed"});
        rc.seed = opts.seed ? *opts.seed
                            : static_cast<std::uint64_t>(cfg.get_int_or("run", "seed", 1234));
        rc.manifest["seed"] = rc.seed;
        const std::string mode = !opts.solver.empty()
                                     ? opts.solver
                                     : cfg.get_str_or("solver", "mode", "marching");
        rc.lq_mode = mode == "fixed-point" ? lq::LQSolverMode::FixedPoint
                                           : lq::LQSolverMode::Marching;

        fs::create_directories(rc.out);
        const std::string& cmd = cfg.command();
        if (cmd == "solve-lq")
            code = cmd_solve_lq(rc);
        else if (cmd == "solve-merton")
            code = cmd_solve_merton(rc);
        else if (cmd == "solve-hjb")
            code = cmd_solve_hjb(rc);
        else if (cmd == "partition-game")
            code = cmd_partition_game(rc);
        else if (cmd == "verify-inconsistency")
            code = cmd_verify_inconsistency(rc);
        else if (cmd == "spike-test")
            code = cmd_spike_test(rc);
        else if (cmd == "convergence-study")
            code = cmd_convergence_study(rc);
        else
            throw ConfigError("unknown command '" + cmd + "'");
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::domain_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << '\n';
        return kExitSolver;
    }

    rc.manifest["exit_code"] = code;
    write_json_atomic(rc.out / "manifest.json", rc.manifest);
    return code;
}

}  // namespace tieq
