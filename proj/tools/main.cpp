#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "nlbvp/acceptance.hpp"
#include "nlbvp/config.hpp"
#include "nlbvp/nonlocal.hpp"
#include "nlbvp/pipeline.hpp"
#include "nlbvp/radial_oracle.hpp"
#include "nlbvp/sweep.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace nlbvp;

enum LogLevel { kQuiet = 0, kInfo = 1, kDebug = 2 };

LogLevel log_level() {
    const char* env = std::getenv("NONLOCAL_BVP_LOG");
    if (env == nullptr) return kInfo;
    std::string v(env);
    if (v == "quiet") return kQuiet;
    if (v == "debug") return kDebug;
    return kInfo;
}

void info(const std::string& msg) {
    if (log_level() >= kInfo) std::cerr << msg << "\n";
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void ensure_out_dir(const std::string& out) { std::filesystem::create_directories(out); }

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw Error("cannot open '" + path + "' for writing");
    f << text;
}

json classification_json(const nonlocal::NonlocalSystem& sys, const nonlocal::Classification& cls) {
    json j;
    j["det"] = sys.det;
    if (sys.det_c_psi) j["C_psi_det"] = *sys.det_c_psi;
    if (sys.det_c_phi) j["C_phi_det"] = *sys.det_c_phi;
    j["classification"] = nonlocal::kind_name(cls.kind);
    if (cls.kind == nonlocal::Kind::Unique) {
        j["B"] = cls.coefficients;
        j["residual"] = cls.residual;
    } else if (cls.kind == nonlocal::Kind::InfinitelyMany) {
        j["B_particular"] = cls.coefficients;
        j["kernel"] = cls.kernel;
    }
    j["cond"] = sys.cond;
    j["eps_det"] = cls.eps_det;
    json r = json::array();
    for (int i = 0; i < sys.size; ++i) {
        json row = json::array();
        for (int k = 0; k < sys.size; ++k) row.push_back(sys.r(i, k));
        r.push_back(row);
    }
    j["R"] = r;
    j["b"] = sys.b;
    return j;
}

std::string field_csv(const fem::DiscreteField& field) {
    std::string out = "node,x,y,value\n";
    const auto& mesh = *field.mesh;
    char buf[128];
    for (int i = 0; i < mesh.node_count(); ++i) {
        const auto& p = mesh.nodes[static_cast<std::size_t>(i)];
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", i, p.x, p.y,
                      field.values[static_cast<std::size_t>(i)]);
        out += buf;
    }
    return out;
}

std::string sweep_csv(const sweep::SweepResult& result, int components) {
    std::string header = "lambda,det,classification";
    for (int i = 0; i < components; ++i) header += ",B" + std::to_string(i);
    header += ",cond,seconds\n";
    std::string out = header;
    for (const auto& rec : result.records) {
        out += fmt17(rec.lambda);
        out += ",";
        out += rec.ok ? fmt17(rec.det) : "";
        out += "," + rec.classification;
        for (int i = 0; i < components; ++i) {
            out += ",";
            if (static_cast<int>(rec.coefficients.size()) == components)
                out += fmt17(rec.coefficients[static_cast<std::size_t>(i)]);
        }
        out += ",";
        out += rec.ok ? fmt17(rec.cond) : "";
        out += "," + fmt17(rec.seconds) + "\n";
    }
    return out;
}

json sweep_json(const sweep::SweepResult& result) {
    json records = json::array();
    for (const auto& rec : result.records) {
        json j;
        j["lambda"] = rec.lambda;
        if (rec.ok) j["det"] = rec.det;
        j["classification"] = rec.classification;
        if (!rec.coefficients.empty()) j["B"] = rec.coefficients;
        if (rec.ok) j["cond"] = rec.cond;
        j["seconds"] = rec.seconds;
        records.push_back(j);
    }
    return records;
}

int run_solve(const config::ProblemConfig& cfg, std::optional<double> lambda_opt,
              const std::string& out) {
    double lambda = lambda_opt.value_or(cfg.lambda);
    if (pipeline::engine_from_string(cfg.engine) != pipeline::Engine::Fem)
        throw InvariantViolation("the solve subcommand emits nodal fields; use engine \"fem\"");

    auto inst = pipeline::fem_instance(cfg, lambda);
    auto cls = nonlocal::classify(inst.system, pipeline::eps_det_for(cfg, inst.system));
    json report = classification_json(inst.system, cls);
    report["lambda"] = lambda;
    report["nodes"] = inst.mesh->node_count();

    ensure_out_dir(out);
    if (cls.kind == nonlocal::Kind::Unique) {
        auto u = nonlocal::reconstruct(inst.basis, cls.coefficients);
        double resid = nonlocal::fixed_point_residual(u, inst.basis, cfg.weights, cfg.b, lambda);
        report["fixed_point_residual"] = resid;
        try {
            auto env = nonlocal::decay_envelope(u, lambda, cfg.kappa);
            json je;
            je["kappa"] = env.kappa;
            je["C_star"] = env.c_star;
            je["M_star"] = env.m_star;
            je["max_margin"] = env.max_margin;
            report["decay_envelope"] = je;
        } catch (const AllZeroField&) {
            // Zero solutions carry no decay information.
        }
        write_text(out + "/solution.csv", field_csv(u));
        info("wrote " + out + "/solution.csv");
    }
    write_text(out + "/report.json", report.dump(2) + "\n");
    std::cout << report.dump(2) << "\n";
    return 0;
}

int run_classify(const config::ProblemConfig& cfg, std::optional<double> lambda_opt,
                 const std::string& out) {
    double lambda = lambda_opt.value_or(cfg.lambda);
    auto engine = pipeline::engine_from_string(cfg.engine);

    auto sys = pipeline::system_at(cfg, engine, lambda);
    auto cls = nonlocal::classify(sys, pipeline::eps_det_for(cfg, sys));
    json j = classification_json(sys, cls);
    j["lambda"] = lambda;
    j["engine"] = pipeline::engine_name(engine);
    std::cout << j.dump(2) << "\n";
    if (!out.empty()) {
        ensure_out_dir(out);
        write_text(out + "/classify.json", j.dump(2) + "\n");
    }
    return 0;
}

int run_sweep(const config::ProblemConfig& cfg, const std::string& out, int jobs) {
    if (cfg.steps < 2)
        throw InvariantViolation("config needs a [sweep] section with lambda_min/lambda_max/steps");
    auto engine = pipeline::engine_from_string(cfg.engine);

    auto result = sweep::sweep_lambda(cfg, cfg.lambda_min, cfg.lambda_max, cfg.steps, engine, jobs);
    json roots = json::array();
    for (const auto& bracket : result.brackets) {
        double root = sweep::refine_root(cfg, engine, bracket, cfg.tol);
        json jr;
        jr["bracket"] = {bracket.lo, bracket.hi};
        jr["root"] = root;
        roots.push_back(jr);
        info("root " + fmt17(root) + " in [" + fmt17(bracket.lo) + ", " + fmt17(bracket.hi) + "]");
    }

    ensure_out_dir(out);
    write_text(out + "/sweep.csv", sweep_csv(result, cfg.components));
    json j;
    j["engine"] = pipeline::engine_name(engine);
    j["records"] = sweep_json(result);
    j["roots"] = roots;
    write_text(out + "/sweep.json", j.dump(2) + "\n");
    std::cout << "{\"brackets\": " << result.brackets.size() << ", \"roots\": " << roots.dump()
              << "}\n";
    info("wrote " + out + "/sweep.csv and " + out + "/sweep.json");
    return 0;
}

int run_capacity(const config::ProblemConfig& cfg, const std::string& out) {
    auto mesh = pipeline::build_mesh(cfg, cfg.lambda);
    double value = fem::capacity_fem(mesh);
    json j;
    j["fem_value"] = value;
    if (cfg.kind == config::DomainKind::Annulus) {
        expr::Bindings env;
        env.lambda(cfg.lambda);
        double r1 = cfg.inner_radius.eval(env);
        double r2 = cfg.outer_radius.eval(env);
        double analytic = geom::annulus_capacity(r1, r2);
        j["analytic_value"] = analytic;
        j["relative_error"] = std::fabs(value - analytic) / analytic;
    }
    std::cout << j.dump(2) << "\n";
    if (!out.empty()) {
        ensure_out_dir(out);
        write_text(out + "/capacity.json", j.dump(2) + "\n");
    }
    return 0;
}

int run_oracle(int example, const std::string& c0_text, double g, std::optional<double> lambda,
               double b_inner) {
    json j;
    if (example == 1) {
        double root = oracle::alg_eq_root(g);
        j["example"] = 1;
        j["g"] = g;
        j["lambda_star"] = root;
        if (lambda) {
            auto res = oracle::example1_classify(b_inner, *lambda, g);
            j["lambda"] = *lambda;
            j["det"] = oracle::example1_det(*lambda, g);
            switch (res.regime) {
                case oracle::Regime::Unique: j["classification"] = "Unique"; break;
                case oracle::Regime::InfinitelyMany: j["classification"] = "InfinitelyMany"; break;
                case oracle::Regime::NoSolution: j["classification"] = "NoSolution"; break;
            }
            if (res.coefficient) j["coefficient"] = *res.coefficient;
            if (!res.family.empty()) j["family"] = res.family;
        }
    } else if (example == 2) {
        double c0 = (c0_text == "critical" || c0_text.empty()) ? oracle::example2_critical_c0()
                                                               : std::strtod(c0_text.c_str(), nullptr);
        j["example"] = 2;
        j["c0"] = c0;
        j["critical_c0"] = oracle::example2_critical_c0();
        if (lambda) {
            j["lambda"] = *lambda;
            j["integral"] = oracle::example2_integral(*lambda, c0);
            j["det"] = oracle::example2_det(*lambda, c0);
            j["det_factored_critical"] = oracle::example2_det_factored(*lambda);
        }
        j["roots_critical"] = oracle::s0_set(3);
    } else {
        throw InvariantViolation("--example must be 1 or 2");
    }
    std::cout << j.dump(2) << "\n";
    return 0;
}

int run_verify() {
    auto results = acceptance::run_all(std::cout);
    return acceptance::all_passed(results) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Solver for convection-diffusion problems with integral boundary conditions"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "./out", engine_flag;
    double lambda_flag = 0.0;
    bool lambda_set = false;
    int jobs = 1;

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        if (needs_config)
            cmd->add_option("--config", config_path, "problem config file")->required();
        cmd->add_option("--out", out_dir, "output directory (default ./out)");
        cmd->add_option("--lambda", lambda_flag, "override the config lambda")
            ->each([&](const std::string&) { lambda_set = true; });
        cmd->add_option("--engine", engine_flag, "fem or oracle (overrides config)");
    };

    auto* solve = app.add_subcommand("solve", "solve the non-local problem, emit field and report");
    add_common(solve, true);
    auto* classify = app.add_subcommand("classify", "classify solvability at one lambda");
    add_common(classify, true);
    auto* sweep_cmd = app.add_subcommand("sweep", "sweep lambda, bracket and refine det roots");
    add_common(sweep_cmd, true);
    sweep_cmd->add_option("--jobs", jobs, "parallel grid evaluations");
    auto* capacity = app.add_subcommand("capacity", "H1-capacity of the configured domain");
    capacity->add_option("--config", config_path, "problem config file")->required();
    capacity->add_option("--out", out_dir, "output directory");

    int oracle_example = 2;
    std::string c0_text = "critical";
    double oracle_g = 1.0 / (2.0 * 3.14159265358979323846);
    double oracle_bi = 0.0;
    auto* oracle_cmd = app.add_subcommand("oracle", "closed-form example evaluations");
    oracle_cmd->add_option("--example", oracle_example, "1 or 2");
    oracle_cmd->add_option("--c0", c0_text, "Example 2 constant, or \"critical\"");
    oracle_cmd->add_option("--g", oracle_g, "Example 1 coupling constant");
    oracle_cmd->add_option("--lambda", lambda_flag, "evaluate at this lambda")
        ->each([&](const std::string&) { lambda_set = true; });
    oracle_cmd->add_option("--bi", oracle_bi, "Example 1 inner boundary datum");

    auto* verify = app.add_subcommand("verify", "run the acceptance suite");
    (void)verify;

    CLI11_PARSE(app, argc, argv);

    std::optional<double> lambda_opt;
    if (lambda_set) lambda_opt = lambda_flag;

    // Config parsing and validation fail with exit code 2; numeric
    // failures during the solve fail with exit code 3.
    config::ProblemConfig cfg;
    bool needs_config =
        solve->parsed() || classify->parsed() || sweep_cmd->parsed() || capacity->parsed();
    if (needs_config) {
        try {
            cfg = config::load_config_file(config_path);
            if (!engine_flag.empty()) {
                cfg.engine = engine_flag;
                cfg.validate();
            }
        } catch (const Error& e) {
            std::cerr << "config error: " << e.what() << "\n";
            return 2;
        }
    }

    try {
        if (solve->parsed()) return run_solve(cfg, lambda_opt, out_dir);
        if (classify->parsed()) return run_classify(cfg, lambda_opt, out_dir);
        if (sweep_cmd->parsed()) return run_sweep(cfg, out_dir, jobs);
        if (capacity->parsed()) return run_capacity(cfg, out_dir);
        if (oracle_cmd->parsed())
            return run_oracle(oracle_example, c0_text, oracle_g, lambda_opt, oracle_bi);
        if (verify->parsed()) return run_verify();
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
