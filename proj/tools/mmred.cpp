// mmred: moment-matching reduction of closed-loop systems.
//
// Subcommands: moments, design, reduce, simulate, certify, demo.
// Exit codes: 0 success, 1 parse error, 2 math precondition, 3 numerical
// failure (certify also exits 3 when the verdict fails).

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mmred/fourdisk.hpp"

namespace fs = std::filesystem;
using namespace mmred;

namespace {

struct ReferenceFlags {
    bool step = false;
    bool ramp = false;
    std::optional<Index> poly;
    std::optional<double> sin_w;
    std::vector<double> jordan; // s1, m
    std::string generator_file;

    SignalGenerator resolve(const SignalGenerator& fallback = make_step()) const {
        if (!generator_file.empty())
            return generator_from_json(parse_json_file(generator_file));
        if (!jordan.empty()) {
            if (jordan.size() != 2)
                throw ParseError("--jordan needs two values: s1 m");
            return make_jordan(jordan[0], static_cast<Index>(jordan[1]));
        }
        if (sin_w)
            return make_sinusoid(*sin_w);
        if (poly)
            return make_polynomial(*poly);
        if (ramp)
            return make_ramp();
        if (step)
            return make_step();
        return fallback;
    }

    void attach(CLI::App* cmd) {
        cmd->add_flag("--step", step, "unit step reference");
        cmd->add_flag("--ramp", ramp, "ramp reference t");
        cmd->add_option("--poly", poly, "polynomial reference t^K");
        cmd->add_option("--sin", sin_w, "sinusoidal reference cos(W t)");
        cmd->add_option("--jordan", jordan, "Jordan interpolation block: s1 m")
            ->expected(2);
        cmd->add_option("--generator", generator_file, "generator spec JSON file");
    }
};

std::uint64_t seed_or_env(std::optional<std::uint64_t> flag) {
    if (flag)
        return *flag;
    if (const char* env = std::getenv("MMRED_SEED"))
        return std::strtoull(env, nullptr, 10);
    return 7;
}

int cmd_moments(const std::string& system_file, const ReferenceFlags& ref,
                const std::string& json_out) {
    const Realization sys = load_system(system_file);
    const SignalGenerator g = ref.resolve();
    if (!is_minimal(sys))
        std::cerr << "warning: system is not minimal; moment data may be redundant\n";
    const MomentSet ms = moments_of(sys, g);

    const ComplexVector pts = eigenvalues(g.S);
    std::cout << "interpolation points (sigma(S)):";
    for (Index i = 0; i < pts.size(); ++i)
        std::cout << " " << pts(i);
    std::cout << "\nmoments (C*Pi):\n";
    for (Index i = 0; i < ms.values.cols(); ++i)
        std::cout << "  [" << i << "] " << format_full(ms.values(i).real()) << "\n";
    std::cout << "Sylvester residual: " << ms.pi.residual_norm << ", rank(Pi): " << ms.pi.rank
              << "\n";

    if (!json_out.empty()) {
        json j;
        j["system"] = system_file;
        j["generator"] = generator_to_json(g);
        json vals = json::array();
        for (Index i = 0; i < ms.values.cols(); ++i)
            vals.push_back(ms.values(i).real());
        j["moments"] = vals;
        j["residual"] = ms.pi.residual_norm;
        j["rank"] = static_cast<long>(ms.pi.rank);
        write_json_file(json_out, j);
    }
    return 0;
}

int cmd_design(const std::string& plant_file, const std::vector<double>& pole_list,
               const std::string& out_file) {
    const Realization plant = load_system(plant_file);
    std::vector<Complex> poles;
    poles.reserve(pole_list.size());
    for (const double p : pole_list)
        poles.emplace_back(p, 0.0);
    const Realization comp = build_compensator(plant, poles);
    save_system(out_file, comp, "compensator");
    const LoopSet loop = negative_feedback(plant, comp);
    std::cout << "compensator order " << comp.order() << " written to " << out_file
              << "\nclosed-loop abscissa: " << spectral_abscissa(loop.p_cl.A) << "\n";
    return 0;
}

int cmd_reduce(const std::string& plant_file, const std::string& controller_file, Index nu_c,
               const ReferenceFlags& ref, std::optional<std::uint64_t> seed,
               const std::string& out_dir, double margin, bool paper_literal) {
    const Realization plant = load_system(plant_file);
    const Realization controller = load_system(controller_file);
    const SignalGenerator reference = ref.resolve();

    ReduceLoopOptions opt;
    opt.seed = seed_or_env(seed);
    opt.margin = margin;
    opt.paper_literal = paper_literal;
    const ClosedLoopDesign design = reduce_closed_loop(plant, controller, reference, nu_c, opt);

    fs::create_directories(out_dir);
    save_system(fs::path(out_dir) / "reduced_loop.json", design.reduced_loop, "reduced-loop");
    save_system(fs::path(out_dir) / "controller_block.json", design.controller_block,
                "reduced-controller-block");
    write_json_file(fs::path(out_dir) / "report.json", report_to_json(design.report));
    write_json_file(fs::path(out_dir) / "extracted_controller.json",
                    fraction_to_json(design.extracted_controller));
    json meta;
    meta["plant"] = plant_file;
    meta["controller"] = controller_file;
    meta["nu_c"] = static_cast<long>(nu_c);
    meta["seed"] = opt.seed;
    meta["reference"] = generator_to_json(reference);
    meta["notes"] = design.notes;
    write_json_file(fs::path(out_dir) / "design.json", meta);

    std::cout << "reduced loop order " << design.reduced_loop.order() << ", abscissa "
              << design.report.stability_abscissa << ", certified "
              << (design.report.verdict ? "yes" : "no") << "\nartifacts in " << out_dir << "\n";
    for (const std::string& n : design.notes)
        std::cout << "note: " << n << "\n";
    return 0;
}

int cmd_simulate(const std::string& loop_file, const ReferenceFlags& ref, double horizon,
                 double dt, const std::string& csv_out) {
    const Realization loop = load_system(loop_file);
    const SignalGenerator g = ref.resolve();
    const double t_end = horizon > 0.0 ? horizon : auto_horizon(loop.A);
    const Trajectory traj = simulate_closed_loop(loop, g, t_end, dt);
    const TrackingVerdict v = verdict(traj);
    if (!csv_out.empty())
        write_trajectory_csv(csv_out, traj);
    std::cout << "horizon " << t_end << " s, tail error " << v.tail_error << " (threshold "
              << v.threshold << "): " << (v.tracks ? "tracks" : "does not track")
              << "\ndecay rate (fit): " << v.decay_fit << "\n";
    return 0;
}

int cmd_certify(const std::string& design_dir, double tol) {
    const fs::path dir(design_dir);
    const json meta = parse_json_file(dir / "design.json");
    const Realization reduced = load_system(dir / "reduced_loop.json");

    SignalGenerator reference = make_step();
    if (meta.contains("reference")) {
        if (meta.at("reference").is_object())
            reference = generator_from_json(meta.at("reference"));
        else if (meta.at("reference").is_string())
            reference = reference_from_spec(meta.at("reference").get<std::string>(), 0.0);
    }
    const double horizon = meta.value("horizon", -1.0);
    const double dt = meta.value("dt", 0.01);
    const double threshold = meta.value("tracking_threshold", -1.0);

    // Reference block: dim = order of the reduced loop minus nu_c.
    const Index nu_c = static_cast<Index>(meta.value("nu_c", 0L));
    const Index nu1 = reduced.order() - nu_c;
    if (nu1 <= 0)
        throw ParseError("certify: design.json nu_c inconsistent with the reduced loop order");

    ClosedLoopDesign shim;
    shim.reduced_loop = reduced;
    shim.reference = reference;
    shim.generator = make_interpolation_blocks(reference, nu1, nu_c);
    const VerificationReport rep = certify(shim, tol, horizon, dt, threshold);

    std::cout << "stability abscissa:    " << rep.stability_abscissa << "\n"
              << "moment residual P_cl:  " << rep.moment_residual_pcl << "\n"
              << "moment residual E:     " << rep.moment_residual_e << "\n"
              << "simulated tail error:  " << rep.tracking_sim_error << " (threshold "
              << rep.tracking_threshold << ")\n"
              << "checks consistent:     " << (rep.consistent ? "yes" : "no") << "\n"
              << "verdict:               " << (rep.verdict ? "PASS" : "FAIL") << "\n";
    return rep.verdict ? 0 : 3;
}

int cmd_demo(Index nu_c, std::optional<std::uint64_t> seed, bool paper_literal,
             const std::string& out_dir) {
    DemoOptions opt;
    opt.nu_c = nu_c;
    opt.seed = seed_or_env(seed);
    opt.paper_literal = paper_literal;
    opt.out_dir = out_dir;
    const DemoResult res = run_fourdisk_demo(opt);

    std::cout << "four-disk demo (nu_C = " << nu_c << ", seed " << opt.seed << ")\n"
              << "baseline loop order " << res.baseline.p_cl.order() << ": tail error "
              << res.baseline_verdict.tail_error << " -> "
              << (res.baseline_verdict.tracks ? "tracks" : "does not track") << "\n"
              << "reduced loop order " << res.design.reduced_loop.order() << ": abscissa "
              << res.design.report.stability_abscissa << ", tail error "
              << res.design.report.tracking_sim_error << " -> "
              << (res.reduced_verdict.tracks ? "tracks" : "does not track") << "\n"
              << "certified: " << (res.certified ? "yes" : "no") << "\n"
              << "artifacts in " << res.out_dir.string() << "\n";
    for (const std::string& n : res.design.notes)
        std::cout << "note: " << n << "\n";
    if (!res.certified && !paper_literal)
        return 3;
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"moment-matching closed-loop reduction toolkit"};
    app.require_subcommand(1);

    // moments
    auto* moments = app.add_subcommand("moments", "moments of a system at a generator");
    std::string m_system, m_json;
    ReferenceFlags m_ref;
    moments->add_option("system", m_system, "system JSON file")->required();
    m_ref.attach(moments);
    moments->add_option("--json", m_json, "also write the table as JSON");

    // design
    auto* design = app.add_subcommand("design", "observer-based compensator by pole placement");
    std::string d_plant, d_out = "compensator.json";
    std::vector<double> d_poles;
    design->add_option("--plant", d_plant, "plant JSON file")->required();
    design->add_option("--poles", d_poles, "2n poles: n regulator then n observer")
        ->required()
        ->delimiter(',');
    design->add_option("--out", d_out, "output controller file");

    // reduce
    auto* reduce = app.add_subcommand("reduce", "closed-loop moment-matching reduction");
    std::string r_plant, r_controller, r_out = "design_out";
    Index r_nuc = 0;
    std::optional<std::uint64_t> r_seed;
    double r_margin = 0.05;
    bool r_literal = false;
    ReferenceFlags r_ref;
    reduce->add_option("--plant", r_plant, "plant JSON file")->required();
    reduce->add_option("--controller", r_controller, "controller JSON file")->required();
    reduce->add_option("--nuc", r_nuc, "reduced controller order nu_C")->required();
    r_ref.attach(reduce);
    reduce->add_option("--seed", r_seed, "search seed (default: MMRED_SEED or 7)");
    reduce->add_option("--margin", r_margin, "required stability margin");
    reduce->add_flag("--paper-literal", r_literal, "literal data row instead of the L1 pin");
    reduce->add_option("--out", r_out, "output directory");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "closed-loop simulation");
    std::string s_loop, s_csv;
    double s_horizon = -1.0, s_dt = 0.01;
    ReferenceFlags s_ref;
    simulate->add_option("--loop", s_loop, "closed-loop system JSON file")->required();
    s_ref.attach(simulate);
    simulate->add_option("--horizon", s_horizon, "horizon in seconds (default: auto)");
    simulate->add_option("--dt", s_dt, "sample step");
    simulate->add_option("--csv", s_csv, "trajectory CSV output");

    // certify
    auto* certify_cmd = app.add_subcommand("certify", "re-verify a design directory");
    std::string c_dir;
    double c_tol = 1e-6;
    certify_cmd->add_option("--design", c_dir, "design directory")->required();
    certify_cmd->add_option("--tol", c_tol, "moment tolerance");

    // demo
    auto* demo = app.add_subcommand("demo", "bundled end-to-end benchmark");
    std::string demo_which = "fourdisk", demo_out = "fourdisk_out";
    Index demo_nuc = 4;
    std::optional<std::uint64_t> demo_seed;
    bool demo_literal = false;
    demo->add_option("benchmark", demo_which, "benchmark name (fourdisk)");
    demo->add_option("--nuc", demo_nuc, "reduced controller order");
    demo->add_option("--seed", demo_seed, "search seed (default: MMRED_SEED or 7)");
    demo->add_flag("--paper-literal", demo_literal, "literal data row variant");
    demo->add_option("--out", demo_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (moments->parsed())
            return cmd_moments(m_system, m_ref, m_json);
        if (design->parsed())
            return cmd_design(d_plant, d_poles, d_out);
        if (reduce->parsed())
            return cmd_reduce(r_plant, r_controller, r_nuc, r_ref, r_seed, r_out, r_margin,
                              r_literal);
        if (simulate->parsed())
            return cmd_simulate(s_loop, s_ref, s_horizon, s_dt, s_csv);
        if (certify_cmd->parsed())
            return cmd_certify(c_dir, c_tol);
        if (demo->parsed()) {
            if (demo_which != "fourdisk")
                throw ParseError("unknown benchmark: " + demo_which);
            return cmd_demo(demo_nuc, demo_seed, demo_literal, demo_out);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (e.kind()) {
        case ErrorKind::parse:
            return 1;
        case ErrorKind::precondition:
            return 2;
        case ErrorKind::numerical:
            return 3;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
