#pragma once

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>

#include "mmred/io.hpp"

namespace mmred {

// ---------------------------------------------------------------------------
// Bundled benchmark: the four-disk drive plant (unstable, order 8) and the
// 16-pole baseline compensator list (first 8 regulator, last 8 observer).
// ---------------------------------------------------------------------------

inline Realization fourdisk_plant() {
    Realization p;
    p.A = Matrix::Zero(8, 8);
    p.A.row(0) << -0.161, -6.004, -0.58215, -9.9835, -0.40727, -3.982, 0.0, 0.0;
    for (Index i = 1; i < 8; ++i)
        p.A(i, i - 1) = 1.0;
    p.B = Matrix::Zero(8, 1);
    p.B(0, 0) = 1.0;
    p.C = Matrix(1, 8);
    p.C << 0.0, 0.0, 6.4432e-3, 2.1936e-3, 7.1252e-2, 1.0002, 0.10455, 0.99551;
    p.D = 0.0;
    return p;
}

inline std::vector<Complex> fourdisk_compensator_poles() {
    std::vector<double> re = {-1.5,    -1.1, -1.0, -0.5, -0.3333, -0.25,   -0.2,  -0.1,
                              -2.1,    -1.3, -1.0, -0.2, -0.1667, -0.1429, -0.03, -0.01};
    std::vector<Complex> poles;
    poles.reserve(re.size());
    for (const double r : re)
        poles.emplace_back(r, 0.0);
    return poles;
}

// ---------------------------------------------------------------------------
// End-to-end demo: baseline compensator -> reduction -> certification ->
// simulation, with artifacts written to a directory.
// ---------------------------------------------------------------------------

struct DemoOptions {
    Index nu_c = 4;
    std::uint64_t seed = 7;
    bool paper_literal = false;
    std::filesystem::path out_dir = "fourdisk_out";
    double horizon = 200.0;
    double dt = 0.01;
    double margin = 0.05;
    double certify_tol = 1e-6;
    double tracking_threshold = 1e-3;
    bool write_report_md = true;
};

struct DemoResult {
    Realization plant;
    Realization compensator;
    LoopSet baseline;
    TrackingVerdict baseline_verdict;
    ClosedLoopDesign design;
    TrackingVerdict reduced_verdict;
    bool certified = false;
    std::filesystem::path out_dir;
};

inline DemoResult run_fourdisk_demo(const DemoOptions& opt) {
    namespace fs = std::filesystem;
    DemoResult res;
    res.out_dir = opt.out_dir;
    fs::create_directories(opt.out_dir);

    res.plant = fourdisk_plant();
    res.compensator = build_compensator(res.plant, fourdisk_compensator_poles());
    res.baseline = negative_feedback(res.plant, res.compensator);

    const SignalGenerator step = make_step();
    const Trajectory base_traj =
        simulate_closed_loop(res.baseline, step, opt.horizon, opt.dt);
    res.baseline_verdict = verdict(base_traj, opt.tracking_threshold);

    ReduceLoopOptions ropt;
    ropt.seed = opt.seed;
    ropt.margin = opt.margin;
    ropt.paper_literal = opt.paper_literal;
    ropt.certify_tol = opt.certify_tol;
    ropt.horizon = opt.horizon;
    ropt.dt = opt.dt;
    res.design = reduce_closed_loop(res.plant, res.compensator, step, opt.nu_c, ropt);
    res.design.report = certify(res.design, opt.certify_tol, opt.horizon, opt.dt,
                                opt.tracking_threshold);
    res.certified = res.design.report.verdict;

    const Trajectory red_traj =
        simulate_closed_loop(res.design.reduced_loop, step, opt.horizon, opt.dt);
    res.reduced_verdict = verdict(red_traj, opt.tracking_threshold);

    // ---- artifacts --------------------------------------------------------
    save_system(opt.out_dir / "fourdisk_plant.json", res.plant, "fourdisk");
    save_system(opt.out_dir / "kalman16.json", res.compensator, "baseline-compensator");
    save_system(opt.out_dir / "full_loop.json", res.baseline.p_cl, "baseline-loop");
    save_system(opt.out_dir / "reduced_loop.json", res.design.reduced_loop, "reduced-loop");
    save_system(opt.out_dir / "controller_block.json", res.design.controller_block,
                "reduced-controller-block");
    write_trajectory_csv(opt.out_dir / "baseline_step.csv", base_traj);
    write_trajectory_csv(opt.out_dir / "reduced_step.csv", red_traj);
    write_json_file(opt.out_dir / "report.json", report_to_json(res.design.report));
    write_json_file(opt.out_dir / "extracted_controller.json",
                    fraction_to_json(res.design.extracted_controller));

    json meta;
    meta["benchmark"] = "fourdisk";
    meta["nu_c"] = static_cast<long>(opt.nu_c);
    meta["seed"] = opt.seed;
    meta["paper_literal"] = opt.paper_literal;
    meta["margin"] = opt.margin;
    meta["horizon"] = opt.horizon;
    meta["dt"] = opt.dt;
    meta["certify_tol"] = opt.certify_tol;
    meta["tracking_threshold"] = opt.tracking_threshold;
    meta["reference"] = "step";
    meta["plant"] = "fourdisk_plant.json";
    meta["controller"] = "kalman16.json";
    meta["reduced_loop"] = "reduced_loop.json";
    meta["g"] = matrix_to_json(res.design.g);
    meta["notes"] = res.design.notes;
    write_json_file(opt.out_dir / "design.json", meta);

    if (opt.write_report_md) {
        std::ofstream md(opt.out_dir / "report.md");
        const std::time_t now = std::time(nullptr);
        char buf[64];
        std::strftime(buf, sizeof buf, "%Y-%m-%d %H:%M:%S", std::gmtime(&now));
        md << "# Four-disk closed-loop reduction report\n\n";
        md << "Generated: " << buf << " UTC\n\n";
        md << "## Baseline (order-16 loop)\n\n";
        md << "- closed-loop spectral abscissa: "
           << spectral_abscissa(res.baseline.p_cl.A) << "\n";
        md << "- step tracking tail error at " << opt.horizon
           << " s: " << res.baseline_verdict.tail_error
           << (res.baseline_verdict.tracks ? " (tracks)" : " (does not track)") << "\n\n";
        md << "## Reduced design (order " << res.design.reduced_loop.order() << ", nu_C = "
           << opt.nu_c << ")\n\n";
        md << "- spectral abscissa: " << res.design.report.stability_abscissa << "\n";
        md << "- moment residual (loop vs reference data): "
           << res.design.report.moment_residual_pcl << "\n";
        md << "- moment residual (error system): " << res.design.report.moment_residual_e
           << "\n";
        md << "- simulated tail error: " << res.design.report.tracking_sim_error << "\n";
        md << "- certified: " << (res.certified ? "yes" : "no") << "\n\n";
        md << "## Extracted controller\n\n";
        md << "- degrees: num " << poly_degree(res.design.extracted_controller.num)
           << ", den " << poly_degree(res.design.extracted_controller.den) << "\n";
        md << "- proper: " << (res.design.extracted_controller.proper() ? "yes" : "no")
           << "\n";
        md << "- cancelled factors: " << res.design.extracted_controller.cancelled << "\n\n";
        md << "## Summary\n\n";
        md << "- baseline does " << (res.baseline_verdict.tracks ? "" : "not ")
           << "track the step reference\n";
        md << "- reduced design does " << (res.reduced_verdict.tracks ? "" : "not ")
           << "track the step reference\n";
        if (!res.design.notes.empty()) {
            md << "\n## Notes\n\n";
            for (const std::string& note : res.design.notes)
                md << "- " << note << "\n";
        }
    }
    return res;
}

} // namespace mmred
