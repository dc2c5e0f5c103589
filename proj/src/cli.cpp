#include <mcac/cli.hpp>
#include <mcac/io.hpp>
#include <mcac/metrics.hpp>
#include <mcac/pipeline.hpp>
#include <mcac/synth.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>

namespace mcac {

namespace {

namespace fs = std::filesystem;

using Metrics = std::vector<std::pair<std::string, std::string>>;

fs::path prepare_out(const std::string& dir) {
    const fs::path p(dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec || !fs::is_directory(p)) throw ConfigError("cannot create output directory '" + dir + "'");
    return p;
}

void write_metrics(const fs::path& path, const Metrics& m) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << "metric,value\n";
    for (const auto& [k, v] : m) out << k << ',' << v << '\n';
}

void write_pose_csv(const fs::path& path, const std::vector<std::pair<std::string, AffineMap>>& poses) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << "stage,a11,a12,a21,a22,b1,b2\n";
    for (const auto& [name, p] : poses) {
        out << name;
        for (double v : p.a.flat()) out << ',' << io::fmt(v, 9);
        out << ',' << io::fmt(p.b.x, 9) << ',' << io::fmt(p.b.y, 9) << '\n';
    }
}

void write_mask_pgm(const fs::path& path, const SilhouetteMask& m) {
    ScalarField2D img(m.width(), m.height());
    for (int y = 0; y < m.height(); ++y) {
        for (int x = 0; x < m.width(); ++x) img.at(x, y) = m.at(x, y) == 1.0 ? 255.0 : 0.0;
    }
    io::write_pgm(path, img);
}

void write_cost(const fs::path& path, const CostMatrix& c) {
    io::write_raw_field(path, ScalarField2D(static_cast<int>(c.cols), static_cast<int>(c.rows), c.values));
}

std::string tag(double sigma) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%05.2f", sigma);
    return buf;
}

struct ShapeArgs {
    std::string mask;
    std::string template_name;
    std::string centers;
    double spacing = synth::TemplateOptions{}.center_spacing;
    double margin = synth::TemplateOptions{}.center_margin;
    double sigma = 0.0;
    double epsilon_h = 1.0;
    int max_iters = synth::TemplateOptions{}.train.max_iterations;
};

struct PreparedMask {
    SilhouetteMask mask;
    PointSet centers;
};

PreparedMask prepare_mask(const ShapeArgs& a) {
    PreparedMask p;
    if (!a.mask.empty()) {
        if (!fs::is_regular_file(a.mask)) throw ConfigError("mask file not found: '" + a.mask + "'");
        p.mask = mask_from_image(io::read_pgm(a.mask));
    } else {
        const synth::Template t = synth::template_by_name(a.template_name);
        p.mask = synth::polygon_mask(t.outline, AffineMap::translation({63.5, 63.5}), 128, 128);
    }
    validate_mask(p.mask);
    if (!a.centers.empty()) {
        if (!fs::is_regular_file(a.centers)) throw ConfigError("centers file not found: '" + a.centers + "'");
        p.centers = io::read_points_csv(a.centers);
    } else {
        p.centers = synth::interior_grid(p.mask, a.spacing, a.margin);
    }
    if (p.centers.empty()) throw InvalidArgument("no RBF centers inside the mask; lower --spacing or --margin");
    return p;
}

int run_train_shape(const ShapeArgs& a, const std::string& out_dir, std::ostream& out) {
    const PreparedMask pm = prepare_mask(a);
    const fs::path dir = prepare_out(out_dir);
    const HeavisideParams h{a.epsilon_h};
    const double sigma = a.sigma > 0.0 ? a.sigma : select_sigma(pm.mask, pm.centers, h, default_sigma_grid());
    TrainConfig tc;
    tc.max_iterations = a.max_iters;
    const TrainResult tr = train_logged(initial_model(pm.centers, sigma), pm.mask, h, tc);
    Point2 origin;
    for (const Point2& c : pm.centers) origin += c;
    origin = origin * (1.0 / static_cast<double>(pm.centers.size()));
    save_model(dir / "model.txt", translated(tr.model, origin * -1.0));
    {
        std::ofstream log(dir / "fit_error.csv");
        log << "iter,fit_error\n";
        for (std::size_t k = 0; k < tr.error_log.size(); ++k) log << k << ',' << io::fmt(tr.error_log[k], 9) << '\n';
    }
    const double score = fit_score(tr.model, pm.mask, h);
    write_metrics(dir / "metrics.csv", {{"fit_score", io::fmt(score)},
                                        {"sigma", io::fmt(sigma)},
                                        {"centers", std::to_string(pm.centers.size())},
                                        {"iterations", std::to_string(tr.iterations)},
                                        {"origin_x", io::fmt(origin.x)},
                                        {"origin_y", io::fmt(origin.y)}});
    out << "fit_score," << io::fmt(score) << '\n';
    return 0;
}

int run_select_sigma(const ShapeArgs& a, const std::vector<double>& candidates, const std::string& out_dir,
                     std::ostream& out) {
    const PreparedMask pm = prepare_mask(a);
    const fs::path dir = prepare_out(out_dir);
    const HeavisideParams h{a.epsilon_h};
    const std::vector<double> grid = candidates.empty() ? default_sigma_grid() : candidates;
    const std::vector<double> scores = sigma_scores(pm.mask, pm.centers, h, grid);
    const double best = select_sigma(pm.mask, pm.centers, h, grid);
    std::ofstream csv(dir / "sigma_scores.csv");
    csv << "sigma,score\n";
    for (std::size_t k = 0; k < grid.size(); ++k) csv << io::fmt(grid[k]) << ',' << io::fmt(scores[k], 9) << '\n';
    write_metrics(dir / "metrics.csv", {{"sigma", io::fmt(best)}});
    out << "sigma," << io::fmt(best) << '\n';
    return 0;
}

struct MatchArgs {
    std::string source;
    std::string target;
    std::string corr;
    std::string cost;
    double epsilon = 0.0;
    bool no_refine = false;
};

int run_align(const MatchArgs& a, const std::string& out_dir, std::ostream& out) {
    for (const auto& [p, what] : {std::pair{a.source, "source points"}, std::pair{a.target, "target points"},
                                  std::pair{a.corr, "correspondences"}}) {
        if (!fs::is_regular_file(p)) throw ConfigError(std::string(what) + " file not found: '" + p + "'");
    }
    MatchProblem prob;
    prob.source = io::read_points_csv(a.source);
    prob.target = io::read_points_csv(a.target);
    Correspondences corr{io::read_pairs_csv(a.corr)};
    corr.validate(prob.source.size(), prob.target.size());
    if (!a.cost.empty()) {
        if (!fs::is_regular_file(a.cost)) throw ConfigError("cost file not found: '" + a.cost + "'");
        const ScalarField2D c = io::read_raw_field(a.cost);
        prob.cost = {static_cast<std::size_t>(c.height()), static_cast<std::size_t>(c.width()),
                     std::vector<double>(c.values().begin(), c.values().end())};
    } else {
        prob.cost = {prob.source.size(), prob.target.size(),
                     std::vector<double>(prob.source.size() * prob.target.size(), 0.0)};
    }
    prob.epsilon = a.epsilon > 0.0 ? a.epsilon : default_epsilon(prob.target);
    prob.validate();
    const fs::path dir = prepare_out(out_dir);
    const AffineMap init = initial_alignment(prob.source, prob.target, corr);
    const AffineMap refined = a.no_refine ? init : refine_alignment(prob, init);
    write_pose_csv(dir / "pose.csv", {{"initial", init}, {"refined", refined}});
    const double e0 = match_energy(prob, init);
    const double e1 = match_energy(prob, refined);
    write_metrics(dir / "metrics.csv",
                  {{"epsilon", io::fmt(prob.epsilon)}, {"energy_initial", io::fmt(e0, 9)}, {"energy_refined", io::fmt(e1, 9)}});
    out << "energy_refined," << io::fmt(e1, 9) << '\n';
    return 0;
}

struct SegmentArgs {
    MatchArgs match;
    std::string model;
    std::string image;
    std::string truth;
    std::string dataset;
    double tau = 0.0;
    double tau_ratio = 0.9;
    double step_a = 0.02;
    double step_b = 1.0;
    int max_iters = 200;
    double tol = 1e-3;
    double sigma_g = 1.5;
};

PipelineOptions pipeline_options(const SegmentArgs& a) {
    PipelineOptions o;
    o.optimizer.tau = a.tau;
    if (a.tau != 0.0) o.optimizer.tau_band = 0.01 * std::abs(a.tau);
    o.optimizer.step_A = a.step_a;
    o.optimizer.step_b = a.step_b;
    o.optimizer.max_iters = a.max_iters;
    o.optimizer.param_change_tol = a.tol;
    o.tau_ratio = a.tau_ratio;
    o.sigma_g = a.sigma_g;
    o.epsilon = a.match.epsilon;
    o.refine_pose = !a.match.no_refine;
    return o;
}

int run_segment_batch(const SegmentArgs& a, const fs::path& dir, std::ostream& out) {
    if (!fs::is_directory(a.dataset)) throw ConfigError("dataset directory not found: '" + a.dataset + "'");
    std::vector<fs::path> instances;
    for (const auto& e : fs::directory_iterator(a.dataset)) {
        if (e.is_directory() && e.path().filename().string().rfind("inst_", 0) == 0) instances.push_back(e.path());
    }
    std::sort(instances.begin(), instances.end());
    if (instances.empty()) throw ConfigError("no inst_* directories in '" + a.dataset + "'");
    const RbfShapeModel model = load_model(a.model);
    std::vector<BatchRow> rows;
    for (std::size_t k = 0; k < instances.size(); ++k) {
        const fs::path& d = instances[k];
        PipelineConfig cfg{d / "image.pgm", a.model, d / "source.csv", d / "target.csv", d / "corr.csv",
                           d / "cost.mcf", d / "truth.pgm", pipeline_options(a), 0};
        for (const fs::path& p : {cfg.image, cfg.source_points, cfg.target_points, cfg.correspondences, cfg.cost,
                                  cfg.truth_mask, d / "truth_contour.csv"}) {
            if (!fs::is_regular_file(p)) throw ConfigError("dataset file not found: '" + p.string() + "'");
        }
        SegmentationInput in;
        in.model = model;
        in.image = io::read_pgm(cfg.image);
        in.source = io::read_points_csv(cfg.source_points);
        in.target = io::read_points_csv(cfg.target_points);
        in.corr.pairs = io::read_pairs_csv(cfg.correspondences);
        const ScalarField2D c = io::read_raw_field(cfg.cost);
        in.cost = {static_cast<std::size_t>(c.height()), static_cast<std::size_t>(c.width()),
                   std::vector<double>(c.values().begin(), c.values().end())};
        in.truth = mask_from_image(io::read_pgm(cfg.truth_mask));
        in.truth_contour = std::vector<ContourPolyline>{{io::read_points_csv(d / "truth_contour.csv"), true}};
        const SegmentationResult r = segment_instance(in, cfg.options);
        rows.push_back({static_cast<int>(k), *r.initial_jaccard, *r.final_jaccard, *r.nhd_initial, *r.nhd_final});
    }
    write_batch_csv(dir / "batch.csv", rows);
    double mi = 0.0;
    double mf = 0.0;
    int improved = 0;
    for (const BatchRow& r : rows) {
        mi += r.initial_jaccard;
        mf += r.final_jaccard;
        improved += r.final_jaccard >= r.initial_jaccard ? 1 : 0;
    }
    const double n = static_cast<double>(rows.size());
    write_metrics(dir / "metrics.csv", {{"instances", std::to_string(rows.size())},
                                        {"mean_initial_jaccard", io::fmt(mi / n)},
                                        {"mean_final_jaccard", io::fmt(mf / n)},
                                        {"improved_or_equal", std::to_string(improved)}});
    out << "mean_final_jaccard," << io::fmt(mf / n) << '\n';
    return 0;
}

int run_segment(const SegmentArgs& a, const std::string& out_dir, std::ostream& out) {
    if (!fs::is_regular_file(a.model)) throw ConfigError("model file not found: '" + a.model + "'");
    const fs::path dir = prepare_out(out_dir);
    if (!a.dataset.empty()) return run_segment_batch(a, dir, out);
    if (a.image.empty() || a.match.source.empty() || a.match.target.empty() || a.match.corr.empty()) {
        throw ConfigError("segment needs --image, --source, --target and --corr (or --dataset)");
    }
    const PipelineConfig cfg{a.image,      a.model,   a.match.source, a.match.target, a.match.corr,
                             a.match.cost, a.truth,   pipeline_options(a), 0};
    const SegmentationResult r = segment(cfg);
    write_trajectory_csv(dir / "trajectory.csv", r.trajectory);
    write_contours_csv(dir / "initial_contour.csv", r.initial_contour);
    write_contours_csv(dir / "final_contour.csv", r.final_contour);
    write_mask_pgm(dir / "initial_mask.pgm", r.initial_mask);
    write_mask_pgm(dir / "final_mask.pgm", r.final_mask);
    write_pose_csv(dir / "pose.csv", {{"initial", r.initial_pose}, {"final", r.final_pose}});
    Metrics m{{"tau", io::fmt(r.optimizer.tau, 9)},
              {"energy_initial", io::fmt(r.trajectory.front().E, 9)},
              {"energy_final", io::fmt(r.trajectory.back().E, 9)},
              {"gac_initial", io::fmt(r.trajectory.front().J, 9)},
              {"gac_final", io::fmt(r.trajectory.back().J, 9)},
              {"iterations", std::to_string(r.trajectory.back().iteration)}};
    if (r.final_jaccard) {
        m.push_back({"initial_jaccard", io::fmt(*r.initial_jaccard)});
        m.push_back({"final_jaccard", io::fmt(*r.final_jaccard)});
        out << "final_jaccard," << io::fmt(*r.final_jaccard) << '\n';
    }
    write_metrics(dir / "metrics.csv", m);
    return 0;
}

int run_eval(const std::string& pred, const std::string& truth, const std::string& pred_contour,
             const std::string& truth_contour, const std::string& out_dir, std::ostream& out) {
    for (const std::string& p : {pred, truth}) {
        if (!fs::is_regular_file(p)) throw ConfigError("mask file not found: '" + p + "'");
    }
    Metrics m{{"jaccard", io::fmt(jaccard(mask_from_image(io::read_pgm(pred)), mask_from_image(io::read_pgm(truth))))}};
    if (!pred_contour.empty() || !truth_contour.empty()) {
        if (pred_contour.empty() || truth_contour.empty()) {
            throw ConfigError("--pred-contour and --truth-contour must be given together");
        }
        for (const std::string& p : {pred_contour, truth_contour}) {
            if (!fs::is_regular_file(p)) throw ConfigError("contour file not found: '" + p + "'");
        }
        m.push_back({"nhd", io::fmt(normalized_hausdorff(io::read_points_csv(pred_contour),
                                                         io::read_points_csv(truth_contour)))});
    }
    for (const auto& [k, v] : m) out << k << ',' << v << '\n';
    if (!out_dir.empty()) write_metrics(prepare_out(out_dir) / "metrics.csv", m);
    return 0;
}

int run_synth_affine(const std::string& template_name, int count, std::uint64_t seed, double det_lo, double det_hi,
                     int train_iters, const std::string& out_dir, std::ostream& out) {
    synth::TemplateOptions topt;
    topt.train.max_iterations = train_iters;
    const synth::TrainedTemplate t = synth::train_template(synth::template_by_name(template_name), topt);
    synth::SuiteOptions opt;
    opt.det_lo = det_lo;
    opt.det_hi = det_hi;
    const std::vector<synth::SynthInstance> suite = synth::synth_affine_suite(t, count, opt, seed);
    const fs::path dir = prepare_out(out_dir);
    save_model(dir / "model.txt", t.model);
    io::write_points_csv(dir / "template_outline.csv", t.shape.outline);
    std::vector<std::pair<std::string, AffineMap>> poses;
    for (std::size_t k = 0; k < suite.size(); ++k) {
        const synth::SynthInstance& s = suite[k];
        char name[32];
        std::snprintf(name, sizeof name, "inst_%03zu", k);
        const fs::path d = prepare_out((dir / name).string());
        io::write_pgm(d / "image.pgm", s.image);
        write_mask_pgm(d / "truth.pgm", s.truth);
        io::write_points_csv(d / "truth_contour.csv", s.truth_contour.points);
        io::write_points_csv(d / "source.csv", s.source);
        io::write_points_csv(d / "target.csv", s.target);
        io::write_pairs_csv(d / "corr.csv", s.corr.pairs);
        write_cost(d / "cost.mcf", s.cost);
        poses.push_back({name, s.pose});
    }
    write_pose_csv(dir / "poses.csv", poses);
    write_metrics(dir / "metrics.csv",
                  {{"instances", std::to_string(suite.size())}, {"fit_score", io::fmt(t.fit_score)},
                   {"sigma", io::fmt(t.model.sigma)}});
    out << "instances," << suite.size() << '\n';
    return 0;
}

int run_synth_noise(const std::string& image, std::vector<double> sigmas, int per_level, std::uint64_t seed,
                    const std::string& out_dir, std::ostream& out) {
    if (!fs::is_regular_file(image)) throw ConfigError("image file not found: '" + image + "'");
    if (sigmas.empty()) sigmas = synth::default_noise_levels();
    const std::vector<synth::NoisyImage> suite = synth::synth_noise_suite(io::read_pgm(image), sigmas, per_level, seed);
    const fs::path dir = prepare_out(out_dir);
    std::ofstream index(dir / "index.csv");
    index << "file,sigma,index\n";
    for (const synth::NoisyImage& n : suite) {
        const std::string file = "noise_" + tag(n.sigma) + "_" + std::to_string(n.index) + ".pgm";
        io::write_pgm(dir / file, n.image);
        index << file << ',' << io::fmt(n.sigma) << ',' << n.index << '\n';
    }
    out << "images," << suite.size() << '\n';
    return 0;
}

int run_invariance(const std::string& model_path, const std::string& truth_path, int trials, std::uint64_t seed,
                   const InvarianceOptions& opt, const std::string& out_dir, std::ostream& out) {
    if (!fs::is_regular_file(model_path)) throw ConfigError("model file not found: '" + model_path + "'");
    const RbfShapeModel model = load_model(model_path);
    ContourPolyline truth;
    if (!truth_path.empty()) {
        if (!fs::is_regular_file(truth_path)) throw ConfigError("contour file not found: '" + truth_path + "'");
        truth = {io::read_points_csv(truth_path), true};
    } else {
        const Vec2 c{0.5 * (opt.width - 1), 0.5 * (opt.height - 1)};
        const PosedShape s{model, AffineMap::translation(c)};
        const auto cs = extract_contour(rasterize(s, opt.width, opt.height));
        const auto longest = std::max_element(cs.begin(), cs.end(), [](const auto& x, const auto& y) {
            return x.points.size() < y.points.size();
        });
        truth = transformed(snap_to_zero_set(s, *longest), AffineMap::translation(c * -1.0));
    }
    const std::vector<InvarianceRow> rows = invariance_report(model, truth, trials, seed, opt);
    const fs::path dir = prepare_out(out_dir);
    write_invariance_csv(dir / "invariance.csv", rows);
    double inv = 0.0;
    double non = 0.0;
    double inv_max = 0.0;
    for (const InvarianceRow& r : rows) {
        inv += r.nhd_invariant;
        non += r.nhd_noninvariant;
        inv_max = std::max(inv_max, r.nhd_invariant);
    }
    const double n = static_cast<double>(rows.size());
    write_metrics(dir / "metrics.csv", {{"trials", std::to_string(rows.size())},
                                        {"mean_nhd_invariant", io::fmt(inv / n)},
                                        {"max_nhd_invariant", io::fmt(inv_max)},
                                        {"mean_nhd_noninvariant", io::fmt(non / n)}});
    out << "mean_nhd_invariant," << io::fmt(inv / n) << '\n' << "mean_nhd_noninvariant," << io::fmt(non / n) << '\n';
    return 0;
}

void add_shape_options(CLI::App* cmd, ShapeArgs& a) {
    auto* src = cmd->add_option("--mask", a.mask, "Binary silhouette (PGM, nonzero = foreground)");
    cmd->add_option("--template", a.template_name, "Built-in shape instead of a mask: leaf, ellipse, bean")
        ->excludes(src);
    cmd->add_option("--centers", a.centers, "RBF centers CSV in mask pixels (default: interior hex grid)");
    cmd->add_option("--spacing", a.spacing, "Hex grid spacing in pixels")->check(CLI::PositiveNumber);
    cmd->add_option("--margin", a.margin, "Minimum center distance to the background")->check(CLI::NonNegativeNumber);
    cmd->add_option("--epsilon-h", a.epsilon_h, "Heaviside width")->check(CLI::PositiveNumber);
}

void add_match_options(CLI::App* cmd, MatchArgs& a) {
    cmd->add_option("--source", a.source, "Template points CSV (x,y)");
    cmd->add_option("--target", a.target, "Target points CSV (x,y)");
    cmd->add_option("--corr", a.corr, "Correspondences CSV (i,j)");
    cmd->add_option("--cost", a.cost, "Cost matrix (raw field, width = targets, height = sources)");
    cmd->add_option("--epsilon", a.epsilon, "Matching kernel width (default: twice the median target spacing)");
    cmd->add_flag("--no-refine", a.no_refine, "Skip matching-energy refinement of the least-squares pose");
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Matching-constrained active contours with affine-invariant shape priors", "mcac"};
    app.require_subcommand(1);
    std::string out_dir;

    ShapeArgs shape;
    auto* train_cmd = app.add_subcommand("train-shape", "Fit an RBF shape model to a silhouette");
    add_shape_options(train_cmd, shape);
    train_cmd->add_option("--sigma", shape.sigma, "Kernel bandwidth (default: selected from 1..20)");
    train_cmd->add_option("--max-iters", shape.max_iters, "Training iterations")->check(CLI::NonNegativeNumber);
    train_cmd->add_option("--out", out_dir, "Output directory")->required();

    std::vector<double> sigma_grid;
    auto* sigma_cmd = app.add_subcommand("select-sigma", "Score candidate bandwidths with fixed weights");
    add_shape_options(sigma_cmd, shape);
    sigma_cmd->add_option("--candidates", sigma_grid, "Candidate bandwidths (default 1, 1.1, ..., 20)")
        ->delimiter(',');
    sigma_cmd->add_option("--out", out_dir, "Output directory")->required();

    MatchArgs match;
    auto* align_cmd = app.add_subcommand("align", "Least-squares affine alignment refined on the matching energy");
    add_match_options(align_cmd, match);
    for (const char* name : {"--source", "--target", "--corr"}) align_cmd->get_option(name)->required();
    align_cmd->add_option("--out", out_dir, "Output directory")->required();

    SegmentArgs seg;
    auto* seg_cmd = app.add_subcommand("segment", "Alignment followed by constrained contour refinement");
    add_match_options(seg_cmd, seg.match);
    seg_cmd->add_option("--model", seg.model, "Trained shape model")->required();
    seg_cmd->add_option("--image", seg.image, "Input image (PGM)");
    seg_cmd->add_option("--truth", seg.truth, "Ground-truth mask (PGM) for Jaccard scores");
    seg_cmd->add_option("--dataset", seg.dataset, "Directory written by synth-affine (batch mode)");
    seg_cmd->add_option("--tau", seg.tau, "Matching energy bound (default: tau-ratio times the initial energy)");
    seg_cmd->add_option("--tau-ratio", seg.tau_ratio, "Bound as a fraction of the initial energy");
    seg_cmd->add_option("--step-a", seg.step_a, "Largest change of A^-1 per iteration")->check(CLI::PositiveNumber);
    seg_cmd->add_option("--step-b", seg.step_b, "Largest translation per iteration")->check(CLI::PositiveNumber);
    seg_cmd->add_option("--max-iters", seg.max_iters, "Iteration cap")->check(CLI::NonNegativeNumber);
    seg_cmd->add_option("--tol", seg.tol, "Mean absolute pose change at convergence")->check(CLI::PositiveNumber);
    seg_cmd->add_option("--sigma-g", seg.sigma_g, "Edge indicator smoothing")->check(CLI::NonNegativeNumber);
    seg_cmd->add_option("--out", out_dir, "Output directory")->required();

    std::string pred;
    std::string truth;
    std::string pred_contour;
    std::string truth_contour;
    auto* eval_cmd = app.add_subcommand("eval", "Compare a predicted mask with the ground truth");
    eval_cmd->add_option("--pred", pred, "Predicted mask (PGM)")->required();
    eval_cmd->add_option("--truth", truth, "Ground-truth mask (PGM)")->required();
    eval_cmd->add_option("--pred-contour", pred_contour, "Predicted contour points CSV");
    eval_cmd->add_option("--truth-contour", truth_contour, "Ground-truth contour points CSV");
    eval_cmd->add_option("--out", out_dir, "Output directory");

    std::uint64_t seed = 0;
    std::string template_name = "leaf";
    int count = 50;
    double det_lo = 0.5;
    double det_hi = 2.0;
    int train_iters = synth::TemplateOptions{}.train.max_iterations;
    auto* affine_cmd = app.add_subcommand("synth-affine", "Random affine instances of a trained template");
    affine_cmd->add_option("--template", template_name, "leaf, ellipse or bean");
    affine_cmd->add_option("--count", count, "Number of instances")->check(CLI::PositiveNumber);
    affine_cmd->add_option("--det-lo", det_lo, "Smallest determinant")->check(CLI::PositiveNumber);
    affine_cmd->add_option("--det-hi", det_hi, "Largest determinant")->check(CLI::PositiveNumber);
    affine_cmd->add_option("--max-iters", train_iters, "Template training iterations")->check(CLI::NonNegativeNumber);
    affine_cmd->add_option("--seed", seed, "Random seed")->required();
    affine_cmd->add_option("--out", out_dir, "Output directory")->required();

    std::string base_image;
    std::vector<double> noise_levels;
    int per_level = 30;
    auto* noise_cmd = app.add_subcommand("synth-noise", "Gaussian noise copies of an image");
    noise_cmd->add_option("--image", base_image, "Base image (PGM)")->required();
    noise_cmd->add_option("--sigmas", noise_levels, "Noise levels (default 1..20)")->delimiter(',');
    noise_cmd->add_option("--per-level", per_level, "Images per level")->check(CLI::PositiveNumber);
    noise_cmd->add_option("--seed", seed, "Random seed")->required();
    noise_cmd->add_option("--out", out_dir, "Output directory")->required();

    std::string inv_model;
    std::string inv_truth;
    int trials = 100;
    InvarianceOptions inv;
    auto* inv_cmd = app.add_subcommand("invariance-report", "Invariant vs non-invariant contours under random maps");
    inv_cmd->add_option("--model", inv_model, "Trained shape model")->required();
    inv_cmd->add_option("--truth-contour", inv_truth,
                        "Ground-truth contour in the model frame (default: the model's own zero set)");
    inv_cmd->add_option("--trials", trials, "Number of random maps")->check(CLI::PositiveNumber);
    inv_cmd->add_option("--seed", seed, "Random seed")->required();
    inv_cmd->add_option("--width", inv.width, "Raster width")->check(CLI::Range(8, 4096));
    inv_cmd->add_option("--height", inv.height, "Raster height")->check(CLI::Range(8, 4096));
    inv_cmd->add_option("--det-lo", inv.det_lo, "Smallest determinant")->check(CLI::PositiveNumber);
    inv_cmd->add_option("--det-hi", inv.det_hi, "Largest determinant")->check(CLI::PositiveNumber);
    inv_cmd->add_option("--out", out_dir, "Output directory")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 1;
    }

    try {
        if (train_cmd->parsed()) {
            if (shape.mask.empty() && shape.template_name.empty()) throw ConfigError("give --mask or --template");
            return run_train_shape(shape, out_dir, out);
        }
        if (sigma_cmd->parsed()) {
            if (shape.mask.empty() && shape.template_name.empty()) throw ConfigError("give --mask or --template");
            return run_select_sigma(shape, sigma_grid, out_dir, out);
        }
        if (align_cmd->parsed()) return run_align(match, out_dir, out);
        if (seg_cmd->parsed()) return run_segment(seg, out_dir, out);
        if (eval_cmd->parsed()) return run_eval(pred, truth, pred_contour, truth_contour, out_dir, out);
        if (affine_cmd->parsed()) return run_synth_affine(template_name, count, seed, det_lo, det_hi, train_iters, out_dir, out);
        if (noise_cmd->parsed()) return run_synth_noise(base_image, noise_levels, per_level, seed, out_dir, out);
        if (inv_cmd->parsed()) return run_invariance(inv_model, inv_truth, trials, seed, inv, out_dir, out);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    err << app.help();
    return 1;
}

int cli_main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return cli_dispatch(args, std::cout, std::cerr);
}

}  // namespace mcac
