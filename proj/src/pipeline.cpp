#include <mcac/io.hpp>
#include <mcac/metrics.hpp>
#include <mcac/pipeline.hpp>

#include <fstream>

namespace mcac {

namespace {

void require_file(const std::filesystem::path& p, const char* what) {
    if (p.empty()) throw ConfigError(std::string("missing ") + what + " path");
    if (!std::filesystem::is_regular_file(p)) {
        throw ConfigError(std::string(what) + " file not found: '" + p.string() + "'");
    }
}

double nhd_or_one(const std::vector<ContourPolyline>& a, const std::vector<ContourPolyline>& b) {
    if (vertex_count(a) == 0 || vertex_count(b) == 0) return 1.0;
    return normalized_hausdorff(a, b);
}

}  // namespace

SilhouetteMask mask_from_image(const ScalarField2D& image) {
    SilhouetteMask m(image.width(), image.height());
    for (int y = 0; y < image.height(); ++y) {
        for (int x = 0; x < image.width(); ++x) m.at(x, y) = image.at(x, y) != 0.0 ? 1.0 : 0.0;
    }
    return m;
}

SegmentationResult segment_instance(const SegmentationInput& in, const PipelineOptions& opt) {
    in.model.validate();
    in.corr.validate(in.source.size(), in.target.size());

    MatchProblem problem;
    problem.source = in.source;
    problem.target = in.target;
    problem.cost = in.cost;
    if (problem.cost.values.empty()) {
        problem.cost = {in.source.size(), in.target.size(),
                        std::vector<double>(in.source.size() * in.target.size(), 0.0)};
    }
    problem.epsilon = opt.epsilon > 0.0 ? opt.epsilon : default_epsilon(in.target);
    problem.validate();

    AffineMap pose = initial_alignment(in.source, in.target, in.corr);
    if (opt.refine_pose) pose = refine_alignment(problem, pose, opt.refine);

    const EdgeIndicatorField edges = edge_indicator(in.image, opt.sigma_g);
    const McacContext ctx{problem, in.model, edges};
    const McacState start = initial_state(pose, ctx);

    SegmentationResult r;
    r.optimizer = opt.optimizer;
    if (r.optimizer.tau == 0.0) r.optimizer = config_from_initial_energy(start.E, opt.tau_ratio, opt.optimizer);
    r.trajectory = run_mcac(start, ctx, r.optimizer);

    r.initial_pose = pose;
    r.final_pose = r.trajectory.back().pose;
    const ContourEvaluation first = evaluate_contour({in.model, r.initial_pose}, edges);
    const ContourEvaluation last = evaluate_contour({in.model, r.final_pose}, edges);
    r.initial_contour = first.contours;
    r.final_contour = last.contours;
    r.initial_mask = mask_from_field(first.phi);
    r.final_mask = mask_from_field(last.phi);

    if (in.truth) {
        r.initial_jaccard = jaccard(r.initial_mask, *in.truth);
        r.final_jaccard = jaccard(r.final_mask, *in.truth);
    }
    if (in.truth_contour) {
        r.nhd_initial = nhd_or_one(r.initial_contour, *in.truth_contour);
        r.nhd_final = nhd_or_one(r.final_contour, *in.truth_contour);
    }
    return r;
}

SegmentationResult segment(const PipelineConfig& cfg) {
    require_file(cfg.model, "model");
    require_file(cfg.image, "image");
    require_file(cfg.source_points, "source points");
    require_file(cfg.target_points, "target points");
    require_file(cfg.correspondences, "correspondences");
    if (!cfg.cost.empty()) require_file(cfg.cost, "cost");
    if (!cfg.truth_mask.empty()) require_file(cfg.truth_mask, "truth mask");

    SegmentationInput in;
    in.model = load_model(cfg.model);
    in.image = io::read_pgm(cfg.image);
    in.source = io::read_points_csv(cfg.source_points);
    in.target = io::read_points_csv(cfg.target_points);
    in.corr.pairs = io::read_pairs_csv(cfg.correspondences);
    if (!cfg.cost.empty()) {
        const ScalarField2D c = io::read_raw_field(cfg.cost);
        in.cost.rows = static_cast<std::size_t>(c.height());
        in.cost.cols = static_cast<std::size_t>(c.width());
        in.cost.values.assign(c.values().begin(), c.values().end());
    }
    if (!cfg.truth_mask.empty()) {
        in.truth = mask_from_image(io::read_pgm(cfg.truth_mask));
        if (!in.truth->same_shape(in.image)) throw DimensionMismatch("truth mask and image differ in size");
    }
    return segment_instance(in, cfg.options);
}

SegmentationInput input_from_synthetic(const RbfShapeModel& model, const synth::SynthInstance& inst) {
    SegmentationInput in;
    in.model = model;
    in.source = inst.source;
    in.target = inst.target;
    in.cost = inst.cost;
    in.corr = inst.corr;
    in.image = inst.image;
    in.truth = inst.truth;
    in.truth_contour = std::vector<ContourPolyline>{inst.truth_contour};
    return in;
}

std::vector<BatchRow> run_batch(const RbfShapeModel& model, const std::vector<synth::SynthInstance>& suite,
                                const PipelineOptions& opt) {
    std::vector<BatchRow> rows;
    rows.reserve(suite.size());
    for (std::size_t k = 0; k < suite.size(); ++k) {
        const SegmentationResult r = segment_instance(input_from_synthetic(model, suite[k]), opt);
        rows.push_back({static_cast<int>(k), *r.initial_jaccard, *r.final_jaccard, *r.nhd_initial, *r.nhd_final});
    }
    return rows;
}

void write_batch_csv(const std::filesystem::path& path, const std::vector<BatchRow>& rows) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << "instance,initial_jaccard,final_jaccard,nhd_initial,nhd_final\n";
    for (const BatchRow& r : rows) {
        out << r.instance << ',' << io::fmt(r.initial_jaccard) << ',' << io::fmt(r.final_jaccard) << ','
            << io::fmt(r.nhd_initial) << ',' << io::fmt(r.nhd_final) << '\n';
    }
}

std::vector<InvarianceRow> invariance_report(const RbfShapeModel& model, const ContourPolyline& truth_model_frame,
                                             int trials, std::uint64_t seed, const InvarianceOptions& opt) {
    if (trials < 1) throw InvalidArgument("invariance_report: trials must be >= 1");
    if (truth_model_frame.points.empty()) throw EmptyContour("invariance_report: empty ground-truth contour");
    model.validate();
    std::mt19937_64 rng(seed);
    const Vec2 center{0.5 * (opt.width - 1), 0.5 * (opt.height - 1)};
    std::vector<InvarianceRow> rows;
    for (int t = 0; t < trials; ++t) {
        AffineMap pose;
        ContourPolyline truth;
        for (int attempt = 0;; ++attempt) {
            if (attempt == 10000) throw InvalidArgument("invariance_report: shape does not fit the raster");
            pose = {synth::random_linear(rng, opt.det_lo, opt.det_hi), center};
            truth = transformed(truth_model_frame, pose);
            bool fits = true;
            for (const Point2& p : truth.points) {
                fits = fits && p.x >= opt.boundary_margin && p.y >= opt.boundary_margin &&
                       p.x <= opt.width - 1 - opt.boundary_margin && p.y <= opt.height - 1 - opt.boundary_margin;
            }
            if (fits) break;
        }
        const std::vector<ContourPolyline> gt{truth};
        const PosedShape s{model, pose};
        InvarianceRow row{t, 1.0, 1.0};
        for (const Representation rep : {Representation::Invariant, Representation::NonInvariant}) {
            double nhd = 1.0;
            try {
                nhd = nhd_or_one(extract_contour(rasterize(s, opt.width, opt.height, rep)), gt);
            } catch (const EmptyContour&) {
            }
            (rep == Representation::Invariant ? row.nhd_invariant : row.nhd_noninvariant) = nhd;
        }
        rows.push_back(row);
    }
    return rows;
}

void write_invariance_csv(const std::filesystem::path& path, const std::vector<InvarianceRow>& rows) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << "trial,nhd_invariant,nhd_noninvariant\n";
    for (const InvarianceRow& r : rows) {
        out << r.trial << ',' << io::fmt(r.nhd_invariant) << ',' << io::fmt(r.nhd_noninvariant) << '\n';
    }
}

}  // namespace mcac
