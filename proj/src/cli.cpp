#include <annulus/cli.hpp>

#include <annulus/error.hpp>
#include <annulus/evaluation.hpp>
#include <annulus/feature_table.hpp>
#include <annulus/features.hpp>
#include <annulus/ingest.hpp>
#include <annulus/io.hpp>
#include <annulus/model_io.hpp>
#include <annulus/parallel.hpp>
#include <annulus/plot.hpp>
#include <annulus/registration.hpp>
#include <annulus/selection.hpp>
#include <annulus/synth.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <cctype>
#include <algorithm>

namespace fs = std::filesystem;

namespace annulus {

namespace {

struct Options {
    std::uint64_t seed = 42;
    unsigned threads = 0;

    // extract / select / train / predict / evaluate
    std::string landmarks, features, out, out_dir, model_path, from;
    std::size_t k = 25;
    std::string model_kind = "both";
    int folds = 5;
    int holdout = 10;
    std::string selection = "per-fold";
    std::string grid = "default";

    // forest hyperparameters for train
    int n_estimators = ForestParams{}.n_estimators;
    std::string max_features = "sqrt";
    int max_depth = -1;
    int max_leaf_nodes = -1;

    // synth
    int n_per_class = 100;
    double noise_mm = 1.0;
    bool no_pose = false;
};

void require_file(const std::string& path, const char* what) {
    std::error_code ec;
    if (path.empty()) throw Error(ErrorKind::Input, std::string("missing ") + what);
    if (!fs::is_regular_file(path, ec)) throw Error(ErrorKind::Io, std::string(what) + " not found: " + path);
}

void prepare_output_file(const std::string& path) {
    if (path.empty()) throw Error(ErrorKind::Input, "missing --out");
    const fs::path parent = fs::path(path).parent_path();
    std::error_code ec;
    if (!parent.empty() && !fs::is_directory(parent, ec))
        throw Error(ErrorKind::Io, "output directory does not exist: " + parent.string());
}

fs::path prepare_output_dir(const std::string& dir) {
    if (dir.empty()) throw Error(ErrorKind::Input, "missing --out-dir");
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw Error(ErrorKind::Io, "cannot create output directory " + dir);
    return dir;
}

// Artifacts are fingerprinted by the command, its settings and the input bytes.
Provenance make_provenance(std::uint64_t seed, const std::string& canonical) {
    return {seed, config_hash(canonical)};
}

std::string input_hash(const std::string& path) { return config_hash(read_file(path)); }

int cmd_extract(const Options& o, std::ostream& out, std::ostream& err) {
    require_file(o.landmarks, "--landmarks");
    prepare_output_file(o.out);

    std::vector<PatientError> problems;
    const auto sets = load_dataset(o.landmarks, problems);
    std::vector<FeatureVector> rows(sets.size());
    std::vector<std::optional<Error>> failures(sets.size());
    parallel_for(sets.size(), o.threads, [&](std::size_t i) {
        try {
            rows[i] = extract_features(sets[i]);
        } catch (const Error& e) {
            failures[i] = e;
        }
    });

    std::optional<ErrorKind> worst;
    for (const auto& p : problems) {
        err << "error: patient " << p.patient_id << ": " << p.message << '\n';
        worst = ErrorKind::Schema;
    }
    std::vector<FeatureVector> good;
    for (std::size_t i = 0; i < sets.size(); ++i) {
        if (failures[i]) {
            err << "error: patient " << sets[i].patient_id << ": " << failures[i]->what() << '\n';
            if (!worst) worst = failures[i]->kind();
        } else {
            good.push_back(std::move(rows[i]));
        }
    }

    const auto prov = make_provenance(o.seed, "extract;input=" + input_hash(o.landmarks));
    write_feature_table(o.out, make_feature_table(good), prov);
    out << "extracted " << good.size() << " of " << sets.size() + problems.size() << " patients -> " << o.out << '\n';
    return worst ? exit_code(*worst) : 0;
}

int cmd_select(const Options& o, std::ostream& out) {
    require_file(o.features, "--features");
    prepare_output_file(o.out);
    const auto table = read_feature_table(o.features);
    if (table.rows() == 0) throw Error(ErrorKind::Data, "feature table is empty");
    const auto result = mrmr_select(table.values, table.labels, table.names, o.k);
    const auto prov = make_provenance(
        o.seed, "select;k=" + std::to_string(o.k) + ";input=" + input_hash(o.features));
    write_file_atomic(o.out, format_selection_report(result, prov));
    for (std::size_t i = 0; i < result.k(); ++i) out << i + 1 << ' ' << result.ranked[i].name << '\n';
    return 0;
}

ForestParams forest_params(const Options& o) {
    ForestParams p;
    p.n_estimators = o.n_estimators;
    p.max_features = parse_max_features(o.max_features);
    p.max_depth = o.max_depth;
    p.max_leaf_nodes = o.max_leaf_nodes;
    if (p.n_estimators < 1) throw Error(ErrorKind::Input, "--n-estimators must be positive");
    if (p.max_depth == 0 || p.max_depth < -1) throw Error(ErrorKind::Input, "--max-depth must be positive or -1");
    if (p.max_leaf_nodes == 0 || p.max_leaf_nodes == 1 || p.max_leaf_nodes < -1)
        throw Error(ErrorKind::Input, "--max-leaf-nodes must be >= 2 or -1");
    return p;
}

int cmd_train(const Options& o, std::ostream& out) {
    require_file(o.features, "--features");
    prepare_output_file(o.out);
    if (o.model_kind != "lda" && o.model_kind != "rf") throw Error(ErrorKind::Input, "--model must be lda or rf");
    const auto table = read_feature_table(o.features);
    const auto positives = (table.labels.array() == 1).count();
    if (positives == 0 || positives == table.rows()) throw Error(ErrorKind::Data, "dataset contains a single class");

    PipelineConfig config;
    config.k = o.k;
    config.seed = o.seed;
    config.threads = o.threads;
    config.run_lda = o.model_kind == "lda";
    config.run_rf = o.model_kind == "rf";
    std::optional<ForestParams> fp;
    if (config.run_rf) fp = forest_params(o);

    std::vector<int> rows(table.rows());
    for (int i = 0; i < table.rows(); ++i) rows[i] = i;

    SavedModel model;
    model.kind = o.model_kind;
    model.pipeline = fit_pipeline(table, rows, config, fp);
    model.provenance = make_provenance(o.seed, "train;" + config.canonical() + (fp ? ";" + fp->describe() : "") +
                                                   ";input=" + input_hash(o.features));
    save_model(o.out, model);
    out << "trained " << o.model_kind << " on " << table.rows() << " patients, " << o.k << " features -> " << o.out
        << '\n';
    return 0;
}

int cmd_predict(const Options& o, std::ostream& out) {
    require_file(o.model_path, "--model-file");
    require_file(o.features, "--features");
    prepare_output_file(o.out);
    auto model = load_model(o.model_path);
    const auto table = read_feature_table(o.features);
    bind_columns(model.pipeline, table.names);
    const Prediction pred =
        model.kind == "lda" ? model.pipeline.predict_lda(table.values) : model.pipeline.predict_rf(table.values);

    std::string csv = "# " + model.provenance.tag() + "\npatient_id,label,predicted,score\n";
    for (Eigen::Index i = 0; i < table.rows(); ++i)
        csv += table.patient_ids[i] + ',' + std::to_string(table.labels(i)) + ',' + std::to_string(pred.labels(i)) +
               ',' + format_double(pred.scores(i)) + '\n';
    write_file_atomic(o.out, csv);
    out << "predicted " << table.rows() << " patients -> " << o.out << '\n';
    return 0;
}

// Sanitised file stem for a feature family.
std::string family_stem(const std::string& name) {
    std::string s = family_label(name);
    std::string out;
    for (char c : s) out += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
    while (!out.empty() && out.back() == '_') out.pop_back();
    return out;
}

// Top features by RF importance (or |LDA| when no forest), one per family.
std::vector<std::string> profile_features(const FittedPipeline& p, std::size_t count) {
    const auto names = p.selection.names();
    Eigen::VectorXd weight;
    if (p.forest) weight = rf_feature_importance(*p.forest);
    else if (p.lda) weight = p.lda->coefficients.cwiseAbs();
    else return {};
    std::vector<int> order(names.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return weight(a) > weight(b); });

    std::vector<std::string> out, seen;
    for (int i : order) {
        const auto fam = family_label(names[i]);
        if (std::find(seen.begin(), seen.end(), fam) != seen.end()) continue;
        seen.push_back(fam);
        out.push_back(names[i]);
        if (out.size() == count) break;
    }
    return out;
}

int cmd_evaluate(const Options& o, std::ostream& out) {
    require_file(o.features, "--features");
    if (o.model_kind != "lda" && o.model_kind != "rf" && o.model_kind != "both")
        throw Error(ErrorKind::Input, "--model must be lda, rf or both");
    PipelineConfig config;
    config.k = o.k;
    config.folds = o.folds;
    config.holdout_per_class = o.holdout;
    config.seed = o.seed;
    config.selection = parse_selection_mode(o.selection);
    config.grid = o.grid;
    config.threads = o.threads;
    config.run_lda = o.model_kind != "rf";
    config.run_rf = o.model_kind != "lda";
    grid_preset(config.grid); // validate before any work
    const fs::path dir = prepare_output_dir(o.out_dir);

    const auto table = read_feature_table(o.features);
    const auto prov = make_provenance(o.seed, "evaluate;" + config.canonical() + ";input=" + input_hash(o.features));
    const CvReport report = run_cv(table, config);

    write_file_atomic(dir / "metrics.csv", format_metrics_report(report, prov));
    write_file_atomic(dir / "selection.csv", format_selection_report(report.final_pipeline.selection, prov));
    write_file_atomic(dir / "features_report.csv", format_feature_report(report, table, prov));
    if (report.grid) write_file_atomic(dir / "rf_grid.csv", format_grid_report(*report.grid, prov));
    if (report.final_pipeline.lda)
        write_file_atomic(dir / "lda_scatter.svg", lda_scatter_svg(table, report.final_pipeline, prov));
    for (const auto& name : profile_features(report.final_pipeline, 3))
        write_file_atomic(dir / ("profile_" + family_stem(name) + ".svg"), family_profile_svg(table, name, prov));

    nlohmann::ordered_json run = {
        {"tool", kToolName},
        {"version", kToolVersion},
        {"seed", o.seed},
        {"config", prov.config_hash},
        {"features", fs::path(o.features).filename().string()},
        {"patients", table.rows()},
        {"k", config.k},
        {"folds", config.folds},
        {"holdout_per_class", config.holdout_per_class},
        {"selection", to_string(config.selection)},
        {"grid", config.grid},
        {"models", o.model_kind}};
    if (report.grid) run["rf_params"] = report.grid->best_params().describe();
    write_file_atomic(dir / "run.json", run.dump(1) + "\n");

    out << format_metrics_table(report);
    return 0;
}

int cmd_synth(const Options& o, std::ostream& out) {
    if (o.n_per_class < 1) throw Error(ErrorKind::Input, "--n-per-class must be positive");
    if (!(o.noise_mm >= 0)) throw Error(ErrorKind::Input, "--noise-mm must be >= 0");
    const fs::path dir = prepare_output_dir(o.out_dir);

    CohortSpec no_mr = default_no_mr_spec(), mr = default_mr_spec();
    for (auto* s : {&no_mr, &mr}) {
        s->n = o.n_per_class;
        s->noise_mm = o.noise_mm;
        s->random_pose = !o.no_pose;
    }
    nlohmann::ordered_json spec = {{"seed", o.seed},
                                   {"no_mr", nlohmann::json::parse(describe_spec(no_mr))},
                                   {"mr", nlohmann::json::parse(describe_spec(mr))}};
    const auto prov = make_provenance(o.seed, "synth;" + spec.dump());
    const auto cohort = generate_cohorts(no_mr, mr, o.seed);

    spec["provenance"] = prov.tag();
    save_dataset(dir / "landmarks.json", cohort.landmarks, &prov);
    write_feature_table(dir / "features_gt.csv", make_feature_table(cohort.ground_truth), prov, "gt_");
    write_file_atomic(dir / "cohort_spec.json", spec.dump(1) + "\n");
    out << "synthesised " << cohort.landmarks.size() << " patients -> " << dir.string() << '\n';
    return 0;
}

std::string registered_geometry_csv(const std::vector<LandmarkSet>& sets, const Provenance& prov, std::ostream& err,
                                    std::optional<ErrorKind>& worst) {
    std::string csv = "# " + prov.tag() + "\n";
    csv += "patient_id,label,phase,point,x,y,z,signed_distance,normal_x,normal_y,normal_z,a,b,theta\n";
    for (const auto& set : sets) {
        RegisteredPatient reg;
        try {
            reg = register_patient(set);
        } catch (const Error& e) {
            err << "error: patient " << set.patient_id << ": " << e.what() << '\n';
            if (!worst) worst = e.kind();
            continue;
        }
        for (const auto& ph : reg)
            for (std::size_t i = 0; i < kNumPoints; ++i) {
                csv += set.patient_id + ',' + std::to_string(static_cast<int>(set.label)) + ",CP" +
                       std::to_string(ph.phase) + ',' + point_name(i);
                for (int c = 0; c < 3; ++c) csv += ',' + format_double(ph.points3d(i, c));
                csv += ',' + format_double(ph.signed_distances(i));
                for (int c = 0; c < 3; ++c) csv += ',' + format_double(ph.plane.normal(c));
                csv += ',' + format_double(ph.ellipse.a) + ',' + format_double(ph.ellipse.b) + ',' +
                       format_double(ph.ellipse.theta) + '\n';
            }
    }
    return csv;
}

int cmd_report(const Options& o, std::ostream& out, std::ostream& err) {
    const fs::path dir = o.from;
    std::error_code ec;
    if (o.from.empty() || !fs::is_directory(dir, ec)) throw Error(ErrorKind::Io, "not a directory: " + o.from);

    std::optional<ErrorKind> worst;
    bool found = false;
    const auto prov = make_provenance(o.seed, "report;dir=" + dir.filename().string());

    if (fs::is_regular_file(dir / "metrics.csv")) {
        found = true;
        out << "== metrics ==\n";
        for (const auto& line : [&] {
                 std::vector<std::string> lines;
                 std::istringstream in(read_file(dir / "metrics.csv"));
                 for (std::string l; std::getline(in, l);) lines.push_back(l);
                 return lines;
             }())
            out << line << '\n';
    }

    if (fs::is_regular_file(dir / "landmarks.json")) {
        found = true;
        std::vector<PatientError> problems;
        const auto sets = load_dataset(dir / "landmarks.json", problems);
        for (const auto& p : problems) {
            err << "error: patient " << p.patient_id << ": " << p.message << '\n';
            worst = ErrorKind::Schema;
        }
        write_file_atomic(dir / "registered_geometry.csv", registered_geometry_csv(sets, prov, err, worst));
        out << "registered geometry for " << sets.size() << " patients -> "
            << (dir / "registered_geometry.csv").string() << '\n';
    }

    for (const char* name : {"features.csv", "features_gt.csv"}) {
        if (!fs::is_regular_file(dir / name)) continue;
        found = true;
        const auto table = read_feature_table(dir / name);
        out << "== " << name << ": " << table.rows() << " patients, " << table.cols() << " features ==\n";
        for (const char* feature : {"area_CP0", "height_CP0", "a_CP0", "u_mag.P2.CP5-0"}) {
            const auto stem = family_stem(feature);
            write_file_atomic(dir / ("profile_" + stem + ".svg"), family_profile_svg(table, feature, prov));
        }
        break;
    }

    if (!found) throw Error(ErrorKind::Io, "nothing to report in " + dir.string());
    return worst ? exit_code(*worst) : 0;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Mitral annulus geometry features and MR classification"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--seed", o.seed, "Seed for every random draw")->capture_default_str();
        sub->add_option("--threads", o.threads, "Worker threads (0 = all cores)")->capture_default_str();
    };

    auto* extract = app.add_subcommand("extract", "Landmarks -> 187-feature CSV");
    extract->add_option("--landmarks", o.landmarks, "Landmark JSON file")->required();
    extract->add_option("--out", o.out, "Output CSV")->required();
    add_common(extract);

    auto* select = app.add_subcommand("select", "MRMR ranking of a feature CSV");
    select->add_option("--features", o.features, "Feature CSV")->required();
    select->add_option("--k", o.k, "Number of features")->capture_default_str();
    select->add_option("--out", o.out, "Output CSV")->required();
    add_common(select);

    auto* train = app.add_subcommand("train", "Fit selection + one model on every row");
    train->add_option("--features", o.features, "Feature CSV")->required();
    train->add_option("--model", o.model_kind, "lda or rf")->required();
    train->add_option("--k", o.k, "Number of features")->capture_default_str();
    train->add_option("--out", o.out, "Output model JSON")->required();
    train->add_option("--n-estimators", o.n_estimators)->capture_default_str();
    train->add_option("--max-features", o.max_features, "sqrt, log2 or all")->capture_default_str();
    train->add_option("--max-depth", o.max_depth, "-1 = unlimited")->capture_default_str();
    train->add_option("--max-leaf-nodes", o.max_leaf_nodes, "-1 = unlimited")->capture_default_str();
    add_common(train);

    auto* predict = app.add_subcommand("predict", "Apply a trained model to a feature CSV");
    predict->add_option("--model-file", o.model_path, "Model JSON from train")->required();
    predict->add_option("--features", o.features, "Feature CSV")->required();
    predict->add_option("--out", o.out, "Output CSV")->required();
    add_common(predict);

    auto* evaluate = app.add_subcommand("evaluate", "Stratified CV + holdout test of LDA and RF");
    evaluate->add_option("--features", o.features, "Feature CSV")->required();
    evaluate->add_option("--k", o.k, "Number of features")->capture_default_str();
    evaluate->add_option("--folds", o.folds)->capture_default_str();
    evaluate->add_option("--holdout", o.holdout, "Holdout rows per class")->capture_default_str();
    evaluate->add_option("--selection", o.selection, "per-fold or global")->capture_default_str();
    evaluate->add_option("--grid", o.grid, "RF grid preset: default or quick")->capture_default_str();
    evaluate->add_option("--model", o.model_kind, "lda, rf or both")->capture_default_str();
    evaluate->add_option("--out-dir", o.out_dir, "Report directory")->required();
    add_common(evaluate);

    auto* synth = app.add_subcommand("synth", "Generate a synthetic two-cohort landmark dataset");
    synth->add_option("--n-per-class", o.n_per_class)->capture_default_str();
    synth->add_option("--noise-mm", o.noise_mm, "Landmark noise std")->capture_default_str();
    synth->add_flag("--no-pose", o.no_pose, "Keep patients in the canonical frame");
    synth->add_option("--out-dir", o.out_dir, "Output directory")->required();
    add_common(synth);

    auto* report = app.add_subcommand("report", "Summaries, plots and registered geometry for a run directory");
    report->add_option("--from", o.from, "Directory written by evaluate or synth")->required();
    add_common(report);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, out, err);
            return 0;
        }
        app.exit(e, out, err);
        return exit_code(ErrorKind::Input);
    }

    try {
        if (*extract) return cmd_extract(o, out, err);
        if (*select) return cmd_select(o, out);
        if (*train) return cmd_train(o, out);
        if (*predict) return cmd_predict(o, out);
        if (*evaluate) return cmd_evaluate(o, out);
        if (*synth) return cmd_synth(o, out);
        if (*report) return cmd_report(o, out, err);
    } catch (const Error& e) {
        err << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

} // namespace annulus
