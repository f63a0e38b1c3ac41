#include "peergrade/cli.hpp"

#include <CLI11.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

#include "peergrade/error.hpp"
#include "peergrade/format.hpp"
#include "peergrade/ingest.hpp"
#include "peergrade/peerrank.hpp"
#include "peergrade/report_io.hpp"
#include "peergrade/simulate.hpp"
#include "peergrade/validity.hpp"
#include "peergrade/weighting.hpp"

namespace fs = std::filesystem;

namespace peergrade {

namespace {

    std::string read_file(const std::string& path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            throw Error(ErrorCode::Io, "cannot read " + path);
        }
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    }

    void write_file(const fs::path& path, const std::string& content)
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot write " + path.string());
        }
        out << content;
    }

    std::string sha256_hex(const std::string& data)
    {
        unsigned char digest[EVP_MAX_MD_SIZE];
        unsigned int length = 0;
        if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
            throw std::runtime_error("sha256 failed");
        }
        static constexpr char kHex[] = "0123456789abcdef";
        std::string out;
        for (unsigned int i = 0; i < length; ++i) {
            out += kHex[digest[i] >> 4];
            out += kHex[digest[i] & 0xF];
        }
        return out;
    }

    std::string utc_timestamp()
    {
        const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        std::tm tm{};
        gmtime_r(&now, &tm);
        char buf[32];
        std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
        return buf;
    }

    std::string lowercase(std::string_view s)
    {
        std::string out(s);
        std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
        return out;
    }

    /// Command, resolved parameters and input digests of one run.
    class RunManifest {
    public:
        explicit RunManifest(std::string command)
            : command_(std::move(command))
        {
        }

        void param(const std::string& key, const std::string& value) { params_.emplace_back(key, value); }

        void input(const std::string& name, const std::string& path, const std::string& content)
        {
            inputs_.emplace_back(name, path + " sha256=" + sha256_hex(content));
        }

        [[nodiscard]] std::string render() const
        {
            std::string out = "command=" + command_ + '\n';
            out += "tool_version=" + std::string(kToolVersion) + '\n';
            out += "timestamp=" + utc_timestamp() + '\n';
            for (const auto& [k, v] : params_) out += "param." + k + '=' + v + '\n';
            for (const auto& [k, v] : inputs_) out += "input." + k + '=' + v + '\n';
            return out;
        }

    private:
        std::string command_;
        std::vector<std::pair<std::string, std::string>> params_;
        std::vector<std::pair<std::string, std::string>> inputs_;
    };

    struct InputPaths {
        std::string reviews;
        std::string essays;
        std::string instructor;
        std::string engagement;
        std::string quizzes;
        std::size_t min_reviews = 3;
        std::optional<int> total_quizzes;
        std::string quiz_denominator = "total";
    };

    void add_input_options(CLI::App& cmd, InputPaths& in, bool instructor_required)
    {
        cmd.add_option("--reviews", in.reviews, "reviews.csv")->required();
        cmd.add_option("--essays", in.essays, "essays.csv (authorship)")->required();
        auto* instructor = cmd.add_option("--instructor", in.instructor, "instructor.csv");
        if (instructor_required) instructor->required();
        cmd.add_option("--engagement", in.engagement, "engagement.csv");
        cmd.add_option("--quizzes", in.quizzes, "quizzes.csv");
        cmd.add_option("--min-reviews", in.min_reviews, "essays with fewer reviews are excluded")
            ->capture_default_str();
        cmd.add_option("--total-quizzes", in.total_quizzes, "course quiz count (default: distinct quiz ids)");
        cmd.add_option("--quiz-denominator", in.quiz_denominator, "total|attempted")
            ->check(CLI::IsMember({ "total", "attempted" }))
            ->capture_default_str();
    }

    struct LoadedInputs {
        ReviewDataset dataset;
        std::vector<std::pair<std::string, RowError>> row_errors;
        WeightOptions weight_options;
    };

    // Parses every file before anything is written, so schema errors leave no output.
    LoadedInputs load_inputs(const InputPaths& in, RunManifest& manifest)
    {
        LoadedInputs loaded;
        auto collect = [&](const std::string& file, const std::vector<RowError>& errors) {
            for (const auto& e : errors) loaded.row_errors.emplace_back(file, e);
        };
        const auto reviews_text = read_file(in.reviews);
        manifest.input("reviews", in.reviews, reviews_text);
        auto reviews = parse_reviews(reviews_text);
        collect("reviews", reviews.errors);

        const auto essays_text = read_file(in.essays);
        manifest.input("essays", in.essays, essays_text);
        auto essays = parse_essays(essays_text);
        collect("essays", essays.errors);

        InstructorRubrics instructor;
        if (!in.instructor.empty()) {
            const auto text = read_file(in.instructor);
            manifest.input("instructor", in.instructor, text);
            auto parsed = parse_instructor(text);
            collect("instructor", parsed.errors);
            instructor = std::move(parsed.value);
        }
        EngagementTable engagement;
        if (!in.engagement.empty()) {
            const auto text = read_file(in.engagement);
            manifest.input("engagement", in.engagement, text);
            auto parsed = parse_engagement(text);
            collect("engagement", parsed.errors);
            engagement = std::move(parsed.value);
        }
        PerformanceTable performance;
        if (!in.quizzes.empty()) {
            const auto text = read_file(in.quizzes);
            manifest.input("quizzes", in.quizzes, text);
            auto parsed = parse_quizzes(text, in.total_quizzes);
            collect("quizzes", parsed.errors);
            performance = std::move(parsed.value);
        }

        BuildOptions options;
        options.min_reviews = in.min_reviews;
        options.require_instructor = !in.instructor.empty();
        loaded.dataset = build_dataset(reviews.value, essays.value, instructor, std::move(engagement),
                                       std::move(performance), options);
        loaded.weight_options.quiz_denominator = in.quiz_denominator == "attempted"
            ? QuizDenominator::AttemptedQuizzes
            : QuizDenominator::TotalQuizzes;

        manifest.param("min_reviews", std::to_string(in.min_reviews));
        manifest.param("total_quizzes", in.total_quizzes ? std::to_string(*in.total_quizzes) : "auto");
        manifest.param("quiz_denominator", in.quiz_denominator);
        return loaded;
    }

    void write_dataset_outputs(const fs::path& dir, const LoadedInputs& loaded)
    {
        write_file(dir / "exclusions.csv", exclusions_csv(loaded.dataset));
        write_file(dir / "diagnostics.csv", dataset_diagnostics_csv(loaded.dataset));
        write_file(dir / "row_errors.csv", row_errors_csv(loaded.row_errors));
    }

    std::vector<AggregationMethod> resolve_methods(const std::vector<std::string>& names)
    {
        if (names.empty()) return { std::begin(kAllMethods), std::end(kAllMethods) };
        std::vector<AggregationMethod> out;
        for (const auto& n : names) {
            auto m = parse_method(n);
            if (!m) throw Error(ErrorCode::InvalidConfig, "unknown method '" + n + "'");
            out.push_back(*m);
        }
        return out;
    }

    std::vector<WeightScheme> resolve_schemes(const std::vector<std::string>& names)
    {
        if (names.empty()) return { std::begin(kAllSchemes), std::end(kAllSchemes) };
        std::vector<WeightScheme> out;
        for (const auto& n : names) {
            auto s = parse_scheme(n);
            if (!s) throw Error(ErrorCode::InvalidConfig, "unknown scheme '" + n + "'");
            out.push_back(*s);
        }
        return out;
    }

    template <typename T>
    std::string join_names(const std::vector<T>& items)
    {
        std::string out;
        for (std::size_t i = 0; i < items.size(); ++i) {
            if (i) out += ',';
            out += to_string(items[i]);
        }
        return out;
    }

    // ---- aggregate ----------------------------------------------------------

    struct AggregateArgs {
        InputPaths in;
        std::string method = "MEDIAN";
        std::string scheme = "NONE";
        std::string out_dir;
    };

    int cmd_aggregate(const AggregateArgs& args, std::ostream& out)
    {
        const auto method = parse_method(args.method);
        if (!method) throw Error(ErrorCode::InvalidConfig, "unknown method '" + args.method + "'");
        const auto scheme = parse_scheme(args.scheme);
        if (!scheme) throw Error(ErrorCode::InvalidConfig, "unknown scheme '" + args.scheme + "'");

        RunManifest manifest("aggregate");
        manifest.param("method", std::string(to_string(*method)));
        manifest.param("scheme", std::string(to_string(*scheme)));
        auto loaded = load_inputs(args.in, manifest);

        std::string grades = "essay_id,aggregated_grade,method,scheme,diagnostics\n";
        for (const auto& essay : loaded.dataset.essays) {
            const GradeSample sample(essay.peer_grades());
            const auto raters = essay.rater_ids();
            std::vector<std::string> flags;
            AggregateResult result;
            if (*scheme == WeightScheme::None) {
                result = aggregate(sample, *method);
            } else {
                auto weights = weights_for_raters(raters, *scheme, loaded.dataset.engagement,
                                                  loaded.dataset.performance, loaded.weight_options);
                result = aggregate(sample, *method, weights.weights);
                if (!weights.missing_records.empty()) flags.emplace_back("MISSING_RECORD");
            }
            for (auto f : result.diagnostics) flags.emplace_back(to_string(f));
            std::string joined;
            for (std::size_t i = 0; i < flags.size(); ++i) {
                if (i) joined += ';';
                joined += flags[i];
            }
            grades += essay.essay_id + ',' + format_double(result.value) + ',' + std::string(to_string(*method)) + ','
                + std::string(to_string(*scheme)) + ',' + joined + '\n';
        }

        const fs::path dir(args.out_dir);
        fs::create_directories(dir);
        write_file(dir / "grades.csv", grades);
        write_dataset_outputs(dir, loaded);
        write_file(dir / "manifest.txt", manifest.render());
        out << "aggregated " << loaded.dataset.essays.size() << " essays, excluded "
            << loaded.dataset.exclusions.size() << '\n';
        return 0;
    }

    // ---- validate -----------------------------------------------------------

    struct ValidateArgs {
        InputPaths in;
        std::vector<std::string> methods;
        std::vector<std::string> schemes;
        std::string out_dir;
        PlotOptions plot;
    };

    void write_report_files(const fs::path& dir, const ValidityReport& report,
                            std::span<const AggregationMethod> methods, const PlotOptions& plot)
    {
        write_file(dir / "grid.csv", grid_csv(report));
        write_file(dir / "report.txt", report_text(report));
        write_file(dir / "scores.csv", scores_csv(report));
        for (auto m : methods) {
            const auto name = lowercase(to_string(m));
            write_file(dir / ("histogram_" + name + ".csv"), histogram_csv(report, m, plot.bin_width));
            write_file(dir / ("boxplot_" + name + ".csv"), five_number_csv(report, m));
        }
        write_file(dir / "histogram_instructor.csv", instructor_histogram_csv(report, plot.bin_width));
        write_file(dir / "boxplot_instructor.csv", instructor_five_number_csv(report));
    }

    int cmd_validate(const ValidateArgs& args, std::ostream& out)
    {
        const auto methods = resolve_methods(args.methods);
        const auto schemes = resolve_schemes(args.schemes);
        RunManifest manifest("validate");
        manifest.param("methods", join_names(methods));
        manifest.param("schemes", join_names(schemes));
        manifest.param("bin_width", format_double(args.plot.bin_width));
        manifest.param("bin_origin", format_double(args.plot.bin_origin));
        auto loaded = load_inputs(args.in, manifest);
        const auto report = build_validity_report(loaded.dataset, methods, schemes, loaded.weight_options, args.plot);

        const fs::path dir(args.out_dir);
        fs::create_directories(dir);
        write_report_files(dir, report, methods, args.plot);
        write_dataset_outputs(dir, loaded);
        write_file(dir / "manifest.txt", manifest.render());
        out << grid_csv(report);
        return 0;
    }

    // ---- peerrank -----------------------------------------------------------

    struct PeerRankArgs {
        InputPaths in;
        double alpha = 0.2;
        double beta = kDefaultGeneralizedBeta;
        double tolerance = 1e-6;
        int max_iterations = 1000;
        std::optional<double> initial_grade;
        std::string out_dir;
    };

    int cmd_peerrank(const PeerRankArgs& args, std::ostream& out)
    {
        PeerRankConfig plain;
        plain.alpha = args.alpha;
        plain.beta = 0.0;
        plain.tolerance = args.tolerance;
        plain.max_iterations = args.max_iterations;
        plain.initial_grade = args.initial_grade;
        PeerRankConfig generalized = plain;
        generalized.beta = args.beta;
        plain.validate();
        generalized.validate();

        RunManifest manifest("peerrank");
        manifest.param("alpha", format_double(args.alpha));
        manifest.param("beta", format_double(args.beta));
        manifest.param("tolerance", format_double(args.tolerance));
        manifest.param("max_iterations", std::to_string(args.max_iterations));
        manifest.param("initial_grade", args.initial_grade ? format_double(*args.initial_grade) : "mean");
        auto loaded = load_inputs(args.in, manifest);
        const auto& essays = loaded.dataset.essays;

        // Node j is retained essay j and its author; reviews from students
        // without a retained essay have no rank to weight them and are dropped.
        std::map<StudentId, std::size_t> node_of_author;
        for (std::size_t j = 0; j < essays.size(); ++j) {
            if (!essays[j].author_id.empty()) node_of_author.emplace(essays[j].author_id, j);
        }
        GradeMatrix matrix(essays.size());
        std::size_t dropped = 0;
        for (std::size_t j = 0; j < essays.size(); ++j) {
            for (const auto& review : essays[j].reviews) {
                auto it = node_of_author.find(review.rater_id);
                if (it == node_of_author.end()) {
                    ++dropped;
                    continue;
                }
                matrix.add(it->second, j, review.grade / 10.0);
            }
        }
        const auto plain_result = peerrank(matrix, plain);
        const auto generalized_result = peerrank(matrix, generalized);
        const auto plain_grades = peerrank_to_grades(plain_result);
        const auto generalized_grades = peerrank_to_grades(generalized_result);

        std::string table = "essay_id,author_id,peerrank,generalized_peerrank\n";
        for (std::size_t j = 0; j < essays.size(); ++j) {
            table += essays[j].essay_id + ',' + essays[j].author_id + ',' + format_double(plain_grades[j]) + ','
                + format_double(generalized_grades[j]) + '\n';
        }
        std::string summary;
        auto describe = [&](const std::string& name, const PeerRankResult& r, const std::vector<double>& grades) {
            summary += name + ".iterations=" + std::to_string(r.iterations_used) + '\n';
            summary += name + ".converged=" + std::string(r.converged ? "true" : "false") + '\n';
            summary += name + ".final_delta=" + format_double(r.trajectory_max_delta) + '\n';
            if (!args.in.instructor.empty()) {
                std::vector<double> instructor;
                for (const auto& e : essays) instructor.push_back(*e.instructor_grade);
                std::string r_text = "nan";
                try {
                    r_text = format_double(pearson(grades, instructor));
                } catch (const Error& e) {
                    if (e.code() != ErrorCode::ConstantVector && e.code() != ErrorCode::TooFewValues) throw;
                }
                summary += name + ".r=" + r_text + '\n';
            }
        };
        summary += "essays=" + std::to_string(essays.size()) + '\n';
        summary += "dropped_reviews=" + std::to_string(dropped) + '\n';
        describe("peerrank", plain_result, plain_grades);
        describe("generalized", generalized_result, generalized_grades);

        const fs::path dir(args.out_dir);
        fs::create_directories(dir);
        write_file(dir / "peerrank.csv", table);
        write_file(dir / "summary.txt", summary);
        write_dataset_outputs(dir, loaded);
        write_file(dir / "manifest.txt", manifest.render());
        out << summary;
        return 0;
    }

    // ---- simulate -----------------------------------------------------------

    struct SimulateArgs {
        std::string config_path;
        std::map<std::string, std::string> overrides;
        std::size_t replications = 1;
        std::string out_dir;
        bool export_csv = false;
        std::vector<std::string> methods;
        std::vector<std::string> schemes;
        std::size_t threads = 1;
        PlotOptions plot;
    };

    std::string replication_dir(std::size_t r)
    {
        auto digits = std::to_string(r);
        return "replication_" + std::string(digits.size() < 3 ? 3 - digits.size() : 0, '0') + digits;
    }

    int cmd_simulate(const SimulateArgs& args, std::ostream& out)
    {
        CohortConfig config;
        RunManifest manifest("simulate");
        if (!args.config_path.empty()) {
            const auto text = read_file(args.config_path);
            manifest.input("config", args.config_path, text);
            apply_config_text(config, text);
        }
        for (const auto& [key, value] : args.overrides) set_config_value(config, key, value);
        config.validate();
        if (args.replications < 1) throw Error(ErrorCode::InvalidConfig, "--replications must be at least 1");

        ExperimentOptions options;
        options.methods = resolve_methods(args.methods);
        options.schemes = resolve_schemes(args.schemes);
        options.plot = args.plot;
        options.threads = args.threads;

        manifest.param("replications", std::to_string(args.replications));
        manifest.param("methods", join_names(options.methods));
        manifest.param("schemes", join_names(options.schemes));
        manifest.param("rng", std::string(kRngAlgorithm));
        manifest.param("seed_derivation", "seed + replication index");
        std::istringstream config_lines(config_to_text(config));
        for (std::string line; std::getline(config_lines, line);) {
            const auto eq = line.find('=');
            manifest.param("config." + line.substr(0, eq), line.substr(eq + 1));
        }

        const auto reports = run_experiment(config, args.replications, options);

        const fs::path dir(args.out_dir);
        fs::create_directories(dir);
        for (std::size_t r = 0; r < reports.size(); ++r) {
            const fs::path rep_dir = dir / replication_dir(r);
            fs::create_directories(rep_dir);
            write_file(rep_dir / "grid.csv", grid_csv(reports[r]));
            write_file(rep_dir / "report.txt", report_text(reports[r]));
            if (args.export_csv) {
                CohortConfig replica = config;
                replica.seed = config.seed + r;
                const auto files = export_cohort(generate_cohort(replica));
                const fs::path cohort_dir = rep_dir / "cohort";
                fs::create_directories(cohort_dir);
                write_file(cohort_dir / "reviews.csv", files.reviews);
                write_file(cohort_dir / "essays.csv", files.essays);
                write_file(cohort_dir / "instructor.csv", files.instructor);
                write_file(cohort_dir / "engagement.csv", files.engagement);
                write_file(cohort_dir / "quizzes.csv", files.quizzes);
            }
        }
        const auto summary = summary_csv(reports);
        write_file(dir / "summary.csv", summary);
        write_file(dir / "config.txt", config_to_text(config));
        write_file(dir / "manifest.txt", manifest.render());
        out << summary;
        return 0;
    }

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{ "Peer-grade aggregation, validity analysis, PeerRank baselines and cohort simulation" };
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    std::function<int()> action;

    AggregateArgs aggregate_args;
    auto* aggregate_cmd = app.add_subcommand("aggregate", "aggregate peer grades per essay");
    add_input_options(*aggregate_cmd, aggregate_args.in, false);
    aggregate_cmd->add_option("--method", aggregate_args.method, "ARITHMETIC_MEAN|GEOMETRIC_MEAN|HARMONIC_MEAN|MEDIAN")
        ->capture_default_str();
    aggregate_cmd->add_option("--scheme", aggregate_args.scheme, "NONE|ENGAGEMENT|PERFORMANCE")->capture_default_str();
    aggregate_cmd->add_option("--out-dir", aggregate_args.out_dir)->required();
    aggregate_cmd->callback([&] { action = [&] { return cmd_aggregate(aggregate_args, out); }; });

    ValidateArgs validate_args;
    auto* validate_cmd = app.add_subcommand("validate", "correlate aggregated grades with instructor grades");
    add_input_options(*validate_cmd, validate_args.in, true);
    validate_cmd->add_option("--methods", validate_args.methods, "comma list, default all four")->delimiter(',');
    validate_cmd->add_option("--schemes", validate_args.schemes, "comma list, default all three")->delimiter(',');
    validate_cmd->add_option("--bin-width", validate_args.plot.bin_width)->capture_default_str();
    validate_cmd->add_option("--bin-origin", validate_args.plot.bin_origin)->capture_default_str();
    validate_cmd->add_option("--out-dir", validate_args.out_dir)->required();
    validate_cmd->callback([&] { action = [&] { return cmd_validate(validate_args, out); }; });

    PeerRankArgs peerrank_args;
    auto* peerrank_cmd = app.add_subcommand("peerrank", "PeerRank and Generalized PeerRank grades");
    add_input_options(*peerrank_cmd, peerrank_args.in, false);
    peerrank_cmd->add_option("--alpha", peerrank_args.alpha)->capture_default_str();
    peerrank_cmd->add_option("--beta", peerrank_args.beta, "Generalized PeerRank accuracy weight")
        ->capture_default_str();
    peerrank_cmd->add_option("--tolerance", peerrank_args.tolerance)->capture_default_str();
    peerrank_cmd->add_option("--max-iter", peerrank_args.max_iterations)->capture_default_str();
    peerrank_cmd->add_option("--init-constant", peerrank_args.initial_grade,
                             "start every grade at this [0,1] value instead of the mean received grade");
    peerrank_cmd->add_option("--out-dir", peerrank_args.out_dir)->required();
    peerrank_cmd->callback([&] { action = [&] { return cmd_peerrank(peerrank_args, out); }; });

    SimulateArgs simulate_args;
    auto* simulate_cmd = app.add_subcommand("simulate", "synthetic cohorts and validity grids");
    simulate_cmd->add_option("--config", simulate_args.config_path, "key=value cohort config file");
    simulate_cmd->add_option("--replications", simulate_args.replications)->capture_default_str();
    simulate_cmd->add_option("--out-dir", simulate_args.out_dir)->required();
    simulate_cmd->add_flag("--export-csv", simulate_args.export_csv, "write each cohort in the ingest schemas");
    simulate_cmd->add_option("--methods", simulate_args.methods)->delimiter(',');
    simulate_cmd->add_option("--schemes", simulate_args.schemes)->delimiter(',');
    simulate_cmd->add_option("--threads", simulate_args.threads)->capture_default_str();
    simulate_cmd->add_option("--bin-width", simulate_args.plot.bin_width)->capture_default_str();
    std::map<std::string, std::string> config_flags;
    for (const char* key : { "n_students", "reviews_per_student", "quality_mean", "quality_sd", "noise_sd_max",
                             "noise_sd_min", "competence_a", "competence_b", "bias_mean", "bias_sd",
                             "engagement_coupling", "total_lessons", "total_quizzes", "quiz_noise_sd", "seed" }) {
        std::string flag = "--" + std::string(key);
        std::replace(flag.begin(), flag.end(), '_', '-');
        simulate_cmd->add_option(flag, config_flags[key], std::string("overrides config key ") + key);
    }
    simulate_cmd->callback([&] {
        for (const auto& [key, value] : config_flags) {
            if (!value.empty()) simulate_args.overrides[key] = value;
        }
        action = [&] { return cmd_simulate(simulate_args, out); };
    });

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : 2;
    }

    try {
        return action ? action() : 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace peergrade
