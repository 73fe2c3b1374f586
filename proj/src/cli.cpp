#include "catcov/cli.hpp"

#include <filesystem>
#include <functional>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "catcov/covariance.hpp"
#include "catcov/dataset.hpp"
#include "catcov/error.hpp"
#include "catcov/report.hpp"
#include "catcov/rspca.hpp"
#include "catcov/synth.hpp"

namespace catcov {

namespace {

struct RunConfig {
    std::string input;
    bool contingency = false;
    std::string weights;
    std::string format = "csv";
    std::string out;
    std::string svg;
    std::string model;
    int components = 2;
    int component = 0; // interpret: single 1-based component, 0 = use `components`
    int top = 5;
    double eps = 0.05;
    int max_terms = 4;
    bool refit = false;
    std::string missing = "own";
    std::uint64_t seed = 1;
    SynthOptions synth;
};

Format parse_format(const std::string& f) { return f == "json" ? Format::json : Format::csv; }

CategoricalDataset load_input(const RunConfig& cfg) {
    if (!std::filesystem::is_regular_file(cfg.input)) throw InputError("input file '" + cfg.input + "' not found");
    if (cfg.contingency) {
        if (!cfg.weights.empty()) throw InputError("--weights cannot be combined with --contingency");
        return load_contingency(cfg.input);
    }
    CsvOptions options;
    if (!cfg.weights.empty()) options.weight_column = cfg.weights;
    options.missing = cfg.missing == "drop" ? MissingPolicy::drop_row : MissingPolicy::own_category;
    return load_csv(cfg.input, options);
}

void emit(const std::string& path, const std::string& content, std::ostream& fallback) {
    if (path.empty()) {
        fallback << content;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot write '" + path + "'");
    f << content;
    if (!f) throw InputError("failed writing '" + path + "'");
}

void check_output_path(const std::string& path) {
    if (path.empty()) return;
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty() && !std::filesystem::is_directory(parent))
        throw InputError("output directory '" + parent.string() + "' does not exist");
}

std::vector<std::string> names_of(const CategoricalDataset& data) {
    std::vector<std::string> names;
    for (const auto& v : data.variables()) names.push_back(v.name);
    return names;
}

void require_components(int requested, const PcaModel& model, const char* flag) {
    if (requested < 1 || requested > model.component_count())
        throw InputError(std::string(flag) + " " + std::to_string(requested) + " is outside [1, " +
                         std::to_string(model.component_count()) + "]");
}

int cmd_cov(const RunConfig& cfg, std::ostream& out) {
    const auto data = load_input(cfg);
    std::ostringstream s;
    write_matrix(s, parse_format(cfg.format), names_of(data), covariance_matrix(data));
    emit(cfg.out, s.str(), out);
    return exit_ok;
}

int cmd_corr(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto data = load_input(cfg);
    const auto corr = correlation_matrix(data);
    for (Eigen::Index i = 0; i < corr.defined.rows(); ++i)
        if (!corr.defined(i, i))
            err << "warning: variable '" << data.variable(static_cast<std::size_t>(i)).name
                << "' has zero variance; its correlations are undefined\n";
    std::ostringstream s;
    write_matrix(s, parse_format(cfg.format), names_of(data), corr.rho, &corr.defined);
    emit(cfg.out, s.str(), out);
    return exit_ok;
}

int cmd_pca(const RunConfig& cfg, std::ostream& out) {
    const auto data = load_input(cfg);
    const auto model = fit(data);
    require_components(cfg.components, model, "--components");
    const auto table = scores(model, data, cfg.components);
    if (!cfg.model.empty()) {
        std::ostringstream m;
        write_model_json(m, model);
        emit(cfg.model, m.str(), out);
    }
    if (!cfg.svg.empty()) emit(cfg.svg, scatter_svg(table, model), out);
    std::ostringstream s;
    write_scores(s, parse_format(cfg.format), table);
    emit(cfg.out, s.str(), out);
    return exit_ok;
}

int cmd_interpret(const RunConfig& cfg, std::ostream& out) {
    if (cfg.max_terms < 1) throw InputError("--max-terms must be positive");
    if (!(cfg.eps >= 0)) throw InputError("--eps must be nonnegative");
    const auto data = load_input(cfg);
    const auto model = fit(data);
    const auto embeddings = build_embeddings(data);
    std::vector<int> wanted;
    if (cfg.component != 0) {
        require_components(cfg.component, model, "--component");
        wanted.push_back(cfg.component);
    } else {
        require_components(cfg.components, model, "--components");
        for (int m = 1; m <= cfg.components; ++m) wanted.push_back(m);
    }
    InterpretOptions options;
    options.max_terms = cfg.max_terms;
    options.relative_epsilon = cfg.eps;
    options.refit = cfg.refit;
    std::vector<ComponentInterpretation> items;
    for (int m : wanted) items.push_back(interpret(model, m - 1, embeddings, options));
    std::ostringstream s;
    write_interpretations(s, parse_format(cfg.format), items, model);
    emit(cfg.out, s.str(), out);
    return exit_ok;
}

int cmd_scree(const RunConfig& cfg, std::ostream& out) {
    const auto data = load_input(cfg);
    const auto modes = scree(fit(data));
    if (!cfg.svg.empty()) emit(cfg.svg, scree_svg(modes), out);
    std::ostringstream s;
    write_scree(s, parse_format(cfg.format), modes);
    emit(cfg.out, s.str(), out);
    return exit_ok;
}

int cmd_select(const RunConfig& cfg, std::ostream& out) {
    const auto data = load_input(cfg);
    if (cfg.top < 1 || static_cast<std::size_t>(cfg.top) > data.variable_count())
        throw InputError("--top " + std::to_string(cfg.top) + " is outside [1, " +
                         std::to_string(data.variable_count()) + "]");
    const auto model = fit(data);
    require_components(cfg.components, model, "--components");
    std::ostringstream s;
    write_selection(s, parse_format(cfg.format), variable_importance(model, cfg.components),
                    static_cast<std::size_t>(cfg.top));
    emit(cfg.out, s.str(), out);
    return exit_ok;
}

int cmd_synth(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    SynthOptions options = cfg.synth;
    options.seed = cfg.seed;
    const auto generated = generate_planted(options);
    std::ostringstream s;
    write_dataset_csv(s, generated.data, false);
    emit(cfg.out, s.str(), out);
    err << "planted:";
    for (std::size_t i : generated.planted) err << ' ' << generated.data.variable(i).name;
    err << '\n';
    return exit_ok;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    CLI::App app{"Covariance, correlation and PCA of categorical variables via regular-simplex coordinates", "catcov"};
    app.require_subcommand(1, 1);

    const auto add_input = [&](CLI::App* sub) {
        sub->add_option("input", cfg.input, "Instance CSV, or a contingency table with --contingency")->required();
        sub->add_flag("--contingency", cfg.contingency, "Input is a two-way table of counts");
        sub->add_option("--weights", cfg.weights, "Column holding nonnegative instance weights");
        sub->add_option("--missing", cfg.missing, "Empty cells: own category or drop the row")
            ->check(CLI::IsMember({"own", "drop"}));
        sub->add_option("--out", cfg.out, "Write the main artifact here instead of stdout");
        sub->add_option("--seed", cfg.seed, "Seed (no effect on deterministic commands)");
    };
    const auto add_format = [&](CLI::App* sub, std::vector<std::string> allowed) {
        sub->add_option("--format", cfg.format, "Output format")->check(CLI::IsMember(std::move(allowed)));
    };

    auto* cov = app.add_subcommand("cov", "Covariance matrix of the categorical variables");
    add_input(cov);
    add_format(cov, {"csv", "json"});

    auto* corr = app.add_subcommand("corr", "Correlation matrix of the categorical variables");
    add_input(corr);
    add_format(corr, {"csv", "json"});

    auto* pca = app.add_subcommand("pca", "Principal components and instance scores");
    add_input(pca);
    add_format(pca, {"csv", "json"});
    pca->add_option("--components", cfg.components, "Number of score columns");
    pca->add_option("--svg", cfg.svg, "Write a PC1/PC2 scatter plot");
    pca->add_option("--model", cfg.model, "Write the fitted model as JSON");

    auto* interp = app.add_subcommand("interpret", "Express components through edge/center atoms");
    add_input(interp);
    add_format(interp, {"csv", "text", "json"});
    interp->add_option("--components", cfg.components, "Interpret components 1..k");
    interp->add_option("--component", cfg.component, "Interpret only this (1-based) component");
    interp->add_option("--eps", cfg.eps, "Stop when a block residual is below eps * block norm");
    interp->add_option("--max-terms", cfg.max_terms, "Maximum atoms per variable block");
    interp->add_flag("--refit", cfg.refit, "Least-squares refit of selected atoms");

    auto* scr = app.add_subcommand("scree", "Eigenvalues against mode number");
    add_input(scr);
    add_format(scr, {"csv", "json"});
    scr->add_option("--svg", cfg.svg, "Write a scree plot");

    auto* sel = app.add_subcommand("select", "Rank variables by eigenvalue-weighted loading energy");
    add_input(sel);
    add_format(sel, {"csv", "json"});
    sel->add_option("--top", cfg.top, "Number of variables to select");
    sel->add_option("--components", cfg.components, "Components entering the importance");

    auto* syn = app.add_subcommand("synth", "Generate a planted-structure categorical dataset");
    syn->add_option("--seed", cfg.seed, "Random seed");
    syn->add_option("--rows", cfg.synth.rows, "Number of instances");
    syn->add_option("--variables", cfg.synth.variables, "Number of variables");
    syn->add_option("--planted", cfg.synth.planted, "Number of correlated variables");
    syn->add_option("--categories", cfg.synth.categories, "Categories per variable");
    syn->add_option("--noise", cfg.synth.noise, "Probability a planted value is replaced by noise");
    syn->add_option("--out", cfg.out, "Write the CSV here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? exit_ok : exit_input;
    }

    return run_guarded(
        [&] {
            check_output_path(cfg.out);
            check_output_path(cfg.svg);
            check_output_path(cfg.model);
            if (cov->parsed()) return cmd_cov(cfg, out);
            if (corr->parsed()) return cmd_corr(cfg, out, err);
            if (pca->parsed()) return cmd_pca(cfg, out);
            if (interp->parsed()) {
                if (cfg.format == "text") cfg.format = "csv";
                return cmd_interpret(cfg, out);
            }
            if (scr->parsed()) return cmd_scree(cfg, out);
            if (sel->parsed()) return cmd_select(cfg, out);
            if (syn->parsed()) return cmd_synth(cfg, out, err);
            return static_cast<int>(exit_input);
        },
        err);
}

int run_guarded(const std::function<int()>& body, std::ostream& err) {
    try {
        return body();
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return exit_input;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return exit_numerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_unexpected;
    }
}

} // namespace catcov
