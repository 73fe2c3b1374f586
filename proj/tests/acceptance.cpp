// Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "catcov/covariance.hpp"
#include "catcov/report.hpp"
#include "catcov/rspca.hpp"
#include "catcov/synth.hpp"
#include "oracles.hpp"

using namespace catcov;
namespace fs = std::filesystem;

namespace {

// Tolerances, fixed here and nowhere else.
constexpr double kPaperTol = 5e-5;
constexpr double kCorrTol = 5e-4;
constexpr double kAtomTol = 0.05;
constexpr double kOracleTol = 1e-8;
constexpr double kBoundSlack = 1e-9;
constexpr double kGiniTol = 1e-10;
constexpr double kConservationTol = 1e-8;
constexpr double kInvarianceTol = 1e-9;
constexpr double kIndependenceTol = 1e-10;
constexpr double kAlignment = 0.9;
constexpr double kFisherSeconds = 1.0;
constexpr double kSelectionSeconds = 10.0;

const std::string cli = CATCOV_CLI;
const std::string fisher_path = std::string(CATCOV_DATA_DIR) + "/fisher.csv";

struct Outcome {
    bool pass = true;
    std::string detail;
    void require(bool ok, const std::string& what) {
        if (!ok && pass) detail = what;
        pass = pass && ok;
    }
};

std::string num(double x) {
    std::ostringstream s;
    s.precision(6);
    s << x;
    return s.str();
}

struct Process {
    int code = -1;
    std::string out;
    double seconds = 0;
};

Process run(const std::string& args) {
    Process p;
    const auto start = std::chrono::steady_clock::now();
    FILE* pipe = popen((cli + " " + args + " 2>/dev/null").c_str(), "r");
    if (!pipe) return p;
    std::array<char, 4096> buf{};
    for (std::size_t n; (n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0;) p.out.append(buf.data(), n);
    const int status = pclose(pipe);
    p.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    p.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return p;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

double weighted_variance(const Eigen::VectorXd& x, const Eigen::VectorXd& w) {
    const double m = w.dot(x) / w.sum();
    return (w.array() * (x.array() - m).square()).sum() / w.sum();
}

// --- criteria ---------------------------------------------------------------

Outcome fisher_variances() {
    Outcome o;
    const auto p = run("cov --contingency " + fisher_path);
    o.require(p.code == 0, "cov exited with " + std::to_string(p.code));
    o.require(p.seconds < kFisherSeconds, "took " + num(p.seconds) + " s");
    const auto d = load_contingency(fisher_path);
    std::array<double, 2> v{gini_variance(d, 0), gini_variance(d, 1)};
    std::sort(v.begin(), v.end());
    o.require(std::abs(v[0] - 0.34985) <= kPaperTol && std::abs(v[1] - 0.36409) <= kPaperTol,
              "variances " + num(v[0]) + ", " + num(v[1]));
    // The command line must print the same numbers.
    o.require(p.out.find(format_number(gini_variance(d, 0))) != std::string::npos, "cov output lacks the eye variance");
    if (o.pass)
        o.detail = "eye " + num(gini_variance(d, 0)) + ", hair " + num(gini_variance(d, 1)) + ", " +
                   num(p.seconds) + " s";
    return o;
}

Outcome fisher_covariance() {
    Outcome o;
    const auto d = load_contingency(fisher_path);
    const auto a = cross_matrix(d, 0, 1, build_embeddings(d));
    const double svd_sigma = covariance_svd(a).sigma;
    const double newton_sigma = covariance_newton(a).sigma;
    o.require(std::abs(svd_sigma - 0.081253) <= kPaperTol, "sigma " + num(svd_sigma));
    o.require(std::abs(newton_sigma - svd_sigma) <= kOracleTol, "newton " + num(newton_sigma));
    if (o.pass) o.detail = "sigma " + num(svd_sigma) + ", |newton - svd| " + num(std::abs(newton_sigma - svd_sigma));
    return o;
}

Outcome fisher_correlation() {
    Outcome o;
    const auto r = correlation_matrix(load_contingency(fisher_path));
    o.require(r.defined(0, 1), "undefined");
    o.require(std::abs(r.rho(0, 1) - 0.2277) <= kCorrTol, "rho " + num(r.rho(0, 1)));
    if (o.pass) o.detail = "rho " + num(r.rho(0, 1));
    return o;
}

bool same_edge(const BasisAtom& atom, const std::string& variable, int a, int b) {
    return atom.kind == BasisAtom::Kind::edge && atom.variable == variable &&
           ((atom.from == a && atom.to == b) || (atom.from == b && atom.to == a));
}

Outcome interpretation() {
    Outcome o;
    const auto d = load_contingency(fisher_path);
    const auto emb = build_embeddings(d);
    const auto m = fit(d, emb);
    // Category order in the table: eye blue, light, medium, dark; hair fair, red, medium, dark, black.
    struct Expected {
        int eye_a, eye_b;
        double eye_coef;
        int hair_a, hair_b;
        double hair_coef;
    };
    const std::array<Expected, 2> expected{Expected{2, 1, 0.63, 2, 0, 0.76}, Expected{3, 1, 0.64, 3, 2, 0.68}};
    std::ostringstream detail;
    for (Eigen::Index k = 0; k < 2; ++k) {
        const auto c = interpret(m, k, emb);
        const auto& e = expected[static_cast<std::size_t>(k)];
        const std::string pc = "PC" + std::to_string(k + 1);
        if (c.terms.size() < 2) {
            o.require(false, pc + " has fewer than two atoms");
            continue;
        }
        const auto& t0 = c.terms[0];
        const auto& t1 = c.terms[1];
        const auto check_pair = [&](const InterpretationTerm& eye, const InterpretationTerm& hair) {
            return same_edge(eye.atom, "eye", e.eye_a, e.eye_b) && same_edge(hair.atom, "hair", e.hair_a, e.hair_b) &&
                   std::abs(std::abs(eye.coefficient) - e.eye_coef) <= kAtomTol &&
                   std::abs(std::abs(hair.coefficient) - e.hair_coef) <= kAtomTol;
        };
        o.require(check_pair(t0, t1) || check_pair(t1, t0),
                  pc + " leading atoms " + atom_name(t0.atom, m.categories[t0.atom.variable == "eye" ? 0 : 1]) + " " +
                      num(t0.coefficient) + ", " +
                      atom_name(t1.atom, m.categories[t1.atom.variable == "eye" ? 0 : 1]) + " " + num(t1.coefficient));
        for (const auto& b : c.blocks)
            o.require(b.residual <= b.epsilon, pc + " block " + b.variable + " residual " + num(b.residual));
        detail << pc << ' ' << num(std::abs(t0.coefficient)) << '/' << num(std::abs(t1.coefficient)) << ' ';
    }
    if (o.pass) o.detail = detail.str() + "(|coef| of the two leading atoms)";
    return o;
}

Outcome oracle_equivalence() {
    Outcome o;
    Rng rng(20020);
    double worst_gap = 0, worst_bound = -1e300;
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::Index rows = 1 + trial % 6;
        const Eigen::Index cols = 1 + (trial / 6) % 6;
        const Eigen::MatrixXd a = oracle::random_matrix(rng, rows, cols);
        const double sigma = covariance_svd(a).sigma;
        worst_gap = std::max(worst_gap, std::abs(covariance_newton(a).sigma - sigma));
        const Eigen::Index n = std::max(rows, cols);
        for (int s = 0; s < 200; ++s) {
            const Eigen::MatrixXd l = random_orthogonal(n, rng).topLeftCorner(rows, cols);
            worst_bound = std::max(worst_bound, (a * l.transpose()).trace() - sigma);
        }
    }
    o.require(worst_gap <= kOracleTol, "newton/svd gap " + num(worst_gap));
    o.require(worst_bound <= kBoundSlack, "sampled bound exceeds sigma by " + num(worst_bound));
    if (o.pass) o.detail = "100 matrices, max gap " + num(worst_gap) + ", max bound - sigma " + num(worst_bound);
    return o;
}

Outcome gini_equivalence() {
    Outcome o;
    Rng rng(606);
    double worst = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const int rows = 1 + static_cast<int>(rng.index(200));
        const auto d = oracle::random_dataset(rng, rows, 3, 6);
        const auto emb = build_embeddings(d);
        for (std::size_t v = 0; v < d.variable_count(); ++v) {
            const double closed = gini_variance(d, v);
            const double pairs = oracle::gini_double_sum(d, v);
            const double trace = cross_matrix(d, v, v, emb).entries.trace();
            worst = std::max({worst, std::abs(closed - pairs), std::abs(closed - trace), std::abs(pairs - trace)});
        }
    }
    o.require(worst <= kGiniTol, "max disagreement " + num(worst));
    if (o.pass) o.detail = "50 datasets, max disagreement " + num(worst);
    return o;
}

std::vector<CategoricalDataset> test_datasets() {
    std::vector<CategoricalDataset> out{load_contingency(fisher_path)};
    Rng rng(77);
    for (int i = 0; i < 20; ++i) {
        auto d = oracle::random_dataset(rng, 20 + static_cast<int>(rng.index(150)), 4, 6);
        if (LrsvLayout::of(build_embeddings(d)).dimension() > 0) out.push_back(std::move(d));
    }
    SynthOptions options;
    options.rows = 500;
    out.push_back(generate_planted(options).data);
    return out;
}

Outcome conservation() {
    Outcome o;
    double worst_trace = 0, worst_var = 0;
    const auto sets = test_datasets();
    for (const auto& d : sets) {
        const auto m = fit(d);
        double total = 0;
        for (std::size_t v = 0; v < d.variable_count(); ++v) total += gini_variance(d, v);
        worst_trace = std::max(worst_trace, std::abs(m.eigenvalues.sum() - total));
        const auto s = scores(m, d, m.component_count());
        for (Eigen::Index k = 0; k < m.component_count(); ++k)
            worst_var = std::max(worst_var, std::abs(weighted_variance(s.scores.col(k), d.weights()) - m.eigenvalues(k)));
    }
    o.require(worst_trace <= kConservationTol, "trace gap " + num(worst_trace));
    o.require(worst_var <= kConservationTol, "score variance gap " + num(worst_var));
    if (o.pass)
        o.detail = std::to_string(sets.size()) + " datasets, trace gap " + num(worst_trace) + ", score variance gap " +
                   num(worst_var);
    return o;
}

Outcome invariance() {
    Outcome o;
    Rng rng(31337);
    double worst = 0;
    for (int trial = 0; trial < 10; ++trial) {
        const auto d = oracle::random_dataset(rng, 60, 3, 6);
        if (LrsvLayout::of(build_embeddings(d)).dimension() == 0) continue;
        const auto base_cov = covariance_matrix(d);
        const auto base_corr = correlation_matrix(d);
        const auto base_model = fit(d);
        const Eigen::MatrixXd base_scores = scores(base_model, d, base_model.component_count()).scores;
        for (std::size_t v = 0; v < d.variable_count(); ++v) {
            std::vector<int> perm(static_cast<std::size_t>(d.variable(v).category_count()));
            std::iota(perm.begin(), perm.end(), 0);
            for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.index(i)]);
            const auto moved = oracle::relabel(d, v, perm);
            worst = std::max(worst, (covariance_matrix(moved) - base_cov).cwiseAbs().maxCoeff());
            const auto corr = correlation_matrix(moved);
            o.require((corr.defined == base_corr.defined).all(), "definedness changed");
            for (Eigen::Index i = 0; i < corr.rho.rows(); ++i)
                for (Eigen::Index j = 0; j < corr.rho.cols(); ++j)
                    if (corr.defined(i, j)) worst = std::max(worst, std::abs(corr.rho(i, j) - base_corr.rho(i, j)));
            const auto model = fit(moved);
            worst = std::max(worst, (model.eigenvalues - base_model.eigenvalues).cwiseAbs().maxCoeff());
            const Eigen::MatrixXd s = scores(model, moved, model.component_count()).scores;
            for (Eigen::Index a = 0; a < s.rows(); ++a)
                for (Eigen::Index b = a + 1; b < s.rows(); ++b)
                    worst = std::max(worst, std::abs((s.row(a) - s.row(b)).norm() -
                                                     (base_scores.row(a) - base_scores.row(b)).norm()));
        }
    }
    o.require(worst <= kInvarianceTol, "relabeling changed a result by " + num(worst));

    double independent = 0;
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::VectorXd r(2 + static_cast<Eigen::Index>(rng.index(4))), c(2 + static_cast<Eigen::Index>(rng.index(4)));
        for (Eigen::Index i = 0; i < r.size(); ++i) r(i) = static_cast<double>(1 + rng.index(9));
        for (Eigen::Index j = 0; j < c.size(); ++j) c(j) = static_cast<double>(1 + rng.index(9));
        independent = std::max(independent, std::abs(covariance_matrix(oracle::product_table(r, c))(0, 1)));
    }
    o.require(independent <= kIndependenceTol, "independent table sigma " + num(independent));
    if (o.pass) o.detail = "max relabel change " + num(worst) + ", max independent sigma " + num(independent);
    return o;
}

Outcome selection() {
    Outcome o;
    const auto dir = fs::temp_directory_path() / "catcov_acceptance";
    fs::create_directories(dir);
    const auto data_path = (dir / "planted.csv").string();
    const auto start = std::chrono::steady_clock::now();

    const auto g = run("synth --seed 1 --variables 10 --planted 3 --out " + data_path);
    o.require(g.code == 0, "synth exited with " + std::to_string(g.code));
    const auto sel = run("select " + data_path + " --top 3");
    o.require(sel.code == 0, "select exited with " + std::to_string(sel.code));

    std::set<std::string> chosen;
    std::istringstream lines(sel.out);
    std::string line;
    std::getline(lines, line); // header
    while (std::getline(lines, line))
        if (!line.empty() && line.back() == '1') {
            const auto a = line.find(',');
            chosen.insert(line.substr(a + 1, line.find(',', a + 1) - a - 1));
        }

    SynthOptions options;
    options.seed = 1;
    const auto synth = generate_planted(options);
    std::set<std::string> planted;
    for (auto v : synth.planted) planted.insert(synth.data.variable(v).name);
    o.require(chosen == planted, "selected set differs from the planted set");

    const auto data = load_csv(data_path);
    const auto full = fit(data);
    const Eigen::MatrixXd full_scores = scores(full, data, 2).scores;
    const auto sub = refit_subset(data, synth.planted);
    const Eigen::MatrixXd sub_scores = scores(sub, data.select(synth.planted), 2).scores;
    const Eigen::MatrixXd aligned = sub_scores * procrustes_rotation(sub_scores, full_scores);
    double weakest = 1;
    for (Eigen::Index k = 0; k < 2; ++k)
        weakest = std::min(weakest,
                           std::abs(oracle::weighted_correlation(aligned.col(k), full_scores.col(k), data.weights())));
    o.require(weakest >= kAlignment, "aligned |r| " + num(weakest));

    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.require(seconds < kSelectionSeconds, "took " + num(seconds) + " s");
    if (o.pass) o.detail = "selected {" + std::accumulate(std::next(chosen.begin()), chosen.end(), *chosen.begin(),
                                                           [](std::string a, const std::string& b) { return a + "," + b; }) +
                           "}, min aligned |r| " + num(weakest) + ", " + num(seconds) + " s";
    return o;
}

Outcome determinism() {
    Outcome o;
    const auto dir = fs::temp_directory_path() / "catcov_determinism";
    fs::create_directories(dir);
    const auto synth_data = (dir / "input.csv").string();
    if (run("synth --seed 5 --rows 300 --out " + synth_data).code != 0) {
        o.require(false, "could not create input");
        return o;
    }
    const std::string fisher = "--contingency " + fisher_path;
    struct Command {
        std::string args;
        std::vector<std::string> files;
    };
    const std::vector<Command> commands{
        {"cov " + fisher + " --out {d}/cov.csv", {"cov.csv"}},
        {"cov " + synth_data + " --format json --out {d}/cov.json", {"cov.json"}},
        {"corr " + fisher + " --out {d}/corr.csv", {"corr.csv"}},
        {"corr " + synth_data + " --format json --out {d}/corr.json", {"corr.json"}},
        {"pca " + fisher + " --components 3 --out {d}/scores.csv --svg {d}/kl.svg --model {d}/model.json",
         {"scores.csv", "kl.svg", "model.json"}},
        {"pca " + synth_data + " --format json --out {d}/scores.json", {"scores.json"}},
        {"interpret " + fisher + " --components 3 --out {d}/interp.txt", {"interp.txt"}},
        {"interpret " + synth_data + " --format json --refit --out {d}/interp.json", {"interp.json"}},
        {"scree " + fisher + " --out {d}/scree.csv --svg {d}/scree.svg", {"scree.csv", "scree.svg"}},
        {"select " + synth_data + " --top 3 --out {d}/select.csv", {"select.csv"}},
        {"select " + synth_data + " --top 4 --format json --out {d}/select.json", {"select.json"}},
        {"synth --seed 11 --rows 100 --out {d}/synth.csv", {"synth.csv"}},
    };
    int checked = 0;
    for (const auto& c : commands) {
        std::array<std::vector<std::string>, 2> artifacts;
        for (int round = 0; round < 2; ++round) {
            const auto out_dir = dir / ("run" + std::to_string(round));
            fs::create_directories(out_dir);
            std::string args = c.args;
            for (std::size_t at; (at = args.find("{d}")) != std::string::npos;) args.replace(at, 3, out_dir.string());
            const auto p = run(args);
            o.require(p.code == 0, "'" + c.args + "' exited with " + std::to_string(p.code));
            for (const auto& f : c.files) artifacts[static_cast<std::size_t>(round)].push_back(slurp(out_dir / f));
        }
        for (std::size_t i = 0; i < c.files.size(); ++i) {
            o.require(!artifacts[0][i].empty(), c.files[i] + " is empty");
            o.require(artifacts[0][i] == artifacts[1][i], c.files[i] + " differs between runs");
            ++checked;
        }
    }
    if (o.pass) o.detail = std::to_string(commands.size()) + " commands, " + std::to_string(checked) + " artifacts identical";
    return o;
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"Fisher variances", fisher_variances},
        {"Fisher covariance", fisher_covariance},
        {"Fisher correlation", fisher_correlation},
        {"component interpretation", interpretation},
        {"oracle equivalence", oracle_equivalence},
        {"Gini equivalence", gini_equivalence},
        {"conservation", conservation},
        {"invariance", invariance},
        {"variable selection", selection},
        {"determinism", determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("threw: ") + e.what();
        }
        failures += o.pass ? 0 : 1;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  " << (i + 1 < 10 ? " " : "") << i + 1 << "  " << criteria[i].first
                  << " -- " << o.detail << '\n';
    }
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << '\n';
    return failures == 0 ? 0 : 1;
}
