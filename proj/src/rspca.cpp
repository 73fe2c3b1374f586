#include "catcov/rspca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "catcov/error.hpp"
#include "catcov/numerics.hpp"

namespace catcov {

LrsvLayout LrsvLayout::of(const Embeddings& embeddings) {
    LrsvLayout layout;
    Eigen::Index offset = 0;
    for (const auto& e : embeddings) {
        layout.offsets.push_back(offset);
        layout.widths.push_back(e.dimension());
        offset += e.dimension();
    }
    return layout;
}

Eigen::VectorXd lrsv_vector(const CategoricalDataset& data, const Embeddings& embeddings, Eigen::Index instance) {
    if (instance < 0 || instance >= data.instance_count()) throw InputError("instance index out of range");
    const auto layout = LrsvLayout::of(embeddings);
    Eigen::VectorXd x(layout.dimension());
    for (std::size_t i = 0; i < data.variable_count(); ++i) {
        const int code = data.variable(i).codes[static_cast<std::size_t>(instance)];
        x.segment(layout.offsets[i], layout.widths[i]) = embeddings[i].vertex(code).transpose();
    }
    return x;
}

Eigen::MatrixXd lrsv_covariance(const CategoricalDataset& data, const Embeddings& embeddings) {
    const auto layout = LrsvLayout::of(embeddings);
    const Eigen::Index p = layout.dimension();
    Eigen::MatrixXd cov(p, p);
    for (std::size_t i = 0; i < layout.blocks(); ++i) {
        for (std::size_t j = i; j < layout.blocks(); ++j) {
            const auto a = cross_matrix(data, i, j, embeddings).entries;
            cov.block(layout.offsets[i], layout.offsets[j], layout.widths[i], layout.widths[j]) = a;
            if (j != i) cov.block(layout.offsets[j], layout.offsets[i], layout.widths[j], layout.widths[i]) = a.transpose();
        }
    }
    return cov;
}

PcaModel fit(const CategoricalDataset& data, const Embeddings& embeddings) {
    PcaModel model;
    model.layout = LrsvLayout::of(embeddings);
    if (model.layout.dimension() == 0) throw InputError("rs-pca needs at least one variable with two categories");
    for (const auto& v : data.variables()) {
        model.variables.push_back(v.name);
        model.categories.push_back(v.categories);
    }
    model.mean.resize(model.layout.dimension());
    for (std::size_t i = 0; i < data.variable_count(); ++i)
        model.mean.segment(model.layout.offsets[i], model.layout.widths[i]) =
            embeddings[i].vertices().transpose() * frequencies(data, i);

    const auto eig = sym_eig(lrsv_covariance(data, embeddings));
    model.eigenvalues = eig.values;
    model.eigenvectors = eig.vectors;
    for (Eigen::Index m = 0; m < model.eigenvectors.cols(); ++m) {
        Eigen::Index largest = 0;
        model.eigenvectors.col(m).cwiseAbs().maxCoeff(&largest);
        if (model.eigenvectors(largest, m) < 0) model.eigenvectors.col(m) *= -1.0;
    }
    return model;
}

PcaModel fit(const CategoricalDataset& data) { return fit(data, build_embeddings(data)); }

ScoreTable scores(const PcaModel& model, const CategoricalDataset& data, Eigen::Index n_components) {
    if (n_components < 1 || n_components > model.component_count())
        throw InputError("component count " + std::to_string(n_components) + " is outside [1, " +
                         std::to_string(model.component_count()) + "]");
    if (data.variable_count() != model.layout.blocks()) throw InputError("dataset does not match the model");

    // Per variable, the score contribution of each category.
    std::vector<Eigen::MatrixXd> contribution;
    for (std::size_t i = 0; i < data.variable_count(); ++i) {
        const SimplexEmbedding emb(data.variable(i).category_count());
        if (emb.dimension() != model.layout.widths[i]) throw InputError("dataset does not match the model");
        const auto off = model.layout.offsets[i];
        const auto w = model.layout.widths[i];
        const Eigen::MatrixXd centered =
            emb.vertices().rowwise() - model.mean.segment(off, w).transpose();
        contribution.push_back(centered * model.eigenvectors.block(off, 0, w, n_components));
    }

    ScoreTable out;
    out.weights = data.weights();
    out.scores = Eigen::MatrixXd::Zero(data.instance_count(), n_components);
    out.labels.reserve(static_cast<std::size_t>(data.instance_count()));
    for (Eigen::Index a = 0; a < data.instance_count(); ++a) {
        for (std::size_t i = 0; i < data.variable_count(); ++i)
            out.scores.row(a) += contribution[i].row(data.variable(i).codes[static_cast<std::size_t>(a)]);
        out.labels.push_back(data.instance_label(a));
    }
    return out;
}

std::string atom_name(const BasisAtom& atom, const std::vector<std::string>& categories) {
    const auto label = [&](int c) {
        return c >= 0 && static_cast<std::size_t>(c) < categories.size() ? categories[static_cast<std::size_t>(c)]
                                                                          : std::to_string(c);
    };
    if (atom.kind == BasisAtom::Kind::edge)
        return "d[" + atom.variable + "](" + label(atom.from) + "->" + label(atom.to) + ")";
    return "c[" + atom.variable + "](" + label(atom.to) + ")";
}

namespace {

struct BlockFit {
    std::vector<std::pair<std::size_t, double>> terms; // atom index, coefficient
    double residual = 0;
};

BlockFit pursue(const Eigen::VectorXd& target, const Eigen::MatrixXd& dictionary, double epsilon,
                const InterpretOptions& options) {
    const Eigen::VectorXd norms = dictionary.colwise().norm().transpose();
    Eigen::VectorXd coef = Eigen::VectorXd::Zero(dictionary.cols());
    std::vector<std::size_t> selected;
    Eigen::VectorXd residual = target;

    for (int it = 0; it < options.max_iterations && residual.norm() > epsilon; ++it) {
        Eigen::Index best = 0;
        ((dictionary.transpose() * residual).cwiseAbs().cwiseQuotient(norms)).maxCoeff(&best);
        const auto atom = static_cast<std::size_t>(best);
        const bool fresh = std::find(selected.begin(), selected.end(), atom) == selected.end();
        if (fresh) {
            if (static_cast<int>(selected.size()) == options.max_terms) break;
            selected.push_back(atom);
        } else if (options.refit) {
            break; // residual is already orthogonal to every selected atom
        }

        if (options.refit) {
            Eigen::MatrixXd sub(dictionary.rows(), static_cast<Eigen::Index>(selected.size()));
            for (std::size_t s = 0; s < selected.size(); ++s)
                sub.col(static_cast<Eigen::Index>(s)) = dictionary.col(static_cast<Eigen::Index>(selected[s]));
            const Eigen::VectorXd solved = sub.completeOrthogonalDecomposition().solve(target);
            coef.setZero();
            for (std::size_t s = 0; s < selected.size(); ++s)
                coef(static_cast<Eigen::Index>(selected[s])) = solved(static_cast<Eigen::Index>(s));
        } else {
            coef(best) += dictionary.col(best).dot(residual) / (norms(best) * norms(best));
        }
        residual = target - dictionary * coef;
    }

    BlockFit out;
    for (std::size_t s : selected) out.terms.emplace_back(s, coef(static_cast<Eigen::Index>(s)));
    out.residual = residual.norm();
    return out;
}

} // namespace

ComponentInterpretation interpret(const PcaModel& model, Eigen::Index component, const Embeddings& embeddings,
                                  const InterpretOptions& options) {
    if (component < 0 || component >= model.component_count())
        throw InputError("component " + std::to_string(component + 1) + " does not exist (model has " +
                         std::to_string(model.component_count()) + ")");
    if (embeddings.size() != model.layout.blocks()) throw InputError("embeddings do not match the model");

    ComponentInterpretation out;
    out.component = model.first_component + component;
    const Eigen::VectorXd e = model.eigenvectors.col(component);
    double residual_sq = 0;
    for (std::size_t i = 0; i < model.layout.blocks(); ++i) {
        const auto width = model.layout.widths[i];
        if (width == 0) continue;
        const Eigen::VectorXd block = e.segment(model.layout.offsets[i], width);
        const auto atoms = basis_atoms(embeddings[i], model.variables[i]);
        Eigen::MatrixXd dictionary(width, static_cast<Eigen::Index>(atoms.size()));
        for (std::size_t a = 0; a < atoms.size(); ++a) dictionary.col(static_cast<Eigen::Index>(a)) = atoms[a].vector;

        BlockResidual br{model.variables[i], block.norm(), options.relative_epsilon * block.norm(), 0};
        const auto fitted = pursue(block, dictionary, br.epsilon, options);
        br.residual = fitted.residual;
        residual_sq += br.residual * br.residual;
        out.blocks.push_back(br);
        for (const auto& [atom, c] : fitted.terms) out.terms.push_back({c, atoms[atom]});
    }
    std::stable_sort(out.terms.begin(), out.terms.end(), [](const auto& x, const auto& y) {
        return std::abs(x.coefficient) > std::abs(y.coefficient);
    });
    out.residual_norm = std::sqrt(residual_sq);
    return out;
}

std::vector<std::pair<int, double>> scree(const PcaModel& model) {
    std::vector<std::pair<int, double>> out;
    for (Eigen::Index m = 0; m < model.component_count(); ++m)
        out.emplace_back(static_cast<int>(model.first_component + m + 1), model.eigenvalues(m));
    return out;
}

std::vector<VariableImportance> variable_importance(const PcaModel& model, Eigen::Index n_components) {
    if (n_components < 1 || n_components > model.component_count())
        throw InputError("component count " + std::to_string(n_components) + " is outside [1, " +
                         std::to_string(model.component_count()) + "]");
    std::vector<VariableImportance> out;
    for (std::size_t i = 0; i < model.layout.blocks(); ++i) {
        const auto rows = model.eigenvectors.block(model.layout.offsets[i], 0, model.layout.widths[i], n_components);
        const Eigen::VectorXd energy = rows.colwise().squaredNorm().transpose();
        out.push_back({i, model.variables[i], energy.dot(model.eigenvalues.head(n_components))});
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const auto& x, const auto& y) { return x.importance > y.importance; });
    return out;
}

PcaModel refit_subset(const CategoricalDataset& data, std::span<const std::size_t> variables) {
    return fit(data.select(variables));
}

PcaModel restrict_components(const PcaModel& model, Eigen::Index first, Eigen::Index count) {
    if (count < 1 || first < 0 || first + count > model.component_count())
        throw InputError("component range is empty or outside the model");
    PcaModel out = model;
    out.eigenvalues = model.eigenvalues.segment(first, count);
    out.eigenvectors = model.eigenvectors.middleCols(first, count);
    out.first_component = model.first_component + first;
    return out;
}

} // namespace catcov
