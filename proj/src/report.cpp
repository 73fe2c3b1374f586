#include "catcov/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

#include <json.hpp>

namespace catcov {

using nlohmann::json;

double round_significant(double x) {
    if (!std::isfinite(x)) return x;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    const double r = std::strtod(buf, nullptr);
    return r == 0.0 ? 0.0 : r;
}

std::string format_number(double x) {
    const double r = round_significant(x);
    if (std::isnan(r)) return "nan";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, r);
    return std::string(buf, res.ptr);
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

namespace {

json number(double x) { return json(round_significant(x)); }

json matrix_rows(const Eigen::MatrixXd& m, const Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>* defined) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            row.push_back(defined && !(*defined)(i, j) ? json(nullptr) : number(m(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

json vector_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number(v(i)));
    return out;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string fixed(double x, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, x);
    std::string s = buf;
    if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
    return s;
}

constexpr double kWidth = 800, kHeight = 600, kMargin = 70;

struct Axis {
    double lo, hi;
    double map(double v, double from, double to) const {
        return hi > lo ? from + (v - lo) / (hi - lo) * (to - from) : (from + to) / 2;
    }
};

Axis padded_axis(double lo, double hi) {
    const double span = hi - lo;
    const double pad = span > 0 ? 0.08 * span : (std::abs(lo) > 0 ? 0.1 * std::abs(lo) : 1.0);
    return {lo - pad, hi + pad};
}

void svg_open(std::ostringstream& s) {
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" viewBox=\"0 0 800 600\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"white\"/>\n";
}

void svg_frame(std::ostringstream& s, const std::string& xlabel, const std::string& ylabel) {
    s << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << kWidth - 2 * kMargin << "\" height=\""
      << kHeight - 2 * kMargin << "\" fill=\"none\" stroke=\"black\"/>\n";
    s << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 25
      << "\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">" << xml_escape(xlabel) << "</text>\n";
    s << "<text x=\"25\" y=\"" << kHeight / 2 << "\" font-family=\"sans-serif\" font-size=\"14\" "
      << "text-anchor=\"middle\" transform=\"rotate(-90 25 " << kHeight / 2 << ")\">" << xml_escape(ylabel)
      << "</text>\n";
}

} // namespace

void write_matrix(std::ostream& os, Format format, const std::vector<std::string>& names, const Eigen::MatrixXd& m,
                  const Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>* defined) {
    if (format == Format::json) {
        json doc;
        doc["variables"] = names;
        doc["matrix"] = matrix_rows(m, defined);
        os << doc.dump(2) << '\n';
        return;
    }
    os << "variable";
    for (const auto& n : names) os << ',' << csv_field(n);
    os << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        os << csv_field(names[static_cast<std::size_t>(i)]);
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            os << ',';
            if (!defined || (*defined)(i, j)) os << format_number(m(i, j));
        }
        os << '\n';
    }
}

void write_scores(std::ostream& os, Format format, const ScoreTable& table, Eigen::Index first_component) {
    const Eigen::Index k = table.scores.cols();
    const auto pc_name = [&](Eigen::Index m) { return "pc" + std::to_string(first_component + m + 1); };
    if (format == Format::json) {
        json rows = json::array();
        for (Eigen::Index a = 0; a < table.scores.rows(); ++a) {
            json row;
            row["instance_id"] = a;
            row["weight"] = number(table.weights(a));
            row["label"] = table.labels[static_cast<std::size_t>(a)];
            for (Eigen::Index m = 0; m < k; ++m) row[pc_name(m)] = number(table.scores(a, m));
            rows.push_back(std::move(row));
        }
        os << rows.dump(2) << '\n';
        return;
    }
    os << "instance_id,weight,label";
    for (Eigen::Index m = 0; m < k; ++m) os << ',' << pc_name(m);
    os << '\n';
    for (Eigen::Index a = 0; a < table.scores.rows(); ++a) {
        os << a << ',' << format_number(table.weights(a)) << ',' << csv_field(table.labels[static_cast<std::size_t>(a)]);
        for (Eigen::Index m = 0; m < k; ++m) os << ',' << format_number(table.scores(a, m));
        os << '\n';
    }
}

void write_model_json(std::ostream& os, const PcaModel& model) {
    json doc;
    doc["variables"] = model.variables;
    doc["categories"] = model.categories;
    json layout = json::array();
    for (std::size_t i = 0; i < model.layout.blocks(); ++i)
        layout.push_back({{"variable", model.variables[i]},
                          {"offset", model.layout.offsets[i]},
                          {"width", model.layout.widths[i]}});
    doc["layout"] = std::move(layout);
    doc["eigenvalues"] = vector_json(model.eigenvalues);
    json vectors = json::array();
    for (Eigen::Index m = 0; m < model.eigenvectors.cols(); ++m) vectors.push_back(vector_json(model.eigenvectors.col(m)));
    doc["eigenvectors"] = std::move(vectors);
    doc["mean"] = vector_json(model.mean);
    os << doc.dump(2) << '\n';
}

void write_scree(std::ostream& os, Format format, const std::vector<std::pair<int, double>>& modes) {
    if (format == Format::json) {
        json rows = json::array();
        for (const auto& [mode, value] : modes) rows.push_back({{"mode", mode}, {"eigenvalue", number(value)}});
        os << rows.dump(2) << '\n';
        return;
    }
    os << "mode,eigenvalue\n";
    for (const auto& [mode, value] : modes) os << mode << ',' << format_number(value) << '\n';
}

void write_selection(std::ostream& os, Format format, const std::vector<VariableImportance>& ranking, std::size_t top) {
    if (format == Format::json) {
        json doc;
        json rows = json::array();
        json selected = json::array();
        for (std::size_t r = 0; r < ranking.size(); ++r) {
            rows.push_back({{"rank", r + 1}, {"variable", ranking[r].name}, {"importance", number(ranking[r].importance)}});
            if (r < top) selected.push_back(ranking[r].name);
        }
        doc["ranking"] = std::move(rows);
        doc["selected"] = std::move(selected);
        os << doc.dump(2) << '\n';
        return;
    }
    os << "rank,variable,importance,selected\n";
    for (std::size_t r = 0; r < ranking.size(); ++r)
        os << r + 1 << ',' << csv_field(ranking[r].name) << ',' << format_number(ranking[r].importance) << ','
           << (r < top ? 1 : 0) << '\n';
}

void write_interpretations(std::ostream& os, Format format, const std::vector<ComponentInterpretation>& items,
                           const PcaModel& model) {
    const auto categories_of = [&](const std::string& variable) -> const std::vector<std::string>& {
        const auto it = std::find(model.variables.begin(), model.variables.end(), variable);
        return model.categories[static_cast<std::size_t>(it - model.variables.begin())];
    };
    if (format == Format::json) {
        json doc = json::array();
        for (const auto& item : items) {
            json terms = json::array();
            for (const auto& t : item.terms)
                terms.push_back({{"coefficient", number(t.coefficient)},
                                 {"atom", atom_name(t.atom, categories_of(t.atom.variable))},
                                 {"kind", t.atom.kind == BasisAtom::Kind::edge ? "edge" : "center"},
                                 {"variable", t.atom.variable}});
            json blocks = json::array();
            for (const auto& b : item.blocks)
                blocks.push_back({{"variable", b.variable},
                                  {"norm", number(b.norm)},
                                  {"epsilon", number(b.epsilon)},
                                  {"residual", number(b.residual)}});
            doc.push_back({{"component", item.component + 1},
                           {"eigenvalue", number(model.eigenvalues(item.component - model.first_component))},
                           {"terms", std::move(terms)},
                           {"blocks", std::move(blocks)},
                           {"residual_norm", number(item.residual_norm)}});
        }
        os << doc.dump(2) << '\n';
        return;
    }
    for (const auto& item : items) {
        os << "pc" << item.component + 1 << " (eigenvalue "
           << format_number(model.eigenvalues(item.component - model.first_component)) << ")\n";
        for (const auto& t : item.terms) {
            const double c = round_significant(t.coefficient);
            os << "  " << (c < 0 ? "-" : "+") << fixed(std::abs(c), 2) << ' '
               << atom_name(t.atom, categories_of(t.atom.variable)) << "    (" << format_number(t.coefficient) << ")\n";
        }
        os << "  residual " << format_number(item.residual_norm) << '\n';
    }
}

void write_dataset_csv(std::ostream& os, const CategoricalDataset& data, bool with_weights) {
    for (std::size_t i = 0; i < data.variable_count(); ++i) os << (i ? "," : "") << csv_field(data.variable(i).name);
    if (with_weights) os << ",weight";
    os << '\n';
    for (Eigen::Index a = 0; a < data.instance_count(); ++a) {
        for (std::size_t i = 0; i < data.variable_count(); ++i) {
            const auto& v = data.variable(i);
            os << (i ? "," : "") << csv_field(v.categories[static_cast<std::size_t>(v.codes[static_cast<std::size_t>(a)])]);
        }
        if (with_weights) os << ',' << format_number(data.weights()(a));
        os << '\n';
    }
}

std::string scatter_svg(const ScoreTable& table, const PcaModel& model) {
    // Unique label -> (pc1, pc2, total weight), in first-appearance order.
    std::vector<std::string> order;
    std::map<std::string, std::tuple<double, double, double>> points;
    const bool two_d = table.scores.cols() >= 2;
    for (Eigen::Index a = 0; a < table.scores.rows(); ++a) {
        const auto& label = table.labels[static_cast<std::size_t>(a)];
        auto [it, inserted] = points.try_emplace(label, table.scores(a, 0), two_d ? table.scores(a, 1) : 0.0, 0.0);
        if (inserted) order.push_back(label);
        std::get<2>(it->second) += table.weights(a);
    }
    double xlo = 0, xhi = 0, ylo = 0, yhi = 0, wmax = 0;
    bool first = true;
    for (const auto& [label, p] : points) {
        const auto [x, y, w] = p;
        xlo = first ? x : std::min(xlo, x);
        xhi = first ? x : std::max(xhi, x);
        ylo = first ? y : std::min(ylo, y);
        yhi = first ? y : std::max(yhi, y);
        wmax = std::max(wmax, w);
        first = false;
    }
    const Axis xa = padded_axis(xlo, xhi), ya = padded_axis(ylo, yhi);
    const double total = model.eigenvalues.sum();
    const auto share = [&](Eigen::Index m) {
        return m < model.eigenvalues.size() && total > 0 ? 100.0 * model.eigenvalues(m) / total : 0.0;
    };
    const auto pc = model.first_component;

    std::ostringstream s;
    svg_open(s);
    svg_frame(s, "PC" + std::to_string(pc + 1) + " (" + fixed(share(0), 1) + "% of variance)",
              two_d ? "PC" + std::to_string(pc + 2) + " (" + fixed(share(1), 1) + "% of variance)" : "");
    const double x0 = xa.map(0, kMargin, kWidth - kMargin), y0 = ya.map(0, kHeight - kMargin, kMargin);
    if (x0 > kMargin && x0 < kWidth - kMargin)
        s << "<line x1=\"" << fixed(x0, 2) << "\" y1=\"" << kMargin << "\" x2=\"" << fixed(x0, 2) << "\" y2=\""
          << kHeight - kMargin << "\" stroke=\"#bbbbbb\" stroke-dasharray=\"4 4\"/>\n";
    if (y0 > kMargin && y0 < kHeight - kMargin)
        s << "<line x1=\"" << kMargin << "\" y1=\"" << fixed(y0, 2) << "\" x2=\"" << kWidth - kMargin << "\" y2=\""
          << fixed(y0, 2) << "\" stroke=\"#bbbbbb\" stroke-dasharray=\"4 4\"/>\n";
    const bool label_points = order.size() <= 200;
    for (const auto& label : order) {
        const auto [x, y, w] = points.at(label);
        const double px = xa.map(x, kMargin, kWidth - kMargin);
        const double py = ya.map(y, kHeight - kMargin, kMargin);
        const double r = 2.0 + 10.0 * (wmax > 0 ? std::sqrt(w / wmax) : 0.0);
        s << "<circle cx=\"" << fixed(px, 2) << "\" cy=\"" << fixed(py, 2) << "\" r=\"" << fixed(r, 2)
          << "\" fill=\"steelblue\" fill-opacity=\"0.6\"/>\n";
        if (label_points)
            s << "<text x=\"" << fixed(px + r + 2, 2) << "\" y=\"" << fixed(py + 4, 2)
              << "\" font-family=\"sans-serif\" font-size=\"11\">" << xml_escape(label) << "</text>\n";
    }
    s << "</svg>\n";
    return s.str();
}

std::string scree_svg(const std::vector<std::pair<int, double>>& modes) {
    std::ostringstream s;
    svg_open(s);
    svg_frame(s, "mode number", "eigenvalue");
    double hi = 0;
    for (const auto& [m, v] : modes) hi = std::max(hi, v);
    const Axis xa = padded_axis(1, modes.empty() ? 1 : static_cast<double>(modes.back().first));
    const Axis ya = padded_axis(0, hi);
    std::string path;
    for (const auto& [m, v] : modes) {
        const double px = xa.map(m, kMargin, kWidth - kMargin);
        const double py = ya.map(v, kHeight - kMargin, kMargin);
        path += (path.empty() ? "M" : " L") + fixed(px, 2) + " " + fixed(py, 2);
        s << "<circle cx=\"" << fixed(px, 2) << "\" cy=\"" << fixed(py, 2) << "\" r=\"3\" fill=\"black\"/>\n";
    }
    if (!path.empty()) s << "<path d=\"" << path << "\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\"/>\n";
    s << "</svg>\n";
    return s.str();
}

} // namespace catcov
