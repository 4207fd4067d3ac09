#include "vqc/data.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "vqc/rng.hpp"
#include "vqc/text.hpp"

namespace vqc {

namespace {

std::vector<std::string_view> tokenize_row(std::string_view line) {
    if (line.find(',') != std::string_view::npos) return split(line, ',');
    // Whitespace-delimited: collapse runs of spaces/tabs.
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        if (i >= line.size()) break;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
        out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

}  // namespace

Dataset load_dataset(const std::string& path, const LoadOptions& options) {
    std::string name = path;
    const auto slash = name.find_last_of('/');
    if (slash != std::string::npos) name = name.substr(slash + 1);
    const auto dot = name.find_last_of('.');
    if (dot != std::string::npos) name = name.substr(0, dot);
    return load_dataset(path, name, options);
}

Dataset load_dataset(const std::string& path, const std::string& name, const LoadOptions& options) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_dataset: cannot open '" + path + "'");

    Dataset ds;
    ds.name = name;
    std::vector<std::string> label_names;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        const std::string_view stripped = trim(line);
        if (stripped.empty()) continue;
        auto tokens = tokenize_row(stripped);
        int label_col = options.label_column;
        if (label_col < 0) label_col += static_cast<int>(tokens.size());
        if (label_col < 0 || label_col >= static_cast<int>(tokens.size()))
            throw std::runtime_error("load_dataset: label column out of range in row " +
                                     std::to_string(row + 1));
        const std::size_t f_count = tokens.size() - 1;
        if (ds.num_features == 0 && row == 0) {
            ds.num_features = f_count;
        } else if (f_count != ds.num_features) {
            throw std::runtime_error("load_dataset: row " + std::to_string(row + 1) + " has " +
                                     std::to_string(f_count) + " features, expected " +
                                     std::to_string(ds.num_features));
        }
        std::size_t col_out = 0;
        for (std::size_t c = 0; c < tokens.size(); ++c) {
            const std::string_view cell = trim(tokens[c]);
            if (static_cast<int>(c) == label_col) {
                if (cell.empty())
                    throw std::runtime_error("load_dataset: missing label in row " +
                                             std::to_string(row + 1));
                const std::string key(cell);
                auto it = std::find(label_names.begin(), label_names.end(), key);
                if (it == label_names.end()) {
                    label_names.push_back(key);
                    ds.labels.push_back(static_cast<int>(label_names.size()) - 1);
                } else {
                    ds.labels.push_back(static_cast<int>(it - label_names.begin()));
                }
                continue;
            }
            if (cell.empty())
                throw std::runtime_error("load_dataset: missing value at row " +
                                         std::to_string(row + 1) + ", column " + std::to_string(c + 1));
            double v = 0.0;
            if (!parse_double(cell, v))
                throw std::runtime_error("load_dataset: non-numeric feature '" + std::string(cell) +
                                         "' at row " + std::to_string(row + 1) + ", column " +
                                         std::to_string(c + 1));
            ds.features.push_back(v);
            ++col_out;
        }
        if (col_out != ds.num_features)
            throw std::runtime_error("load_dataset: inconsistent width at row " + std::to_string(row + 1));
        ++row;
    }
    if (row == 0) throw std::runtime_error("load_dataset: '" + path + "' contains no data rows");
    ds.num_classes = static_cast<int>(label_names.size());
    return ds;
}

std::pair<Dataset, Dataset> split(const Dataset& dataset, std::size_t train_size,
                                  std::size_t test_size, std::uint64_t seed) {
    const std::size_t n = dataset.num_rows();
    if (train_size + test_size > n)
        throw std::invalid_argument("split: train_size + test_size exceeds dataset rows");
    if (train_size == 0) throw std::invalid_argument("split: train_size must be positive");

    Rng rng(seed);
    const std::size_t num_classes = static_cast<std::size_t>(dataset.num_classes);
    std::vector<std::vector<std::size_t>> by_class(num_classes);
    for (std::size_t r = 0; r < n; ++r)
        by_class[static_cast<std::size_t>(dataset.labels[r])].push_back(r);
    for (auto& rows : by_class) rng.shuffle(rows);

    // Largest-remainder apportionment of the requested sizes across classes.
    // Classes with a single row always land in training.
    auto apportion = [&](std::size_t want, const std::vector<std::size_t>& available,
                         std::size_t pool) {
        std::vector<std::size_t> take(num_classes, 0);
        std::vector<double> frac(num_classes, 0.0);
        std::size_t assigned = 0;
        for (std::size_t c = 0; c < num_classes; ++c) {
            if (available[c] == 0 || pool == 0) continue;
            const double exact =
                static_cast<double>(want) * static_cast<double>(available[c]) / static_cast<double>(pool);
            take[c] = std::min(available[c], static_cast<std::size_t>(exact));
            frac[c] = exact - std::floor(exact);
            assigned += take[c];
        }
        while (assigned < want) {
            std::size_t best = num_classes;
            for (std::size_t c = 0; c < num_classes; ++c) {
                if (take[c] >= available[c]) continue;
                if (best == num_classes || frac[c] > frac[best]) best = c;
            }
            if (best == num_classes) break;
            ++take[best];
            frac[best] = -1.0;
            ++assigned;
        }
        return take;
    };

    std::vector<std::size_t> class_counts(num_classes, 0);
    for (std::size_t c = 0; c < num_classes; ++c) class_counts[c] = by_class[c].size();

    // Tiny classes are forced into training before apportioning the rest.
    std::vector<std::size_t> train_take(num_classes, 0);
    std::vector<std::size_t> splittable = class_counts;
    std::size_t forced = 0;
    for (std::size_t c = 0; c < num_classes; ++c) {
        if (class_counts[c] < 2) {
            train_take[c] = class_counts[c];
            forced += class_counts[c];
            splittable[c] = 0;
        }
    }
    if (forced > train_size) throw std::invalid_argument("split: train_size too small for tiny classes");
    std::size_t pool = 0;
    for (std::size_t c = 0; c < num_classes; ++c) pool += splittable[c];
    const auto extra = apportion(train_size - forced, splittable, pool);
    for (std::size_t c = 0; c < num_classes; ++c) train_take[c] += extra[c];

    std::vector<std::size_t> remaining(num_classes, 0);
    std::size_t rem_pool = 0;
    for (std::size_t c = 0; c < num_classes; ++c) {
        remaining[c] = class_counts[c] - train_take[c];
        rem_pool += remaining[c];
    }
    const auto test_take = apportion(test_size, remaining, rem_pool);

    auto gather = [&](const std::vector<std::size_t>& take, std::size_t offset_from) {
        Dataset out;
        out.name = dataset.name;
        out.num_features = dataset.num_features;
        out.num_classes = dataset.num_classes;
        for (std::size_t c = 0; c < num_classes; ++c) {
            const std::size_t start = offset_from == 0 ? 0 : train_take[c];
            for (std::size_t i = 0; i < take[c]; ++i) {
                const std::size_t r = by_class[c][start + i];
                const auto row = dataset.row(r);
                out.features.insert(out.features.end(), row.begin(), row.end());
                out.labels.push_back(dataset.labels[r]);
            }
        }
        return out;
    };

    Dataset train = gather(train_take, 0);
    Dataset test = gather(test_take, 1);
    if (train.num_rows() != train_size || test.num_rows() != test_size)
        throw std::runtime_error("split: could not honor the requested sizes with stratification");
    return {std::move(train), std::move(test)};
}

Standardizer standardize_fit_apply(Dataset& train, Dataset& test) {
    const std::size_t f = train.num_features;
    const std::size_t n = train.num_rows();
    if (n == 0) throw std::invalid_argument("standardize: empty training split");
    Standardizer s;
    s.mean.assign(f, 0.0);
    s.std_dev.assign(f, 0.0);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < f; ++c) s.mean[c] += train.at(r, c);
    for (std::size_t c = 0; c < f; ++c) s.mean[c] /= static_cast<double>(n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < f; ++c) {
            const double d = train.at(r, c) - s.mean[c];
            s.std_dev[c] += d * d;
        }
    for (std::size_t c = 0; c < f; ++c) {
        s.std_dev[c] = std::sqrt(s.std_dev[c] / static_cast<double>(n));
        if (!(s.std_dev[c] > 0.0))
            throw std::runtime_error("standardize: column " + std::to_string(c + 1) +
                                     " has zero variance on the training split");
    }
    auto apply = [&](Dataset& ds) {
        for (std::size_t r = 0; r < ds.num_rows(); ++r)
            for (std::size_t c = 0; c < f; ++c)
                ds.features[r * f + c] = (ds.features[r * f + c] - s.mean[c]) / s.std_dev[c];
    };
    apply(train);
    if (test.num_features != f) throw std::invalid_argument("standardize: train/test width mismatch");
    apply(test);
    return s;
}

PcaModel pca_fit(const Dataset& train, std::size_t k) {
    const std::size_t f = train.num_features;
    const std::size_t n = train.num_rows();
    if (k < 1 || k > f) throw std::invalid_argument("pca_fit: k must be in [1, num_features]");
    if (n < 2) throw std::invalid_argument("pca_fit: need at least 2 rows");

    Eigen::MatrixXd x(n, f);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < f; ++c) x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = train.at(r, c);
    Eigen::RowVectorXd mean = x.colwise().mean();
    x.rowwise() -= mean;

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinV);
    const Eigen::VectorXd& sigma = svd.singularValues();
    const Eigen::MatrixXd& v = svd.matrixV();  // f x min(n, f)

    PcaModel model;
    model.k = k;
    model.input_features = f;
    model.mean.assign(mean.data(), mean.data() + f);
    model.components.resize(k * f);
    double total_var = 0.0;
    for (Eigen::Index i = 0; i < sigma.size(); ++i) total_var += sigma(i) * sigma(i);
    model.explained_variance_ratio.resize(k);
    for (std::size_t c = 0; c < k; ++c) {
        Eigen::VectorXd comp = v.col(static_cast<Eigen::Index>(c));
        // Sign convention: largest-magnitude entry positive.
        Eigen::Index arg = 0;
        comp.cwiseAbs().maxCoeff(&arg);
        if (comp(arg) < 0.0) comp = -comp;
        for (std::size_t j = 0; j < f; ++j) model.components[c * f + j] = comp(static_cast<Eigen::Index>(j));
        const double sv = sigma(static_cast<Eigen::Index>(c));
        model.explained_variance_ratio[c] = total_var > 0.0 ? sv * sv / total_var : 0.0;
    }
    return model;
}

Dataset pca_apply(const PcaModel& model, const Dataset& data) {
    if (data.num_features != model.input_features)
        throw std::invalid_argument("pca_apply: feature width does not match the fitted model");
    Dataset out;
    out.name = data.name;
    out.num_classes = data.num_classes;
    out.labels = data.labels;
    out.num_features = model.k;
    out.features.resize(data.num_rows() * model.k);
    for (std::size_t r = 0; r < data.num_rows(); ++r) {
        for (std::size_t c = 0; c < model.k; ++c) {
            double acc = 0.0;
            for (std::size_t j = 0; j < model.input_features; ++j)
                acc += (data.at(r, j) - model.mean[j]) * model.component(c, j);
            out.features[r * model.k + c] = acc;
        }
    }
    return out;
}

double encode(double standardized_value, const EncodingParams& params) {
    if (!(params.alpha > 0.0) || !(params.alpha < 2.0))
        throw std::invalid_argument("encode: alpha must be in (0, 2)");
    if (!(params.q > 0.0)) throw std::invalid_argument("encode: q must be positive");
    return (1.0 - params.alpha / 2.0) * (std::numbers::pi / params.q) * standardized_value;
}

std::vector<double> encode_features(const Dataset& data, const EncodingParams& params) {
    std::vector<double> out(data.features.size());
    for (std::size_t i = 0; i < data.features.size(); ++i) out[i] = encode(data.features[i], params);
    return out;
}

}  // namespace vqc
