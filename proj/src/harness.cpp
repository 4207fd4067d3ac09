#include "vqc/harness.hpp"

#include <atomic>
#include <chrono>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "vqc/rng.hpp"
#include "vqc/text.hpp"

namespace vqc {

namespace {

// Seed derivation tags for the independent random streams of a run.
constexpr std::uint64_t kTagQubitDraw = 0x7175;
constexpr std::uint64_t kTagSample = 0x7363;
constexpr std::uint64_t kTagHoldout = 0x686f;
constexpr std::uint64_t kTagErrorEstimate = 0x6565;

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
    if (workers <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        while (!failed.load(std::memory_order_relaxed)) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::scoped_lock lock(error_mutex);
                if (!error) error = std::current_exception();
                failed.store(true, std::memory_order_relaxed);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const int n = std::min<int>(workers, static_cast<int>(count));
    pool.reserve(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

std::string opt_str(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

struct ConfigParser {
    std::map<std::string, std::string, std::less<>> kv;
    std::string origin;

    bool has(std::string_view key) const { return kv.find(key) != kv.end(); }

    std::string str(std::string_view key, std::string fallback) const {
        auto it = kv.find(key);
        return it == kv.end() || it->second.empty() ? fallback : it->second;
    }
    std::int64_t integer(std::string_view key, std::int64_t fallback) const {
        auto it = kv.find(key);
        if (it == kv.end() || it->second.empty()) return fallback;
        std::int64_t v = 0;
        if (!parse_int64(it->second, v))
            throw std::runtime_error(origin + ": key '" + std::string(key) + "' is not an integer");
        return v;
    }
    std::uint64_t uinteger(std::string_view key, std::uint64_t fallback) const {
        auto it = kv.find(key);
        if (it == kv.end() || it->second.empty()) return fallback;
        std::uint64_t v = 0;
        if (!parse_uint64(it->second, v))
            throw std::runtime_error(origin + ": key '" + std::string(key) + "' is not an unsigned integer");
        return v;
    }
    double real(std::string_view key, double fallback) const {
        auto it = kv.find(key);
        if (it == kv.end() || it->second.empty()) return fallback;
        double v = 0;
        if (!parse_double(it->second, v))
            throw std::runtime_error(origin + ": key '" + std::string(key) + "' is not a number");
        return v;
    }
    bool boolean(std::string_view key, bool fallback) const {
        auto it = kv.find(key);
        if (it == kv.end() || it->second.empty()) return fallback;
        const std::string& v = it->second;
        if (v == "true" || v == "1") return true;
        if (v == "false" || v == "0") return false;
        throw std::runtime_error(origin + ": key '" + std::string(key) + "' must be true/false");
    }
};

const char* const kKnownKeys[] = {
    "dataset",      "data_path",    "label_column", "train_size",      "test_size",
    "pca_components", "qubit_min",  "qubit_max",    "num_circuits",    "repeat_features",
    "all_pairs",    "repeats",      "max_epochs",   "base_seed",       "output_dir",
    "output_name",  "workers",      "noise_grid_steps", "noise_op",    "noise_targets",
    "specs_file",   "grid_steps",   "error_shots",  "t1_min",          "t1_max",
    "t2_min",       "t2_max",
};

}  // namespace

SweepConfig parse_config_text(const std::string& text, const std::string& origin) {
    ConfigParser p;
    p.origin = origin;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view s = trim(line);
        if (s.empty() || s.front() == '#') continue;
        const auto eq = s.find('=');
        if (eq == std::string_view::npos)
            throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": expected key = value");
        const std::string key(trim(s.substr(0, eq)));
        const std::string value(trim(s.substr(eq + 1)));
        bool known = false;
        for (const char* k : kKnownKeys) known = known || key == k;
        if (!known)
            throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
        if (p.kv.count(key))
            throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
        p.kv[key] = value;
    }

    SweepConfig c;
    c.dataset = p.str("dataset", "");
    c.data_path = p.str("data_path", "");
    c.label_column = static_cast<int>(p.integer("label_column", -1));
    c.train_size = static_cast<std::size_t>(p.integer("train_size", 0));
    c.test_size = static_cast<std::size_t>(p.integer("test_size", 0));
    if (p.has("pca_components") && !p.kv.find("pca_components")->second.empty())
        c.pca_components = static_cast<std::size_t>(p.integer("pca_components", 0));
    c.qubit_min = static_cast<int>(p.integer("qubit_min", 2));
    c.qubit_max = static_cast<int>(p.integer("qubit_max", 0));
    c.num_circuits = static_cast<int>(p.integer("num_circuits", 0));
    c.repeat_features = p.boolean("repeat_features", false);
    c.all_pairs = p.boolean("all_pairs", false);
    c.repeats = static_cast<int>(p.integer("repeats", 10));
    c.max_epochs = static_cast<int>(p.integer("max_epochs", 200));
    c.base_seed = p.uinteger("base_seed", 0);
    c.output_dir = p.str("output_dir", ".");
    c.output_name = p.str("output_name", "sweep");
    c.workers = static_cast<int>(p.integer("workers", 1));
    if (p.has("noise_grid_steps") && !p.kv.find("noise_grid_steps")->second.empty())
        c.noise_grid_steps = static_cast<int>(p.integer("noise_grid_steps", 0));
    if (p.has("noise_op") && !p.kv.find("noise_op")->second.empty()) {
        const std::string op = p.str("noise_op", "");
        if (op == "cz")
            c.noise_op = NoisyOp::CZ;
        else if (op == "measure")
            c.noise_op = NoisyOp::Measure;
        else
            throw std::runtime_error(origin + ": noise_op must be 'cz' or 'measure'");
    }
    if (p.has("noise_targets")) {
        for (std::string_view tok : split(p.kv.find("noise_targets")->second, ',')) {
            double v = 0;
            if (!parse_double(tok, v))
                throw std::runtime_error(origin + ": bad noise_targets entry '" + std::string(tok) + "'");
            c.noise_targets.push_back(v);
        }
    }
    c.specs_file = p.str("specs_file", "");
    c.grid_steps = static_cast<int>(p.integer("grid_steps", 10));
    c.error_shots = p.uinteger("error_shots", 10000);
    c.ranges.t1_min_ns = p.real("t1_min", c.ranges.t1_min_ns);
    c.ranges.t1_max_ns = p.real("t1_max", c.ranges.t1_max_ns);
    c.ranges.t2_min_ns = p.real("t2_min", c.ranges.t2_min_ns);
    c.ranges.t2_max_ns = p.real("t2_max", c.ranges.t2_max_ns);
    return c;
}

SweepConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

namespace {

HoldoutConfig holdout_config(const SweepConfig& c) {
    HoldoutConfig h;
    h.train.max_epochs = c.max_epochs;
    h.train_size = c.train_size;
    h.test_size = c.test_size;
    h.pca_components = c.pca_components;
    return h;
}

Dataset load_and_reduce_source(const SweepConfig& c) {
    if (c.data_path.empty()) throw std::runtime_error("config: data_path is required");
    LoadOptions opt;
    opt.label_column = c.label_column;
    const std::string name = c.dataset.empty() ? c.data_path : c.dataset;
    return load_dataset(c.data_path, name, opt);
}

std::ofstream open_output(const std::string& dir, const std::string& file, std::string& path_out) {
    std::filesystem::create_directories(dir);
    path_out = (std::filesystem::path(dir) / file).string();
    std::ofstream out(path_out, std::ios::binary);  // '\n' line ends on every platform
    if (!out) throw std::runtime_error("cannot write '" + path_out + "'");
    return out;
}

}  // namespace

SweepOutput run_sweep(const SweepConfig& config) {
    const Dataset source = load_and_reduce_source(config);
    const std::size_t effective_features =
        config.pca_components ? *config.pca_components : source.num_features;
    if (config.pca_components && *config.pca_components > source.num_features)
        throw std::runtime_error("config: pca_components exceeds dataset features");
    if (config.num_circuits < 1) throw std::runtime_error("config: num_circuits must be >= 1");
    if (config.qubit_min < 2 || config.qubit_max < config.qubit_min)
        throw std::runtime_error("config: need 2 <= qubit_min <= qubit_max");
    if (static_cast<std::size_t>(config.qubit_max) > effective_features)
        throw std::runtime_error("config: qubit_max exceeds the effective feature count");
    if (config.train_size == 0 || config.test_size == 0)
        throw std::runtime_error("config: train_size and test_size are required");

    // Sample the design points sequentially so worker count cannot matter.
    std::vector<CircuitSpec> specs;
    specs.reserve(static_cast<std::size_t>(config.num_circuits));
    for (int i = 0; i < config.num_circuits; ++i) {
        Rng qubit_rng(derive_seed(config.base_seed, {kTagQubitDraw, static_cast<std::uint64_t>(i)}));
        const int qubits =
            config.qubit_min +
            static_cast<int>(qubit_rng.uniform_int(
                static_cast<std::uint64_t>(config.qubit_max - config.qubit_min + 1)));
        specs.push_back(sample_circuit(qubits, static_cast<int>(effective_features),
                                       config.repeat_features, config.all_pairs,
                                       derive_seed(config.base_seed, {kTagSample, static_cast<std::uint64_t>(i)})));
    }

    struct NoisePoint {
        std::optional<NoiseModel> model;
        std::optional<double> t1, t2, cz_err, meas_err;
    };
    std::vector<NoisePoint> points;
    if (config.noise_grid_steps) {
        const auto models = grid(config.ranges, *config.noise_grid_steps);
        const auto cz_est = estimate_errors_on_grid(NoisyOp::CZ, models, config.error_shots,
                                                    derive_seed(config.base_seed, {kTagErrorEstimate, 0}));
        const auto ms_est = estimate_errors_on_grid(NoisyOp::Measure, models, config.error_shots,
                                                    derive_seed(config.base_seed, {kTagErrorEstimate, 1}));
        for (std::size_t i = 0; i < models.size(); ++i)
            points.push_back({models[i], models[i].cz->t1_ns, models[i].cz->t2_ns, cz_est[i].error,
                              ms_est[i].error});
    } else {
        points.push_back({});
    }

    const HoldoutConfig hold = holdout_config(config);
    const std::size_t task_count = specs.size() * points.size();
    SweepOutput out;
    out.records.resize(task_count);

    parallel_for(task_count, config.workers, [&](std::size_t task) {
        const std::size_t ci = task / points.size();
        const std::size_t ni = task % points.size();
        const std::uint64_t seed =
            derive_seed(config.base_seed, {kTagHoldout, ci, ni});
        ExperimentRecord rec;
        rec.circuit_id = static_cast<int>(ci);
        rec.spec = specs[ci];
        rec.noise_index = points.size() > 1 || points[0].model ? static_cast<int>(ni) : -1;
        rec.noise_t1_ns = points[ni].t1;
        rec.noise_t2_ns = points[ni].t2;
        rec.cz_error = points[ni].cz_err;
        rec.measure_error = points[ni].meas_err;
        const auto start = std::chrono::steady_clock::now();
        try {
            rec.holdout = holdout_repeat(specs[ci], source, config.repeats, hold, points[ni].model, seed);
        } catch (const std::exception& e) {
            throw std::runtime_error("sweep record failed: circuit_id=" + std::to_string(ci) +
                                     " noise_index=" + std::to_string(ni) + " seed=" +
                                     std::to_string(seed) + ": " + e.what());
        }
        rec.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        out.records[task] = std::move(rec);
    });

    // Results CSV, ordered by (circuit_id, noise index) by construction.
    {
        auto csv = open_output(config.output_dir, config.output_name + ".csv", out.csv_path);
        csv << "circuit_id,spec,num_qubits,depth,num_cz_gates,num_parameters,dataset,pca_k,"
               "noise_t1_ns,noise_t2_ns,cz_error,measure_error";
        for (int r = 1; r <= config.repeats; ++r) csv << ",acc_" << r;
        csv << ",mean_accuracy,std_accuracy\n";
        for (const ExperimentRecord& rec : out.records) {
            csv << rec.circuit_id << ',' << spec_to_string(rec.spec) << ',' << rec.spec.num_qubits
                << ',' << rec.depth() << ',' << rec.spec.num_cz_gates() << ','
                << rec.spec.num_parameters << ',' << source.name << ','
                << (config.pca_components ? std::to_string(*config.pca_components) : std::string())
                << ',' << opt_str(rec.noise_t1_ns) << ',' << opt_str(rec.noise_t2_ns) << ','
                << opt_str(rec.cz_error) << ',' << opt_str(rec.measure_error);
            for (double a : rec.holdout.per_run) csv << ',' << format_double(a);
            csv << ',' << format_double(rec.holdout.mean_accuracy) << ','
                << format_double(rec.holdout.std_accuracy) << '\n';
        }
    }
    // Serialized specs, one line per circuit, for exact re-runs.
    {
        auto sf = open_output(config.output_dir, config.output_name + ".specs.txt", out.specs_path);
        for (const CircuitSpec& s : specs) sf << spec_to_string(s) << '\n';
    }
    // Wall times live outside the results CSV so reruns are byte-identical.
    {
        auto tf = open_output(config.output_dir, config.output_name + ".times.csv", out.times_path);
        tf << "circuit_id,noise_index,wall_time_s\n";
        for (const ExperimentRecord& rec : out.records)
            tf << rec.circuit_id << ',' << rec.noise_index << ',' << format_double(rec.wall_time_s)
               << '\n';
    }
    return out;
}

NoiseCurveOutput run_noise_curve(const SweepConfig& config) {
    if (!config.noise_op) throw std::runtime_error("config: noise_op is required for noise-curve");
    if (config.specs_file.empty()) throw std::runtime_error("config: specs_file is required");
    if (config.train_size == 0 || config.test_size == 0)
        throw std::runtime_error("config: train_size and test_size are required");
    const NoisyOp op = *config.noise_op;

    std::vector<CircuitSpec> specs;
    {
        std::ifstream in(config.specs_file);
        if (!in) throw std::runtime_error("cannot open specs file '" + config.specs_file + "'");
        std::string line;
        while (std::getline(in, line)) {
            if (trim(line).empty()) continue;
            specs.push_back(spec_from_string(line));
        }
    }
    if (specs.empty()) throw std::runtime_error("specs file contains no circuits");

    std::vector<double> targets = config.noise_targets;
    if (targets.empty()) throw std::runtime_error("config: noise_targets is required");
    if (std::find(targets.begin(), targets.end(), 0.0) == targets.end())
        targets.insert(targets.begin(), 0.0);  // the noiseless baseline row

    const Dataset source = load_and_reduce_source(config);
    const auto estimates = estimate_errors_on_grid(
        op, grid(config.ranges, config.grid_steps), config.error_shots,
        derive_seed(config.base_seed, {kTagErrorEstimate, static_cast<std::uint64_t>(op)}));

    // Resolve all target models up front; unreachable targets abort here.
    struct Point {
        std::optional<NoiseModel> model;
        double estimated = 0.0;
    };
    std::vector<Point> points;
    for (double t : targets) {
        if (t == 0.0) {
            points.push_back({std::nullopt, 0.0});
            continue;
        }
        const NoiseModel m = model_for_target_error(op, t, estimates);
        double est = 0.0;
        for (const auto& e : estimates) {
            const Relaxation& sel = op == NoisyOp::CZ ? *m.cz : *m.measure;
            const Relaxation& cur = op == NoisyOp::CZ ? *e.model.cz : *e.model.measure;
            if (cur.t1_ns == sel.t1_ns && cur.t2_ns == sel.t2_ns) est = e.error;
        }
        points.push_back({m, est});
    }

    const HoldoutConfig hold = holdout_config(config);
    NoiseCurveOutput out;
    out.records.resize(specs.size() * targets.size());
    parallel_for(out.records.size(), config.workers, [&](std::size_t task) {
        const std::size_t ci = task / targets.size();
        const std::size_t ti = task % targets.size();
        const std::uint64_t seed = derive_seed(config.base_seed, {kTagHoldout, ci, ti});
        NoiseCurveRecord rec;
        rec.circuit_id = static_cast<int>(ci);
        rec.depth = circuit_depth(specs[ci]);
        rec.op = op;
        rec.target_error = targets[ti];
        rec.estimated_error = points[ti].estimated;
        HoldoutResult h;
        try {
            h = holdout_repeat(specs[ci], source, config.repeats, hold, points[ti].model, seed);
        } catch (const std::exception& e) {
            throw std::runtime_error("noise-curve record failed: circuit_id=" + std::to_string(ci) +
                                     " target=" + format_double(targets[ti]) + " seed=" +
                                     std::to_string(seed) + ": " + e.what());
        }
        rec.mean_accuracy = h.mean_accuracy;
        rec.std_accuracy = h.std_accuracy;
        out.records[task] = rec;
    });

    auto csv = open_output(config.output_dir, config.output_name + ".csv", out.csv_path);
    csv << "circuit_id,depth,op_kind,target_error,estimated_error,mean_accuracy,std_accuracy\n";
    for (const NoiseCurveRecord& r : out.records)
        csv << r.circuit_id << ',' << r.depth << ',' << to_string(r.op) << ','
            << format_double(r.target_error) << ',' << format_double(r.estimated_error) << ','
            << format_double(r.mean_accuracy) << ',' << format_double(r.std_accuracy) << '\n';
    return out;
}

std::string run_error_surface(const SweepConfig& config) {
    const auto points = error_surface(config.ranges, config.grid_steps, config.error_shots,
                                      derive_seed(config.base_seed, {kTagErrorEstimate}));
    std::string path;
    auto csv = open_output(config.output_dir, config.output_name + ".csv", path);
    csv << "t1_ns,t2_ns,op_kind,estimated_error\n";
    for (const auto& p : points)
        csv << format_double(p.t1_ns) << ',' << format_double(p.t2_ns) << ',' << to_string(p.op)
            << ',' << format_double(p.error) << '\n';
    return path;
}

namespace {

std::vector<std::pair<int, double>> best_by_key(const std::vector<std::pair<int, double>>& rows) {
    std::map<int, double> best;
    for (const auto& [key, acc] : rows) {
        auto [it, inserted] = best.emplace(key, acc);
        if (!inserted && acc > it->second) it->second = acc;
    }
    return {best.begin(), best.end()};
}

}  // namespace

std::vector<std::pair<int, double>> aggregate_best_by_depth(const std::vector<ExperimentRecord>& records) {
    std::vector<std::pair<int, double>> rows;
    rows.reserve(records.size());
    for (const auto& r : records) rows.emplace_back(r.depth(), r.holdout.mean_accuracy);
    return best_by_key(rows);
}

std::vector<std::pair<int, double>> aggregate_best_by_qubits(const std::vector<ExperimentRecord>& records) {
    std::vector<std::pair<int, double>> rows;
    rows.reserve(records.size());
    for (const auto& r : records) rows.emplace_back(r.spec.num_qubits, r.holdout.mean_accuracy);
    return best_by_key(rows);
}

std::vector<std::pair<int, double>> aggregate_csv(const std::string& csv_path, const std::string& by) {
    if (by != "depth" && by != "qubits")
        throw std::invalid_argument("aggregate: --by must be 'depth' or 'qubits'");
    std::ifstream in(csv_path);
    if (!in) throw std::runtime_error("cannot open '" + csv_path + "'");
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("empty CSV '" + csv_path + "'");
    const auto cols = split(header, ',');
    std::ptrdiff_t key_col = -1, acc_col = -1;
    const std::string key_name = by == "depth" ? "depth" : "num_qubits";
    for (std::size_t i = 0; i < cols.size(); ++i) {
        if (cols[i] == key_name) key_col = static_cast<std::ptrdiff_t>(i);
        if (cols[i] == "mean_accuracy") acc_col = static_cast<std::ptrdiff_t>(i);
    }
    if (key_col < 0 || acc_col < 0)
        throw std::runtime_error("CSV lacks '" + key_name + "' or 'mean_accuracy' columns");

    std::vector<std::pair<int, double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto cells = split(line, ',');
        if (cells.size() <= static_cast<std::size_t>(std::max(key_col, acc_col)))
            throw std::runtime_error("short CSV row in '" + csv_path + "'");
        std::int64_t key = 0;
        double acc = 0.0;
        if (!parse_int64(cells[static_cast<std::size_t>(key_col)], key) ||
            !parse_double(cells[static_cast<std::size_t>(acc_col)], acc))
            throw std::runtime_error("bad CSV row in '" + csv_path + "'");
        rows.emplace_back(static_cast<int>(key), acc);
    }
    return best_by_key(rows);
}

}  // namespace vqc
