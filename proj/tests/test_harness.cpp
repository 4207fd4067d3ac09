#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "vqc/harness.hpp"

using namespace vqc;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string out_dir(const std::string& leaf) {
    const auto dir = std::filesystem::temp_directory_path() / "vqc_harness_tests" / leaf;
    std::filesystem::remove_all(dir);
    return dir.string();
}

std::string small_iris_config(const std::string& dir, const std::string& extra = "") {
    return "dataset = iris\n"
           "data_path = " + oracles::data_dir() + "/iris.csv\n"
           "train_size = 30\n"
           "test_size = 30\n"
           "qubit_min = 2\n"
           "qubit_max = 4\n"
           "num_circuits = 3\n"
           "repeats = 2\n"
           "max_epochs = 25\n"
           "base_seed = 97\n"
           "output_dir = " + dir + "\n" + extra;
}

ExperimentRecord make_record(int id, int qubits, std::uint64_t seed, double mean) {
    ExperimentRecord r;
    r.circuit_id = id;
    r.spec = sample_circuit(qubits, 4, false, false, seed);
    r.holdout.mean_accuracy = mean;
    r.holdout.per_run = {mean};
    return r;
}

}  // namespace

TEST_CASE("config parsing: round trip, defaults, rejection of unknown keys") {
    const SweepConfig c = parse_config_text(
        "# comment\n"
        "dataset = iris\n"
        "data_path = data/iris.csv\n"
        "train_size = 90\n"
        "test_size = 60\n"
        "qubit_min = 2\n"
        "qubit_max = 4\n"
        "num_circuits = 30\n"
        "repeat_features = true\n"
        "base_seed = 42\n"
        "noise_targets = 0,0.1,0.35\n");
    CHECK(c.dataset == "iris");
    CHECK(c.train_size == 90);
    CHECK(c.repeat_features);
    CHECK(c.repeats == 10);  // default
    CHECK(c.noise_targets == std::vector<double>{0.0, 0.1, 0.35});
    CHECK_FALSE(c.pca_components.has_value());

    CHECK_THROWS_WITH_AS(parse_config_text("qbit_min = 2\n"), doctest::Contains("unknown key"),
                         std::runtime_error);
    CHECK_THROWS_WITH_AS(parse_config_text("train_size = abc\n"), doctest::Contains("integer"),
                         std::runtime_error);
    CHECK_THROWS_WITH_AS(parse_config_text("dataset = a\ndataset = b\n"),
                         doctest::Contains("duplicate"), std::runtime_error);
    CHECK_THROWS_AS(parse_config_text("just some words\n"), std::runtime_error);
}

TEST_CASE("run_sweep: row count, qubit bounds, determinism across runs and workers") {
    const auto dir = out_dir("sweep");
    const SweepConfig cfg = parse_config_text(small_iris_config(dir, "output_name = a\n"));
    const SweepOutput a = run_sweep(cfg);
    CHECK(a.records.size() == 3);
    for (const auto& r : a.records) {
        CHECK(r.spec.num_qubits >= 2);
        CHECK(r.spec.num_qubits <= 4);
        CHECK(r.holdout.per_run.size() == 2);
        CHECK(r.noise_index == -1);
        CHECK(r.wall_time_s >= 0.0);
    }

    // Identical config, different output name: identical record CSV bytes.
    SweepConfig cfg_b = parse_config_text(small_iris_config(dir, "output_name = b\n"));
    const SweepOutput b = run_sweep(cfg_b);
    CHECK(slurp(a.csv_path) == slurp(b.csv_path));

    SweepConfig cfg_c = parse_config_text(small_iris_config(dir, "output_name = c\nworkers = 8\n"));
    const SweepOutput c = run_sweep(cfg_c);
    CHECK(slurp(a.csv_path) == slurp(c.csv_path));
    CHECK(slurp(a.specs_path) == slurp(c.specs_path));

    // Header shape: 2 accuracy columns for repeats = 2.
    const std::string header = slurp(a.csv_path).substr(0, slurp(a.csv_path).find('\n'));
    CHECK(header.find("acc_1,acc_2,mean_accuracy") != std::string::npos);
    CHECK(header.find("acc_3") == std::string::npos);
}

TEST_CASE("run_sweep: serialized specs reproduce their records") {
    const auto dir = out_dir("sweep_repro");
    const SweepConfig cfg = parse_config_text(small_iris_config(dir));
    const SweepOutput out = run_sweep(cfg);

    std::ifstream specs(out.specs_path);
    std::string line;
    int id = 0;
    while (std::getline(specs, line)) {
        const CircuitSpec spec = spec_from_string(line);
        CHECK(spec == out.records[static_cast<std::size_t>(id)].spec);
        HoldoutConfig hold;
        hold.train.max_epochs = cfg.max_epochs;
        hold.train_size = cfg.train_size;
        hold.test_size = cfg.test_size;
        const Dataset iris = load_dataset(cfg.data_path, "iris", {});
        const HoldoutResult redo =
            holdout_repeat(spec, iris, cfg.repeats, hold, std::nullopt,
                           derive_seed(cfg.base_seed, {0x686f, static_cast<std::uint64_t>(id), 0}));
        CHECK(redo.per_run == out.records[static_cast<std::size_t>(id)].holdout.per_run);
        ++id;
    }
    CHECK(id == 3);
}

TEST_CASE("run_sweep: invalid configs are rejected") {
    const auto dir = out_dir("sweep_bad");
    CHECK_THROWS_WITH_AS(run_sweep(parse_config_text(small_iris_config(dir, "qubit_max = 9\n"))),
                         doctest::Contains("effective feature count"), std::runtime_error);
    CHECK_THROWS_AS(run_sweep(parse_config_text("data_path = none.csv\n")), std::runtime_error);
}

TEST_CASE("aggregations: max per group, ascending keys, csv path") {
    std::vector<ExperimentRecord> records;
    records.push_back(make_record(0, 2, 11, 0.9));
    records.push_back(make_record(1, 3, 12, 0.7));
    records.push_back(make_record(2, 2, 11, 0.4));  // same spec as record 0 -> same depth
    records[2].holdout.mean_accuracy = 0.4;

    const auto by_depth = aggregate_best_by_depth(records);
    const int depth0 = records[0].depth();
    bool found = false;
    for (const auto& [d, acc] : by_depth)
        if (d == depth0) {
            CHECK(acc == 0.9);  // max of 0.9 and 0.4
            found = true;
        }
    CHECK(found);
    for (std::size_t i = 1; i < by_depth.size(); ++i) CHECK(by_depth[i].first > by_depth[i - 1].first);

    const auto by_qubits = aggregate_best_by_qubits(records);
    for (std::size_t i = 1; i < by_qubits.size(); ++i)
        CHECK(by_qubits[i].first > by_qubits[i - 1].first);
    for (const auto& [q, acc] : by_qubits)
        if (q == 2) CHECK(acc == 0.9);

    // Through the CSV reader.
    const auto dir = out_dir("agg");
    const SweepOutput out = run_sweep(parse_config_text(small_iris_config(dir)));
    const auto agg = aggregate_csv(out.csv_path, "depth");
    CHECK(!agg.empty());
    const auto agg_q = aggregate_csv(out.csv_path, "qubits");
    CHECK(!agg_q.empty());
    CHECK_THROWS_AS(static_cast<void>(aggregate_csv(out.csv_path, "bogus")), std::invalid_argument);
}

TEST_CASE("run_noise_curve: baseline row injection and row shape") {
    const auto dir = out_dir("curve");
    // Serialize two small circuits first.
    const CircuitSpec shallow = minimal_circuit(4, 4);
    const CircuitSpec other = sample_circuit(3, 4, false, false, 21);
    const std::string specs_path = dir + "/specs.txt";
    std::filesystem::create_directories(dir);
    {
        std::ofstream f(specs_path);
        f << spec_to_string(shallow) << '\n' << spec_to_string(other) << '\n';
    }
    const SweepConfig cfg = parse_config_text(
        small_iris_config(dir, "specs_file = " + specs_path +
                                   "\nnoise_op = cz\nnoise_targets = 0.1\ngrid_steps = 4\n"
                                   "error_shots = 2000\noutput_name = curve\n"));
    const NoiseCurveOutput out = run_noise_curve(cfg);
    REQUIRE(out.records.size() == 4);  // 2 circuits x (injected 0 + 0.1)
    CHECK(out.records[0].target_error == 0.0);
    CHECK(out.records[0].estimated_error == 0.0);
    CHECK(out.records[1].target_error == 0.1);
    CHECK(out.records[1].estimated_error > 0.0);
    CHECK(out.records[0].depth == 8);
    for (const auto& r : out.records) {
        CHECK(r.op == NoisyOp::CZ);
        CHECK(r.mean_accuracy >= 0.0);
        CHECK(r.mean_accuracy <= 1.0);
    }
    const std::string csv = slurp(out.csv_path);
    CHECK(csv.find("circuit_id,depth,op_kind,target_error,estimated_error,mean_accuracy,std_accuracy") == 0);

    // Unreachable target aborts before any training.
    const SweepConfig bad = parse_config_text(
        small_iris_config(dir, "specs_file = " + specs_path +
                                   "\nnoise_op = cz\nnoise_targets = 0.9\ngrid_steps = 4\n"
                                   "error_shots = 2000\noutput_name = bad\n"));
    CHECK_THROWS_WITH_AS(run_noise_curve(bad), doctest::Contains("achievable range"),
                         std::runtime_error);
}

TEST_CASE("run_error_surface writes the expected columns") {
    const auto dir = out_dir("surface");
    const SweepConfig cfg = parse_config_text("grid_steps = 3\nerror_shots = 400\nbase_seed = 5\n"
                                              "output_dir = " + dir + "\noutput_name = surf\n");
    const std::string path = run_error_surface(cfg);
    const std::string csv = slurp(path);
    CHECK(csv.find("t1_ns,t2_ns,op_kind,estimated_error\n") == 0);
    CHECK(csv.find(",cz,") != std::string::npos);
    CHECK(csv.find(",measure,") != std::string::npos);
}

TEST_CASE("noise grid sweep attaches error estimates to every record") {
    const auto dir = out_dir("noisegrid");
    const SweepConfig cfg = parse_config_text(
        "dataset = iris\n"
        "data_path = " + oracles::data_dir() + "/iris.csv\n"
        "train_size = 20\ntest_size = 20\nqubit_min = 2\nqubit_max = 2\n"
        "num_circuits = 1\nrepeats = 1\nmax_epochs = 25\nbase_seed = 3\n"
        "noise_grid_steps = 2\nerror_shots = 500\noutput_dir = " + dir + "\n");
    const SweepOutput out = run_sweep(cfg);
    const auto models = grid(2);
    CHECK(out.records.size() == models.size());
    for (const auto& r : out.records) {
        CHECK(r.noise_t1_ns.has_value());
        CHECK(r.cz_error.has_value());
        CHECK(r.measure_error.has_value());
        CHECK(r.noise_index >= 0);
    }
}
