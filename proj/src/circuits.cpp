#include "vqc/circuits.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "vqc/rng.hpp"
#include "vqc/text.hpp"

namespace vqc {

namespace {

std::vector<std::pair<int, int>> all_qubit_pairs(int num_qubits) {
    std::vector<std::pair<int, int>> pairs;
    for (int a = 0; a < num_qubits; ++a)
        for (int b = a + 1; b < num_qubits; ++b) pairs.emplace_back(a, b);
    return pairs;
}

}  // namespace

int CircuitSpec::num_cz_gates() const {
    int n = 0;
    for (const auto& e : entangler_layers) n += static_cast<int>(e.pairs.size());
    return n;
}

void validate(const CircuitSpec& spec) {
    if (spec.num_qubits < 1) throw std::invalid_argument("CircuitSpec: num_qubits must be >= 1");
    if (spec.num_features < spec.num_qubits)
        throw std::invalid_argument("CircuitSpec: num_qubits exceeds num_features");
    if (spec.rotation_layers.empty())
        throw std::invalid_argument("CircuitSpec: needs at least one rotation layer");
    if (spec.entangler_layers.size() + 1 != spec.rotation_layers.size())
        throw std::invalid_argument("CircuitSpec: entangler layer count must be rotation layers - 1");

    std::vector<int> feature_uses(spec.num_features, 0);
    int param_count = 0;
    for (std::size_t li = 0; li < spec.rotation_layers.size(); ++li) {
        const RotationLayer& layer = spec.rotation_layers[li];
        if (static_cast<int>(layer.slots.size()) != spec.num_qubits)
            throw std::invalid_argument("CircuitSpec: rotation layer slot count != num_qubits");
        if (li > 0 && layer.kind == spec.rotation_layers[li - 1].kind)
            throw std::invalid_argument("CircuitSpec: rotation layers must alternate kinds");
        for (const SlotRef& s : layer.slots) {
            if (s.kind == SlotRef::Kind::Feature) {
                if (layer.kind != RotationLayer::Kind::Feature)
                    throw std::invalid_argument("CircuitSpec: feature slot in a parameter layer");
                if (s.index < 0 || s.index >= spec.num_features)
                    throw std::invalid_argument("CircuitSpec: feature index out of range");
                ++feature_uses[static_cast<std::size_t>(s.index)];
            } else {
                if (s.index < 0 || s.index >= spec.num_parameters)
                    throw std::invalid_argument("CircuitSpec: parameter index out of range");
                ++param_count;
            }
        }
    }
    const int expected_uses = spec.repeat_features ? 2 : 1;
    for (int f = 0; f < spec.num_features; ++f)
        if (feature_uses[static_cast<std::size_t>(f)] != expected_uses)
            throw std::invalid_argument("CircuitSpec: feature " + std::to_string(f) + " used " +
                                        std::to_string(feature_uses[static_cast<std::size_t>(f)]) +
                                        " times, expected " + std::to_string(expected_uses));
    if (param_count != spec.num_parameters)
        throw std::invalid_argument("CircuitSpec: parameter slot count != num_parameters");

    const std::size_t max_pairs =
        static_cast<std::size_t>(spec.num_qubits) * (spec.num_qubits - 1) / 2;
    for (const EntanglerLayer& e : spec.entangler_layers) {
        // A width-1 circuit has no qubit pairs, so its layers are empty.
        if ((e.pairs.empty() && max_pairs > 0) || e.pairs.size() > max_pairs)
            throw std::invalid_argument("CircuitSpec: entangler layer pair count out of range");
        for (std::size_t i = 0; i < e.pairs.size(); ++i) {
            const auto [a, b] = e.pairs[i];
            if (a < 0 || b < 0 || a >= spec.num_qubits || b >= spec.num_qubits || a >= b)
                throw std::invalid_argument("CircuitSpec: bad entangler pair");
            for (std::size_t j = i + 1; j < e.pairs.size(); ++j)
                if (e.pairs[j] == e.pairs[i])
                    throw std::invalid_argument("CircuitSpec: duplicate pair within entangler layer");
        }
    }
}

CircuitSpec sample_circuit(int num_qubits, int num_features, bool repeat_features, bool all_pairs,
                           std::uint64_t seed) {
    if (num_qubits < 2) throw std::invalid_argument("sample_circuit: num_qubits must be >= 2");
    if (num_qubits > num_features)
        throw std::invalid_argument("sample_circuit: num_qubits must be <= num_features");

    Rng rng(seed);
    CircuitSpec spec;
    spec.num_qubits = num_qubits;
    spec.num_features = num_features;
    spec.repeat_features = repeat_features;
    spec.seed = seed;

    // Feature sequence in dataset order, duplicated wholesale when repeating.
    std::vector<int> sequence;
    const int passes = repeat_features ? 2 : 1;
    for (int p = 0; p < passes; ++p)
        for (int f = 0; f < num_features; ++f) sequence.push_back(f);
    const int effective = static_cast<int>(sequence.size());
    const int feature_layer_count = (effective + num_qubits - 1) / num_qubits;

    const bool leading = rng.bernoulli(0.5);
    const bool trailing = rng.bernoulli(0.5);

    int next_param = 0;
    auto param_layer = [&]() {
        RotationLayer layer;
        layer.kind = RotationLayer::Kind::Parameter;
        for (int q = 0; q < num_qubits; ++q)
            layer.slots.push_back({SlotRef::Kind::Parameter, next_param++});
        return layer;
    };

    if (leading) spec.rotation_layers.push_back(param_layer());
    for (int fl = 0; fl < feature_layer_count; ++fl) {
        if (fl > 0) spec.rotation_layers.push_back(param_layer());
        RotationLayer layer;
        layer.kind = RotationLayer::Kind::Feature;
        for (int q = 0; q < num_qubits; ++q) {
            const int pos = fl * num_qubits + q;
            if (pos < effective)
                layer.slots.push_back({SlotRef::Kind::Feature, sequence[static_cast<std::size_t>(pos)]});
            else
                layer.slots.push_back({SlotRef::Kind::Parameter, next_param++});  // padding
        }
        spec.rotation_layers.push_back(layer);
    }
    if (trailing) spec.rotation_layers.push_back(param_layer());
    spec.num_parameters = next_param;

    const auto pool = all_qubit_pairs(num_qubits);
    const std::size_t max_default = std::min<std::size_t>(3, pool.size());
    for (std::size_t gap = 0; gap + 1 < spec.rotation_layers.size(); ++gap) {
        EntanglerLayer layer;
        if (all_pairs) {
            layer.pairs = pool;
        } else {
            const std::size_t count = 1 + static_cast<std::size_t>(rng.uniform_int(max_default));
            // Partial Fisher-Yates over the canonical pair list.
            std::vector<std::pair<int, int>> deck = pool;
            for (std::size_t i = 0; i < count; ++i) {
                const std::size_t j = i + static_cast<std::size_t>(rng.uniform_int(deck.size() - i));
                std::swap(deck[i], deck[j]);
                layer.pairs.push_back(deck[i]);
            }
        }
        spec.entangler_layers.push_back(std::move(layer));
    }

    validate(spec);
    return spec;
}

CircuitSpec minimal_circuit(int num_qubits, int num_features) {
    if (num_qubits < 2 || num_features < num_qubits || num_features > 2 * num_qubits)
        throw std::invalid_argument("minimal_circuit: needs Q >= 2 and Q <= F <= 2Q");
    CircuitSpec spec;
    spec.num_qubits = num_qubits;
    spec.num_features = num_features;

    int next_param = 0;
    RotationLayer feat;
    feat.kind = RotationLayer::Kind::Feature;
    for (int q = 0; q < num_qubits; ++q) feat.slots.push_back({SlotRef::Kind::Feature, q});
    spec.rotation_layers.push_back(feat);
    if (num_features > num_qubits) {
        RotationLayer mid;
        mid.kind = RotationLayer::Kind::Parameter;
        for (int q = 0; q < num_qubits; ++q) mid.slots.push_back({SlotRef::Kind::Parameter, next_param++});
        RotationLayer more;
        more.kind = RotationLayer::Kind::Feature;
        for (int q = 0; q < num_qubits; ++q) {
            const int pos = num_qubits + q;
            if (pos < num_features)
                more.slots.push_back({SlotRef::Kind::Feature, pos});
            else
                more.slots.push_back({SlotRef::Kind::Parameter, next_param++});
        }
        spec.rotation_layers.push_back(mid);
        spec.rotation_layers.push_back(more);
    }
    RotationLayer tail;
    tail.kind = RotationLayer::Kind::Parameter;
    for (int q = 0; q < num_qubits; ++q) tail.slots.push_back({SlotRef::Kind::Parameter, next_param++});
    spec.rotation_layers.push_back(tail);
    spec.num_parameters = next_param;

    for (std::size_t gap = 0; gap + 1 < spec.rotation_layers.size(); ++gap)
        spec.entangler_layers.push_back(EntanglerLayer{{{0, 1}}});

    validate(spec);
    return spec;
}

int circuit_depth(const CircuitSpec& spec) {
    // Greedy per-qubit clocks are exact here: dependencies only exist
    // between gates sharing a qubit, in program order.
    std::vector<int> clock(static_cast<std::size_t>(spec.num_qubits), 0);
    for (std::size_t li = 0; li < spec.rotation_layers.size(); ++li) {
        for (int q = 0; q < spec.num_qubits; ++q) clock[static_cast<std::size_t>(q)] += 3;
        if (li < spec.entangler_layers.size()) {
            for (const auto& [a, b] : spec.entangler_layers[li].pairs) {
                const int t = std::max(clock[static_cast<std::size_t>(a)],
                                       clock[static_cast<std::size_t>(b)]) + 1;
                clock[static_cast<std::size_t>(a)] = t;
                clock[static_cast<std::size_t>(b)] = t;
            }
        }
    }
    int depth = 0;
    for (int q = 0; q < spec.num_qubits; ++q)
        depth = std::max(depth, clock[static_cast<std::size_t>(q)] + 1);  // measurement
    return depth;
}

int min_feature_layers(int num_features, int num_qubits) {
    if (num_features < 1 || num_qubits < 1)
        throw std::invalid_argument("min_feature_layers: arguments must be >= 1");
    return (num_features + num_qubits - 1) / num_qubits;
}

std::vector<GateOp> bind(const CircuitSpec& spec, std::span<const double> encoded_features,
                         std::span<const double> parameters) {
    if (static_cast<int>(encoded_features.size()) != spec.num_features)
        throw std::invalid_argument("bind: encoded feature count " +
                                    std::to_string(encoded_features.size()) + " != " +
                                    std::to_string(spec.num_features));
    if (static_cast<int>(parameters.size()) != spec.num_parameters)
        throw std::invalid_argument("bind: parameter count " + std::to_string(parameters.size()) +
                                    " != " + std::to_string(spec.num_parameters));

    std::vector<GateOp> gates;
    gates.reserve(spec.rotation_layers.size() * static_cast<std::size_t>(spec.num_qubits) * 3 +
                  static_cast<std::size_t>(spec.num_cz_gates()) + 1);
    for (std::size_t li = 0; li < spec.rotation_layers.size(); ++li) {
        const RotationLayer& layer = spec.rotation_layers[li];
        for (int q = 0; q < spec.num_qubits; ++q) {
            const SlotRef& slot = layer.slots[static_cast<std::size_t>(q)];
            const double value = slot.kind == SlotRef::Kind::Feature
                                     ? encoded_features[static_cast<std::size_t>(slot.index)]
                                     : parameters[static_cast<std::size_t>(slot.index)];
            gates.push_back(GateOp::rx_half_pi(q));
            gates.push_back(GateOp::rz(q, value));
            gates.push_back(GateOp::rx_half_pi(q));
        }
        if (li < spec.entangler_layers.size())
            for (const auto& [a, b] : spec.entangler_layers[li].pairs)
                gates.push_back(GateOp::cz(a, b));
    }
    gates.push_back(GateOp::measure_all());
    return gates;
}

std::string spec_to_string(const CircuitSpec& spec) {
    std::string out = "v1";
    out += ";q=" + std::to_string(spec.num_qubits);
    out += ";nf=" + std::to_string(spec.num_features);
    out += ";np=" + std::to_string(spec.num_parameters);
    out += ";rep=" + std::to_string(spec.repeat_features ? 1 : 0);
    out += ";seed=" + std::to_string(spec.seed);
    out += ";L=";
    for (std::size_t li = 0; li < spec.rotation_layers.size(); ++li) {
        if (li > 0) out += '/';
        const RotationLayer& layer = spec.rotation_layers[li];
        out += layer.kind == RotationLayer::Kind::Feature ? "F(" : "P(";
        for (std::size_t s = 0; s < layer.slots.size(); ++s) {
            if (s > 0) out += ' ';
            out += (layer.slots[s].kind == SlotRef::Kind::Feature ? 'w' : 't');
            out += std::to_string(layer.slots[s].index);
        }
        out += ')';
        if (li < spec.entangler_layers.size()) {
            out += "/Z(";
            const auto& pairs = spec.entangler_layers[li].pairs;
            for (std::size_t p = 0; p < pairs.size(); ++p) {
                if (p > 0) out += ' ';
                out += std::to_string(pairs[p].first) + '-' + std::to_string(pairs[p].second);
            }
            out += ')';
        }
    }
    return out;
}

namespace {

std::int64_t parse_field_int(std::string_view rec, std::string_view field, std::string_view key) {
    auto kv = split(field, '=');
    std::int64_t value = 0;
    if (kv.size() != 2 || kv[0] != key || !parse_int64(kv[1], value))
        throw std::invalid_argument("spec_from_string: expected " + std::string(key) + "=... in '" +
                                    std::string(rec) + "'");
    return value;
}

}  // namespace

CircuitSpec spec_from_string(std::string_view text) {
    auto fields = split(trim(text), ';');
    if (fields.size() != 7 || fields[0] != "v1")
        throw std::invalid_argument("spec_from_string: bad record '" + std::string(text) + "'");
    CircuitSpec spec;
    spec.num_qubits = static_cast<int>(parse_field_int(text, fields[1], "q"));
    spec.num_features = static_cast<int>(parse_field_int(text, fields[2], "nf"));
    spec.num_parameters = static_cast<int>(parse_field_int(text, fields[3], "np"));
    spec.repeat_features = parse_field_int(text, fields[4], "rep") != 0;
    auto seed_kv = split(fields[5], '=');
    std::uint64_t seed = 0;
    if (seed_kv.size() != 2 || seed_kv[0] != "seed" || !parse_uint64(seed_kv[1], seed))
        throw std::invalid_argument("spec_from_string: bad seed field");
    spec.seed = seed;

    auto layers_kv = split(fields[6], '=');
    if (layers_kv.size() != 2 || layers_kv[0] != "L")
        throw std::invalid_argument("spec_from_string: missing layer list");
    for (std::string_view part : split(layers_kv[1], '/')) {
        part = trim(part);
        if (part.size() < 3 || part[1] != '(' || part.back() != ')')
            throw std::invalid_argument("spec_from_string: bad layer '" + std::string(part) + "'");
        const char tag = part[0];
        const std::string_view body = part.substr(2, part.size() - 3);
        if (tag == 'Z') {
            EntanglerLayer e;
            for (std::string_view tok : split(body, ' ')) {
                auto ab = split(tok, '-');
                std::int64_t a = 0, b = 0;
                if (ab.size() != 2 || !parse_int64(ab[0], a) || !parse_int64(ab[1], b))
                    throw std::invalid_argument("spec_from_string: bad pair '" + std::string(tok) + "'");
                e.pairs.emplace_back(static_cast<int>(a), static_cast<int>(b));
            }
            spec.entangler_layers.push_back(std::move(e));
        } else if (tag == 'F' || tag == 'P') {
            RotationLayer layer;
            layer.kind = tag == 'F' ? RotationLayer::Kind::Feature : RotationLayer::Kind::Parameter;
            for (std::string_view tok : split(body, ' ')) {
                if (tok.size() < 2 || (tok[0] != 'w' && tok[0] != 't'))
                    throw std::invalid_argument("spec_from_string: bad slot '" + std::string(tok) + "'");
                std::int64_t idx = 0;
                if (!parse_int64(tok.substr(1), idx))
                    throw std::invalid_argument("spec_from_string: bad slot index");
                layer.slots.push_back({tok[0] == 'w' ? SlotRef::Kind::Feature : SlotRef::Kind::Parameter,
                                       static_cast<int>(idx)});
            }
            spec.rotation_layers.push_back(std::move(layer));
        } else {
            throw std::invalid_argument("spec_from_string: unknown layer tag");
        }
    }
    validate(spec);
    return spec;
}

}  // namespace vqc
