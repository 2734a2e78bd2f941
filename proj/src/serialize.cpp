#include "plantbench/serialize.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace plantbench {

using nlohmann::json;

std::string net_to_json(const MaskedMLP& net) {
    json j;
    j["arch"] = net.arch.widths;
    json layers = json::array();
    for (const Layer& layer : net.layers) {
        json jl;
        jl["w"] = layer.w;
        jl["b"] = layer.b;
        jl["w_mask"] = layer.w_mask;
        jl["b_mask"] = layer.b_mask;
        layers.push_back(std::move(jl));
    }
    j["layers"] = std::move(layers);
    return j.dump();
}

MaskedMLP net_from_json(const std::string& text) {
    json j = json::parse(text);
    MaskedMLP net;
    net.arch = Architecture(j.at("arch").get<std::vector<int>>());
    int l = 0;
    for (const json& jl : j.at("layers")) {
        Layer layer;
        layer.in = net.arch.widths[l];
        layer.out = net.arch.widths[l + 1];
        layer.w = jl.at("w").get<std::vector<double>>();
        layer.b = jl.at("b").get<std::vector<double>>();
        layer.w_mask = jl.at("w_mask").get<std::vector<std::uint8_t>>();
        layer.b_mask = jl.at("b_mask").get<std::vector<std::uint8_t>>();
        if (layer.w.size() != static_cast<std::size_t>(layer.in) * layer.out ||
            layer.b.size() != static_cast<std::size_t>(layer.out))
            throw std::invalid_argument("net_from_json: shape mismatch");
        net.layers.push_back(std::move(layer));
        ++l;
    }
    if (l != net.arch.depth()) throw std::invalid_argument("net_from_json: layer count mismatch");
    return net;
}

std::string ticket_to_json(const SparseTicket& t) {
    json j;
    j["arch"] = t.arch.widths;
    j["task"] = task_name(t.task);
    j["head"] = t.head == HeadKind::Linear ? "linear" : "softmax-logits";
    json w = json::array();
    for (const WeightEntry& e : t.weights) w.push_back({e.layer, e.row, e.col, e.value});
    json b = json::array();
    for (const BiasEntry& e : t.biases) b.push_back({e.layer, e.idx, e.value});
    j["weights"] = std::move(w);
    j["biases"] = std::move(b);
    return j.dump();
}

SparseTicket ticket_from_json(const std::string& text) {
    json j = json::parse(text);
    SparseTicket t;
    t.arch = Architecture(j.at("arch").get<std::vector<int>>());
    t.task = task_from_name(j.at("task").get<std::string>());
    t.head = j.at("head").get<std::string>() == "linear" ? HeadKind::Linear
                                                         : HeadKind::SoftmaxLogits;
    for (const json& e : j.at("weights"))
        t.weights.push_back({e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<int>(),
                             e.at(3).get<double>()});
    for (const json& e : j.at("biases"))
        t.biases.push_back({e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<double>()});
    t.validate();
    return t;
}

std::string report_to_json(const PlantReport& r) {
    json j;
    j["target_arch"] = r.target_arch.widths;
    j["mother_arch"] = r.mother_arch.widths;
    j["placement"] = r.placement;
    j["neuron_scales"] = r.neuron_scales;
    j["lambda_out"] = r.lambda_out;
    json w = json::array();
    for (const PlacedWeight& e : r.placed_weights) w.push_back({e.layer, e.row, e.col});
    json b = json::array();
    for (const PlacedBias& e : r.placed_biases) b.push_back({e.layer, e.idx});
    j["placed_weights"] = std::move(w);
    j["placed_biases"] = std::move(b);
    return j.dump();
}

PlantReport report_from_json(const std::string& text) {
    json j = json::parse(text);
    PlantReport r;
    r.target_arch = Architecture(j.at("target_arch").get<std::vector<int>>());
    r.mother_arch = Architecture(j.at("mother_arch").get<std::vector<int>>());
    r.placement = j.at("placement").get<std::vector<std::vector<int>>>();
    r.neuron_scales = j.at("neuron_scales").get<std::vector<std::vector<double>>>();
    r.lambda_out = j.at("lambda_out").get<std::vector<double>>();
    for (const json& e : j.at("placed_weights"))
        r.placed_weights.push_back({e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<int>()});
    for (const json& e : j.at("placed_biases"))
        r.placed_biases.push_back({e.at(0).get<int>(), e.at(1).get<int>()});
    return r;
}

std::string masks_to_json(const MaskSet& m) {
    json j;
    j["w"] = m.w;
    j["b"] = m.b;
    return j.dump();
}

MaskSet masks_from_json(const std::string& text) {
    json j = json::parse(text);
    MaskSet m;
    m.w = j.at("w").get<std::vector<std::vector<std::uint8_t>>>();
    m.b = j.at("b").get<std::vector<std::vector<std::uint8_t>>>();
    return m;
}

void save_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::string load_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace plantbench
